//! Minimum finding for order circuits with an SSE oracle.
//!
//! [`back`] maps `alpha` to `beta` with `rank(beta) <= rank(alpha)/sqrt 2`
//! by fixing one coordinate at a time inside the down-set of `alpha`, always
//! keeping the half with the smaller estimated average rank. [`solve`]
//! iterates it from `1^n` to the fixed point, which is the minimum.
//!
//! The solver never consults exact counts: emptiness is the query `(C_b, 1)`
//! and average ranks come from [`rank_estimate`]. Exact ranks are used only
//! for the optional trace fields and the audit.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Pow};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bits::BitString;
use crate::circuit::{build_downset, truth_table, Circuit, OrderCircuit, DEFAULT_CAP};
use crate::counting::Driver;
use crate::error::{rejected, Error, Result};
use crate::oracle::{CountingOracle, QueryTarget, SseOracle, SseQuery};
use crate::rank::{check_order_with_cap, rank_estimate, OrderTable, OrderVerdict};
use crate::Rational;

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub driver: Driver,
    /// Overrides the default `1/(8n)`.
    pub eps: Option<Rational>,
    /// Fill `rank_alpha` / `rank_beta` in the trace.
    pub record_ranks: bool,
    /// Check the per-coordinate rank bound of `back` with exact ranks.
    pub audit: bool,
    pub cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { driver: Driver::Parallel, eps: None, record_ranks: false, audit: false, cap: DEFAULT_CAP }
    }
}

impl SolverConfig {
    pub fn with_driver(driver: Driver) -> Self {
        SolverConfig { driver, ..Self::default() }
    }

    pub fn eps_for(&self, n: usize) -> Rational {
        self.eps.clone().unwrap_or_else(|| Rational::new(1.into(), (8 * n as u64).into()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackStep {
    pub beta: BitString,
    pub queries: u64,
    /// Coordinates decided by an emptiness answer rather than a comparison.
    pub forced: Vec<bool>,
}

fn exact_avg_rank(table: &OrderTable, c: &Circuit, cap: usize) -> Result<(u64, u64)> {
    let members = truth_table(c, cap)?;
    let (mut sum, mut size) = (0u64, 0u64);
    for x in (0..1u64 << table.n()).filter(|&x| members.get(x)) {
        sum += table.rank(x);
        size += 1;
    }
    Ok((sum, size))
}

/// `rank(C) <= 4^{2 eps i} rank(alpha) / 2` with `rank(C) = sum / size` and
/// `eps = p/q`, raised to the `q`-th power: `(2 sum)^q <= 2^{4pi} (rank_alpha size)^q`.
fn audit_bound(sum: u64, size: u64, rank_alpha: u64, eps: &Rational, i: usize) -> bool {
    let p = eps.numer().to_biguint().expect("positive eps");
    let q = eps.denom().to_biguint().expect("positive eps");
    let q: u32 = q.try_into().expect("eps denominator fits u32");
    let shift: u64 = (p * BigUint::from(4 * i as u64)).try_into().expect("shift fits u64");
    let lhs = BigUint::from(2 * sum).pow(q);
    let rhs = (BigUint::one() << shift) * BigUint::from(rank_alpha * size).pow(q);
    lhs <= rhs
}

/// One rank-contracting step from `alpha`.
pub fn back(
    e: &OrderCircuit,
    alpha: &BitString,
    oracle: &mut dyn SseOracle,
    config: &SolverConfig,
) -> Result<BackStep> {
    let table = if config.audit { Some(OrderTable::new(e, config.cap)?) } else { None };
    back_inner(e, alpha, oracle, config, table.as_ref())
}

fn back_inner(
    e: &OrderCircuit,
    alpha: &BitString,
    oracle: &mut dyn SseOracle,
    config: &SolverConfig,
    audit: Option<&OrderTable>,
) -> Result<BackStep> {
    let n = e.n();
    if alpha.len() != n {
        return Err(rejected(format!("alpha has {} bits, order has n={n}", alpha.len())));
    }
    let eps = config.eps_for(n);
    let mut oracle = CountingOracle::new(oracle);
    let mut c = build_downset(e, alpha)?;
    let mut beta = BitString::zeros(n);
    let mut forced = Vec::with_capacity(n);
    let rank_alpha = audit.map(|t| t.rank(alpha.to_index()));

    for i in 0..n {
        let halves = [Arc::new(c.restrict(i, false)?), Arc::new(c.restrict(i, true)?)];
        let nonempty = [
            oracle.answer(&SseQuery::pow2(QueryTarget::plain(halves[0].clone()), 0))?,
            oracle.answer(&SseQuery::pow2(QueryTarget::plain(halves[1].clone()), 0))?,
        ];
        let bit = match nonempty {
            [false, false] => {
                return Err(Error::Defect(format!(
                    "both halves empty at coordinate {i} of the down-set of {alpha}"
                )))
            }
            [false, true] => true,
            [true, false] => false,
            [true, true] => {
                let r0 = rank_estimate(&halves[0], e, &eps, &mut oracle, config.driver)?;
                let r1 = rank_estimate(&halves[1], e, &eps, &mut oracle, config.driver)?;
                r1 < r0
            }
        };
        forced.push(nonempty != [true, true]);
        beta.set(i, bit);
        let [h0, h1] = halves;
        c = Arc::try_unwrap(if bit { h1 } else { h0 }).unwrap_or_else(|a| (*a).clone());

        if let (Some(table), Some(rank_alpha)) = (audit, rank_alpha) {
            let (sum, size) = exact_avg_rank(table, &c, config.cap)?;
            if size == 0 || !audit_bound(sum, size, rank_alpha, &eps, i + 1) {
                return Err(Error::Defect(format!(
                    "rank bound violated after coordinate {i}: rank(C) = {sum}/{size}, rank(alpha) = {rank_alpha}"
                )));
            }
        }
    }
    Ok(BackStep { beta, queries: oracle.queries(), forced })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub alpha: BitString,
    pub beta: BitString,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_alpha: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_beta: Option<u64>,
    pub queries: u64,
    pub chosen_bits: BitString,
    pub forced: BitString,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveTrace {
    pub n: usize,
    pub eps: String,
    pub driver: String,
    pub iterations: Vec<IterationRecord>,
    pub total_queries: u64,
    pub back_calls: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Minimum(BitString),
    Counterexample(OrderVerdict),
}

impl SolveResult {
    pub fn minimum(&self) -> Option<&BitString> {
        match self {
            SolveResult::Minimum(m) => Some(m),
            SolveResult::Counterexample(_) => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SolveResult::Minimum(m) => json!({"argmin": m}),
            SolveResult::Counterexample(v) => v.to_json(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub result: SolveResult,
    pub trace: SolveTrace,
}

impl SolveOutcome {
    /// The trace document: `{"schema":1, [model], n, eps, driver, iterations,
    /// total_queries, back_calls, result}`.
    pub fn trace_json(&self, model: Option<&str>) -> Value {
        let mut v = json!({"schema": 1});
        if let Some(m) = model {
            v["model"] = json!(m);
        }
        if let (Value::Object(dst), Value::Object(src)) =
            (&mut v, serde_json::to_value(&self.trace).expect("trace serializes"))
        {
            dst.extend(src);
        }
        v["result"] = self.result.to_json();
        v
    }
}

/// Back-call budget: `2n`, plus the initialisation handshake and one spare.
pub fn iteration_budget(n: usize) -> usize {
    2 * n + 2
}

pub fn solve(e: &OrderCircuit, oracle: &mut dyn SseOracle, config: &SolverConfig) -> Result<SolveOutcome> {
    let n = e.n();
    let mut trace = SolveTrace {
        n,
        eps: config.eps_for(n).to_string(),
        driver: config.driver.to_string(),
        iterations: Vec::new(),
        total_queries: 0,
        back_calls: 0,
    };
    let verdict = check_order_with_cap(e, config.cap)?;
    if !verdict.is_valid() {
        return Ok(SolveOutcome { result: SolveResult::Counterexample(verdict), trace });
    }
    let table = if config.record_ranks || config.audit {
        Some(OrderTable::new(e, config.cap)?)
    } else {
        None
    };
    let audit = if config.audit { table.as_ref() } else { None };
    let rank_of = |s: &BitString| table.as_ref().filter(|_| config.record_ranks).map(|t| t.rank(s.to_index()));

    let mut alpha = BitString::zeros(n);
    let mut beta = BitString::ones(n);
    while alpha != beta {
        if trace.back_calls == iteration_budget(n) {
            return Err(Error::Defect(format!(
                "no fixed point after {} back calls",
                trace.back_calls
            )));
        }
        alpha = beta;
        let step = back_inner(e, &alpha, oracle, config, audit)?;
        trace.back_calls += 1;
        trace.total_queries += step.queries;
        trace.iterations.push(IterationRecord {
            alpha: alpha.clone(),
            beta: step.beta.clone(),
            rank_alpha: rank_of(&alpha),
            rank_beta: rank_of(&step.beta),
            queries: step.queries,
            chosen_bits: step.beta.clone(),
            forced: BitString::new(step.forced),
        });
        beta = step.beta;
    }
    Ok(SolveOutcome { result: SolveResult::Minimum(alpha), trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{lex_order, xor_order};
    use crate::oracle::{Oracle, OracleModel};
    use crate::rank::rank_exact;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn back_from_top_of_lex2() {
        let e = lex_order(2);
        let cfg = SolverConfig { audit: true, ..SolverConfig::default() };
        let step = back(&e, &bs("11"), &mut Oracle::new(&OracleModel::Threshold), &cfg).unwrap();
        assert_eq!(step.beta, bs("00"));
        assert_eq!(step.forced, vec![false, false]);
    }

    #[test]
    fn back_fixes_the_minimum() {
        let key = bs("011");
        let e = xor_order(&key);
        for driver in Driver::ALL {
            let step = back(&e, &key, &mut Oracle::new(&OracleModel::Threshold), &SolverConfig::with_driver(driver))
                .unwrap();
            assert_eq!(step.beta, key);
            assert!(step.forced.iter().all(|&f| f));
        }
    }

    #[test]
    fn back_contracts_on_lex3() {
        let e = lex_order(3);
        let cfg = SolverConfig { audit: true, ..SolverConfig::default() };
        for alpha in BitString::all(3) {
            let beta = back(&e, &alpha, &mut Oracle::new(&OracleModel::Threshold), &cfg).unwrap().beta;
            let (ra, rb) = (rank_exact(&e, &alpha).unwrap(), rank_exact(&e, &beta).unwrap());
            assert!(2 * rb * rb <= ra * ra, "{alpha} -> {beta}");
        }
    }

    #[test]
    fn solve_xor_order() {
        let key = bs("101");
        let e = xor_order(&key);
        let out = solve(&e, &mut Oracle::new(&OracleModel::Threshold), &SolverConfig::default()).unwrap();
        assert_eq!(out.result, SolveResult::Minimum(key));
        assert!(out.trace.back_calls <= 6);
        assert_eq!(out.trace.eps, "1/24");
        assert_eq!(out.trace.iterations.last().unwrap().alpha, out.trace.iterations.last().unwrap().beta);
    }

    #[test]
    fn solve_reports_defects_without_searching() {
        let e = OrderCircuit::new(2, Circuit::constant(4, false)).unwrap();
        let mut o = Oracle::new(&OracleModel::Threshold);
        let out = solve(&e, &mut o, &SolverConfig::default()).unwrap();
        assert!(matches!(out.result, SolveResult::Counterexample(OrderVerdict::NonTotal(..))));
        assert_eq!(o.queries_made(), 0);
    }

    #[test]
    fn audit_bound_arithmetic() {
        let eps = Rational::new(1.into(), 16.into());
        // rank(C) = rank(alpha)/2 exactly satisfies the bound at every i.
        assert!(audit_bound(3, 2, 3, &eps, 0));
        assert!(!audit_bound(4, 2, 3, &eps, 0));
        // 4^{2 * 16/16} = 16: rank(C) = 24 vs rank(alpha)/2 = 1.5.
        assert!(audit_bound(24, 1, 3, &eps, 16));
        assert!(!audit_bound(25, 1, 3, &eps, 16));
    }

    #[test]
    fn trace_json_shape() {
        let e = lex_order(2);
        let cfg = SolverConfig { record_ranks: true, ..SolverConfig::default() };
        let out = solve(&e, &mut Oracle::new(&OracleModel::Threshold), &cfg).unwrap();
        let v = out.trace_json(Some("threshold"));
        assert_eq!(v["schema"], 1);
        assert_eq!(v["result"]["argmin"], "00");
        assert_eq!(v["iterations"][0]["alpha"], "11");
        assert_eq!(v["iterations"][0]["rank_alpha"], 3);
        assert!(v["total_queries"].as_u64().unwrap() > 0);
    }
}
