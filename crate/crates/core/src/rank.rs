//! Order ranks: exact, estimated through the oracle, and order validity.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde_json::{json, Value};

use crate::bits::BitString;
use crate::circuit::{
    build_rank_pairs, count_u64, truth_table, Circuit, CircuitBuilder, GateRef, OrderCircuit,
    TruthTable, DEFAULT_CAP,
};
use crate::counting::{amplification, approx_count, Driver};
use crate::error::{rejected, Error, Result};
use crate::oracle::SseOracle;
use crate::Rational;

/// `t_D / t_C`, kept as an exact fraction.
#[derive(Clone, Debug)]
pub struct RankEstimate {
    pair_count: BigUint,
    set_count: BigUint,
}

impl RankEstimate {
    pub fn new(pair_count: BigUint, set_count: BigUint) -> Result<Self> {
        if set_count.is_zero() {
            return Err(rejected("rank estimate denominator must be at least 1"));
        }
        Ok(RankEstimate { pair_count, set_count })
    }

    /// `t_D`
    pub fn numerator(&self) -> &BigUint {
        &self.pair_count
    }

    /// `t_C`
    pub fn denominator(&self) -> &BigUint {
        &self.set_count
    }

    pub fn is_zero(&self) -> bool {
        self.pair_count.is_zero()
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.pair_count.clone()), BigInt::from(self.set_count.clone()))
    }
}

impl PartialEq for RankEstimate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RankEstimate {}

impl PartialOrd for RankEstimate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RankEstimate {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.pair_count * &other.set_count).cmp(&(&other.pair_count * &self.set_count))
    }
}

/// `{x : E(x, alpha) = 1}` as an `n`-input circuit.
fn strictly_below(e: &OrderCircuit, alpha: &BitString) -> Circuit {
    let n = e.n();
    let mut b = CircuitBuilder::new(n);
    let mut wiring: Vec<GateRef> = (0..n).map(|j| b.input(j)).collect();
    wiring.extend(alpha.bits().iter().map(|&v| b.constant(v)));
    let out = b.embed(e.circuit(), &wiring);
    b.finish(out)
}

pub fn rank_exact_with_cap(e: &OrderCircuit, alpha: &BitString, cap: usize) -> Result<u64> {
    if alpha.len() != e.n() {
        return Err(rejected(format!("alpha has {} bits, order has n={}", alpha.len(), e.n())));
    }
    count_u64(&strictly_below(e, alpha), cap)
}

/// `|{x : x <_E alpha}|` by enumeration.
pub fn rank_exact(e: &OrderCircuit, alpha: &BitString) -> Result<u64> {
    rank_exact_with_cap(e, alpha, DEFAULT_CAP)
}

pub fn rank_set_exact_with_cap(e: &OrderCircuit, c: &Circuit, cap: usize) -> Result<Rational> {
    let n = e.n();
    if c.num_inputs() != n {
        return Err(rejected(format!("set circuit has {} inputs, order has n={n}", c.num_inputs())));
    }
    let members = truth_table(c, cap)?;
    let mut size = 0u64;
    let mut total = 0u64;
    for i in (0..1u64 << n).filter(|&i| members.get(i)) {
        size += 1;
        total += rank_exact_with_cap(e, &BitString::from_index(n, i), cap)?;
    }
    if size == 0 {
        return Err(Error::EmptySet("average rank of an empty set".into()));
    }
    Ok(Rational::new(total.into(), size.into()))
}

/// Average rank of the set accepted by `c`.
pub fn rank_set_exact(e: &OrderCircuit, c: &Circuit) -> Result<Rational> {
    rank_set_exact_with_cap(e, c, DEFAULT_CAP)
}

/// Estimates `rank(C)` within a factor `4^{1/k}`, `k = ceil(1/eps)`, using
/// approximate counts of `C` and of the rank-pair circuit `D`.
pub fn rank_estimate(
    c: &Arc<Circuit>,
    e: &OrderCircuit,
    eps: &Rational,
    oracle: &mut dyn SseOracle,
    driver: Driver,
) -> Result<RankEstimate> {
    let k = amplification(1, eps)?;
    let d = Arc::new(build_rank_pairs(c, e)?);
    let t_c = approx_count(c, k, oracle, driver)?.t;
    if t_c.is_zero() {
        return Err(Error::EmptySet("rank estimate of a set the oracle reports empty".into()));
    }
    let t_d = approx_count(&d, k, oracle, driver)?.t;
    RankEstimate::new(t_d, t_c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderVerdict {
    Valid,
    /// `x < y < x`; `x = y` reports a reflexive element.
    CounterexamplePair(BitString, BitString),
    /// `x < y < z < x`.
    CounterexampleTriple(BitString, BitString, BitString),
    /// `x != y` with neither `x < y` nor `y < x`.
    NonTotal(BitString, BitString),
}

impl OrderVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, OrderVerdict::Valid)
    }

    /// Re-evaluates the witness against the circuit.
    pub fn confirm(&self, e: &OrderCircuit) -> Result<bool> {
        Ok(match self {
            OrderVerdict::Valid => true,
            OrderVerdict::CounterexamplePair(x, y) => e.less(x, y)? && e.less(y, x)?,
            OrderVerdict::CounterexampleTriple(x, y, z) => {
                e.less(x, y)? && e.less(y, z)? && e.less(z, x)?
            }
            OrderVerdict::NonTotal(x, y) => x != y && !e.less(x, y)? && !e.less(y, x)?,
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            OrderVerdict::Valid => json!({"verdict": "VALID"}),
            OrderVerdict::CounterexamplePair(x, y) => {
                json!({"verdict": "COUNTEREXAMPLE", "pair": [x, y]})
            }
            OrderVerdict::CounterexampleTriple(x, y, z) => {
                json!({"verdict": "COUNTEREXAMPLE", "triple": [x, y, z]})
            }
            OrderVerdict::NonTotal(x, y) => json!({"verdict": "NON_TOTAL", "pair": [x, y]}),
        }
    }
}

/// The relation of an order circuit, tabulated over all `4^n` pairs.
#[derive(Clone, Debug)]
pub struct OrderTable {
    n: usize,
    table: TruthTable,
}

impl OrderTable {
    pub fn new(e: &OrderCircuit, cap: usize) -> Result<Self> {
        Ok(OrderTable { n: e.n(), table: truth_table(e.circuit(), cap)? })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `x <_E y`, by enumeration index.
    pub fn less(&self, x: u64, y: u64) -> bool {
        self.table.get(x | (y << self.n))
    }

    pub fn rank(&self, y: u64) -> u64 {
        self.table.count_range(y << self.n, 1 << self.n)
    }

    pub fn ranks(&self) -> Vec<u64> {
        (0..1u64 << self.n).map(|y| self.rank(y)).collect()
    }
}

pub fn check_order_with_cap(e: &OrderCircuit, cap: usize) -> Result<OrderVerdict> {
    let n = e.n();
    let table = OrderTable::new(e, cap)?;
    let size = 1u64 << n;
    let el = |i: u64| BitString::from_index(n, i);

    if let Some(x) = (0..size).find(|&x| table.less(x, x)) {
        return Ok(OrderVerdict::CounterexamplePair(el(x), el(x)));
    }
    for x in 0..size {
        for y in x + 1..size {
            match (table.less(x, y), table.less(y, x)) {
                (true, true) => return Ok(OrderVerdict::CounterexamplePair(el(x), el(y))),
                (false, false) => return Ok(OrderVerdict::NonTotal(el(x), el(y))),
                _ => {}
            }
        }
    }

    // A tournament is a linear order iff its scores are 0..2^n - 1.
    let ranks = table.ranks();
    let mut holder: Vec<Option<u64>> = vec![None; size as usize];
    let mut collision = None;
    for (y, &r) in ranks.iter().enumerate() {
        match holder[r as usize] {
            Some(other) => {
                collision = Some((other, y as u64));
                break;
            }
            None => holder[r as usize] = Some(y as u64),
        }
    }
    let Some((p, q)) = collision else {
        return Ok(OrderVerdict::Valid);
    };
    // With a < b and rank(a) = rank(b), below(a) has an element z outside
    // below(b) + {a}; then b < z, closing z < a < b < z.
    let (a, b) = if table.less(p, q) { (p, q) } else { (q, p) };
    let z = (0..size)
        .find(|&z| table.less(z, a) && table.less(b, z))
        .ok_or_else(|| Error::Defect("equal scores without a 3-cycle".into()))?;
    Ok(OrderVerdict::CounterexampleTriple(el(z), el(a), el(b)))
}

/// Exact strict-linear-order check with a confirmable witness on failure.
pub fn check_order(e: &OrderCircuit) -> Result<OrderVerdict> {
    check_order_with_cap(e, DEFAULT_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_downset;
    use crate::generators::{lex_order, xor_order};
    use crate::oracle::{Oracle, OracleModel};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn lex_ranks() {
        let e = lex_order(2);
        assert_eq!(rank_exact(&e, &bs("00")).unwrap(), 0);
        assert_eq!(rank_exact(&e, &bs("01")).unwrap(), 1);
        assert_eq!(rank_exact(&e, &bs("10")).unwrap(), 2);
        assert_eq!(rank_exact(&e, &bs("11")).unwrap(), 3);
    }

    #[test]
    fn xor_key_has_rank_zero() {
        let key = bs("101");
        assert_eq!(rank_exact(&xor_order(&key), &key).unwrap(), 0);
    }

    #[test]
    fn set_ranks() {
        let e = lex_order(2);
        let single = build_downset(&e, &bs("00")).unwrap();
        assert_eq!(rank_set_exact(&e, &single).unwrap(), Rational::from_integer(0.into()));
        // {10, 11}: the first input fixed to 1.
        let mut b = CircuitBuilder::new(2);
        let x0 = b.input(0);
        let upper = b.finish(x0);
        assert_eq!(rank_set_exact(&e, &upper).unwrap(), Rational::new(5.into(), 2.into()));
        assert!(matches!(
            rank_set_exact(&e, &Circuit::constant(2, false)),
            Err(Error::EmptySet(_))
        ));
    }

    #[test]
    fn downset_average_is_half_rank() {
        for n in 1..=4 {
            let e = lex_order(n);
            for alpha in BitString::all(n) {
                let r = rank_exact(&e, &alpha).unwrap();
                let avg = rank_set_exact(&e, &build_downset(&e, &alpha).unwrap()).unwrap();
                assert_eq!(avg, Rational::new(r.into(), 2.into()), "alpha={alpha}");
            }
        }
    }

    #[test]
    fn estimate_of_minimum_is_zero() {
        let e = lex_order(2);
        let c = Arc::new(build_downset(&e, &bs("00")).unwrap());
        let eps = Rational::new(1.into(), 2.into());
        let est =
            rank_estimate(&c, &e, &eps, &mut Oracle::new(&OracleModel::Threshold), Driver::Parallel)
                .unwrap();
        assert!(est.is_zero());
    }

    #[test]
    fn estimate_of_top_element() {
        // C = {11}: t_C = 1, count(D) = 3, tensor count 9, boundary 4, t_D = 4.
        let e = lex_order(2);
        let mut b = CircuitBuilder::new(2);
        let (x0, x1) = (b.input(0), b.input(1));
        let out = b.and(x0, x1);
        let c = Arc::new(b.finish(out));
        let eps = Rational::new(1.into(), 2.into());
        for driver in Driver::ALL {
            let est =
                rank_estimate(&c, &e, &eps, &mut Oracle::new(&OracleModel::Threshold), driver)
                    .unwrap();
            assert_eq!(est.numerator(), &BigUint::from(4u32));
            assert_eq!(est.denominator(), &BigUint::from(1u32));
        }
    }

    #[test]
    fn estimates_order_by_value() {
        let a = RankEstimate::new(1u32.into(), 2u32.into()).unwrap();
        let b = RankEstimate::new(2u32.into(), 4u32.into()).unwrap();
        let c = RankEstimate::new(5u32.into(), 2u32.into()).unwrap();
        assert_eq!(a, b);
        assert!(a < c);
        assert!(RankEstimate::new(1u32.into(), 0u32.into()).is_err());
    }

    #[test]
    fn lex_is_valid() {
        for n in 1..=5 {
            assert_eq!(check_order(&lex_order(n)).unwrap(), OrderVerdict::Valid);
        }
    }

    #[test]
    fn empty_relation_is_non_total() {
        let e = OrderCircuit::new(2, Circuit::constant(4, false)).unwrap();
        let v = check_order(&e).unwrap();
        assert!(matches!(v, OrderVerdict::NonTotal(..)));
        assert!(v.confirm(&e).unwrap());
        assert_eq!(v.to_json()["verdict"], "NON_TOTAL");
    }

    #[test]
    fn full_relation_is_reflexive() {
        let e = OrderCircuit::new(2, Circuit::constant(4, true)).unwrap();
        let v = check_order(&e).unwrap();
        assert!(matches!(&v, OrderVerdict::CounterexamplePair(x, y) if x == y));
        assert!(v.confirm(&e).unwrap());
    }
}
