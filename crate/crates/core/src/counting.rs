//! Deterministic approximate counting with an SSE oracle.
//!
//! For `Ĉ = C^{⊗k}` over `n` base inputs, find an exponent `i` in
//! `1..=nk+1` whose query `(Ĉ, 2^i)` was answered no while `(Ĉ, 2^{i-1})`
//! was answered yes, and return `t = ⌊2^{i/k}⌋`. The two recorded answers
//! alone give `#C <= t` and `t^k <= 4 (#C)^k`, whatever the oracle does on
//! gap queries.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::circuit::{Circuit, TensorPower};
use crate::error::{rejected, Error, Result};
use crate::oracle::{QueryTarget, SseOracle, SseQuery};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Driver {
    /// All `nk + 1` thresholds queried non-adaptively; smallest no wins.
    Parallel,
    /// Binary search over the exponent, `O(log nk)` adaptive queries.
    Binary,
}

impl Driver {
    pub const ALL: [Driver; 2] = [Driver::Parallel, Driver::Binary];
}

impl fmt::Display for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Driver::Parallel => "parallel",
            Driver::Binary => "binary",
        })
    }
}

impl FromStr for Driver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallel" => Ok(Driver::Parallel),
            "binary" => Ok(Driver::Binary),
            other => Err(rejected(format!("unknown driver {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxCountResult {
    pub t: BigUint,
    pub k: u32,
    /// The exponent `i`; `None` when the emptiness probe said no.
    pub boundary: Option<u64>,
    pub queries_made: u64,
}

/// Largest `t` with `t^k <= 2^i`.
pub fn floor_pow2_root(i: u64, k: u32) -> BigUint {
    assert!(k >= 1, "root degree must be positive");
    (BigUint::one() << i).nth_root(k)
}

pub fn approx_count(
    c: &Arc<Circuit>,
    k: u32,
    oracle: &mut dyn SseOracle,
    driver: Driver,
) -> Result<ApproxCountResult> {
    if k == 0 {
        return Err(rejected("amplification k must be at least 1"));
    }
    let mut queries = 0u64;
    let mut ask = |q: SseQuery| {
        queries += 1;
        oracle.answer(&q)
    };

    let plain = QueryTarget::plain(c.clone());
    if !ask(SseQuery::pow2(plain, 0))? {
        return Ok(ApproxCountResult { t: BigUint::zero(), k, boundary: None, queries_made: 1 });
    }

    let hat = QueryTarget::tensor(TensorPower::new(c.clone(), k)?);
    let top = c.num_inputs() as u64 * k as u64 + 1;
    let boundary = match driver {
        Driver::Parallel => {
            let answers: Vec<bool> = (1..=top)
                .map(|j| ask(SseQuery::pow2(hat.clone(), j)))
                .collect::<Result<_>>()?;
            answers.iter().position(|&a| !a).map(|p| p as u64 + 1)
        }
        Driver::Binary => {
            // lo: answered yes (0 stands for the emptiness probe); hi: answered no.
            if ask(SseQuery::pow2(hat.clone(), top))? {
                None
            } else {
                let (mut lo, mut hi) = (0u64, top);
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if ask(SseQuery::pow2(hat.clone(), mid))? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(hi)
            }
        }
    };
    let i = boundary.ok_or_else(|| {
        Error::Defect(format!("oracle answered yes to (C^⊗{k}, 2^{top}), a NO instance"))
    })?;
    Ok(ApproxCountResult { t: floor_pow2_root(i, k), k, boundary: Some(i), queries_made: queries })
}

/// `ceil(numerator / eps)` as an amplification power.
pub(crate) fn amplification(numerator: u32, eps: &Rational) -> Result<u32> {
    if *eps <= Rational::zero() {
        return Err(rejected(format!("eps must be positive, got {eps}")));
    }
    (Rational::from_integer(numerator.into()) / eps)
        .ceil()
        .to_integer()
        .to_u32()
        .ok_or_else(|| rejected(format!("eps {eps} needs an amplification above u32::MAX")))
}

/// [`approx_count`] with `k = ceil(3 / eps)`, so `t <= 4^{eps/3} #C`.
pub fn approx_count_eps(
    c: &Arc<Circuit>,
    eps: &Rational,
    oracle: &mut dyn SseOracle,
    driver: Driver,
) -> Result<ApproxCountResult> {
    approx_count(c, amplification(3, eps)?, oracle, driver)
}
