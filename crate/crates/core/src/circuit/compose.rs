use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Pow;

use super::{count_exact_with_cap, Circuit, CircuitBuilder, GateRef, OrderCircuit};
use crate::bits::BitString;
use crate::error::{rejected, Result};

/// `base^{⊗k}`: the conjunction of `k` copies of `base` on disjoint inputs.
///
/// Never expanded for counting; the count is `count(base)^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TensorPower {
    base: Arc<Circuit>,
    k: u32,
}

impl TensorPower {
    pub fn new(base: impl Into<Arc<Circuit>>, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(rejected("tensor power needs k >= 1"));
        }
        Ok(TensorPower { base: base.into(), k })
    }

    pub fn base(&self) -> &Arc<Circuit> {
        &self.base
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Logical arity `k * base.num_inputs`.
    pub fn num_inputs(&self) -> usize {
        self.k as usize * self.base.num_inputs()
    }

    pub fn count_exact(&self, cap: usize) -> Result<BigUint> {
        Ok(count_exact_with_cap(&self.base, cap)?.pow(self.k))
    }

    /// The explicit product circuit. Copy `i` reads inputs `i*n .. (i+1)*n`.
    pub fn expand(&self) -> Circuit {
        let n = self.base.num_inputs();
        let mut b = CircuitBuilder::new(self.num_inputs());
        let outs: Vec<GateRef> = (0..self.k as usize)
            .map(|i| {
                let wiring: Vec<GateRef> = (0..n).map(|j| b.input(i * n + j)).collect();
                b.embed(&self.base, &wiring)
            })
            .collect();
        let out = b.and_all(&outs);
        b.finish(out)
    }
}

/// `x = value` as a balanced AND tree of per-bit XNORs.
pub fn equals_constant(b: &mut CircuitBuilder, x: &[GateRef], value: &BitString) -> GateRef {
    assert_eq!(x.len(), value.len());
    let bits: Vec<GateRef> = x
        .iter()
        .zip(value.bits())
        .map(|(&xi, &vi)| {
            let c = b.constant(vi);
            b.xnor(xi, c)
        })
        .collect();
    b.and_all(&bits)
}

/// `C(x) := E(x, alpha) OR x = alpha`, the set of elements at or below `alpha`.
pub fn build_downset(e: &OrderCircuit, alpha: &BitString) -> Result<Circuit> {
    let n = e.n();
    if alpha.len() != n {
        return Err(rejected(format!("alpha has {} bits, order has n={n}", alpha.len())));
    }
    let mut b = CircuitBuilder::new(n);
    let x: Vec<GateRef> = (0..n).map(|j| b.input(j)).collect();
    let mut wiring = x.clone();
    wiring.extend(alpha.bits().iter().map(|&v| b.constant(v)));
    let below = b.embed(e.circuit(), &wiring);
    let eq = equals_constant(&mut b, &x, alpha);
    let out = b.or(below, eq);
    Ok(b.finish(out))
}

/// `D(x, y) := C(y) AND E(x, y)`; its count is `|C| * rank(C)`.
pub fn build_rank_pairs(c: &Circuit, e: &OrderCircuit) -> Result<Circuit> {
    let n = e.n();
    if c.num_inputs() != n {
        return Err(rejected(format!(
            "set circuit has {} inputs, order has n={n}",
            c.num_inputs()
        )));
    }
    let mut b = CircuitBuilder::new(2 * n);
    let all: Vec<GateRef> = (0..2 * n).map(|j| b.input(j)).collect();
    let in_set = b.embed(c, &all[n..]);
    let below = b.embed(e.circuit(), &all);
    let out = b.and(in_set, below);
    Ok(b.finish(out))
}
