use num_bigint::BigUint;

use super::Circuit;
use crate::error::{Error, Result};

/// Default brute-force arity limit (2^24 evaluations, 2^18 words).
pub const DEFAULT_CAP: usize = 24;

const LANE_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

fn check_cap(arity: usize, cap: usize) -> Result<()> {
    if arity > cap || arity > 40 {
        return Err(Error::Capacity { arity, limit: cap.min(40) });
    }
    Ok(())
}

/// Calls `f(block, word)` for every 64-assignment block; lane `l` of block
/// `b` is the assignment with enumeration index `64 * b + l`. Lanes past
/// `2^n` are masked off.
fn for_each_block(c: &Circuit, mut f: impl FnMut(usize, u64)) {
    let n = c.num_inputs();
    let blocks = if n <= 6 { 1usize } else { 1usize << (n - 6) };
    let mask = if n >= 6 { !0u64 } else { (1u64 << (1u32 << n)) - 1 };
    let mut inputs: Vec<u64> = (0..n)
        .map(|j| if j < 6 { LANE_PATTERNS[j] } else { 0 })
        .collect();
    let mut scratch = Vec::with_capacity(c.gates().len());
    for block in 0..blocks {
        for (j, word) in inputs.iter_mut().enumerate().skip(6) {
            *word = if (block >> (j - 6)) & 1 == 1 { !0 } else { 0 };
        }
        f(block, c.eval_words(&inputs, &mut scratch) & mask);
    }
}

/// Number of satisfying assignments, as a machine integer.
pub fn count_u64(c: &Circuit, cap: usize) -> Result<u64> {
    check_cap(c.num_inputs(), cap)?;
    let mut total = 0u64;
    for_each_block(c, |_, w| total += w.count_ones() as u64);
    Ok(total)
}

pub fn count_exact_with_cap(c: &Circuit, cap: usize) -> Result<BigUint> {
    count_u64(c, cap).map(BigUint::from)
}

/// Model count by exhaustive enumeration under [`DEFAULT_CAP`].
pub fn count_exact(c: &Circuit) -> Result<BigUint> {
    count_exact_with_cap(c, DEFAULT_CAP)
}

/// The full truth table of a circuit, one bit per enumeration index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    num_inputs: usize,
    words: Vec<u64>,
}

impl TruthTable {
    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn get(&self, index: u64) -> bool {
        (self.words[(index >> 6) as usize] >> (index & 63)) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Popcount of indices in `[start, start + len)`, both multiples of 64
    /// or `len < 64` inside one word.
    pub fn count_range(&self, start: u64, len: u64) -> u64 {
        if len < 64 {
            let w = self.words[(start >> 6) as usize] >> (start & 63);
            return (w & ((1u64 << len) - 1)).count_ones() as u64;
        }
        let (a, b) = ((start >> 6) as usize, ((start + len) >> 6) as usize);
        self.words[a..b].iter().map(|w| w.count_ones() as u64).sum()
    }
}

pub fn truth_table(c: &Circuit, cap: usize) -> Result<TruthTable> {
    check_cap(c.num_inputs(), cap)?;
    let mut words = Vec::new();
    for_each_block(c, |_, w| words.push(w));
    Ok(TruthTable { num_inputs: c.num_inputs(), words })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::circuit::CircuitBuilder;

    #[test]
    fn constant_zero_counts_zero() {
        assert_eq!(count_u64(&Circuit::constant(3, false), DEFAULT_CAP).unwrap(), 0);
    }

    #[test]
    fn single_variable_counts_half() {
        let mut b = CircuitBuilder::new(3);
        let x0 = b.input(0);
        assert_eq!(count_u64(&b.finish(x0), DEFAULT_CAP).unwrap(), 4);
    }

    #[test]
    fn high_inputs_use_block_index() {
        // x7 AND NOT x0 over 9 inputs: a quarter of 512.
        let mut b = CircuitBuilder::new(9);
        let (x7, x0) = (b.input(7), b.input(0));
        let n0 = b.not(x0);
        let out = b.and(x7, n0);
        let c = b.finish(out);
        assert_eq!(count_u64(&c, DEFAULT_CAP).unwrap(), 128);
        let table = truth_table(&c, DEFAULT_CAP).unwrap();
        for i in 0..512 {
            assert_eq!(table.get(i), c.eval_bits(&BitString::from_index(9, i)).unwrap());
        }
    }

    #[test]
    fn zero_input_circuit() {
        assert_eq!(count_u64(&Circuit::constant(0, true), DEFAULT_CAP).unwrap(), 1);
    }

    #[test]
    fn cap_is_a_hard_error_naming_the_limit() {
        let c = Circuit::constant(25, true);
        match count_exact(&c) {
            Err(Error::Capacity { arity: 25, limit: 24 }) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
        assert!(count_u64(&Circuit::constant(5, true), 4).is_err());
    }
}
