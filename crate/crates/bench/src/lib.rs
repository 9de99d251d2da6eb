//! Fixtures shared by the criterion benches.

use std::sync::Arc;

use loplab_core::generators::{random_circuit, valid_corpus};
use loplab_core::{Circuit, OrderCircuit};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A seeded random circuit with `4n` gates.
pub fn circuit(n: usize, seed: u64) -> Arc<Circuit> {
    Arc::new(random_circuit(&mut ChaCha8Rng::seed_from_u64(seed), n, 4 * n))
}

/// The first valid corpus order of size `n`.
pub fn order(n: usize, seed: u64) -> OrderCircuit {
    valid_corpus(n, 1, seed).expect("valid corpus").remove(0).order
}
