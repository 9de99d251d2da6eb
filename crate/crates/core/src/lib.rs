//! Oracle-based search for the linear ordering principle at desk scale.
//!
//! The crate is organised bottom-up:
//!
//! * [`circuit`]: Boolean circuit IR, exact counting, tensor powers, and the
//!   down-set / rank-pair constructions over an order circuit.
//! * [`oracle`]: set-size-estimation promise semantics and the oracle models
//!   (threshold, adversarial loose access, memoizing) plus log replay.
//! * [`counting`]: deterministic approximate counting through the oracle.
//! * [`rank`]: exact and estimated order ranks, order validity checking.
//! * [`lop`]: the rank-contracting `back` step and the minimum solver.
//! * [`sym_alt`]: certificate merging for input-oblivious symmetric alternation.
//! * [`generators`]: order instances with known minima or planted defects.

pub mod bits;
pub mod circuit;
pub mod counting;
pub mod error;
pub mod generators;
pub mod lop;
pub mod oracle;
pub mod rank;
pub mod sym_alt;

pub use bits::BitString;
pub use circuit::{
    build_downset, build_rank_pairs, count_exact, count_exact_with_cap, Circuit,
    CircuitBuilder, Gate, GateRef, OrderCircuit, TensorPower, DEFAULT_CAP,
};
pub use counting::{approx_count, approx_count_eps, floor_pow2_root, ApproxCountResult, Driver};
pub use error::{Error, Result};
pub use generators::{generate, GroundTruth, Instance, OrderKind, OrderSpec};
pub use lop::{back, solve, SolveOutcome, SolveResult, SolveTrace, SolverConfig};
pub use oracle::{
    classify, reconstruct_consistent_language, ConsistentLanguage, Oracle, OracleModel, Policy,
    PromiseClass, QueryLog, SseOracle, SseQuery,
};
pub use sym_alt::{
    combined_verifier, hidden_prefix_problem, merge_bit, merged_answer, BinarySearchMachine,
    CertificateVector, HiddenPrefix, OracleMachine, PromiseGroundTruth, PromiseVerifier,
};
pub use rank::{check_order, rank_estimate, rank_exact, rank_set_exact, OrderVerdict, RankEstimate};

/// Exact rationals, used for eps, average ranks, and estimate comparisons.
pub type Rational = num_rational::BigRational;
