//! Certificate merging for input-oblivious symmetric alternation.
//!
//! Given an oracle machine `M` that decides a language with loose access to
//! a promise problem `Π`, and a verifier `A` for `Π` with irrefutable
//! certificates, [`combined_verifier`] runs `M` and answers each query `q`
//! with a bit merged from four runs of `A` on the certificates of two
//! opposing players. When either player holds the honest certificate vector,
//! every query inside the promise gets its correct answer.

use rand::Rng;

use crate::bits::BitString;
use crate::error::{rejected, Result};

/// `(a AND c) OR (b AND d)`
pub fn merge_bit(a: bool, b: bool, c: bool, d: bool) -> bool {
    (a && c) || (b && d)
}

/// A deterministic three-argument verifier `A(q, u, v)`.
pub trait PromiseVerifier {
    /// Certificate length used for queries of length `query_len`.
    fn cert_len(&self, query_len: usize) -> usize;
    fn verify(&self, q: &BitString, u: &BitString, v: &BitString) -> bool;
}

/// Ground truth a test can consult; the merging code never does.
pub trait PromiseGroundTruth: PromiseVerifier {
    /// `Some(true)` on YES instances, `Some(false)` on NO, `None` outside.
    fn promise(&self, q: &BitString) -> Option<bool>;
    /// `(w0, w1)` for queries of length `query_len`.
    fn irrefutable(&self, query_len: usize) -> (BitString, BitString);
}

/// `(w0_1, ..., w0_p, w1_1, ..., w1_p)`, indexed by query length `1..=p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateVector {
    no: Vec<BitString>,
    yes: Vec<BitString>,
}

impl CertificateVector {
    pub fn new(no: Vec<BitString>, yes: Vec<BitString>) -> Result<Self> {
        if no.len() != yes.len() {
            return Err(rejected("certificate vector halves differ in length"));
        }
        Ok(CertificateVector { no, yes })
    }

    /// `W_p`: the irrefutable certificates for lengths `1..=max_len`.
    pub fn honest(truth: &dyn PromiseGroundTruth, max_len: usize) -> Self {
        let (no, yes) = (1..=max_len).map(|l| truth.irrefutable(l)).unzip();
        CertificateVector { no, yes }
    }

    pub fn random(a: &dyn PromiseVerifier, max_len: usize, rng: &mut impl Rng) -> Self {
        let mut draw = |l: usize| BitString::new((0..a.cert_len(l)).map(|_| rng.gen()).collect());
        let no = (1..=max_len).map(&mut draw).collect();
        let yes = (1..=max_len).map(&mut draw).collect();
        CertificateVector { no, yes }
    }

    /// Total certificate bits of a vector for `max_len`.
    pub fn bit_width(a: &dyn PromiseVerifier, max_len: usize) -> usize {
        2 * (1..=max_len).map(|l| a.cert_len(l)).sum::<usize>()
    }

    /// Every vector for `max_len`, in a fixed order. Only sensible for
    /// small [`CertificateVector::bit_width`].
    pub fn enumerate<'a>(
        a: &'a dyn PromiseVerifier,
        max_len: usize,
    ) -> impl Iterator<Item = CertificateVector> + 'a {
        let width = Self::bit_width(a, max_len);
        assert!(width < 32, "exhaustive enumeration of {width} certificate bits");
        (0..1u64 << width).map(move |mut bits| {
            let mut take = |l: usize| {
                let s = BitString::from_index(a.cert_len(l), bits);
                bits >>= a.cert_len(l);
                s
            };
            let no = (1..=max_len).map(&mut take).collect();
            let yes = (1..=max_len).map(&mut take).collect();
            CertificateVector { no, yes }
        })
    }

    pub fn max_len(&self) -> usize {
        self.no.len()
    }

    pub fn no_cert(&self, query_len: usize) -> &BitString {
        &self.no[query_len - 1]
    }

    pub fn yes_cert(&self, query_len: usize) -> &BitString {
        &self.yes[query_len - 1]
    }

    fn check(&self, a: &dyn PromiseVerifier, max_len: usize) -> Result<()> {
        if self.max_len() < max_len {
            return Err(rejected(format!(
                "certificate vector covers lengths up to {}, machine needs {max_len}",
                self.max_len()
            )));
        }
        for l in 1..=max_len {
            let want = a.cert_len(l);
            if self.no_cert(l).len() != want || self.yes_cert(l).len() != want {
                return Err(rejected(format!("certificates for length {l} must have {want} bits")));
            }
        }
        Ok(())
    }
}

/// A deterministic oracle machine running within budget `p(n)`: at most
/// `p(n)` queries, each of length `1..=p(n)`.
pub trait OracleMachine {
    fn budget(&self, input_len: usize) -> usize;
    fn run(&self, x: &BitString, oracle: &mut dyn FnMut(&BitString) -> bool) -> bool;
}

/// The merged answer `ℓ` for query `q`.
pub fn merged_answer(
    a: &dyn PromiseVerifier,
    q: &BitString,
    u: &CertificateVector,
    v: &CertificateVector,
) -> bool {
    let l = q.len();
    let (u0, u1) = (u.no_cert(l), u.yes_cert(l));
    let (v0, v1) = (v.no_cert(l), v.yes_cert(l));
    merge_bit(a.verify(q, u1, v0), a.verify(q, v1, u0), a.verify(q, u1, u0), a.verify(q, v1, v0))
}

/// Simulates `m` on `x`, answering every query with [`merged_answer`].
pub fn combined_verifier(
    m: &dyn OracleMachine,
    a: &dyn PromiseVerifier,
    x: &BitString,
    u: &CertificateVector,
    v: &CertificateVector,
) -> Result<bool> {
    let p = m.budget(x.len());
    u.check(a, p)?;
    v.check(a, p)?;
    let mut violation = None;
    let mut issued = 0usize;
    let out = m.run(x, &mut |q| {
        issued += 1;
        if q.is_empty() || q.len() > p || issued > p {
            violation.get_or_insert_with(|| {
                format!("query {issued} of length {} exceeds the budget p = {p}", q.len())
            });
            return false;
        }
        merged_answer(a, q, u, v)
    });
    match violation {
        Some(msg) => Err(rejected(msg)),
        None => Ok(out),
    }
}

/// YES = first half equals the secret and the last bit is 1; NO = first
/// half equals the secret and the last bit is 0. Only queries of length `n`
/// can be in the promise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiddenPrefix {
    n: usize,
    secret: BitString,
}

pub fn hidden_prefix_problem(n: usize, seed: u64) -> Result<HiddenPrefix> {
    use rand::SeedableRng;
    if n < 4 || !n.is_multiple_of(2) {
        return Err(rejected(format!("hidden-prefix problem needs even n >= 4, got {n}")));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let secret = BitString::new((0..n / 2).map(|_| rng.gen()).collect());
    Ok(HiddenPrefix { n, secret })
}

impl HiddenPrefix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn secret(&self) -> &BitString {
        &self.secret
    }
}

fn last_bit(q: &BitString) -> bool {
    !q.is_empty() && q.get(q.len() - 1)
}

impl PromiseVerifier for HiddenPrefix {
    fn cert_len(&self, query_len: usize) -> usize {
        query_len / 2
    }

    fn verify(&self, q: &BitString, u: &BitString, v: &BitString) -> bool {
        let front = q.slice(0..q.len() / 2);
        (*u == front || *v == front) && last_bit(q)
    }
}

impl PromiseGroundTruth for HiddenPrefix {
    fn promise(&self, q: &BitString) -> Option<bool> {
        (q.len() == self.n && q.slice(0..self.n / 2) == self.secret).then(|| last_bit(q))
    }

    fn irrefutable(&self, query_len: usize) -> (BitString, BitString) {
        if query_len == self.n {
            (self.secret.clone(), self.secret.clone())
        } else {
            let pad = BitString::zeros(query_len / 2);
            (pad.clone(), pad)
        }
    }
}

/// Toy machine for the hidden-prefix problem on inputs of length `n`.
///
/// It binary-searches for the value `v` of the `w = n/2 - 1` bits after the
/// input's first half, asking `secret ‖ mid ‖ [v >= mid]` and following the
/// answer. Each step also asks the same payload behind the input's own first
/// half; that answer is used only when the input's first half is the secret,
/// and is otherwise outside the promise. Output: `parity(v) XOR last bit`.
#[derive(Clone, Debug)]
pub struct BinarySearchMachine {
    secret: BitString,
}

impl BinarySearchMachine {
    pub fn new(problem: &HiddenPrefix) -> Self {
        BinarySearchMachine { secret: problem.secret.clone() }
    }

    fn payload_width(n: usize) -> usize {
        n / 2 - 1
    }

    fn target(x: &BitString) -> u64 {
        let h = x.len() / 2;
        x.slice(h..h + Self::payload_width(x.len())).lex_value()
    }

    /// The language the machine decides, computed without any oracle.
    pub fn language(&self, x: &BitString) -> bool {
        (Self::target(x).count_ones() % 2 == 1) ^ last_bit(x)
    }
}

impl OracleMachine for BinarySearchMachine {
    fn budget(&self, input_len: usize) -> usize {
        input_len
    }

    fn run(&self, x: &BitString, oracle: &mut dyn FnMut(&BitString) -> bool) -> bool {
        let n = x.len();
        assert_eq!(n, 2 * self.secret.len(), "input length must match the secret");
        let w = Self::payload_width(n);
        let front = x.slice(0..n / 2);
        let target = Self::target(x);
        let (mut lo, mut hi) = (0u64, 1u64 << w);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let payload =
                BitString::from_lex_value(w, mid).concat(&BitString::new(vec![target >= mid]));
            let trusted = oracle(&self.secret.concat(&payload));
            let own = oracle(&front.concat(&payload));
            let go_up = if front == self.secret { own } else { trusted };
            if go_up {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo.count_ones() % 2 == 1) ^ last_bit(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn merge_bit_cases() {
        assert!(merge_bit(true, false, true, false));
        assert!(!merge_bit(true, false, false, true));
        assert!(!merge_bit(false, false, false, false));
    }

    #[test]
    fn merge_bit_truth_table() {
        for row in 0..16u8 {
            let (a, b, c, d) = (row & 8 != 0, row & 4 != 0, row & 2 != 0, row & 1 != 0);
            let expected = matches!(row, 0b1010 | 0b1011 | 0b1110 | 0b1111 | 0b0101 | 0b0111 | 0b1101);
            assert_eq!(merge_bit(a, b, c, d), expected, "row {row:04b}");
        }
    }

    #[test]
    fn irrefutability_at_n6() {
        let p = hidden_prefix_problem(6, 11).unwrap();
        let h = p.secret().clone();
        for q in BitString::all(6) {
            match p.promise(&q) {
                Some(true) => {
                    for v in BitString::all(3) {
                        assert!(p.verify(&q, &h, &v));
                    }
                }
                Some(false) => {
                    for u in BitString::all(3) {
                        assert!(!p.verify(&q, &u, &h));
                    }
                }
                None => {}
            }
        }
    }

    #[test]
    fn problem_validation() {
        assert!(hidden_prefix_problem(5, 0).is_err());
        assert!(hidden_prefix_problem(2, 0).is_err());
        assert_eq!(hidden_prefix_problem(8, 3).unwrap(), hidden_prefix_problem(8, 3).unwrap());
    }

    #[test]
    fn honest_players_reproduce_the_language() {
        for n in [4, 6, 8] {
            let p = hidden_prefix_problem(n, 5).unwrap();
            let m = BinarySearchMachine::new(&p);
            let w = CertificateVector::honest(&p, n);
            for x in BitString::all(n) {
                assert_eq!(combined_verifier(&m, &p, &x, &w, &w).unwrap(), m.language(&x));
            }
        }
    }

    #[test]
    fn machine_relies_on_promise_answers() {
        // Answering every query with 0 drives the search to v = 0.
        let p = hidden_prefix_problem(8, 1).unwrap();
        let m = BinarySearchMachine::new(&p);
        let wrong = BitString::all(8).filter(|x| m.run(x, &mut |_| false) != m.language(x)).count();
        assert!(wrong > 0);
    }

    #[test]
    fn short_vectors_and_bad_lengths_are_rejected() {
        let p = hidden_prefix_problem(4, 0).unwrap();
        let m = BinarySearchMachine::new(&p);
        let x = BitString::zeros(4);
        let short = CertificateVector::honest(&p, 3);
        let full = CertificateVector::honest(&p, 4);
        assert!(combined_verifier(&m, &p, &x, &short, &full).is_err());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut bad = CertificateVector::random(&p, 4, &mut rng);
        bad.yes[3] = BitString::zeros(3);
        assert!(combined_verifier(&m, &p, &x, &full, &bad).is_err());
    }

    #[test]
    fn enumeration_covers_every_vector() {
        let p = hidden_prefix_problem(4, 0).unwrap();
        assert_eq!(CertificateVector::bit_width(&p, 4), 8);
        let all: Vec<_> = CertificateVector::enumerate(&p, 4).collect();
        assert_eq!(all.len(), 256);
        assert!(all.contains(&CertificateVector::honest(&p, 4)));
    }
}
