//! Order instances with known ground truth.
//!
//! Valid orders compare transformed inputs with a ripple lexicographic
//! comparator; broken orders multiplex a planted defect over a valid base.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bits::BitString;
use crate::circuit::{equals_constant, Circuit, CircuitBuilder, GateRef, OrderCircuit};
use crate::error::{rejected, Error, Result};

/// Concrete order description; [`generate`] is a pure function of it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderKind {
    Lex,
    Xor { key: BitString },
    /// Compares `Ax + b` lexicographically; rows of `A` as bit strings.
    Affine { matrix: Vec<BitString>, offset: BitString },
    /// Compares `(x[perm[0]], x[perm[1]], ...)` lexicographically.
    Bitperm { perm: Vec<usize> },
    /// Adds `y < x` on top of a base order that has `x < y`.
    Broken2 { base: Box<OrderKind>, pair: (BitString, BitString) },
    /// Reverses the outer edge of a base chain `x < y < z`.
    Broken3 { base: Box<OrderKind>, triple: (BitString, BitString, BitString) },
    EmptyRelation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderSpec {
    pub n: usize,
    #[serde(flatten)]
    pub kind: OrderKind,
}

/// What a generated instance is known to contain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundTruth {
    Minimum(BitString),
    PlantedPair(BitString, BitString),
    PlantedTriple(BitString, BitString, BitString),
    NonTotal,
}

impl GroundTruth {
    pub fn argmin(&self) -> Option<&BitString> {
        match self {
            GroundTruth::Minimum(m) => Some(m),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            GroundTruth::Minimum(m) => json!({"argmin": m}),
            GroundTruth::PlantedPair(x, y) => json!({"planted_pair": [x, y]}),
            GroundTruth::PlantedTriple(x, y, z) => json!({"planted_triple": [x, y, z]}),
            GroundTruth::NonTotal => json!({"defect": "non_total"}),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: OrderSpec,
    pub order: OrderCircuit,
    pub truth: GroundTruth,
}

impl Instance {
    /// JSON sidecar: `{"schema":1, "spec":{...}, "seed":..., <truth fields>}`.
    pub fn sidecar(&self, seed: Option<u64>) -> Value {
        let mut v = json!({"schema": 1, "n": self.spec.n, "spec": self.spec});
        if let Some(seed) = seed {
            v["seed"] = json!(seed);
        }
        if let (Value::Object(dst), Value::Object(src)) = (&mut v, self.truth.to_json()) {
            dst.extend(src);
        }
        v
    }
}

/// `x < y` lexicographically, position 0 most significant.
pub fn lex_less(b: &mut CircuitBuilder, x: &[GateRef], y: &[GateRef]) -> GateRef {
    assert_eq!(x.len(), y.len());
    assert!(!x.is_empty());
    let mut lt: Option<GateRef> = None;
    for j in (0..x.len()).rev() {
        let nx = b.not(x[j]);
        let here = b.and(nx, y[j]);
        lt = Some(match lt {
            None => here,
            Some(rest) => {
                let eq = b.xnor(x[j], y[j]);
                let tail = b.and(eq, rest);
                b.or(here, tail)
            }
        });
    }
    lt.expect("nonempty")
}

fn compare_transformed(
    n: usize,
    transform: impl Fn(&mut CircuitBuilder, &[GateRef]) -> Vec<GateRef>,
) -> OrderCircuit {
    let mut b = CircuitBuilder::new(2 * n);
    let x: Vec<GateRef> = (0..n).map(|j| b.input(j)).collect();
    let y: Vec<GateRef> = (n..2 * n).map(|j| b.input(j)).collect();
    let tx = transform(&mut b, &x);
    let ty = transform(&mut b, &y);
    let out = lex_less(&mut b, &tx, &ty);
    OrderCircuit::new(n, b.finish(out)).expect("2n inputs")
}

pub fn lex_order(n: usize) -> OrderCircuit {
    compare_transformed(n, |_, x| x.to_vec())
}

pub fn xor_order(key: &BitString) -> OrderCircuit {
    compare_transformed(key.len(), |b, x| {
        x.iter()
            .zip(key.bits())
            .map(|(&xi, &ki)| if ki { b.not(xi) } else { xi })
            .collect()
    })
}

pub fn affine_order(matrix: &[BitString], offset: &BitString) -> Result<OrderCircuit> {
    let n = offset.len();
    if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
        return Err(rejected(format!("affine map needs an {n}x{n} matrix")));
    }
    if gf2_solve(matrix, offset).is_none() {
        return Err(rejected("affine matrix is singular over GF(2)"));
    }
    Ok(compare_transformed(n, |b, x| {
        matrix
            .iter()
            .zip(offset.bits())
            .map(|(row, &bi)| {
                let terms: Vec<GateRef> =
                    (0..n).filter(|&j| row.get(j)).map(|j| x[j]).collect();
                let dot = b.xor_all(&terms);
                if bi {
                    b.not(dot)
                } else {
                    dot
                }
            })
            .collect()
    }))
}

pub fn bitperm_order(perm: &[usize]) -> Result<OrderCircuit> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(rejected(format!("{perm:?} is not a permutation of 0..{n}")));
        }
    }
    Ok(compare_transformed(n, |_, x| perm.iter().map(|&p| x[p]).collect()))
}

/// Solves `A x = b` over GF(2); `None` when `A` is singular.
pub fn gf2_solve(matrix: &[BitString], rhs: &BitString) -> Option<BitString> {
    let n = rhs.len();
    // Augmented rows as u64 masks: bits 0..n coefficients, bit n the rhs.
    let mut rows: Vec<u64> = matrix
        .iter()
        .zip(rhs.bits())
        .map(|(r, &b)| r.to_index() | ((b as u64) << n))
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| (rows[r] >> col) & 1 == 1)?;
        rows.swap(col, pivot);
        for r in 0..n {
            if r != col && (rows[r] >> col) & 1 == 1 {
                rows[r] ^= rows[col];
            }
        }
    }
    Some(BitString::new((0..n).map(|i| (rows[i] >> n) & 1 == 1).collect()))
}

fn base_order(n: usize, kind: &OrderKind) -> Result<OrderCircuit> {
    match kind {
        OrderKind::Broken2 { .. } | OrderKind::Broken3 { .. } | OrderKind::EmptyRelation => {
            Err(rejected("a broken order's base must be a valid order kind"))
        }
        other => Ok(generate(&OrderSpec { n, kind: other.clone() })?.order),
    }
}

/// `E' = (E AND NOT [x=a, y=b]) OR [x=c, y=d]` for the given removals/additions.
fn splice(
    base: &OrderCircuit,
    remove: Option<(&BitString, &BitString)>,
    add: (&BitString, &BitString),
) -> OrderCircuit {
    let n = base.n();
    let mut b = CircuitBuilder::new(2 * n);
    let all: Vec<GateRef> = (0..2 * n).map(|j| b.input(j)).collect();
    let (x, y) = all.split_at(n);
    let edge = |b: &mut CircuitBuilder, p: &BitString, q: &BitString| {
        let ex = equals_constant(b, x, p);
        let ey = equals_constant(b, y, q);
        b.and(ex, ey)
    };
    let mut out = b.embed(base.circuit(), &all);
    if let Some((p, q)) = remove {
        let hit = edge(&mut b, p, q);
        let keep = b.not(hit);
        out = b.and(out, keep);
    }
    let planted = edge(&mut b, add.0, add.1);
    let out = b.or(out, planted);
    OrderCircuit::new(n, b.finish(out)).expect("2n inputs")
}

fn check_len(n: usize, s: &BitString) -> Result<()> {
    if s.len() != n {
        return Err(rejected(format!("element {s} does not have {n} bits")));
    }
    Ok(())
}

pub fn generate(spec: &OrderSpec) -> Result<Instance> {
    let n = spec.n;
    if n == 0 {
        return Err(rejected("orders need n >= 1"));
    }
    let (order, truth) = match &spec.kind {
        OrderKind::Lex => (lex_order(n), GroundTruth::Minimum(BitString::zeros(n))),
        OrderKind::Xor { key } => {
            check_len(n, key)?;
            (xor_order(key), GroundTruth::Minimum(key.clone()))
        }
        OrderKind::Affine { matrix, offset } => {
            check_len(n, offset)?;
            let e = affine_order(matrix, offset)?;
            let argmin = gf2_solve(matrix, offset).expect("checked invertible");
            (e, GroundTruth::Minimum(argmin))
        }
        OrderKind::Bitperm { perm } => {
            if perm.len() != n {
                return Err(rejected(format!("permutation must have length {n}")));
            }
            (bitperm_order(perm)?, GroundTruth::Minimum(BitString::zeros(n)))
        }
        OrderKind::Broken2 { base, pair: (a, b) } => {
            check_len(n, a)?;
            check_len(n, b)?;
            if a == b {
                return Err(rejected("planted pair needs distinct elements"));
            }
            let e = base_order(n, base)?;
            if !e.less(a, b)? {
                return Err(rejected(format!("base order does not have {a} < {b}")));
            }
            (splice(&e, None, (b, a)), GroundTruth::PlantedPair(a.clone(), b.clone()))
        }
        OrderKind::Broken3 { base, triple: (p, q, r) } => {
            for s in [p, q, r] {
                check_len(n, s)?;
            }
            if p == q || q == r || p == r {
                return Err(rejected("planted triple needs distinct elements"));
            }
            let e = base_order(n, base)?;
            if !(e.less(p, q)? && e.less(q, r)?) {
                return Err(rejected(format!("base order does not have {p} < {q} < {r}")));
            }
            (
                splice(&e, Some((p, r)), (r, p)),
                GroundTruth::PlantedTriple(p.clone(), q.clone(), r.clone()),
            )
        }
        OrderKind::EmptyRelation => (
            OrderCircuit::new(n, Circuit::constant(2 * n, false)).expect("2n inputs"),
            GroundTruth::NonTotal,
        ),
    };
    Ok(Instance { spec: spec.clone(), order, truth })
}

/// Named order families for seeded generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Lex,
    Xor,
    Affine,
    Bitperm,
    Broken2,
    Broken3,
    Empty,
}

impl Family {
    pub const VALID: [Family; 4] = [Family::Lex, Family::Xor, Family::Affine, Family::Bitperm];

    fn name(self) -> &'static str {
        match self {
            Family::Lex => "lex",
            Family::Xor => "xor",
            Family::Affine => "affine",
            Family::Bitperm => "bitperm",
            Family::Broken2 => "broken2",
            Family::Broken3 => "broken3",
            Family::Empty => "empty",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Family::Lex,
            Family::Xor,
            Family::Affine,
            Family::Bitperm,
            Family::Broken2,
            Family::Broken3,
            Family::Empty,
        ]
        .into_iter()
        .find(|f| f.name() == s || (*f == Family::Empty && s == "empty-relation"))
        .ok_or_else(|| rejected(format!("unknown order family {s:?}")))
    }
}

fn random_bits(rng: &mut impl Rng, n: usize) -> BitString {
    BitString::new((0..n).map(|_| rng.gen()).collect())
}

fn random_invertible(rng: &mut impl Rng, n: usize) -> Vec<BitString> {
    loop {
        let m: Vec<BitString> = (0..n).map(|_| random_bits(rng, n)).collect();
        if gf2_solve(&m, &BitString::zeros(n)).is_some() {
            return m;
        }
    }
}

fn random_valid_kind(rng: &mut impl Rng, family: Family, n: usize) -> OrderKind {
    match family {
        Family::Xor => OrderKind::Xor { key: random_bits(rng, n) },
        Family::Affine => {
            OrderKind::Affine { matrix: random_invertible(rng, n), offset: random_bits(rng, n) }
        }
        Family::Bitperm => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            OrderKind::Bitperm { perm }
        }
        _ => OrderKind::Lex,
    }
}

/// Elements sorted by a valid order, by repeated comparison.
fn sorted_by(e: &OrderCircuit, mut elems: Vec<BitString>) -> Result<Vec<BitString>> {
    let mut err = None;
    elems.sort_by(|a, b| match (e.less(a, b), e.less(b, a)) {
        (Ok(true), _) => std::cmp::Ordering::Less,
        (_, Ok(true)) => std::cmp::Ordering::Greater,
        (Err(x), _) | (_, Err(x)) => {
            err = Some(x);
            std::cmp::Ordering::Equal
        }
        _ => std::cmp::Ordering::Equal,
    });
    match err {
        Some(e) => Err(e),
        None => Ok(elems),
    }
}

fn distinct_elements(rng: &mut impl Rng, n: usize, count: usize) -> Vec<BitString> {
    let mut picked: Vec<u64> = Vec::with_capacity(count);
    while picked.len() < count {
        let v = rng.gen_range(0..1u64 << n);
        if !picked.contains(&v) {
            picked.push(v);
        }
    }
    picked.into_iter().map(|v| BitString::from_index(n, v)).collect()
}

impl OrderSpec {
    /// Draws the parameters of `family` at size `n` from `seed`.
    pub fn random(family: Family, n: usize, seed: u64) -> Result<OrderSpec> {
        if n == 0 || n > 32 {
            return Err(rejected(format!("order size n={n} outside 1..=32")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = match family {
            Family::Lex | Family::Xor | Family::Affine | Family::Bitperm => {
                random_valid_kind(&mut rng, family, n)
            }
            Family::Empty => OrderKind::EmptyRelation,
            Family::Broken2 | Family::Broken3 => {
                let want = if family == Family::Broken2 { 2 } else { 3 };
                if (1u64 << n) < want as u64 {
                    return Err(rejected(format!("{family} needs at least {want} elements")));
                }
                let base_family = Family::VALID[rng.gen_range(0..Family::VALID.len())];
                let base = random_valid_kind(&mut rng, base_family, n);
                let e = generate(&OrderSpec { n, kind: base.clone() })?.order;
                let mut s = sorted_by(&e, distinct_elements(&mut rng, n, want))?.into_iter();
                let mut next = || s.next().expect("enough elements");
                let base = Box::new(base);
                if want == 2 {
                    OrderKind::Broken2 { base, pair: (next(), next()) }
                } else {
                    OrderKind::Broken3 { base, triple: (next(), next(), next()) }
                }
            }
        };
        Ok(OrderSpec { n, kind })
    }
}

/// `count` valid orders of size `n`, cycling through the valid families.
pub fn valid_corpus(n: usize, count: usize, seed: u64) -> Result<Vec<Instance>> {
    (0..count)
        .map(|i| {
            let family = Family::VALID[i % Family::VALID.len()];
            let spec = OrderSpec::random(family, n, seed.wrapping_mul(1_000_003).wrapping_add(i as u64))?;
            generate(&spec)
        })
        .collect()
}

/// A random gate DAG over `n` inputs with `gates` internal gates.
pub fn random_circuit(rng: &mut impl Rng, n: usize, gates: usize) -> Circuit {
    let mut b = CircuitBuilder::new(n);
    let mut pool: Vec<GateRef> = (0..n).map(|j| b.input(j)).collect();
    if pool.is_empty() {
        pool.push(b.constant(rng.gen()));
    }
    for _ in 0..gates {
        let a = pool[rng.gen_range(0..pool.len())];
        let c = pool[rng.gen_range(0..pool.len())];
        let g = match rng.gen_range(0..4) {
            0 => b.not(a),
            1 => b.and(a, c),
            2 => b.or(a, c),
            _ => b.xor(a, c),
        };
        pool.push(g);
    }
    let out = *pool.last().expect("nonempty pool");
    b.finish(out)
}

/// A circuit accepting exactly `members`, as an OR of point equalities.
pub fn set_circuit(n: usize, members: &[BitString]) -> Circuit {
    let mut b = CircuitBuilder::new(n);
    let x: Vec<GateRef> = (0..n).map(|j| b.input(j)).collect();
    let terms: Vec<GateRef> = members.iter().map(|m| equals_constant(&mut b, &x, m)).collect();
    let out = b.or_all(&terms);
    b.finish(out)
}
