//! Set-size estimation (SSE) promise oracles.
//!
//! A query `(C, m)` is a YES instance when `#C >= m`, a NO instance when
//! `#C <= m/2`, and otherwise falls in the gap. Every model answers YES
//! instances with `true` and NO instances with `false`; models differ only
//! on gap queries. Classification needs the exact count, so these models are
//! simulations for desk-scale circuits.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{serialize_circuit, Circuit, TensorPower, DEFAULT_CAP};
use crate::error::{rejected, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PromiseClass {
    Yes,
    No,
    Gap,
}

impl fmt::Display for PromiseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromiseClass::Yes => "YES",
            PromiseClass::No => "NO",
            PromiseClass::Gap => "GAP",
        })
    }
}

/// A circuit or tensor power, with its exact count and text digest cached
/// so that a batch of queries against one target classifies cheaply.
#[derive(Debug)]
pub struct QueryTarget {
    power: TensorPower,
    count: OnceLock<BigUint>,
    digest: OnceLock<[u8; 32]>,
}

impl QueryTarget {
    pub fn plain(circuit: impl Into<Arc<Circuit>>) -> Arc<Self> {
        Self::tensor(TensorPower::new(circuit, 1).expect("k = 1"))
    }

    pub fn tensor(power: TensorPower) -> Arc<Self> {
        Arc::new(QueryTarget { power, count: OnceLock::new(), digest: OnceLock::new() })
    }

    pub fn base(&self) -> &Arc<Circuit> {
        self.power.base()
    }

    pub fn k(&self) -> u32 {
        self.power.k()
    }

    pub fn num_inputs(&self) -> usize {
        self.power.num_inputs()
    }

    pub fn count(&self, cap: usize) -> Result<&BigUint> {
        if self.base().num_inputs() > cap {
            return Err(Error::Capacity { arity: self.base().num_inputs(), limit: cap });
        }
        if let Some(c) = self.count.get() {
            return Ok(c);
        }
        let c = self.power.count_exact(cap)?;
        Ok(self.count.get_or_init(|| c))
    }

    /// The circuit text, followed by `tensor <k>` when `k > 1`.
    pub fn serialize(&self) -> String {
        let mut text = serialize_circuit(self.base());
        if self.k() > 1 {
            text.push_str(&format!("tensor {}\n", self.k()));
        }
        text
    }

    /// SHA-256 of [`QueryTarget::serialize`].
    pub fn digest(&self) -> &[u8; 32] {
        self.digest.get_or_init(|| Sha256::digest(self.serialize().as_bytes()).into())
    }
}

#[derive(Clone, Debug)]
pub struct SseQuery {
    target: Arc<QueryTarget>,
    m: BigUint,
}

impl SseQuery {
    pub fn new(target: Arc<QueryTarget>, m: BigUint) -> Result<Self> {
        if m.is_zero() {
            return Err(rejected("SSE threshold m must be at least 1"));
        }
        Ok(SseQuery { target, m })
    }

    /// `(target, 2^j)`.
    pub fn pow2(target: Arc<QueryTarget>, j: u64) -> Self {
        SseQuery { target, m: BigUint::one() << j }
    }

    pub fn target(&self) -> &Arc<QueryTarget> {
        &self.target
    }

    pub fn m(&self) -> &BigUint {
        &self.m
    }

    fn key(&self) -> QueryKey {
        QueryKey { digest: *self.target.digest(), m: self.m.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct QueryKey {
    digest: [u8; 32],
    m: BigUint,
}

pub fn classify_with_cap(q: &SseQuery, cap: usize) -> Result<PromiseClass> {
    let count = q.target.count(cap)?;
    Ok(if *count >= q.m {
        PromiseClass::Yes
    } else if count * 2u32 <= q.m {
        PromiseClass::No
    } else {
        PromiseClass::Gap
    })
}

pub fn classify(q: &SseQuery) -> Result<PromiseClass> {
    classify_with_cap(q, DEFAULT_CAP)
}

/// Anything that answers SSE queries.
pub trait SseOracle {
    fn answer(&mut self, q: &SseQuery) -> Result<bool>;
}

impl<T: SseOracle + ?Sized> SseOracle for &mut T {
    fn answer(&mut self, q: &SseQuery) -> Result<bool> {
        (**self).answer(q)
    }
}

/// Counts the queries passed through to `inner`.
pub struct CountingOracle<'a> {
    inner: &'a mut dyn SseOracle,
    queries: u64,
}

impl<'a> CountingOracle<'a> {
    pub fn new(inner: &'a mut dyn SseOracle) -> Self {
        CountingOracle { inner, queries: 0 }
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }
}

impl SseOracle for CountingOracle<'_> {
    fn answer(&mut self, q: &SseQuery) -> Result<bool> {
        self.queries += 1;
        self.inner.answer(q)
    }
}

/// Gap behaviour of an adversarial oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    AlwaysYes,
    AlwaysNo,
    /// A pure function of the serialized query and the seed.
    SeededHash,
    /// Flips on every call, starting from the seed's parity. Inconsistent
    /// across repeated queries.
    Alternating,
}

impl Policy {
    pub const ALL: [Policy; 4] =
        [Policy::AlwaysYes, Policy::AlwaysNo, Policy::SeededHash, Policy::Alternating];

    fn name(self) -> &'static str {
        match self {
            Policy::AlwaysYes => "always-yes",
            Policy::AlwaysNo => "always-no",
            Policy::SeededHash => "seeded-hash",
            Policy::Alternating => "alternating",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| rejected(format!("unknown policy {s:?}")))
    }
}

/// Description of an oracle; [`Oracle::new`] instantiates it.
///
/// Text form: `threshold`, `adversarial/<policy>/<seed>`, `memoizing(<model>)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OracleModel {
    Threshold,
    Adversarial { policy: Policy, seed: u64 },
    Memoizing(Box<OracleModel>),
}

impl OracleModel {
    pub fn adversarial(policy: Policy, seed: u64) -> Self {
        OracleModel::Adversarial { policy, seed }
    }

    pub fn memoizing(inner: OracleModel) -> Self {
        OracleModel::Memoizing(Box::new(inner))
    }

    /// THRESHOLD, every policy for each seed, and MEMOIZING(ALTERNATING).
    pub fn standard_suite(seeds: impl IntoIterator<Item = u64> + Clone) -> Vec<OracleModel> {
        let mut models = vec![OracleModel::Threshold];
        for policy in Policy::ALL {
            models.extend(seeds.clone().into_iter().map(|seed| Self::adversarial(policy, seed)));
        }
        models.push(Self::memoizing(Self::adversarial(Policy::Alternating, 0)));
        models
    }

    /// Stateless models give the same answer to a query regardless of history.
    pub fn is_stateless(&self) -> bool {
        match self {
            OracleModel::Threshold => true,
            OracleModel::Adversarial { policy, .. } => *policy != Policy::Alternating,
            OracleModel::Memoizing(_) => false,
        }
    }
}

impl fmt::Display for OracleModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleModel::Threshold => f.write_str("threshold"),
            OracleModel::Adversarial { policy, seed } => write!(f, "adversarial/{policy}/{seed}"),
            OracleModel::Memoizing(inner) => write!(f, "memoizing({inner})"),
        }
    }
}

impl FromStr for OracleModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "threshold" {
            return Ok(OracleModel::Threshold);
        }
        if let Some(inner) = s.strip_prefix("memoizing(").and_then(|r| r.strip_suffix(')')) {
            return Ok(OracleModel::memoizing(inner.parse()?));
        }
        if let Some(rest) = s.strip_prefix("adversarial/") {
            let (policy, seed) = rest
                .split_once('/')
                .ok_or_else(|| rejected(format!("expected adversarial/<policy>/<seed>, got {s:?}")))?;
            let seed = seed.parse().map_err(|_| rejected(format!("bad seed {seed:?}")))?;
            return Ok(OracleModel::adversarial(policy.parse()?, seed));
        }
        Err(rejected(format!("unknown oracle model {s:?}")))
    }
}

fn seeded_bit(key: &QueryKey, seed: u64) -> bool {
    let mut h = Sha256::new();
    h.update(b"loplab-sse-gap-v1\0");
    h.update(key.digest);
    h.update(key.m.to_str_radix(10).as_bytes());
    h.update(seed.to_le_bytes());
    h.finalize()[0] & 1 == 1
}

#[derive(Debug)]
enum Engine {
    Threshold,
    Adversarial { policy: Policy, seed: u64, calls: u64 },
    Memoizing { inner: Box<Engine>, table: HashMap<QueryKey, bool> },
}

impl Engine {
    fn new(model: &OracleModel) -> Self {
        match model {
            OracleModel::Threshold => Engine::Threshold,
            OracleModel::Adversarial { policy, seed } => {
                Engine::Adversarial { policy: *policy, seed: *seed, calls: 0 }
            }
            OracleModel::Memoizing(inner) => {
                Engine::Memoizing { inner: Box::new(Engine::new(inner)), table: HashMap::new() }
            }
        }
    }

    fn answer(&mut self, q: &SseQuery, class: PromiseClass) -> bool {
        let forced = match class {
            PromiseClass::Yes => Some(true),
            PromiseClass::No => Some(false),
            PromiseClass::Gap => None,
        };
        match self {
            Engine::Threshold => forced.unwrap_or(false),
            Engine::Adversarial { policy, seed, calls } => {
                let phase = (*calls ^ *seed) & 1 == 0;
                *calls += 1;
                forced.unwrap_or_else(|| match policy {
                    Policy::AlwaysYes => true,
                    Policy::AlwaysNo => false,
                    Policy::SeededHash => seeded_bit(&q.key(), *seed),
                    Policy::Alternating => phase,
                })
            }
            Engine::Memoizing { inner, table } => {
                if forced.is_some() {
                    return inner.answer(q, class);
                }
                let key = q.key();
                if let Some(&a) = table.get(&key) {
                    return a;
                }
                let a = inner.answer(q, class);
                table.insert(key, a);
                a
            }
        }
    }
}

/// A running instance of an [`OracleModel`].
#[derive(Debug)]
pub struct Oracle {
    model: OracleModel,
    engine: Engine,
    cap: usize,
    log: Option<QueryLog>,
    queries: u64,
}

impl Oracle {
    pub fn new(model: &OracleModel) -> Self {
        Self::with_cap(model, DEFAULT_CAP)
    }

    pub fn with_cap(model: &OracleModel, cap: usize) -> Self {
        Oracle { model: model.clone(), engine: Engine::new(model), cap, log: None, queries: 0 }
    }

    /// Records every query, answer and class from now on.
    pub fn logged(mut self) -> Self {
        self.log = Some(QueryLog::default());
        self
    }

    pub fn model(&self) -> &OracleModel {
        &self.model
    }

    pub fn queries_made(&self) -> u64 {
        self.queries
    }

    pub fn log(&self) -> Option<&QueryLog> {
        self.log.as_ref()
    }

    pub fn take_log(&mut self) -> Option<QueryLog> {
        self.log.take()
    }
}

impl SseOracle for Oracle {
    fn answer(&mut self, q: &SseQuery) -> Result<bool> {
        let class = classify_with_cap(q, self.cap)?;
        let a = self.engine.answer(q, class);
        self.queries += 1;
        if let Some(log) = &mut self.log {
            log.entries.push(LogEntry { query: q.clone(), answer: a, class });
        }
        Ok(a)
    }
}

#[derive(Clone, Debug)]
pub struct LogEntry {
    pub query: SseQuery,
    pub answer: bool,
    pub class: PromiseClass,
}

/// Append-only transcript of one oracle's queries.
#[derive(Clone, Debug, Default)]
pub struct QueryLog {
    entries: Vec<LogEntry>,
}

#[derive(Serialize, Deserialize)]
struct LogLine {
    m: String,
    circuit_hash: String,
    class: PromiseClass,
    answer: u8,
}

impl QueryLog {
    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, entry: LogEntry) {
        self.entries.push(entry);
    }

    /// One JSON object per line:
    /// `{"m":"<decimal>","circuit_hash":"<hex>","class":"YES|NO|GAP","answer":0|1}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let line = LogLine {
                m: e.query.m.to_str_radix(10),
                circuit_hash: hex::encode(e.query.target.digest()),
                class: e.class,
                answer: e.answer as u8,
            };
            out.push_str(&serde_json::to_string(&line).expect("log line serializes"));
            out.push('\n');
        }
        out
    }
}

/// The completion of a logged transcript to a consistent language: logged
/// gap answers are replayed, everything else is answered by the promise,
/// and unlogged gap queries get `false`.
#[derive(Clone, Debug, Default)]
pub struct ConsistentLanguage {
    table: HashMap<QueryKey, bool>,
    cap: usize,
}

impl ConsistentLanguage {
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    fn insert(&mut self, key: QueryKey, answer: bool, class: PromiseClass) -> Result<()> {
        let forced = match class {
            PromiseClass::Yes => Some(true),
            PromiseClass::No => Some(false),
            PromiseClass::Gap => None,
        };
        if forced.is_some_and(|f| f != answer) {
            return Err(Error::InvalidLog(format!("{class} query answered {}", answer as u8)));
        }
        if forced.is_none() {
            if let Some(&prev) = self.table.get(&key) {
                if prev != answer {
                    return Err(Error::InvalidLog(format!(
                        "conflicting answers for query with m = {}",
                        key.m
                    )));
                }
            }
            self.table.insert(key, answer);
        }
        Ok(())
    }

    /// Rebuilds the table from [`QueryLog::to_json_lines`] output.
    pub fn from_json_lines(text: &str) -> Result<Self> {
        let mut lang = ConsistentLanguage { table: HashMap::new(), cap: DEFAULT_CAP };
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |msg: String| Error::InvalidLog(format!("line {}: {msg}", i + 1));
            let entry: LogLine = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            let digest: [u8; 32] = hex::decode(&entry.circuit_hash)
                .ok()
                .and_then(|d| d.try_into().ok())
                .ok_or_else(|| bad("circuit_hash is not 32 hex bytes".into()))?;
            let m = BigUint::parse_bytes(entry.m.as_bytes(), 10)
                .ok_or_else(|| bad(format!("bad m {:?}", entry.m)))?;
            if entry.answer > 1 {
                return Err(bad("answer must be 0 or 1".into()));
            }
            lang.insert(QueryKey { digest, m }, entry.answer == 1, entry.class)?;
        }
        Ok(lang)
    }
}

pub fn reconstruct_consistent_language(log: &QueryLog) -> Result<ConsistentLanguage> {
    let mut lang = ConsistentLanguage { table: HashMap::new(), cap: DEFAULT_CAP };
    for e in &log.entries {
        lang.insert(e.query.key(), e.answer, e.class)?;
    }
    Ok(lang)
}

impl SseOracle for ConsistentLanguage {
    fn answer(&mut self, q: &SseQuery) -> Result<bool> {
        Ok(match classify_with_cap(q, self.cap)? {
            PromiseClass::Yes => true,
            PromiseClass::No => false,
            PromiseClass::Gap => self.table.get(&q.key()).copied().unwrap_or(false),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;

    /// A 4-input circuit with exactly `count` models: index < count.
    fn circuit_with_count(count: u64) -> Arc<Circuit> {
        let mut b = CircuitBuilder::new(4);
        let terms: Vec<_> = (0..count)
            .map(|i| {
                let x: Vec<_> = (0..4).map(|j| b.input(j)).collect();
                crate::circuit::equals_constant(&mut b, &x, &crate::BitString::from_index(4, i))
            })
            .collect();
        let out = b.or_all(&terms);
        Arc::new(b.finish(out))
    }

    fn query(count: u64, m: u32) -> SseQuery {
        SseQuery::new(QueryTarget::plain(circuit_with_count(count)), BigUint::from(m)).unwrap()
    }

    #[test]
    fn classification_boundaries() {
        assert_eq!(classify(&query(8, 8)).unwrap(), PromiseClass::Yes);
        assert_eq!(classify(&query(3, 8)).unwrap(), PromiseClass::No);
        assert_eq!(classify(&query(4, 8)).unwrap(), PromiseClass::No);
        assert_eq!(classify(&query(5, 8)).unwrap(), PromiseClass::Gap);
        assert_eq!(classify(&query(0, 1)).unwrap(), PromiseClass::No);
        assert_eq!(classify(&query(1, 1)).unwrap(), PromiseClass::Yes);
    }

    #[test]
    fn zero_threshold_is_rejected() {
        assert!(SseQuery::new(QueryTarget::plain(circuit_with_count(1)), BigUint::zero()).is_err());
    }

    #[test]
    fn tensor_targets_classify_on_the_power() {
        let t = QueryTarget::tensor(TensorPower::new(circuit_with_count(5), 3).unwrap());
        assert_eq!(classify(&SseQuery::pow2(t.clone(), 7)).unwrap(), PromiseClass::Gap);
        assert_eq!(classify(&SseQuery::pow2(t.clone(), 6)).unwrap(), PromiseClass::Yes);
        assert_eq!(classify(&SseQuery::pow2(t, 8)).unwrap(), PromiseClass::No);
    }

    #[test]
    fn forced_answers_for_every_model() {
        let models = OracleModel::standard_suite(0..3);
        for model in &models {
            let mut o = Oracle::new(model);
            assert!(o.answer(&query(8, 8)).unwrap(), "{model}");
            assert!(!o.answer(&query(3, 8)).unwrap(), "{model}");
        }
    }

    #[test]
    fn gap_policies() {
        let gap = query(5, 8);
        let mut no = Oracle::new(&OracleModel::adversarial(Policy::AlwaysNo, 1));
        assert!(!no.answer(&gap).unwrap());
        let mut yes = Oracle::new(&OracleModel::adversarial(Policy::AlwaysYes, 1));
        assert!(yes.answer(&gap).unwrap());
        let mut th = Oracle::new(&OracleModel::Threshold);
        assert!(!th.answer(&gap).unwrap());

        let mut alt = Oracle::new(&OracleModel::adversarial(Policy::Alternating, 0));
        let answers: Vec<bool> = (0..4).map(|_| alt.answer(&gap).unwrap()).collect();
        assert_eq!(answers, vec![true, false, true, false]);
    }

    #[test]
    fn seeded_hash_is_a_function_of_query_and_seed() {
        let (a, b) = (query(5, 8), query(5, 8));
        for seed in 0..8 {
            let model = OracleModel::adversarial(Policy::SeededHash, seed);
            let x = Oracle::new(&model).answer(&a).unwrap();
            let y = Oracle::new(&model).answer(&b).unwrap();
            assert_eq!(x, y);
        }
        // Some seed must disagree with some other, or the policy is constant.
        let answers: Vec<bool> = (0..32)
            .map(|s| {
                Oracle::new(&OracleModel::adversarial(Policy::SeededHash, s)).answer(&a).unwrap()
            })
            .collect();
        assert!(answers.iter().any(|&x| x) && answers.iter().any(|&x| !x));
    }

    #[test]
    fn memoizing_replays_first_answer() {
        let gap = query(5, 8);
        let model = OracleModel::memoizing(OracleModel::adversarial(Policy::Alternating, 0));
        let mut o = Oracle::new(&model);
        let first = o.answer(&gap).unwrap();
        let other_gap = query(6, 8);
        o.answer(&other_gap).unwrap();
        assert_eq!(o.answer(&gap).unwrap(), first);
        assert_eq!(o.answer(&gap).unwrap(), first);
    }

    #[test]
    fn empty_log_reconstructs_to_always_no_on_gap() {
        let mut lang = reconstruct_consistent_language(&QueryLog::default()).unwrap();
        assert!(!lang.answer(&query(5, 8)).unwrap());
        assert!(lang.answer(&query(8, 8)).unwrap());
        assert!(!lang.answer(&query(2, 8)).unwrap());
    }

    #[test]
    fn logged_gap_answer_replays() {
        let model = OracleModel::memoizing(OracleModel::adversarial(Policy::AlwaysYes, 0));
        let mut o = Oracle::new(&model).logged();
        let gap = query(5, 8);
        assert!(o.answer(&gap).unwrap());
        let log = o.take_log().unwrap();
        assert_eq!(log.len(), 1);
        let mut lang = reconstruct_consistent_language(&log).unwrap();
        assert!(lang.answer(&query(5, 8)).unwrap());

        let mut from_text = ConsistentLanguage::from_json_lines(&log.to_json_lines()).unwrap();
        assert!(from_text.answer(&query(5, 8)).unwrap());
    }

    #[test]
    fn conflicting_log_is_invalid() {
        let gap = query(5, 8);
        let mut log = QueryLog::default();
        log.push(LogEntry { query: gap.clone(), answer: true, class: PromiseClass::Gap });
        log.push(LogEntry { query: gap, answer: false, class: PromiseClass::Gap });
        assert!(matches!(reconstruct_consistent_language(&log), Err(Error::InvalidLog(_))));

        let mut forced = QueryLog::default();
        forced.push(LogEntry { query: query(8, 8), answer: false, class: PromiseClass::Yes });
        assert!(reconstruct_consistent_language(&forced).is_err());
    }

    #[test]
    fn json_lines_schema() {
        let mut o = Oracle::new(&OracleModel::Threshold).logged();
        o.answer(&query(5, 8)).unwrap();
        let text = o.log().unwrap().to_json_lines();
        let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
        assert_eq!(v["m"], "8");
        assert_eq!(v["class"], "GAP");
        assert_eq!(v["answer"], 0);
        assert_eq!(v["circuit_hash"].as_str().unwrap().len(), 64);
        assert!(text.starts_with(r#"{"m":"8","circuit_hash":""#));
    }

    #[test]
    fn model_text_round_trip() {
        for model in OracleModel::standard_suite([0, 7]) {
            assert_eq!(model.to_string().parse::<OracleModel>().unwrap(), model);
        }
        assert!("adversarial/sometimes/1".parse::<OracleModel>().is_err());
    }
}
