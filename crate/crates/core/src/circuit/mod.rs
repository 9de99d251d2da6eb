//! Boolean circuit IR.
//!
//! A [`Circuit`] is a gate list in topological order: every gate refers only
//! to gates that precede it, so the graph is acyclic by construction and a
//! single forward pass evaluates it. Evaluation over all assignments is
//! bit-sliced, 64 assignments per machine word.

mod compose;
mod count;
mod text;

pub use compose::{build_downset, build_rank_pairs, equals_constant, TensorPower};
pub use count::{count_exact, count_exact_with_cap, count_u64, truth_table, TruthTable, DEFAULT_CAP};
pub use text::{parse_circuit, parse_order, serialize_circuit, serialize_order};

use crate::bits::BitString;
use crate::error::{rejected, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GateRef(pub(crate) u32);

impl GateRef {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Input(usize),
    Const(bool),
    Not(GateRef),
    And(GateRef, GateRef),
    Or(GateRef, GateRef),
    Xor(GateRef, GateRef),
}

impl Gate {
    fn operands(&self) -> impl Iterator<Item = GateRef> {
        let (a, b) = match *self {
            Gate::Input(_) | Gate::Const(_) => (None, None),
            Gate::Not(a) => (Some(a), None),
            Gate::And(a, b) | Gate::Or(a, b) | Gate::Xor(a, b) => (Some(a), Some(b)),
        };
        a.into_iter().chain(b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    num_inputs: usize,
    gates: Vec<Gate>,
    output: GateRef,
}

impl Circuit {
    /// Validates reference order, input indices, and the output reference.
    pub fn new(num_inputs: usize, gates: Vec<Gate>, output: GateRef) -> Result<Self> {
        for (i, gate) in gates.iter().enumerate() {
            if let Gate::Input(j) = *gate {
                if j >= num_inputs {
                    return Err(rejected(format!(
                        "gate g{i} reads input {j} but the circuit has {num_inputs} inputs"
                    )));
                }
            }
            if let Some(r) = gate.operands().find(|r| r.index() >= i) {
                return Err(rejected(format!(
                    "gate g{i} references g{} which is not an earlier gate",
                    r.index()
                )));
            }
        }
        if output.index() >= gates.len() {
            return Err(rejected(format!("output g{} does not exist", output.index())));
        }
        Ok(Circuit { num_inputs, gates, output })
    }

    pub fn constant(num_inputs: usize, value: bool) -> Self {
        Circuit { num_inputs, gates: vec![Gate::Const(value)], output: GateRef(0) }
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> GateRef {
        self.output
    }

    pub fn eval(&self, assignment: &[bool]) -> Result<bool> {
        if assignment.len() != self.num_inputs {
            return Err(rejected(format!(
                "assignment has {} bits, circuit expects {}",
                assignment.len(),
                self.num_inputs
            )));
        }
        let mut values: Vec<bool> = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let v = match *gate {
                Gate::Input(j) => assignment[j],
                Gate::Const(b) => b,
                Gate::Not(a) => !values[a.index()],
                Gate::And(a, b) => values[a.index()] & values[b.index()],
                Gate::Or(a, b) => values[a.index()] | values[b.index()],
                Gate::Xor(a, b) => values[a.index()] ^ values[b.index()],
            };
            values.push(v);
        }
        Ok(values[self.output.index()])
    }

    pub fn eval_bits(&self, assignment: &BitString) -> Result<bool> {
        self.eval(assignment.bits())
    }

    /// Evaluates 64 assignments at once; `inputs[j]` holds input `j` per lane.
    pub(crate) fn eval_words(&self, inputs: &[u64], scratch: &mut Vec<u64>) -> u64 {
        scratch.clear();
        for gate in &self.gates {
            let v = match *gate {
                Gate::Input(j) => inputs[j],
                Gate::Const(b) => {
                    if b {
                        !0
                    } else {
                        0
                    }
                }
                Gate::Not(a) => !scratch[a.index()],
                Gate::And(a, b) => scratch[a.index()] & scratch[b.index()],
                Gate::Or(a, b) => scratch[a.index()] | scratch[b.index()],
                Gate::Xor(a, b) => scratch[a.index()] ^ scratch[b.index()],
            };
            scratch.push(v);
        }
        scratch[self.output.index()]
    }

    /// The subset `{x : x_index = value, c(x)}` at the same arity.
    ///
    /// Every `INPUT index` gate becomes `CONST value` and the output is
    /// guarded by the literal `x_index = value`, so counts split exactly:
    /// `count(c) = count(c|0) + count(c|1)`. Without the guard a restricted
    /// set circuit would also accept the flipped point, which breaks rank sums.
    pub fn restrict(&self, index: usize, value: bool) -> Result<Circuit> {
        if index >= self.num_inputs {
            return Err(rejected(format!(
                "cannot restrict input {index} of a circuit with {} inputs",
                self.num_inputs
            )));
        }
        let mut gates: Vec<Gate> = self
            .gates
            .iter()
            .map(|g| match *g {
                Gate::Input(j) if j == index => Gate::Const(value),
                other => other,
            })
            .collect();
        let mut push = |g: Gate| {
            gates.push(g);
            GateRef((gates.len() - 1) as u32)
        };
        let mut literal = push(Gate::Input(index));
        if !value {
            literal = push(Gate::Not(literal));
        }
        let output = push(Gate::And(self.output, literal));
        Ok(Circuit { num_inputs: self.num_inputs, gates, output })
    }
}

/// Incremental construction of a [`Circuit`].
///
/// Input gates are created on first use and shared afterwards.
#[derive(Debug)]
pub struct CircuitBuilder {
    num_inputs: usize,
    gates: Vec<Gate>,
    inputs: Vec<Option<GateRef>>,
    consts: [Option<GateRef>; 2],
}

impl CircuitBuilder {
    pub fn new(num_inputs: usize) -> Self {
        CircuitBuilder {
            num_inputs,
            gates: Vec::new(),
            inputs: vec![None; num_inputs],
            consts: [None, None],
        }
    }

    fn push(&mut self, gate: Gate) -> GateRef {
        let r = GateRef(self.gates.len() as u32);
        self.gates.push(gate);
        r
    }

    pub fn input(&mut self, j: usize) -> GateRef {
        assert!(j < self.num_inputs, "input {j} out of range");
        if let Some(r) = self.inputs[j] {
            return r;
        }
        let r = self.push(Gate::Input(j));
        self.inputs[j] = Some(r);
        r
    }

    pub fn constant(&mut self, value: bool) -> GateRef {
        if let Some(r) = self.consts[value as usize] {
            return r;
        }
        let r = self.push(Gate::Const(value));
        self.consts[value as usize] = Some(r);
        r
    }

    pub fn not(&mut self, a: GateRef) -> GateRef {
        self.push(Gate::Not(a))
    }

    pub fn and(&mut self, a: GateRef, b: GateRef) -> GateRef {
        self.push(Gate::And(a, b))
    }

    pub fn or(&mut self, a: GateRef, b: GateRef) -> GateRef {
        self.push(Gate::Or(a, b))
    }

    pub fn xor(&mut self, a: GateRef, b: GateRef) -> GateRef {
        self.push(Gate::Xor(a, b))
    }

    pub fn xnor(&mut self, a: GateRef, b: GateRef) -> GateRef {
        let x = self.xor(a, b);
        self.not(x)
    }

    /// `if sel { a } else { b }`
    pub fn mux(&mut self, sel: GateRef, a: GateRef, b: GateRef) -> GateRef {
        let t = self.and(sel, a);
        let ns = self.not(sel);
        let f = self.and(ns, b);
        self.or(t, f)
    }

    /// Balanced AND tree; the empty conjunction is `CONST 1`.
    pub fn and_all(&mut self, refs: &[GateRef]) -> GateRef {
        self.reduce(refs, true, CircuitBuilder::and)
    }

    /// Balanced OR tree; the empty disjunction is `CONST 0`.
    pub fn or_all(&mut self, refs: &[GateRef]) -> GateRef {
        self.reduce(refs, false, CircuitBuilder::or)
    }

    /// Balanced XOR tree; the empty parity is `CONST 0`.
    pub fn xor_all(&mut self, refs: &[GateRef]) -> GateRef {
        self.reduce(refs, false, CircuitBuilder::xor)
    }

    fn reduce(
        &mut self,
        refs: &[GateRef],
        empty: bool,
        op: fn(&mut Self, GateRef, GateRef) -> GateRef,
    ) -> GateRef {
        match refs.len() {
            0 => self.constant(empty),
            1 => refs[0],
            len => {
                let (lo, hi) = refs.split_at(len / 2);
                let a = self.reduce(lo, empty, op);
                let b = self.reduce(hi, empty, op);
                op(self, a, b)
            }
        }
    }

    /// Copies `circuit` into this builder with its input `j` wired to
    /// `wiring[j]`, returning the copy's output.
    pub fn embed(&mut self, circuit: &Circuit, wiring: &[GateRef]) -> GateRef {
        assert_eq!(wiring.len(), circuit.num_inputs(), "embed wiring arity");
        let mut map = Vec::with_capacity(circuit.gates.len());
        for gate in &circuit.gates {
            let m = |r: GateRef| map[r.index()];
            let r = match *gate {
                Gate::Input(j) => wiring[j],
                Gate::Const(b) => self.constant(b),
                Gate::Not(a) => {
                    let a = m(a);
                    self.not(a)
                }
                Gate::And(a, b) => {
                    let (a, b) = (m(a), m(b));
                    self.and(a, b)
                }
                Gate::Or(a, b) => {
                    let (a, b) = (m(a), m(b));
                    self.or(a, b)
                }
                Gate::Xor(a, b) => {
                    let (a, b) = (m(a), m(b));
                    self.xor(a, b)
                }
            };
            map.push(r);
        }
        map[circuit.output.index()]
    }

    pub fn finish(self, output: GateRef) -> Circuit {
        Circuit::new(self.num_inputs, self.gates, output)
            .expect("builder only emits backward references")
    }
}

/// A circuit on `2n` inputs read as the relation `x < y iff E(x, y) = 1`,
/// with `x` on inputs `0..n` and `y` on inputs `n..2n`.
///
/// Being a strict linear order is not an invariant; see [`crate::rank::check_order`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderCircuit {
    n: usize,
    circuit: Circuit,
}

impl OrderCircuit {
    pub fn new(n: usize, circuit: Circuit) -> Result<Self> {
        if n == 0 {
            return Err(rejected("order circuits need n >= 1"));
        }
        if circuit.num_inputs() != 2 * n {
            return Err(rejected(format!(
                "order circuit over n={n} needs {} inputs, got {}",
                2 * n,
                circuit.num_inputs()
            )));
        }
        Ok(OrderCircuit { n, circuit })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn less(&self, x: &BitString, y: &BitString) -> Result<bool> {
        if x.len() != self.n || y.len() != self.n {
            return Err(rejected(format!("order elements must have {} bits", self.n)));
        }
        self.circuit.eval_bits(&x.concat(y))
    }
}
