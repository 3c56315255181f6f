//! Staged circuit engine.
//!
//! A [`Circuit`] is an ordered list of [`StageOp`]s over `n` flat wires. An
//! [`ExecSession`] walks a circuit one stage at a time and keeps every
//! intermediate state, so stepping backward restores the exact earlier
//! snapshot instead of applying an inverse.
//!
//! Gates are applied straight to the statevector ([`apply_matrix`]). The
//! explicit `2^n x 2^n` operator ([`expand_operator`]) is kept as the
//! reference construction and is only built on request.

use std::fmt;

use thiserror::Error;

use crate::mathcore::{format_amplitude, Complex, ComplexMatrix, MathError, UNITARY_TOL};
use crate::quantumcore::{Dims, Gate, QuantumError, QuantumObject};

/// Amplitudes with modulus below this are left out of rendered states.
pub const DISPLAY_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("invalid wires: {0}")]
    Wires(String),

    #[error("capacity exceeded: {qubits} qubits requested, limit is {limit} for {what}{hint}")]
    Capacity {
        qubits: usize,
        limit: usize,
        what: &'static str,
        hint: &'static str,
    },

    #[error("navigation error: {0}")]
    Navigation(&'static str),

    #[error("state error: {0}")]
    State(String),

    #[error("circuit error: {0}")]
    Structure(String),

    #[error(transparent)]
    Quantum(#[from] QuantumError),

    #[error(transparent)]
    Math(#[from] MathError),
}

pub type CircuitResult<T> = Result<T, CircuitError>;

/// Size limits for dense operators and statevectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineLimits {
    pub dense_max_qubits: usize,
    pub statevector_max_qubits: usize,
}

impl Default for EngineLimits {
    fn default() -> Self {
        Self {
            dense_max_qubits: 12,
            statevector_max_qubits: 20,
        }
    }
}

impl EngineLimits {
    pub fn check_statevector(&self, n: usize) -> CircuitResult<()> {
        if n > self.statevector_max_qubits {
            return Err(CircuitError::Capacity {
                qubits: n,
                limit: self.statevector_max_qubits,
                what: "statevector simulation",
                hint: "",
            });
        }
        Ok(())
    }

    pub fn check_dense(&self, n: usize) -> CircuitResult<()> {
        if n > self.dense_max_qubits {
            return Err(CircuitError::Capacity {
                qubits: n,
                limit: self.dense_max_qubits,
                what: "dense operators",
                hint: "; apply the stage to the statevector instead",
            });
        }
        Ok(())
    }
}

/// Wires must be distinct, in range, and match the gate arity.
pub fn check_wires(wires: &[usize], arity: usize, n: usize) -> CircuitResult<()> {
    if wires.len() != arity {
        return Err(CircuitError::Wires(format!(
            "gate acts on {arity} wires, {} given",
            wires.len()
        )));
    }
    check_distinct_in_range(wires, n)
}

fn check_distinct_in_range(wires: &[usize], n: usize) -> CircuitResult<()> {
    for (i, &w) in wires.iter().enumerate() {
        if w >= n {
            return Err(CircuitError::Wires(format!(
                "wire {w} out of range for {n} qubits"
            )));
        }
        if wires[..i].contains(&w) {
            return Err(CircuitError::Wires(format!("wire {w} listed twice")));
        }
    }
    Ok(())
}

/// Bit position of `wire` inside a basis index of an `n`-qubit register.
fn bit_of(wire: usize, n: usize) -> usize {
    n - 1 - wire
}

/// Applies a `2^k x 2^k` matrix to `wires` of an `n`-qubit statevector in
/// place. `wires[0]` is the matrix's most significant input.
///
/// Callers validate `wires`; the matrix size must equal `2^wires.len()`.
pub fn apply_matrix(amps: &mut [Complex], n: usize, matrix: &ComplexMatrix, wires: &[usize]) {
    let k = wires.len();
    let dim = 1usize << k;
    assert_eq!(matrix.shape(), (dim, dim), "matrix does not match wire count");
    assert_eq!(amps.len(), 1usize << n, "statevector length is not 2^n");

    let offsets: Vec<usize> = (0..dim)
        .map(|local| {
            wires.iter().enumerate().fold(0, |acc, (j, &w)| {
                if (local >> (k - 1 - j)) & 1 == 1 {
                    acc | (1 << bit_of(w, n))
                } else {
                    acc
                }
            })
        })
        .collect();
    let mask = offsets[dim - 1];

    let entries = matrix.entries();
    let mut gathered = vec![Complex::new(0.0, 0.0); dim];
    for base in (0..amps.len()).filter(|b| b & mask == 0) {
        for (g, off) in gathered.iter_mut().zip(&offsets) {
            *g = amps[base | off];
        }
        for (row, off) in offsets.iter().enumerate() {
            let coeffs = &entries[row * dim..(row + 1) * dim];
            amps[base | off] = coeffs.iter().zip(&gathered).map(|(m, a)| m * a).sum();
        }
    }
}

/// Explicit `2^n x 2^n` operator acting as `gate` on `wires` and as the
/// identity elsewhere, using the default dense cap.
pub fn expand_operator(gate: &Gate, wires: &[usize], n: usize) -> CircuitResult<ComplexMatrix> {
    expand_operator_with_limits(gate, wires, n, &EngineLimits::default())
}

/// `kron(gate, I)` conjugated by the basis permutation that routes `wires`
/// to the leading positions (remaining wires keep ascending order).
pub fn expand_operator_with_limits(
    gate: &Gate,
    wires: &[usize],
    n: usize,
    limits: &EngineLimits,
) -> CircuitResult<ComplexMatrix> {
    check_wires(wires, gate.arity(), n)?;
    limits.check_dense(n)?;

    let core = gate
        .matrix()
        .kron(&ComplexMatrix::identity(1 << (n - gate.arity())));
    let order: Vec<usize> = wires
        .iter()
        .copied()
        .chain((0..n).filter(|w| !wires.contains(w)))
        .collect();
    let dim = 1usize << n;
    let routed: Vec<usize> = (0..dim)
        .map(|x| {
            order.iter().enumerate().fold(0, |acc, (pos, &w)| {
                acc | (((x >> bit_of(w, n)) & 1) << bit_of(pos, n))
            })
        })
        .collect();

    let mut out = ComplexMatrix::zeros(dim, dim);
    for (x, &rx) in routed.iter().enumerate() {
        for (y, &ry) in routed.iter().enumerate() {
            out.set(x, y, core.get(rx, ry));
        }
    }
    Ok(out)
}

/// What a stage does.
#[derive(Debug, Clone, PartialEq)]
pub enum StageKind {
    /// One gate on `wires` in order.
    Gate(Gate),
    /// A single-qubit gate on each listed wire.
    Broadcast(Gate),
    /// A fixed internal gate sequence shown as one stage.
    Composite(Vec<StageOp>),
}

/// One column of the circuit diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOp {
    kind: StageKind,
    wires: Vec<usize>,
    label: String,
}

impl StageOp {
    pub fn gate(gate: Gate, wires: Vec<usize>) -> Self {
        let label = gate.name().to_string();
        Self {
            kind: StageKind::Gate(gate),
            wires,
            label,
        }
    }

    pub fn broadcast(gate: Gate, wires: Vec<usize>) -> Self {
        let label = gate.name().to_string();
        Self {
            kind: StageKind::Broadcast(gate),
            wires,
            label,
        }
    }

    /// Bundles `ops` into one stage; its wires are the sorted union.
    pub fn composite(label: impl Into<String>, ops: Vec<StageOp>) -> Self {
        let mut wires: Vec<usize> = ops.iter().flat_map(|op| op.wires.iter().copied()).collect();
        wires.sort_unstable();
        wires.dedup();
        Self {
            kind: StageKind::Composite(ops),
            wires,
            label: label.into(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn kind(&self) -> &StageKind {
        &self.kind
    }

    pub fn wires(&self) -> &[usize] {
        &self.wires
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_composite(&self) -> bool {
        matches!(self.kind, StageKind::Composite(_))
    }

    pub fn validate(&self, n: usize) -> CircuitResult<()> {
        match &self.kind {
            StageKind::Gate(g) => check_wires(&self.wires, g.arity(), n),
            StageKind::Broadcast(g) => {
                if g.arity() != 1 {
                    return Err(CircuitError::Wires(format!(
                        "only single-qubit gates broadcast, {} has arity {}",
                        g.name(),
                        g.arity()
                    )));
                }
                if self.wires.is_empty() {
                    return Err(CircuitError::Wires("broadcast needs at least one wire".into()));
                }
                check_distinct_in_range(&self.wires, n)
            }
            StageKind::Composite(ops) => {
                if ops.is_empty() {
                    return Err(CircuitError::Structure(format!(
                        "composite stage {:?} is empty",
                        self.label
                    )));
                }
                ops.iter().try_for_each(|op| op.validate(n))
            }
        }
    }

    /// Applies the stage to an `n`-qubit statevector in place.
    pub fn apply(&self, amps: &mut [Complex], n: usize) {
        match &self.kind {
            StageKind::Gate(g) => apply_matrix(amps, n, g.matrix(), &self.wires),
            StageKind::Broadcast(g) => {
                for &w in &self.wires {
                    apply_matrix(amps, n, g.matrix(), &[w]);
                }
            }
            StageKind::Composite(ops) => {
                for op in ops {
                    op.apply(amps, n);
                }
            }
        }
    }

    /// The stage as one explicit `2^n x 2^n` operator.
    pub fn dense_operator(&self, n: usize, limits: &EngineLimits) -> CircuitResult<ComplexMatrix> {
        match &self.kind {
            StageKind::Gate(g) => expand_operator_with_limits(g, &self.wires, n, limits),
            StageKind::Broadcast(g) => {
                let mut acc = ComplexMatrix::identity(1 << n);
                for &w in &self.wires {
                    acc = expand_operator_with_limits(g, &[w], n, limits)?.matmul(&acc)?;
                }
                Ok(acc)
            }
            StageKind::Composite(ops) => {
                limits.check_dense(n)?;
                let mut acc = ComplexMatrix::identity(1 << n);
                for op in ops {
                    acc = op.dense_operator(n, limits)?.matmul(&acc)?;
                }
                Ok(acc)
            }
        }
    }
}

/// An ordered list of stages over `qubit_count` wires.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    name: String,
    qubit_count: usize,
    stages: Vec<StageOp>,
    measured: bool,
}

impl Circuit {
    pub fn new(name: impl Into<String>, qubit_count: usize) -> CircuitResult<Self> {
        if qubit_count == 0 {
            return Err(CircuitError::Structure("a circuit needs at least one qubit".into()));
        }
        Ok(Self {
            name: name.into(),
            qubit_count,
            stages: Vec::new(),
            measured: false,
        })
    }

    pub fn push(&mut self, stage: StageOp) -> CircuitResult<()> {
        if self.measured {
            return Err(CircuitError::Structure(
                "no stages may follow the final measurement".into(),
            ));
        }
        stage.validate(self.qubit_count)?;
        self.stages.push(stage);
        Ok(())
    }

    pub fn with_stage(mut self, stage: StageOp) -> CircuitResult<Self> {
        self.push(stage)?;
        Ok(self)
    }

    /// Marks the circuit as ending in a computational-basis measurement.
    pub fn set_measured(&mut self, measured: bool) {
        self.measured = measured;
    }

    pub fn measured(&self) -> bool {
        self.measured
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn stages(&self) -> &[StageOp] {
        &self.stages
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn stage_labels(&self) -> Vec<String> {
        self.stages.iter().map(|s| s.label.clone()).collect()
    }

    /// Product of every stage operator, last stage leftmost.
    pub fn dense_unitary(&self, limits: &EngineLimits) -> CircuitResult<ComplexMatrix> {
        limits.check_dense(self.qubit_count)?;
        let mut acc = ComplexMatrix::identity(1 << self.qubit_count);
        for stage in &self.stages {
            acc = stage.dense_operator(self.qubit_count, limits)?.matmul(&acc)?;
        }
        Ok(acc)
    }
}

/// The state after `stage_index` stages (0 is the initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub stage_index: usize,
    pub state: QuantumObject,
}

impl Snapshot {
    pub fn amplitudes(&self) -> &[Complex] {
        self.state.data().entries()
    }

    pub fn qubit_count(&self) -> usize {
        self.amplitudes().len().trailing_zeros() as usize
    }
}

impl fmt::Display for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_amplitudes(self.amplitudes()))
    }
}

/// `|b0 b1 ...>` for a basis index, wire 0 leftmost.
pub fn ket_label(index: usize, n: usize) -> String {
    let bits: String = (0..n)
        .map(|w| if (index >> bit_of(w, n)) & 1 == 1 { '1' } else { '0' })
        .collect();
    format!("|{bits}⟩")
}

/// One `|bits⟩ re ± im i` line per amplitude at or above [`DISPLAY_CUTOFF`].
pub fn render_amplitudes(amps: &[Complex]) -> String {
    let n = amps.len().trailing_zeros() as usize;
    amps.iter()
        .enumerate()
        .filter(|(_, a)| a.norm() >= DISPLAY_CUTOFF)
        .map(|(i, a)| format!("{} {}\n", ket_label(i, n), format_amplitude(*a)))
        .collect()
}

/// `|0...0>` on `n` qubits.
pub fn zero_state(n: usize) -> QuantumObject {
    let mut amps = vec![Complex::new(0.0, 0.0); 1 << n];
    amps[0] = Complex::ONE;
    state_object(amps)
}

/// Wraps `2^n` amplitudes as an `n`-qubit ket.
pub fn state_object(amps: Vec<Complex>) -> QuantumObject {
    assert!(amps.len().is_power_of_two(), "statevector length must be 2^n");
    let n = amps.len().trailing_zeros() as usize;
    let data = ComplexMatrix::column(amps).expect("nonempty statevector");
    QuantumObject::from_parts(Dims::qubits(n), data)
}

/// Single-owner stepping state for one circuit.
#[derive(Debug, Clone)]
pub struct ExecSession {
    circuit: Circuit,
    history: Vec<Snapshot>,
}

impl ExecSession {
    /// Starts at `|0...0>`.
    pub fn from_zero(circuit: Circuit) -> CircuitResult<Self> {
        EngineLimits::default().check_statevector(circuit.qubit_count())?;
        let initial = zero_state(circuit.qubit_count());
        Self::new(circuit, initial)
    }

    pub fn new(circuit: Circuit, initial: QuantumObject) -> CircuitResult<Self> {
        Self::with_limits(circuit, initial, &EngineLimits::default())
    }

    pub fn with_limits(
        circuit: Circuit,
        initial: QuantumObject,
        limits: &EngineLimits,
    ) -> CircuitResult<Self> {
        let n = circuit.qubit_count();
        limits.check_statevector(n)?;
        if !initial.is_ket() || initial.shape().0 != 1 << n {
            let (rows, cols) = initial.shape();
            return Err(CircuitError::State(format!(
                "initial state must be a {}x1 column, got {rows}x{cols}",
                1usize << n
            )));
        }
        let norm = initial.norm()?;
        if (norm * norm - 1.0).abs() > UNITARY_TOL {
            return Err(CircuitError::State(format!(
                "initial state is not normalized (norm {norm})"
            )));
        }
        let state = state_object(initial.into_data().into_entries());
        Ok(Self {
            circuit,
            history: vec![Snapshot {
                stage_index: 0,
                state,
            }],
        })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn cursor(&self) -> usize {
        self.history.len() - 1
    }

    pub fn stage_count(&self) -> usize {
        self.circuit.stage_count()
    }

    pub fn current(&self) -> &Snapshot {
        self.history.last().expect("history always holds the initial state")
    }

    pub fn history(&self) -> &[Snapshot] {
        &self.history
    }

    pub fn at_end(&self) -> bool {
        self.cursor() == self.stage_count()
    }

    /// Applies the next stage and records the result.
    pub fn step_forward(&mut self) -> CircuitResult<&Snapshot> {
        let cursor = self.cursor();
        let stage = self
            .circuit
            .stages
            .get(cursor)
            .ok_or(CircuitError::Navigation("already past the final stage"))?;
        let mut amps = self.current().amplitudes().to_vec();
        stage.apply(&mut amps, self.circuit.qubit_count);
        self.history.push(Snapshot {
            stage_index: cursor + 1,
            state: state_object(amps),
        });
        Ok(self.current())
    }

    /// Drops the latest snapshot, restoring the previous one exactly.
    pub fn step_backward(&mut self) -> CircuitResult<&Snapshot> {
        if self.cursor() == 0 {
            return Err(CircuitError::Navigation("already at the initial state"));
        }
        self.history.pop();
        Ok(self.current())
    }

    /// Back to the initial state with history cleared.
    pub fn restart(&mut self) {
        self.history.truncate(1);
    }

    pub fn run_to_end(&mut self) -> CircuitResult<()> {
        while !self.at_end() {
            self.step_forward()?;
        }
        Ok(())
    }

    pub fn into_history(self) -> Vec<Snapshot> {
        self.history
    }
}

/// Snapshots for stages `0..=K`, i.e. a fold of [`ExecSession::step_forward`].
pub fn run_all(circuit: &Circuit, initial: &QuantumObject) -> CircuitResult<Vec<Snapshot>> {
    let mut session = ExecSession::new(circuit.clone(), initial.clone())?;
    session.run_to_end()?;
    Ok(session.into_history())
}
