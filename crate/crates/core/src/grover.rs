//! Grover search over `N = 2^k` items.
//!
//! The traced circuit uses `k` data wires followed by one ancilla wire:
//!
//! 1. one Hadamard stage per data wire,
//! 2. NOT then Hadamard on the ancilla (prepares `|->`),
//! 3. per iteration six stages: the oracle (X-conjugated multi-controlled
//!    NOT onto the ancilla, shown as one stage), then H, NOT,
//!    controlled-PHASEFLIP, NOT, H on the data wires.
//!
//! With `k = 2` and two iterations this gives 16 stages with the oracle at
//! stage 5. The diffusion stages realize `-(2|p0><p0| - I)`; the global sign
//! is left alone.

use std::f64::consts::PI;

use thiserror::Error;

use crate::circuit::{zero_state, Circuit, CircuitError, EngineLimits, ExecSession, Snapshot, StageOp};
use crate::mathcore::{Complex, ComplexMatrix};
use crate::quantumcore::{controlled, Gate, StandardGate};

/// Label given to oracle stages.
pub const ORACLE_LABEL: &str = "oracle";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroverError {
    #[error("range error: {0}")]
    Range(String),

    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

pub type GroverResult<T> = Result<T, GroverError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroverSpec {
    pub data_qubits: usize,
    pub target: usize,
    pub iterations: usize,
}

impl GroverSpec {
    pub fn new(data_qubits: usize, target: usize, iterations: usize) -> GroverResult<Self> {
        let spec = Self {
            data_qubits,
            target,
            iterations,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Defaults to 2 iterations for `k = 2`, otherwise [`optimal_iterations`].
    pub fn with_default_iterations(data_qubits: usize, target: usize) -> GroverResult<Self> {
        check_data_qubits(data_qubits)?;
        let iterations = if data_qubits == 2 {
            2
        } else {
            optimal_iterations(1 << data_qubits)
        };
        Self::new(data_qubits, target, iterations)
    }

    pub fn validate(&self) -> GroverResult<()> {
        check_data_qubits(self.data_qubits)?;
        check_target(self.target, self.data_qubits)?;
        if self.iterations == 0 {
            return Err(GroverError::Range("iterations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn item_count(&self) -> usize {
        1 << self.data_qubits
    }

    /// Data wires plus the ancilla.
    pub fn wire_count(&self) -> usize {
        self.data_qubits + 1
    }

    /// Stages before the first oracle.
    pub fn prep_stages(&self) -> usize {
        self.data_qubits + 2
    }

    /// Global stage index (1-based) that completes iteration `j`.
    pub fn iteration_end_stage(&self, j: usize) -> usize {
        self.prep_stages() + 6 * j
    }
}

fn check_data_qubits(k: usize) -> GroverResult<()> {
    // capacity is enforced later by the gate and statevector limits
    if k == 0 || k >= usize::BITS as usize - 1 {
        return Err(GroverError::Range(format!(
            "data qubit count must be at least 1, got {k}"
        )));
    }
    Ok(())
}

fn check_target(w: usize, k: usize) -> GroverResult<()> {
    if w >> k != 0 {
        return Err(GroverError::Range(format!(
            "target {w} out of range for {} items",
            1usize << k
        )));
    }
    Ok(())
}

/// `I - 2|w><w|` on `2^k` items.
pub fn oracle_operator(w: usize, k: usize) -> GroverResult<ComplexMatrix> {
    check_data_qubits(k)?;
    check_target(w, k)?;
    let mut m = ComplexMatrix::identity(1 << k);
    m.set(w, w, Complex::new(-1.0, 0.0));
    Ok(m)
}

/// `2|p0><p0| - I` with `|p0>` the uniform superposition: diagonal
/// `2/N - 1`, off-diagonal `2/N`.
pub fn diffusion_operator(k: usize) -> GroverResult<ComplexMatrix> {
    check_data_qubits(k)?;
    let n = 1usize << k;
    let off = 2.0 / n as f64;
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = if i == j { off - 1.0 } else { off };
            m.set(i, j, Complex::new(v, 0.0));
        }
    }
    Ok(m)
}

/// Analytic target probability after `j` iterations on `n_items` items,
/// `sin^2((2j + 1) * asin(1 / sqrt(N)))`.
pub fn success_probability(n_items: usize, j: usize) -> f64 {
    let theta = (1.0 / (n_items as f64).sqrt()).asin();
    ((2 * j + 1) as f64 * theta).sin().powi(2)
}

/// Iteration count maximizing [`success_probability`] over
/// `1..=ceil(pi/4 * sqrt(N)) + 1`; ties go to the smaller count.
pub fn optimal_iterations(n_items: usize) -> usize {
    let upper = (PI / 4.0 * (n_items as f64).sqrt()).ceil() as usize + 1;
    let mut best = 1;
    let mut best_p = success_probability(n_items, 1);
    for j in 2..=upper {
        let p = success_probability(n_items, j);
        if p > best_p + 1e-12 {
            best = j;
            best_p = p;
        }
    }
    best
}

/// Bit of `target` carried by data wire `wire` (wire 0 is most significant).
fn target_bit(target: usize, wire: usize, k: usize) -> bool {
    (target >> (k - 1 - wire)) & 1 == 1
}

/// The oracle as one composite stage on `k` data wires plus the ancilla at
/// wire `k`: flip the ancilla when the data register holds `target`.
pub fn oracle_stage(k: usize, target: usize) -> GroverResult<StageOp> {
    check_data_qubits(k)?;
    check_target(target, k)?;
    let not = StandardGate::Not.gate();
    let zero_wires: Vec<usize> = (0..k).filter(|&w| !target_bit(target, w, k)).collect();
    let mcx = controlled(&not, k).map_err(CircuitError::from)?;

    let mut ops = Vec::new();
    if !zero_wires.is_empty() {
        ops.push(StageOp::broadcast(not.clone(), zero_wires.clone()));
    }
    ops.push(StageOp::gate(mcx, (0..=k).collect()));
    if !zero_wires.is_empty() {
        ops.push(StageOp::broadcast(not, zero_wires));
    }
    Ok(StageOp::composite(ORACLE_LABEL, ops))
}

/// The five diffusion stages on data wires `0..k`.
pub fn diffusion_stages(k: usize) -> GroverResult<Vec<StageOp>> {
    check_data_qubits(k)?;
    let data: Vec<usize> = (0..k).collect();
    let h = StandardGate::Hadamard.gate();
    let not = StandardGate::Not.gate();
    let phase_core: Gate = if k == 1 {
        StandardGate::PhaseFlip.gate()
    } else {
        controlled(&StandardGate::PhaseFlip.gate(), k - 1).map_err(CircuitError::from)?
    };
    Ok(vec![
        StageOp::broadcast(h.clone(), data.clone()).with_label("H"),
        StageOp::broadcast(not.clone(), data.clone()).with_label("NOT"),
        StageOp::gate(phase_core, data.clone()).with_label("PHASEFLIP"),
        StageOp::broadcast(not, data.clone()).with_label("NOT"),
        StageOp::broadcast(h, data).with_label("H"),
    ])
}

/// Builds the traced search circuit on `k + 1` wires.
pub fn grover_circuit(spec: &GroverSpec) -> GroverResult<Circuit> {
    spec.validate()?;
    let k = spec.data_qubits;
    let ancilla = k;
    let h = StandardGate::Hadamard.gate();
    let not = StandardGate::Not.gate();

    let mut c = Circuit::new("grover", spec.wire_count())?;
    for w in 0..k {
        c.push(StageOp::gate(h.clone(), vec![w]).with_label("H"))?;
    }
    c.push(StageOp::gate(not, vec![ancilla]).with_label("NOT"))?;
    c.push(StageOp::gate(h, vec![ancilla]).with_label("H"))?;
    let oracle = oracle_stage(k, spec.target)?;
    let diffusion = diffusion_stages(k)?;
    for _ in 0..spec.iterations {
        c.push(oracle.clone())?;
        for stage in &diffusion {
            c.push(stage.clone())?;
        }
    }
    c.set_measured(true);
    Ok(c)
}

/// Data-register probabilities: the ancilla (last wire, least significant
/// bit) is summed out.
pub fn data_probabilities(amps: &[Complex]) -> Vec<f64> {
    amps.chunks(2)
        .map(|pair| pair.iter().map(|a| a.norm_sqr()).sum())
        .collect()
}

/// Target probability at the end of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationCheckpoint {
    pub iteration: usize,
    pub stage_index: usize,
    pub target_probability: f64,
    pub analytic_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroverTrace {
    pub spec: GroverSpec,
    pub stage_labels: Vec<String>,
    pub snapshots: Vec<Snapshot>,
    /// One entry per snapshot.
    pub data_probabilities: Vec<Vec<f64>>,
    pub checkpoints: Vec<IterationCheckpoint>,
}

/// Earliest checkpoint with the highest target probability.
fn best_of(checkpoints: &[IterationCheckpoint]) -> &IterationCheckpoint {
    checkpoints
        .iter()
        .reduce(|best, c| {
            if c.target_probability > best.target_probability + 1e-12 {
                c
            } else {
                best
            }
        })
        .expect("at least one iteration")
}

/// The best checkpoint when the circuit ends measurably below it, i.e. it
/// over-rotated past the target.
fn overshoot_of(checkpoints: &[IterationCheckpoint], final_probability: f64) -> Option<&IterationCheckpoint> {
    let best = best_of(checkpoints);
    (best.target_probability > final_probability + 1e-9).then_some(best)
}

fn checkpoint(spec: &GroverSpec, iteration: usize, data_probs: &[f64]) -> IterationCheckpoint {
    IterationCheckpoint {
        iteration,
        stage_index: spec.iteration_end_stage(iteration),
        target_probability: data_probs[spec.target],
        analytic_probability: success_probability(spec.item_count(), iteration),
    }
}

impl GroverTrace {
    pub fn final_data_probabilities(&self) -> &[f64] {
        self.data_probabilities.last().expect("trace is never empty")
    }

    pub fn final_target_probability(&self) -> f64 {
        self.final_data_probabilities()[self.spec.target]
    }

    /// The checkpoint with the highest target probability (earliest on ties).
    pub fn best_checkpoint(&self) -> &IterationCheckpoint {
        best_of(&self.checkpoints)
    }

    /// Set when the circuit ends below the best probability reached at an
    /// earlier iteration.
    pub fn overshoot(&self) -> Option<&IterationCheckpoint> {
        overshoot_of(&self.checkpoints, self.final_target_probability())
    }
}

/// Runs the circuit from `|0...0>` and records every snapshot together with
/// the ancilla-marginalized data probabilities.
pub fn grover_trace(spec: &GroverSpec) -> GroverResult<GroverTrace> {
    let circuit = grover_circuit(spec)?;
    let stage_labels = circuit.stage_labels();
    let mut session = ExecSession::from_zero(circuit)?;
    session.run_to_end()?;
    let snapshots = session.into_history();
    let data_probabilities: Vec<Vec<f64>> = snapshots
        .iter()
        .map(|s| data_probabilities(s.amplitudes()))
        .collect();
    let checkpoints = (1..=spec.iterations)
        .map(|j| checkpoint(spec, j, &data_probabilities[spec.iteration_end_stage(j)]))
        .collect();
    Ok(GroverTrace {
        spec: *spec,
        stage_labels,
        snapshots,
        data_probabilities,
        checkpoints,
    })
}

/// Outcome of a run that keeps only the final state.
#[derive(Debug, Clone, PartialEq)]
pub struct GroverRun {
    pub spec: GroverSpec,
    pub stage_labels: Vec<String>,
    pub final_state: Vec<Complex>,
    pub checkpoints: Vec<IterationCheckpoint>,
}

impl GroverRun {
    pub fn final_data_probabilities(&self) -> Vec<f64> {
        data_probabilities(&self.final_state)
    }

    pub fn final_target_probability(&self) -> f64 {
        self.final_data_probabilities()[self.spec.target]
    }

    pub fn best_checkpoint(&self) -> &IterationCheckpoint {
        best_of(&self.checkpoints)
    }

    pub fn overshoot(&self) -> Option<&IterationCheckpoint> {
        overshoot_of(&self.checkpoints, self.final_target_probability())
    }
}

/// Same checkpoints as [`grover_trace`] in memory for one statevector.
pub fn grover_run(spec: &GroverSpec) -> GroverResult<GroverRun> {
    let circuit = grover_circuit(spec)?;
    let n = circuit.qubit_count();
    EngineLimits::default().check_statevector(n)?;
    let mut amps = zero_state(n).into_data().into_entries();
    let mut checkpoints = Vec::with_capacity(spec.iterations);
    for (i, stage) in circuit.stages().iter().enumerate() {
        stage.apply(&mut amps, n);
        let j = checkpoints.len() + 1;
        if j <= spec.iterations && i + 1 == spec.iteration_end_stage(j) {
            checkpoints.push(checkpoint(spec, j, &data_probabilities(&amps)));
        }
    }
    Ok(GroverRun {
        spec: *spec,
        stage_labels: circuit.stage_labels(),
        final_state: amps,
        checkpoints,
    })
}
