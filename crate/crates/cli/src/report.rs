//! Command reports. Text output is rendered from the same values that are
//! serialized as JSON, so both formats carry identical numbers.

use std::fmt::Write;

use qdesk_core::circuit::{ket_label, render_amplitudes};
use qdesk_core::quantumcore::{Dims, Histogram};
use qdesk_core::state_json::StateJson;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateBlock {
    /// 0 is the initial state.
    pub stage: usize,
    pub label: Option<String>,
    pub state: StateJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Count {
    pub index: usize,
    pub ket: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub shots: u64,
    pub seed: u64,
    pub counts: Vec<Count>,
}

impl Measurement {
    pub fn from_histogram(h: &Histogram, qubits: usize, shots: u64, seed: u64) -> Self {
        Self {
            shots,
            seed,
            counts: h
                .iter()
                .map(|(&index, &count)| Count {
                    index,
                    ket: ket_label(index, qubits),
                    count,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub circuit: String,
    pub qubits: usize,
    pub stage_count: usize,
    pub measured: bool,
    pub states: Vec<StateBlock>,
    pub measurement: Option<Measurement>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointReport {
    pub iteration: usize,
    pub stage: usize,
    pub target_probability: f64,
    pub analytic_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroverReport {
    pub data_qubits: usize,
    pub items: usize,
    pub target: usize,
    pub iterations: usize,
    pub stage_labels: Vec<String>,
    pub states: Vec<StateBlock>,
    pub checkpoints: Vec<CheckpointReport>,
    pub final_data_probabilities: Vec<f64>,
    pub final_target_probability: f64,
    /// Outcomes of the data register; the ancilla is discarded.
    pub measurement: Option<Measurement>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramReport {
    pub out: String,
    pub qubits: usize,
    pub groups: usize,
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

fn write_block(out: &mut String, block: &StateBlock) {
    match (block.stage, &block.label) {
        (0, _) => out.push_str("Initial state:\n"),
        (s, Some(label)) => writeln!(out, "State after stage {s} ({label}):").unwrap(),
        (s, None) => writeln!(out, "State after stage {s}:").unwrap(),
    }
    writeln!(
        out,
        "Quantum object, Hilbert space dimensions {}",
        Dims::qubits(block.state.qubits)
    )
    .unwrap();
    out.push_str(&render_amplitudes(&block.state.amplitudes()));
}

fn write_blocks(out: &mut String, blocks: &[StateBlock]) {
    for block in blocks {
        out.push('\n');
        write_block(out, block);
    }
}

fn write_measurement(out: &mut String, m: &Measurement, what: &str) {
    writeln!(out, "\nMeasurement of {what}: {} shots, seed {}", m.shots, m.seed).unwrap();
    for c in &m.counts {
        writeln!(out, "{} {}", c.ket, c.count).unwrap();
    }
}

fn write_notes(out: &mut String, notes: &[String]) {
    if !notes.is_empty() {
        out.push('\n');
    }
    for note in notes {
        writeln!(out, "note: {note}").unwrap();
    }
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "Circuit {}: {}, {}{}\n",
            self.circuit,
            plural(self.qubits, "qubit"),
            plural(self.stage_count, "stage"),
            if self.measured { ", then measure" } else { "" }
        );
        write_blocks(&mut out, &self.states);
        if let Some(m) = &self.measurement {
            write_measurement(&mut out, m, "all qubits");
        }
        write_notes(&mut out, &self.notes);
        out
    }
}

impl GroverReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "Grover search for item {} of {} ({}): {} plus ancilla, {}, {} then measure\n",
            self.target,
            self.items,
            ket_label(self.target, self.data_qubits),
            plural(self.data_qubits, "data qubit"),
            plural(self.iterations, "iteration"),
            plural(self.stage_labels.len(), "stage"),
        );
        write_blocks(&mut out, &self.states);
        out.push('\n');
        for c in &self.checkpoints {
            writeln!(
                out,
                "Iteration {} ends at stage {}: target probability {:.10} (analytic {:.10})",
                c.iteration, c.stage, c.target_probability, c.analytic_probability
            )
            .unwrap();
        }
        out.push_str("\nFinal data-register probabilities:\n");
        for (i, p) in self.final_data_probabilities.iter().enumerate() {
            writeln!(out, "{} {p:.10}", ket_label(i, self.data_qubits)).unwrap();
        }
        writeln!(
            out,
            "Target probability at the end of the circuit: {:.10}",
            self.final_target_probability
        )
        .unwrap();
        if let Some(m) = &self.measurement {
            write_measurement(&mut out, m, "the data register");
        }
        write_notes(&mut out, &self.notes);
        out
    }
}

impl DiagramReport {
    pub fn to_text(&self) -> String {
        format!(
            "Wrote {} for {} to {}\n",
            plural(self.groups, "bar group"),
            plural(self.qubits, "qubit"),
            self.out
        )
    }
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports hold finite numbers");
    s.push('\n');
    s
}
