use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use qdesk_core::circuit::{
    run_all, state_object, zero_state, CircuitError, EngineLimits,
};
use qdesk_core::grover::{grover_run, grover_trace, GroverError, GroverSpec};
use qdesk_core::qdsl::{self, ParseError};
use qdesk_core::quantumcore::{sample_measurement, Histogram, QuantumError};
use qdesk_core::state_json::{StateJson, StateJsonError};
use thiserror::Error;

use crate::diagram::{render_svg, valid_color, DiagramStyle};
use crate::report::{CheckpointReport, DiagramReport, GroverReport, Measurement, RunReport, StateBlock};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input from the user: syntax, ranges, files.
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Capacity(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::Capacity { .. } | CircuitError::Quantum(QuantumError::Capacity { .. }) => {
                CliError::Capacity(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        CircuitError::from(e).into()
    }
}

impl From<GroverError> for CliError {
    fn from(e: GroverError) -> Self {
        match e {
            GroverError::Range(_) => CliError::Input(e.to_string()),
            GroverError::Circuit(c) => c.into(),
        }
    }
}

impl From<StateJsonError> for CliError {
    fn from(e: StateJsonError) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, Default)]
pub struct CommonOptions {
    pub seed: u64,
    pub shots: u64,
    pub trace: bool,
}

/// Where a program comes from; `-` reads standard input.
#[derive(Debug, Clone)]
pub enum ProgramSource {
    File(PathBuf),
    Inline(String),
}

impl ProgramSource {
    fn name(&self) -> String {
        match self {
            ProgramSource::File(p) if p.as_os_str() == "-" => "<stdin>".into(),
            ProgramSource::File(p) => p.display().to_string(),
            ProgramSource::Inline(_) => "<program>".into(),
        }
    }

    fn read(&self) -> CliResult<String> {
        match self {
            ProgramSource::Inline(text) => Ok(text.clone()),
            ProgramSource::File(p) if p.as_os_str() == "-" => {
                let mut text = String::new();
                std::io::stdin()
                    .read_to_string(&mut text)
                    .map_err(|e| CliError::Input(format!("cannot read standard input: {e}")))?;
                Ok(text)
            }
            ProgramSource::File(p) => read_file(p),
        }
    }
}

fn read_file(p: &Path) -> CliResult<String> {
    fs::read_to_string(p).map_err(|e| CliError::Input(format!("cannot read {}: {e}", p.display())))
}

/// `source: line L, col C: message` followed by the offending line and a
/// caret underline.
pub fn describe_parse_error(source: &str, text: &str, err: &ParseError) -> String {
    let mut msg = format!("{source}: {err}");
    if let Some(line) = text.lines().nth(err.span.line - 1) {
        let line = line.trim_end_matches('\r');
        let number = err.span.line.to_string();
        let pad = " ".repeat(number.len());
        let lead: String = line
            .chars()
            .take(err.span.col - 1)
            .map(|c| if c == '\t' { '\t' } else { ' ' })
            .collect();
        let carets = "^".repeat(err.span.length.max(1));
        msg.push_str(&format!("\n{pad} |\n{number} | {line}\n{pad} | {lead}{carets}"));
    }
    msg
}

fn block(stage: usize, label: Option<String>, amps: &[qdesk_core::mathcore::Complex]) -> StateBlock {
    StateBlock {
        stage,
        label,
        state: StateJson::from_amplitudes(amps),
    }
}

fn measure(amps: Vec<qdesk_core::mathcore::Complex>, opts: &CommonOptions) -> CliResult<Histogram> {
    Ok(sample_measurement(&state_object(amps), opts.seed, opts.shots)?)
}

pub fn cmd_run(source: &ProgramSource, opts: &CommonOptions) -> CliResult<RunReport> {
    let text = source.read()?;
    let circuit = qdsl::parse(&text)
        .map_err(|e| CliError::Input(describe_parse_error(&source.name(), &text, &e)))?;
    let n = circuit.qubit_count();
    EngineLimits::default().check_statevector(n)?;

    let labels = circuit.stage_labels();
    let (states, final_amps) = if opts.trace {
        let snaps = run_all(&circuit, &zero_state(n))?;
        let final_amps = snaps.last().expect("initial snapshot").amplitudes().to_vec();
        let states = snaps
            .iter()
            .map(|s| {
                let label = s.stage_index.checked_sub(1).map(|i| labels[i].clone());
                block(s.stage_index, label, s.amplitudes())
            })
            .collect();
        (states, final_amps)
    } else {
        let mut amps = zero_state(n).into_data().into_entries();
        for stage in circuit.stages() {
            stage.apply(&mut amps, n);
        }
        let stage = circuit.stage_count();
        let label = stage.checked_sub(1).map(|i| labels[i].clone());
        (vec![block(stage, label, &amps)], amps)
    };

    let mut notes = Vec::new();
    let measurement = match (opts.shots, circuit.measured()) {
        (0, _) => None,
        (shots, true) => Some(Measurement::from_histogram(
            &measure(final_amps, opts)?,
            n,
            shots,
            opts.seed,
        )),
        (_, false) => {
            notes.push("--shots ignored: the program has no measure statement".into());
            None
        }
    };

    Ok(RunReport {
        circuit: circuit.name().to_string(),
        qubits: n,
        stage_count: circuit.stage_count(),
        measured: circuit.measured(),
        states,
        measurement,
        notes,
    })
}

pub fn cmd_grover(
    data_qubits: usize,
    target: usize,
    iterations: Option<usize>,
    opts: &CommonOptions,
) -> CliResult<GroverReport> {
    let spec = match iterations {
        Some(j) => GroverSpec::new(data_qubits, target, j)?,
        None => GroverSpec::with_default_iterations(data_qubits, target)?,
    };

    let (stage_labels, states, checkpoints, final_amps, overshoot) = if opts.trace {
        let trace = grover_trace(&spec)?;
        let states = trace
            .snapshots
            .iter()
            .map(|s| {
                let label = s
                    .stage_index
                    .checked_sub(1)
                    .map(|i| trace.stage_labels[i].clone());
                block(s.stage_index, label, s.amplitudes())
            })
            .collect();
        let final_amps = trace.snapshots.last().expect("nonempty").amplitudes().to_vec();
        let overshoot = trace.overshoot().copied();
        (trace.stage_labels, states, trace.checkpoints, final_amps, overshoot)
    } else {
        let run = grover_run(&spec)?;
        let stage = run.stage_labels.len();
        let states = vec![block(stage, run.stage_labels.last().cloned(), &run.final_state)];
        let overshoot = run.overshoot().copied();
        (run.stage_labels, states, run.checkpoints, run.final_state, overshoot)
    };

    let final_data_probabilities = qdesk_core::grover::data_probabilities(&final_amps);
    let final_target_probability = final_data_probabilities[spec.target];
    let mut notes = Vec::new();
    if let Some(best) = overshoot {
        notes.push(format!(
            "the target probability peaks at {:.10} after iteration {} (stage {}) but the circuit runs {} and ends at {:.10}; the extra iterations rotate the state past the target",
            best.target_probability,
            best.iteration,
            best.stage_index,
            if spec.iterations == 1 { "1 iteration".to_string() } else { format!("{} iterations", spec.iterations) },
            final_target_probability
        ));
    }

    let measurement = if opts.shots > 0 {
        let full = measure(final_amps, opts)?;
        let mut data = Histogram::new();
        for (index, count) in full {
            *data.entry(index >> 1).or_insert(0) += count;
        }
        Some(Measurement::from_histogram(&data, spec.data_qubits, opts.shots, opts.seed))
    } else {
        None
    };

    Ok(GroverReport {
        data_qubits: spec.data_qubits,
        items: spec.item_count(),
        target: spec.target,
        iterations: spec.iterations,
        stage_labels,
        states,
        checkpoints: checkpoints
            .iter()
            .map(|c| CheckpointReport {
                iteration: c.iteration,
                stage: c.stage_index,
                target_probability: c.target_probability,
                analytic_probability: c.analytic_probability,
            })
            .collect(),
        final_data_probabilities,
        final_target_probability,
        measurement,
        notes,
    })
}

/// Renders the SVG; with no `out` path it is returned for standard output.
pub fn cmd_diagram(
    input: &Path,
    out: Option<&Path>,
    style: &DiagramStyle,
) -> CliResult<(String, Option<DiagramReport>)> {
    for (flag, color) in [("--real-color", &style.real_color), ("--imag-color", &style.imag_color)] {
        if !valid_color(color) {
            return Err(CliError::Input(format!("{flag}: {color:?} is not a CSS color")));
        }
    }
    let text = read_file(input)?;
    let state = StateJson::parse(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
    let svg = render_svg(&state, style);
    let Some(out) = out else {
        return Ok((svg, None));
    };
    fs::write(out, &svg)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", out.display())))?;
    Ok((
        svg,
        Some(DiagramReport {
            out: out.display().to_string(),
            qubits: state.qubits,
            groups: state.amplitudes.len(),
        }),
    ))
}
