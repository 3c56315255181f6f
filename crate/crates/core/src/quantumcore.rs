//! Quantum objects, registers, the standard gate set and Born-rule measurement.
//!
//! Wire convention: wire 0 is the leftmost symbol of a ket and the most
//! significant bit of the basis-state index, so `|b0 b1 ... b(n-1)>` sits at
//! index `b0 b1 ... b(n-1)` read as a binary number. [`basis`] is the one
//! exception to 0-based indexing: it takes a 1-based component index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit;
use crate::mathcore::{
    divide, format_complex, inner, minus, sum, Complex, ComplexMatrix, MathError, UNITARY_TOL,
};

/// Default cap on the total wire count of a constructed gate.
pub const DEFAULT_MAX_GATE_WIRES: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error(transparent)]
    Math(#[from] MathError),

    #[error("metadata error: {0}")]
    Metadata(String),

    #[error("index {index} out of range (valid: {valid})")]
    Index { index: usize, valid: String },

    #[error("invalid state character {ch:?} at position {position} (expected 'd' or 'u')")]
    StateSpec { ch: char, position: usize },

    #[error("state error: {0}")]
    State(String),

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("register is entangled or joint-only; individual qubits are not available")]
    NotSeparable,

    #[error("unknown gate {name:?}; valid gates: {}", valid.join(", "))]
    UnknownGate { name: String, valid: Vec<String> },

    #[error("capacity exceeded: {requested} wires requested, limit is {limit}")]
    Capacity { requested: usize, limit: usize },

    #[error("gate {name} is not unitary (deviation above {tol:e})")]
    NotUnitary { name: String, tol: f64 },

    #[error("gate {name} matrix must be 2^k square, got {rows}x{cols}")]
    GateShape {
        name: String,
        rows: usize,
        cols: usize,
    },

    #[error("{0} requires at least one input")]
    Empty(&'static str),
}

pub type QuantumResult<T> = Result<T, QuantumError>;

/// Subsystem dimensions on the ket (row) side and bra (column) side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dims {
    pub ket: Vec<usize>,
    pub bra: Vec<usize>,
}

impl Dims {
    pub fn new(ket: Vec<usize>, bra: Vec<usize>) -> Self {
        Self { ket, bra }
    }

    /// `n` qubits on the ket side, trivial bra side.
    pub fn qubits(n: usize) -> Self {
        Self {
            ket: vec![2; n],
            bra: vec![1; n],
        }
    }
}

/// A single quantum object: a matrix plus Hilbert-space bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumObject {
    dims: Dims,
    data: ComplexMatrix,
}

impl QuantumObject {
    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    /// Number of members. Always 1: quantum arrays are not modelled.
    pub fn size(&self) -> usize {
        1
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    pub fn data(&self) -> &ComplexMatrix {
        &self.data
    }

    pub fn into_data(self) -> ComplexMatrix {
        self.data
    }

    pub fn is_ket(&self) -> bool {
        self.data.is_column()
    }

    /// `sqrt(<psi|psi>)` for kets.
    pub fn norm(&self) -> QuantumResult<f64> {
        Ok(inner(&self.data, &self.data)?.re.sqrt())
    }

    pub(crate) fn from_parts(dims: Dims, data: ComplexMatrix) -> Self {
        debug_assert_eq!(dims.ket.iter().product::<usize>(), data.rows());
        debug_assert_eq!(dims.bra.iter().product::<usize>(), data.cols());
        Self { dims, data }
    }
}

impl fmt::Display for QuantumObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Quantum object, Hilbert space dimensions {}",
            self.dims
        )?;
        write_rows(f, &self.data)
    }
}

fn bracket_list(dims: &[usize]) -> String {
    let inner: Vec<String> = dims.iter().map(usize::to_string).collect();
    format!("[ {} ]", inner.join(" "))
}

/// `[ 2 2 ] by [ 1 1 ]`
impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} by {}", bracket_list(&self.ket), bracket_list(&self.bra))
    }
}

fn write_rows(f: &mut fmt::Formatter<'_>, m: &ComplexMatrix) -> fmt::Result {
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format_complex(m.get(i, j))).collect();
        writeln!(f, "{}", row.join(", "))?;
    }
    Ok(())
}

/// Wraps a matrix as a quantum object. Without `dims` the metadata is
/// `[[rows], [cols]]`.
pub fn qo(data: ComplexMatrix, dims: Option<Dims>) -> QuantumResult<QuantumObject> {
    let dims = dims.unwrap_or_else(|| Dims::new(vec![data.rows()], vec![data.cols()]));
    let ket: usize = dims.ket.iter().product();
    let bra: usize = dims.bra.iter().product();
    if dims.ket.is_empty() || dims.bra.is_empty() || ket != data.rows() || bra != data.cols() {
        return Err(QuantumError::Metadata(format!(
            "dims {:?} by {:?} do not match data shape {}x{}",
            dims.ket,
            dims.bra,
            data.rows(),
            data.cols()
        )));
    }
    Ok(QuantumObject { dims, data })
}

/// Unit ket in an `n`-dimensional space with a one at 1-based position `indx`.
pub fn basis(n: usize, indx: usize) -> QuantumResult<QuantumObject> {
    if n == 0 || indx == 0 || indx > n {
        return Err(QuantumError::Index {
            index: indx,
            valid: format!("1..={n}"),
        });
    }
    let mut data = ComplexMatrix::zeros(n, 1);
    data.set(indx - 1, 0, Complex::ONE);
    qo(data, None)
}

/// Product state from a string of `d` (down, `|0>`) and `u` (up, `|1>`).
pub fn qstate(spec: &str) -> QuantumResult<QuantumObject> {
    if spec.is_empty() {
        return Err(QuantumError::Empty("qstate"));
    }
    let mut data: Option<ComplexMatrix> = None;
    for (position, ch) in spec.chars().enumerate() {
        let qubit = match ch.to_ascii_lowercase() {
            'd' => ComplexMatrix::col(&[1.0, 0.0]),
            'u' => ComplexMatrix::col(&[0.0, 1.0]),
            _ => return Err(QuantumError::StateSpec { ch, position }),
        };
        data = Some(match data {
            None => qubit,
            Some(acc) => acc.kron(&qubit),
        });
    }
    let data = data.expect("label is nonempty");
    let len = data.rows();
    qo(data, Some(Dims::new(vec![len], vec![1])))
}

/// Left-fold tensor product; dims concatenate on each side.
pub fn tensor_objects(objs: &[QuantumObject]) -> QuantumResult<QuantumObject> {
    let (first, rest) = objs.split_first().ok_or(QuantumError::Empty("tensor"))?;
    let mut acc = first.clone();
    for obj in rest {
        acc.data = acc.data.kron(&obj.data);
        acc.dims.ket.extend_from_slice(&obj.dims.ket);
        acc.dims.bra.extend_from_slice(&obj.dims.bra);
    }
    Ok(acc)
}

fn inv_sqrt2() -> f64 {
    1.0 / 2f64.sqrt()
}

/// A named unitary acting on `arity` qubits. Clones share the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    name: String,
    arity: usize,
    matrix: Arc<ComplexMatrix>,
}

impl Gate {
    /// Validates shape (`2^k x 2^k`, `k >= 1`) and unitarity.
    pub fn new(name: impl Into<String>, matrix: ComplexMatrix) -> QuantumResult<Self> {
        let name = name.into();
        let (rows, cols) = matrix.shape();
        if rows != cols || rows < 2 || !rows.is_power_of_two() {
            return Err(QuantumError::GateShape { name, rows, cols });
        }
        if !matrix.is_unitary(UNITARY_TOL)? {
            return Err(QuantumError::NotUnitary {
                name,
                tol: UNITARY_TOL,
            });
        }
        Ok(Self {
            name,
            arity: rows.trailing_zeros() as usize,
            matrix: Arc::new(matrix),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.as_ref()
    }

    /// Same matrix under a different name.
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// The built-in gate table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StandardGate {
    Identity,
    Not,
    PhaseFlip,
    Hadamard,
    Snot,
    Cnot,
    Swap,
    Toffoli,
    Fredkin,
}

impl StandardGate {
    pub const ALL: [StandardGate; 9] = [
        StandardGate::Identity,
        StandardGate::Not,
        StandardGate::PhaseFlip,
        StandardGate::Hadamard,
        StandardGate::Snot,
        StandardGate::Cnot,
        StandardGate::Swap,
        StandardGate::Toffoli,
        StandardGate::Fredkin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StandardGate::Identity => "IDENTITY",
            StandardGate::Not => "NOT",
            StandardGate::PhaseFlip => "PHASEFLIP",
            StandardGate::Hadamard => "HADAMARD",
            StandardGate::Snot => "SNOT",
            StandardGate::Cnot => "CNOT",
            StandardGate::Swap => "SWAP",
            StandardGate::Toffoli => "TOFFOLI",
            StandardGate::Fredkin => "FREDKIN",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            StandardGate::Identity
            | StandardGate::Not
            | StandardGate::PhaseFlip
            | StandardGate::Hadamard
            | StandardGate::Snot => 1,
            StandardGate::Cnot | StandardGate::Swap => 2,
            StandardGate::Toffoli | StandardGate::Fredkin => 3,
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        let h = inv_sqrt2();
        let real2 = |v: [f64; 4]| ComplexMatrix::from_real(2, 2, &v).expect("2x2");
        match self {
            StandardGate::Identity => ComplexMatrix::identity(2),
            StandardGate::Not => real2([0.0, 1.0, 1.0, 0.0]),
            StandardGate::PhaseFlip => real2([1.0, 0.0, 0.0, -1.0]),
            StandardGate::Hadamard => real2([h, h, h, -h]),
            // Real-valued form; its square is [[0,-1],[1,0]], not NOT.
            StandardGate::Snot => real2([h, -h, h, h]),
            StandardGate::Cnot => permutation(4, &[(0b10, 0b11)]),
            StandardGate::Swap => permutation(4, &[(0b01, 0b10)]),
            StandardGate::Toffoli => permutation(8, &[(0b110, 0b111)]),
            StandardGate::Fredkin => permutation(8, &[(0b101, 0b110)]),
        }
    }

    pub fn gate(self) -> Gate {
        Gate {
            name: self.name().to_string(),
            arity: self.arity(),
            matrix: Arc::new(self.matrix()),
        }
    }

    fn valid_names() -> Vec<String> {
        Self::ALL.iter().map(|g| g.name().to_string()).collect()
    }
}

impl FromStr for StandardGate {
    type Err = QuantumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        let gate = match upper.as_str() {
            "IDENTITY" => StandardGate::Identity,
            "NOT" | "NOTGATE" => StandardGate::Not,
            "PHASEFLIP" => StandardGate::PhaseFlip,
            "HADAMARD" => StandardGate::Hadamard,
            "SNOT" => StandardGate::Snot,
            "CNOT" | "XOR" | "XORGATE" => StandardGate::Cnot,
            "SWAP" => StandardGate::Swap,
            "TOFFOLI" => StandardGate::Toffoli,
            "FREDKIN" => StandardGate::Fredkin,
            _ => {
                return Err(QuantumError::UnknownGate {
                    name: s.to_string(),
                    valid: Self::valid_names(),
                })
            }
        };
        Ok(gate)
    }
}

/// Identity of size `dim` with the listed basis-state pairs exchanged.
fn permutation(dim: usize, swaps: &[(usize, usize)]) -> ComplexMatrix {
    let mut target: Vec<usize> = (0..dim).collect();
    for &(a, b) in swaps {
        target.swap(a, b);
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (col, &row) in target.iter().enumerate() {
        m.set(row, col, Complex::ONE);
    }
    m
}

/// Looks up a gate by name (case-insensitive; `XOR` aliases `CNOT`).
pub fn standard_gate(name: &str) -> QuantumResult<Gate> {
    Ok(name.parse::<StandardGate>()?.gate())
}

/// Hadamard built from its outer-product form
/// `((|d> - |u>)<u| + (|d> + |u>)<d|) / sqrt(2)`.
pub fn hadamard_operational() -> Gate {
    let u = qstate("u").expect("valid label").into_data();
    let d = qstate("d").expect("valid label").into_data();
    let down_minus_up = sum(&d, &minus(&u)).expect("same shape");
    let down_plus_up = sum(&d, &u).expect("same shape");
    let result = sum(
        &down_minus_up.kron(&u.transpose()),
        &down_plus_up.kron(&d.transpose()),
    )
    .expect("same shape");
    Gate {
        name: "HADAMARD".to_string(),
        arity: 1,
        matrix: Arc::new(divide(&result, 2f64.sqrt())),
    }
}

/// Adds `n_controls` leading control wires to `g`, capped at
/// [`DEFAULT_MAX_GATE_WIRES`] total wires.
pub fn controlled(g: &Gate, n_controls: usize) -> QuantumResult<Gate> {
    controlled_with_limit(g, n_controls, DEFAULT_MAX_GATE_WIRES)
}

/// Block-diagonal controlled gate: identity wherever some control is 0,
/// `g` on the block where every control is 1. Controls are the most
/// significant wires.
pub fn controlled_with_limit(g: &Gate, n_controls: usize, max_wires: usize) -> QuantumResult<Gate> {
    if n_controls == 0 {
        return Err(QuantumError::Empty("controlled"));
    }
    let arity = g.arity + n_controls;
    if arity > max_wires {
        return Err(QuantumError::Capacity {
            requested: arity,
            limit: max_wires,
        });
    }
    let dim = 1usize << arity;
    let block = 1usize << g.arity;
    let offset = dim - block;
    let mut m = ComplexMatrix::identity(dim);
    for i in 0..block {
        for j in 0..block {
            m.set(offset + i, offset + j, g.matrix.get(i, j));
        }
    }
    Ok(Gate {
        name: format!("{}{}", "C".repeat(n_controls), g.name),
        arity,
        matrix: Arc::new(m),
    })
}

fn require_unit_ket(state: &QuantumObject) -> QuantumResult<()> {
    if !state.is_ket() {
        let (rows, cols) = state.shape();
        return Err(QuantumError::State(format!(
            "expected a column state, got {rows}x{cols}"
        )));
    }
    let norm = state.norm()?;
    if (norm * norm - 1.0).abs() > UNITARY_TOL {
        return Err(QuantumError::NotNormalized { norm });
    }
    Ok(())
}

/// Born-rule probabilities `|a_i|^2` of a unit ket.
pub fn probabilities(state: &QuantumObject) -> QuantumResult<Vec<f64>> {
    require_unit_ket(state)?;
    Ok(state.data.entries().iter().map(|a| a.norm_sqr()).collect())
}

/// Basis-state index to observed count.
pub type Histogram = BTreeMap<usize, u64>;

/// Draws `shots` computational-basis outcomes. Identical `(state, seed,
/// shots)` always yield the identical histogram.
pub fn sample_measurement(state: &QuantumObject, seed: u64, shots: u64) -> QuantumResult<Histogram> {
    let probs = probabilities(state)?;
    if shots == 0 {
        return Err(QuantumError::State("shots must be positive".into()));
    }
    let dist = WeightedIndex::new(&probs)
        .map_err(|e| QuantumError::State(format!("cannot sample: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram = Histogram::new();
    for _ in 0..shots {
        *histogram.entry(dist.sample(&mut rng)).or_insert(0) += 1;
    }
    Ok(histogram)
}

/// An `n`-qubit register. Per-qubit factors are kept only while the
/// register is known to be a product state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRegister {
    qubit_count: usize,
    joint: QuantumObject,
    factors: Option<Vec<QuantumObject>>,
}

/// Builds a register from single-qubit unit kets.
pub fn qreg(qubits: &[QuantumObject]) -> QuantumResult<QuantumRegister> {
    if qubits.is_empty() {
        return Err(QuantumError::Empty("qreg"));
    }
    for (i, q) in qubits.iter().enumerate() {
        if q.shape() != (2, 1) {
            let (rows, cols) = q.shape();
            return Err(QuantumError::State(format!(
                "register member {i} must be a 2x1 ket, got {rows}x{cols}"
            )));
        }
        require_unit_ket(q)?;
    }
    let joint = tensor_objects(qubits)?;
    let len = joint.data.rows();
    Ok(QuantumRegister {
        qubit_count: qubits.len(),
        joint: QuantumObject::from_parts(Dims::new(vec![len], vec![1]), joint.data),
        factors: Some(qubits.to_vec()),
    })
}

impl QuantumRegister {
    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn joint(&self) -> &QuantumObject {
        &self.joint
    }

    pub fn is_separable(&self) -> bool {
        self.factors.is_some()
    }

    /// The qubit on 0-based `wire`, while the register is still separable.
    pub fn get(&self, wire: usize) -> QuantumResult<&QuantumObject> {
        if wire >= self.qubit_count {
            return Err(QuantumError::Index {
                index: wire,
                valid: format!("0..{}", self.qubit_count),
            });
        }
        let factors = self.factors.as_ref().ok_or(QuantumError::NotSeparable)?;
        Ok(&factors[wire])
    }

    /// Applies `gate` to `wires`. Multi-qubit gates drop the factor list.
    pub fn apply(&mut self, gate: &Gate, wires: &[usize]) -> QuantumResult<()> {
        circuit::check_wires(wires, gate.arity(), self.qubit_count)
            .map_err(|e| QuantumError::State(e.to_string()))?;
        let mut amps = self.joint.data.entries().to_vec();
        circuit::apply_matrix(&mut amps, self.qubit_count, gate.matrix(), wires);
        let len = amps.len();
        self.joint = QuantumObject::from_parts(
            Dims::new(vec![len], vec![1]),
            ComplexMatrix::column(amps)?,
        );
        match (&mut self.factors, gate.arity()) {
            (Some(factors), 1) => {
                let f = &mut factors[wires[0]];
                f.data = gate.matrix().matmul(&f.data)?;
            }
            (factors, _) => *factors = None,
        }
        Ok(())
    }
}

impl fmt::Display for QuantumRegister {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Register containing {} qubits, Hilbert space dimensions {}",
            self.qubit_count, self.joint.dims
        )?;
        write_rows(f, &self.joint.data)
    }
}
