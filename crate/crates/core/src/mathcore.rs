//! Dense complex linear algebra.
//!
//! Every quantum object in the crate is carried by a [`ComplexMatrix`]:
//! kets are `n x 1` columns, bras are `1 x n` rows and operators are square.
//! All operations return fresh values; nothing is mutated in place.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

/// Default tolerance for unitarity and normalization checks.
pub const UNITARY_TOL: f64 = 1e-10;

/// Default tolerance for algebraic identities (kron laws, gate identities).
pub const ALGEBRA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MathError {
    #[error("dimension mismatch in {op}: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    Dimension {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("{op} requires a column vector, got {rows}x{cols}")]
    NotColumn {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("matrix needs {expected} entries for its shape, got {actual}")]
    EntryCount { expected: usize, actual: usize },

    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    Empty { rows: usize, cols: usize },
}

pub type MathResult<T> = Result<T, MathError>;

/// Dense row-major matrix of complex scalars.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex>) -> MathResult<Self> {
        if rows == 0 || cols == 0 {
            return Err(MathError::Empty { rows, cols });
        }
        if entries.len() != rows * cols {
            return Err(MathError::EntryCount {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> MathResult<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex::new(x, 0.0)).collect(),
        )
    }

    /// `rows x cols` zero matrix. Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            entries: vec![Complex::new(0.0, 0.0); rows * cols],
        }
    }

    /// `n x n` identity. Panics if `n == 0`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Complex::new(1.0, 0.0);
        }
        m
    }

    /// Real row vector, `1 x n`. Panics on an empty slice.
    pub fn row(values: &[f64]) -> Self {
        Self::from_real(1, values.len(), values).expect("row vector needs at least one value")
    }

    /// Real column vector, `n x 1`. Panics on an empty slice.
    pub fn col(values: &[f64]) -> Self {
        Self::from_real(values.len(), 1, values).expect("column vector needs at least one value")
    }

    /// Complex column vector, `n x 1`.
    pub fn column(values: Vec<Complex>) -> MathResult<Self> {
        let n = values.len();
        Self::new(n, 1, values)
    }

    /// Stacks row vectors into a matrix, one row each.
    pub fn stack_rows(rows: &[ComplexMatrix]) -> MathResult<Self> {
        let first = rows.first().ok_or(MathError::Empty { rows: 0, cols: 0 })?;
        let width = first.cols;
        let mut entries = Vec::with_capacity(rows.len() * width);
        for r in rows {
            if r.rows != 1 || r.cols != width {
                return Err(MathError::Dimension {
                    op: "stack_rows",
                    left_rows: 1,
                    left_cols: width,
                    right_rows: r.rows,
                    right_cols: r.cols,
                });
            }
            entries.extend_from_slice(&r.entries);
        }
        Self::new(rows.len(), width, entries)
    }

    /// 1x1 matrix holding `z`.
    pub fn scalar(z: Complex) -> Self {
        Self {
            rows: 1,
            cols: 1,
            entries: vec![z],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_column(&self) -> bool {
        self.cols == 1
    }

    pub fn is_row(&self) -> bool {
        self.rows == 1
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        assert!(row < self.rows && col < self.cols, "matrix index out of range");
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex) {
        assert!(row < self.rows && col < self.cols, "matrix index out of range");
        self.entries[row * self.cols + col] = value;
    }

    /// Multiplies every entry by `k`.
    pub fn scale(&self, k: Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * k).collect(),
        }
    }

    /// Standard matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> MathResult<Self> {
        if self.cols != rhs.rows {
            return Err(self.mismatch("mat_mul", rhs));
        }
        let mut out = vec![Complex::new(0.0, 0.0); self.rows * rhs.cols];
        for i in 0..self.rows {
            let lhs_row = &self.entries[i * self.cols..(i + 1) * self.cols];
            let out_row = &mut out[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, a) in lhs_row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.entries[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: rhs.cols,
            entries: out,
        })
    }

    /// Kronecker (tensor) product. Block `(i, j)` of the result is `self[i, j] * rhs`.
    pub fn kron(&self, rhs: &ComplexMatrix) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut entries = vec![Complex::new(0.0, 0.0); rows * cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.entries[i * self.cols + j];
                for k in 0..rhs.rows {
                    let base = (i * rhs.rows + k) * cols + j * rhs.cols;
                    for l in 0..rhs.cols {
                        entries[base + l] = a * rhs.entries[k * rhs.cols + l];
                    }
                }
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        self.transpose().conj()
    }

    /// Plain transpose, no conjugation.
    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.entries[i * self.cols + j]);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// Elementwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> MathResult<f64> {
        if self.shape() != other.shape() {
            return Err(self.mismatch("max_abs_diff", other));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// True when shapes agree and every entry is within `tol`.
    pub fn approx_eq(&self, other: &ComplexMatrix, tol: f64) -> bool {
        self.max_abs_diff(other).is_ok_and(|d| d <= tol)
    }

    /// `U * U^dagger == I` within `tol`, measured as the largest entry deviation.
    pub fn is_unitary(&self, tol: f64) -> MathResult<bool> {
        if !self.is_square() {
            return Err(MathError::NotSquare {
                op: "is_unitary",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let product = self.matmul(&self.dagger())?;
        Ok(product.max_abs_diff(&Self::identity(self.rows))? <= tol)
    }

    fn mismatch(&self, op: &'static str, rhs: &ComplexMatrix) -> MathError {
        MathError::Dimension {
            op,
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: rhs.rows,
            right_cols: rhs.cols,
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format_complex(self.get(i, j)))
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Elementwise `a*A + b*B`.
pub fn linear_combine(
    a: Complex,
    lhs: &ComplexMatrix,
    b: Complex,
    rhs: &ComplexMatrix,
) -> MathResult<ComplexMatrix> {
    if lhs.shape() != rhs.shape() {
        return Err(lhs.mismatch("linear_combine", rhs));
    }
    Ok(ComplexMatrix {
        rows: lhs.rows,
        cols: lhs.cols,
        entries: lhs
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(x, y)| a * x + b * y)
            .collect(),
    })
}

/// `A + B`.
pub fn sum(lhs: &ComplexMatrix, rhs: &ComplexMatrix) -> MathResult<ComplexMatrix> {
    linear_combine(Complex::ONE, lhs, Complex::ONE, rhs)
}

/// `-A`.
pub fn minus(m: &ComplexMatrix) -> ComplexMatrix {
    m.scale(Complex::new(-1.0, 0.0))
}

/// `A / d` for a real divisor.
pub fn divide(m: &ComplexMatrix, d: f64) -> ComplexMatrix {
    ComplexMatrix {
        rows: m.rows,
        cols: m.cols,
        entries: m.entries.iter().map(|z| z / d).collect(),
    }
}

/// Inner product `<phi|psi>` of two equal-length columns.
pub fn inner(phi: &ComplexMatrix, psi: &ComplexMatrix) -> MathResult<Complex> {
    for m in [phi, psi] {
        if !m.is_column() {
            return Err(MathError::NotColumn {
                op: "inner",
                rows: m.rows,
                cols: m.cols,
            });
        }
    }
    if phi.rows != psi.rows {
        return Err(phi.mismatch("inner", psi));
    }
    Ok(phi
        .entries
        .iter()
        .zip(&psi.entries)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Renders a scalar the way state dumps print it: `0.8` when real,
/// `0.8 + 0.1i` / `0.8 - 0.1i` otherwise.
pub fn format_complex(z: Complex) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else {
        format!("{:?} {} {:?}i", z.re, sign_of(z.im), z.im.abs())
    }
}

/// Renders an amplitude with an explicit imaginary tail, `re + im i`.
pub fn format_amplitude(z: Complex) -> String {
    format!("{:?} {} {:?}i", z.re, sign_of(z.im), z.im.abs())
}

fn sign_of(x: f64) -> char {
    if x < 0.0 {
        '-'
    } else {
        '+'
    }
}
