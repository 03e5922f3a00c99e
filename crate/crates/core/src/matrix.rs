//! Dense small-matrix arithmetic and column-stochastic validation.
//!
//! Matrices are stored row-major. A [`StochasticMatrix`] uses the column
//! convention: entry `(i, j)` is the probability of moving to state `i` from
//! state `j`, so every column sums to one.

use std::fmt;
use std::ops::Index;

use thiserror::Error;

/// Allowed deviation of a column sum from one.
pub const COLUMN_SUM_TOL: f64 = 1e-9;

/// Smallest pivot magnitude accepted by [`solve_linear`].
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("vector must have at least one entry")]
    EmptyVector,
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("{rows}x{cols} matrix needs {expected} entries, got {found}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
        found: usize,
    },
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry ({row}, {col}) is negative")]
    NegativeEntry { row: usize, col: usize },
    #[error("column {col} sums to {sum}, expected 1")]
    ColumnSumViolation { col: usize, sum: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular to working precision")]
    SingularMatrix,
}

/// A state vector: nonempty, every entry finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self, MatrixError> {
        if entries.is_empty() {
            return Err(MatrixError::EmptyVector);
        }
        if let Some(index) = entries.iter().position(|x| !x.is_finite()) {
            return Err(MatrixError::NonFinite { index });
        }
        Ok(Vector(entries))
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len >= 1, "vector length must be at least 1");
        Vector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.0)
    }

    /// `‖self − other‖_∞`; panics when lengths differ.
    pub fn dist_inf(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "length mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * factor).collect())
    }

    // Internal constructor for values already known to be valid.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Vector(entries)
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// A dense row-major matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        let expected = rows * cols;
        if rows == 0 || cols == 0 || data.len() != expected {
            return Err(MatrixError::Shape {
                rows,
                cols,
                expected,
                found: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(MatrixError::NonFinite { index });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(MatrixError::Shape {
                    rows: nrows,
                    cols: ncols,
                    expected: nrows * ncols,
                    found: data.len() + r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Matrix::new(nrows, ncols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub(crate) fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Matrix whose columns are the given equal-length vectors.
    pub fn from_columns(columns: &[Vector]) -> Result<Self, MatrixError> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vector::len);
        let mut m = Matrix::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(MatrixError::DimensionMismatch {
                    expected: rows,
                    found: c.len(),
                });
            }
            for i in 0..rows {
                m.data[i * cols + j] = c[i];
            }
        }
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Shape {
                rows,
                cols,
                expected: 0,
                found: 0,
            });
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &Vector) -> Result<Vector, MatrixError> {
        if x.len() != self.cols {
            return Err(MatrixError::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok(Vector(self.apply(x.as_slice())))
    }

    /// Unchecked product on raw slices; `x.len()` must equal `cols`.
    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// A validated square column-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix(Matrix);

impl StochasticMatrix {
    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0.get(row, col)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl TryFrom<Matrix> for StochasticMatrix {
    type Error = MatrixError;

    fn try_from(m: Matrix) -> Result<Self, MatrixError> {
        validate_stochastic(m)
    }
}

/// Checks squareness, nonnegativity and unit column sums.
///
/// Entries are kept exactly as given; column sums within
/// [`COLUMN_SUM_TOL`] of one are accepted without renormalization.
pub fn validate_stochastic(m: Matrix) -> Result<StochasticMatrix, MatrixError> {
    if !m.is_square() {
        return Err(MatrixError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    for i in 0..n {
        for j in 0..n {
            if m.get(i, j) < 0.0 {
                return Err(MatrixError::NegativeEntry { row: i, col: j });
            }
        }
    }
    for j in 0..n {
        let sum: f64 = (0..n).map(|i| m.get(i, j)).sum();
        if (sum - 1.0).abs() > COLUMN_SUM_TOL {
            return Err(MatrixError::ColumnSumViolation { col: j, sum });
        }
    }
    Ok(StochasticMatrix(m))
}

/// One step of the dynamics: `A·x`.
pub fn mat_vec(a: &StochasticMatrix, x: &Vector) -> Result<Vector, MatrixError> {
    a.0.mul_vec(x)
}

/// Solves `V·c = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(v: &Matrix, b: &Vector) -> Result<Vector, MatrixError> {
    if !v.is_square() {
        return Err(MatrixError::NotSquare {
            rows: v.rows,
            cols: v.cols,
        });
    }
    let n = v.rows;
    if b.len() != n {
        return Err(MatrixError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }

    // augmented system, row-major n x (n+1)
    let w = n + 1;
    let mut aug = vec![0.0; n * w];
    for i in 0..n {
        aug[i * w..i * w + n].copy_from_slice(v.row(i));
        aug[i * w + n] = b[i];
    }

    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&r, &s| aug[r * w + k].abs().total_cmp(&aug[s * w + k].abs()))
            .expect("nonempty pivot range");
        if aug[pivot_row * w + k].abs() < PIVOT_TOL {
            return Err(MatrixError::SingularMatrix);
        }
        if pivot_row != k {
            for j in 0..w {
                aug.swap(k * w + j, pivot_row * w + j);
            }
        }
        let pivot = aug[k * w + k];
        for r in k + 1..n {
            let factor = aug[r * w + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            aug[r * w + k] = 0.0;
            for j in k + 1..w {
                aug[r * w + j] -= factor * aug[k * w + j];
            }
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|j| aug[i * w + j] * x[j]).sum();
        x[i] = (aug[i * w + n] - tail) / aug[i * w + i];
    }
    Vector::new(x)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}
