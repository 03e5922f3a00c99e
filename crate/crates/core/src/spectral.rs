//! Real eigendecomposition of stochastic matrices.
//!
//! Two routes are provided: a closed-form solver for 2×2 matrices
//! ([`eigen_2x2`]) and power iteration with Wielandt deflation for any
//! size ([`eigen_deflation`]). [`eigen_decompose`] dispatches between them.
//!
//! Eigenvectors are returned with unit Euclidean norm and their first
//! significant coordinate positive; pairs are ordered by descending `|λ|`,
//! then descending `λ`, then discovery order.

use thiserror::Error;

use crate::matrix::{self, dot, norm2, norm_inf, Matrix, MatrixError, StochasticMatrix, Vector};
use crate::rng;

/// Bound on `‖A v − λ v‖_∞` for every returned pair.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Two eigenvalues closer than this are treated as equal.
pub const EIGENVALUE_TOL: f64 = 1e-9;
/// Discriminant band treated as a repeated root.
pub const DISCRIMINANT_TOL: f64 = 1e-12;
/// Minimum `|wᵀv|` (unit vectors) accepted when deflating.
pub const DEFLATION_INNER_TOL: f64 = 1e-10;

const SIGN_EPS: f64 = 1e-12;
const DEFLATION_STEP_TOL: f64 = 1e-14;
const DEFLATION_MAX_ITER: usize = 1_000_000;
const RITZ_INTERVAL: usize = 16;
const RITZ_TOL: f64 = 1e-10;
const NULL_TOL: f64 = 1e-13;
const DEFLATION_RESIDUAL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("expected a 2x2 matrix, got {dim}x{dim}")]
    NotTwoByTwo { dim: usize },
    #[error("eigenpair {index}: complex eigenvalues {re} ± {im}i")]
    ComplexSpectrum { index: usize, re: f64, im: f64 },
    #[error("eigenpair {index}: matrix is defective (not diagonalizable)")]
    DefectiveMatrix { index: usize },
    #[error("eigenpair {index}: power iteration did not converge after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },
    #[error("eigenpair {index}: residual {residual:e} exceeds tolerance")]
    ResidualTooLarge { index: usize, residual: f64 },
    #[error("eigenvectors are not linearly independent")]
    SingularBasis,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vector,
}

impl EigenPair {
    /// Pair with the vector kept exactly as given.
    pub fn new(value: f64, vector: Vector) -> Self {
        EigenPair { value, vector }
    }

    /// Pair with the vector rescaled to the canonical normalization.
    pub fn normalized(value: f64, vector: Vector) -> Self {
        let v = canonical(vector.into_inner());
        EigenPair {
            value,
            vector: Vector::from_raw(v),
        }
    }

    /// `‖A v − λ v‖_∞`.
    pub fn residual(&self, a: &Matrix) -> f64 {
        let av = a.apply(self.vector.as_slice());
        av.iter()
            .zip(self.vector.iter())
            .map(|(x, v)| (x - self.value * v).abs())
            .fold(0.0, f64::max)
    }
}

/// A full set of real eigenpairs, dominant first.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pairs: Vec<EigenPair>,
    dim: usize,
}

impl Spectrum {
    /// Builds a spectrum from `dim` pairs of length-`dim` vectors and sorts it.
    pub fn new(mut pairs: Vec<EigenPair>) -> Result<Self, SpectralError> {
        let dim = pairs.len();
        if dim == 0 {
            return Err(SpectralError::InvalidParameter(
                "spectrum needs at least one pair",
            ));
        }
        if let Some(p) = pairs.iter().find(|p| p.vector.len() != dim) {
            return Err(SpectralError::DimensionMismatch {
                expected: dim,
                found: p.vector.len(),
            });
        }
        sort_pairs(&mut pairs);
        Ok(Spectrum { pairs, dim })
    }

    pub fn pairs(&self) -> &[EigenPair] {
        &self.pairs
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    /// Matrix whose columns are the eigenvectors in spectrum order.
    pub fn eigenvector_matrix(&self) -> Matrix {
        let cols: Vec<Vector> = self.pairs.iter().map(|p| p.vector.clone()).collect();
        Matrix::from_columns(&cols).expect("spectrum vectors share one dimension")
    }
}

/// Coefficients of a vector in an eigenbasis, aligned with spectrum order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCoordinates {
    pub coeffs: Vec<f64>,
}

impl EigenCoordinates {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

fn sort_pairs(pairs: &mut [EigenPair]) {
    pairs.sort_by(|a, b| {
        b.value
            .abs()
            .total_cmp(&a.value.abs())
            .then(b.value.total_cmp(&a.value))
    });
}

/// Unit norm, first coordinate above `SIGN_EPS` in magnitude made positive.
fn canonical(mut v: Vec<f64>) -> Vec<f64> {
    let norm = norm2(&v);
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    if let Some(&lead) = v.iter().find(|x| x.abs() > SIGN_EPS) {
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    v
}

fn max_abs_residual(a: &Matrix, value: f64, v: &[f64]) -> f64 {
    let av = a.apply(v);
    av.iter()
        .zip(v)
        .map(|(x, y)| (x - value * y).abs())
        .fold(0.0, f64::max)
}

/// Closed-form eigendecomposition of a 2×2 stochastic matrix.
///
/// Roots of `λ² − tr·λ + det` use the cancellation-free form: the larger
/// magnitude root first, the other as `det / root`.
pub fn eigen_2x2(a: &StochasticMatrix) -> Result<Spectrum, SpectralError> {
    if a.dim() != 2 {
        return Err(SpectralError::NotTwoByTwo { dim: a.dim() });
    }
    let m = a.as_matrix();
    let (p, q, r, s) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let trace = p + s;
    let det = p * s - q * r;
    let disc = (p - s) * (p - s) + 4.0 * q * r;

    if disc < -DISCRIMINANT_TOL {
        return Err(SpectralError::ComplexSpectrum {
            index: 0,
            re: trace / 2.0,
            im: (-disc).sqrt() / 2.0,
        });
    }

    let pairs = if disc.abs() <= DISCRIMINANT_TOL {
        let lambda = trace / 2.0;
        let shifted = [p - lambda, q, r, s - lambda];
        if norm_inf(&shifted) > RESIDUAL_TOL {
            return Err(SpectralError::DefectiveMatrix { index: 1 });
        }
        vec![
            EigenPair::normalized(lambda, Vector::from_raw(vec![1.0, 0.0])),
            EigenPair::normalized(lambda, Vector::from_raw(vec![0.0, 1.0])),
        ]
    } else {
        let root = disc.sqrt();
        let big = if trace >= 0.0 {
            (trace + root) / 2.0
        } else {
            (trace - root) / 2.0
        };
        let small = det / big;
        [big, small]
            .into_iter()
            .map(|lambda| {
                let row0 = [p - lambda, q];
                let row1 = [r, s - lambda];
                let row = if norm2(&row0) >= norm2(&row1) {
                    row0
                } else {
                    row1
                };
                EigenPair::normalized(lambda, Vector::from_raw(vec![-row[1], row[0]]))
            })
            .collect()
    };

    for (index, pair) in pairs.iter().enumerate() {
        let residual = pair.residual(m);
        if residual > RESIDUAL_TOL {
            return Err(SpectralError::ResidualTooLarge { index, residual });
        }
    }
    Spectrum::new(pairs)
}

/// Result of iterating `v ← M v / ‖M v‖₂`.
#[derive(Debug, Clone)]
enum Dominant {
    Converged {
        value: f64,
        vector: Vec<f64>,
    },
    /// `M v` vanished: `v` lies in the null space of `M`.
    Null {
        vector: Vec<f64>,
    },
    /// The iterates settled in a 2-D invariant subspace with a complex pair.
    Complex {
        re: f64,
        im: f64,
    },
    /// The iterates settled in a 2-D invariant subspace with `λ_a ≈ −λ_b`.
    Tie {
        iterations: usize,
        a: f64,
        b: f64,
    },
    Exhausted {
        iterations: usize,
    },
}

struct IterationControl {
    /// Stop when successive iterates differ by at most this (∞-norm).
    step_tol: f64,
    max_iter: usize,
    /// When set, stop instead once `‖M v − ρ v‖_∞ ≤ tol · max(1, ‖M‖_∞)`
    /// and accept Rayleigh–Ritz vectors from invariant 2-D subspaces.
    residual_tol: Option<f64>,
}

fn dominant(m: &Matrix, start: &[f64], ctl: &IterationControl) -> Dominant {
    let scale = f64::max(1.0, m.norm_inf());
    let mut v = start.to_vec();
    let n0 = norm2(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut mv = m.apply(&v);

    for k in 1..=ctl.max_iter {
        let ny = norm2(&mv);
        if ny <= NULL_TOL * scale {
            return Dominant::Null { vector: v };
        }
        if let Some(tol) = ctl.residual_tol {
            let rho = dot(&v, &mv);
            if max_gap(&mv, &v, rho) <= tol * scale {
                return Dominant::Converged {
                    value: rho,
                    vector: v,
                };
            }
        }

        let y: Vec<f64> = mv.iter().map(|x| x / ny).collect();
        let my = m.apply(&y);
        if ctl.residual_tol.is_none() {
            let same = v
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let flipped = v
                .iter()
                .zip(&y)
                .map(|(a, b)| (a + b).abs())
                .fold(0.0, f64::max);
            if same <= ctl.step_tol || flipped <= ctl.step_tol {
                return Dominant::Converged {
                    value: dot(&y, &my),
                    vector: y,
                };
            }
        }

        if k % RITZ_INTERVAL == 0 {
            match ritz_probe(m, &y, &my, scale, k) {
                Probe::Stall(stall) => return stall,
                Probe::Ritz { value, vector } => {
                    if let Some(tol) = ctl.residual_tol {
                        let mu = m.apply(&vector);
                        if max_gap(&mu, &vector, value) <= tol * scale {
                            return Dominant::Converged { value, vector };
                        }
                    }
                }
                Probe::NotInvariant => {}
            }
        }
        v = y;
        mv = my;
    }
    Dominant::Exhausted {
        iterations: ctl.max_iter,
    }
}

/// `‖a − ρ b‖_∞`.
fn max_gap(a: &[f64], b: &[f64], rho: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - rho * y).abs())
        .fold(0.0, f64::max)
}

enum Probe {
    NotInvariant,
    /// Power iteration cannot separate the two modes.
    Stall(Dominant),
    /// Ritz pair for the larger-modulus eigenvalue of a real subspace.
    Ritz {
        value: f64,
        vector: Vec<f64>,
    },
}

/// Rayleigh–Ritz on `span{y, M y}`. When the subspace is invariant, its
/// two eigenvalues either block power iteration (complex pair, or real
/// pair of equal modulus and opposite sign) or give the dominant vector
/// directly.
fn ritz_probe(m: &Matrix, y: &[f64], my: &[f64], scale: f64, iterations: usize) -> Probe {
    let h11 = dot(y, my);
    let mut q2: Vec<f64> = my.iter().zip(y).map(|(a, b)| a - h11 * b).collect();
    let beta = norm2(&q2);
    if beta <= 1e-12 * scale {
        return Probe::NotInvariant;
    }
    q2.iter_mut().for_each(|x| *x /= beta);
    let mq2 = m.apply(&q2);
    let h12 = dot(y, &mq2);
    let h22 = dot(&q2, &mq2);
    let h21 = beta;
    let leak = mq2
        .iter()
        .zip(y.iter().zip(&q2))
        .map(|(z, (a, b))| (z - h12 * a - h22 * b).abs())
        .fold(0.0, f64::max);
    if leak > RITZ_TOL * scale {
        return Probe::NotInvariant;
    }
    let trace = h11 + h22;
    let disc = (h11 - h22) * (h11 - h22) + 4.0 * h12 * h21;
    if disc < 0.0 {
        return Probe::Stall(Dominant::Complex {
            re: trace / 2.0,
            im: (-disc).sqrt() / 2.0,
        });
    }
    let root = disc.sqrt();
    let (a, b) = ((trace + root) / 2.0, (trace - root) / 2.0);
    let top = f64::max(a.abs(), b.abs());
    if (a.abs() - b.abs()).abs() <= EIGENVALUE_TOL * top && (a - b).abs() > EIGENVALUE_TOL * top {
        return Probe::Stall(Dominant::Tie { iterations, a, b });
    }
    let value = if a.abs() >= b.abs() { a } else { b };
    // null vector of H − value·I, from its larger row
    let r1 = [h11 - value, h12];
    let r2 = [h21, h22 - value];
    let r = if norm2(&r1) >= norm2(&r2) { r1 } else { r2 };
    let (z1, z2) = (-r[1], r[0]);
    let mut vector: Vec<f64> = y.iter().zip(&q2).map(|(a, b)| z1 * a + z2 * b).collect();
    let nz = norm2(&vector);
    if nz == 0.0 {
        return Probe::NotInvariant;
    }
    vector.iter_mut().for_each(|x| *x /= nz);
    Probe::Ritz { value, vector }
}

/// Dominant eigenpair by power iteration from the normalized ones vector.
///
/// Stops when successive iterates differ by at most `tol` in the ∞-norm,
/// with or without a sign flip; the eigenvalue is the Rayleigh quotient.
/// A non-unique dominant modulus is reported as `NoConvergence`, or as
/// `ComplexSpectrum` when the competing pair is complex.
pub fn power_iteration(
    a: &StochasticMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPair, SpectralError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SpectralError::InvalidParameter("tol must be positive"));
    }
    if max_iter == 0 {
        return Err(SpectralError::InvalidParameter(
            "max_iter must be at least 1",
        ));
    }
    let n = a.dim();
    let start = vec![1.0; n];
    let ctl = IterationControl {
        step_tol: tol,
        max_iter,
        residual_tol: None,
    };
    match dominant(a.as_matrix(), &start, &ctl) {
        Dominant::Converged { value, vector } => {
            Ok(EigenPair::normalized(value, Vector::from_raw(vector)))
        }
        Dominant::Null { vector } => Ok(EigenPair::normalized(0.0, Vector::from_raw(vector))),
        Dominant::Complex { re, im } => Err(SpectralError::ComplexSpectrum { index: 0, re, im }),
        Dominant::Tie { iterations, .. } | Dominant::Exhausted { iterations } => {
            Err(SpectralError::NoConvergence {
                index: 0,
                iterations,
            })
        }
    }
}

/// Full eigendecomposition: closed form for 2×2, deflation otherwise.
pub fn eigen_decompose(a: &StochasticMatrix) -> Result<Spectrum, SpectralError> {
    match a.dim() {
        2 => eigen_2x2(a),
        _ => eigen_deflation(a),
    }
}

struct Extracted {
    value: f64,
    /// Eigenvector of the working matrix at extraction time.
    right: Vec<f64>,
    /// Matching left eigenvector; `None` for null-space extractions.
    left: Option<Vec<f64>>,
    /// Canonical output vector.
    output: Vec<f64>,
}

fn deflation_start(n: usize, index: usize) -> Vec<f64> {
    if index == 0 {
        return vec![1.0; n];
    }
    let mut g = rng::seeded(index as u64, rng::DEFLATION_STREAM);
    (0..n).map(|_| 2.0 * rng::uniform(&mut g) - 1.0).collect()
}

/// Removes the components along already-deflated modes (oblique projector
/// `I − Σ v wᵀ / (wᵀv)`).
fn project_out(mut u: Vec<f64>, found: &[Extracted]) -> Vec<f64> {
    for e in found {
        if let Some(w) = &e.left {
            let coeff = dot(w, &u) / dot(w, &e.right);
            u.iter_mut()
                .zip(&e.right)
                .for_each(|(x, v)| *x -= coeff * v);
        }
    }
    u
}

/// Eigendecomposition of any size by repeated power iteration and Wielandt
/// deflation `A′ = A − λ v wᵀ / (wᵀ v)`.
///
/// The first extraction starts from the ones vector; later ones start from
/// fixed pseudo-random vectors, because the ones vector has no component
/// along subdominant modes of a doubly stochastic matrix. The left vector of
/// the unit eigenvalue of the original matrix is the ones vector; other left
/// vectors come from power iteration on the transposed working matrix,
/// started from the right vector. Repeated eigenvalues get one Gram–Schmidt
/// pass among their output vectors. Every pair is re-checked against `a`.
pub fn eigen_deflation(a: &StochasticMatrix) -> Result<Spectrum, SpectralError> {
    let original = a.as_matrix();
    let n = a.dim();
    let ctl = IterationControl {
        step_tol: DEFLATION_STEP_TOL,
        max_iter: DEFLATION_MAX_ITER,
        residual_tol: Some(DEFLATION_RESIDUAL_TOL),
    };
    let mut work = original.clone();
    let mut found: Vec<Extracted> = Vec::with_capacity(n);

    for index in 0..n {
        let start = deflation_start(n, index);
        let (value, raw, null) = match dominant(&work, &start, &ctl) {
            Dominant::Converged { value, vector } => (value, vector, false),
            Dominant::Null { vector } => (0.0, vector, true),
            Dominant::Complex { re, im } => {
                return Err(SpectralError::ComplexSpectrum { index, re, im })
            }
            Dominant::Tie { iterations, .. } | Dominant::Exhausted { iterations } => {
                return Err(SpectralError::NoConvergence { index, iterations })
            }
        };

        let right = canonical(project_out(raw, &found));

        let mut output = right.clone();
        for e in &found {
            if (e.value - value).abs() <= EIGENVALUE_TOL * f64::max(1.0, value.abs()) {
                let c = dot(&output, &e.output);
                output
                    .iter_mut()
                    .zip(&e.output)
                    .for_each(|(x, y)| *x -= c * y);
            }
        }
        if norm2(&output) <= 1e-8 {
            return Err(SpectralError::DefectiveMatrix { index });
        }
        let output = canonical(output);
        let residual = max_abs_residual(original, value, &output);
        if residual > RESIDUAL_TOL {
            return Err(SpectralError::ResidualTooLarge { index, residual });
        }

        let left = if null || index + 1 == n {
            None
        } else {
            let w = if index == 0 && (value - 1.0).abs() <= EIGENVALUE_TOL {
                vec![1.0; n]
            } else {
                match dominant(&work.transpose(), &right, &ctl) {
                    Dominant::Converged { value: lv, vector }
                        if (lv - value).abs() <= 1e-8 * f64::max(1.0, value.abs()) =>
                    {
                        vector
                    }
                    Dominant::Exhausted { iterations } | Dominant::Tie { iterations, .. } => {
                        return Err(SpectralError::NoConvergence { index, iterations })
                    }
                    _ => return Err(SpectralError::DefectiveMatrix { index }),
                }
            };
            let w = canonical(w);
            let inner = dot(&w, &right);
            if inner.abs() < DEFLATION_INNER_TOL {
                return Err(SpectralError::DefectiveMatrix { index });
            }
            for (i, ri) in right.iter().enumerate() {
                for (j, wj) in w.iter().enumerate() {
                    let updated = work.get(i, j) - value * ri * wj / inner;
                    work.set(i, j, updated);
                }
            }
            Some(w)
        };

        found.push(Extracted {
            value,
            right,
            left,
            output,
        });
    }

    let pairs = found
        .into_iter()
        .map(|e| EigenPair::new(e.value, Vector::from_raw(e.output)))
        .collect();
    Spectrum::new(pairs)
}

/// The largest-modulus eigenvalue(s) left after deflating the unit mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum NextMode {
    Real(f64),
    Complex {
        re: f64,
        im: f64,
    },
    /// Two real eigenvalues of equal modulus and opposite sign.
    Tie(f64, f64),
}

/// Outcome of power iteration on the undeflated matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum UnitMode {
    Found(EigenPair, NextMode),
    /// The dominant modulus is shared by real eigenvalues `a` and `b`.
    Tie(f64, f64),
}

/// Dominant pair of `a` plus the eigenvalue that dominates once it is
/// deflated with the ones left vector.
pub(crate) fn unit_mode_and_next(a: &StochasticMatrix) -> Result<UnitMode, SpectralError> {
    let n = a.dim();
    let ctl = IterationControl {
        step_tol: DEFLATION_STEP_TOL,
        max_iter: DEFLATION_MAX_ITER,
        residual_tol: Some(DEFLATION_RESIDUAL_TOL),
    };
    let (value, v) = match dominant(a.as_matrix(), &deflation_start(n, 0), &ctl) {
        Dominant::Converged { value, vector } => (value, canonical(vector)),
        Dominant::Null { .. } => unreachable!("column sums are preserved, so A·1 ≠ 0"),
        Dominant::Tie { a, b, .. } => return Ok(UnitMode::Tie(a, b)),
        Dominant::Complex { re, im } => {
            return Err(SpectralError::ComplexSpectrum { index: 0, re, im })
        }
        Dominant::Exhausted { iterations } => {
            return Err(SpectralError::NoConvergence {
                index: 0,
                iterations,
            })
        }
    };
    let pair = EigenPair::new(value, Vector::from_raw(v.clone()));
    if n == 1 {
        return Ok(UnitMode::Found(pair, NextMode::Real(0.0)));
    }
    let total: f64 = v.iter().sum();
    let mut work = a.as_matrix().clone();
    for (i, vi) in v.iter().enumerate() {
        for j in 0..n {
            work.set(i, j, work.get(i, j) - value * vi / total);
        }
    }
    let next = match dominant(&work, &deflation_start(n, 1), &ctl) {
        Dominant::Converged { value, .. } => NextMode::Real(value),
        Dominant::Null { .. } => NextMode::Real(0.0),
        Dominant::Complex { re, im } => NextMode::Complex { re, im },
        Dominant::Tie { a, b, .. } => NextMode::Tie(a, b),
        Dominant::Exhausted { iterations } => {
            return Err(SpectralError::NoConvergence {
                index: 1,
                iterations,
            })
        }
    };
    Ok(UnitMode::Found(pair, next))
}

/// Solves `V c = x₀` where `V`'s columns are the spectrum's vectors.
pub fn decompose_in_eigenbasis(
    s: &Spectrum,
    x0: &Vector,
) -> Result<EigenCoordinates, SpectralError> {
    if x0.len() != s.dim() {
        return Err(SpectralError::DimensionMismatch {
            expected: s.dim(),
            found: x0.len(),
        });
    }
    match matrix::solve_linear(&s.eigenvector_matrix(), x0) {
        Ok(c) => Ok(EigenCoordinates {
            coeffs: c.into_inner(),
        }),
        Err(MatrixError::SingularMatrix) => Err(SpectralError::SingularBasis),
        Err(MatrixError::DimensionMismatch { expected, found }) => {
            Err(SpectralError::DimensionMismatch { expected, found })
        }
        Err(_) => Err(SpectralError::SingularBasis),
    }
}
