//! Trajectories of `x_{k+1} = A x_k`, their limits, and convergence rates.
//!
//! Trajectories can be produced two ways: by repeated matrix-vector
//! products ([`iterate_trajectory`]) or from the eigenbasis expansion
//! `x_k = Σ cᵢ λᵢᵏ vᵢ` ([`closed_form_state`]). All convergence thresholds
//! use the ∞-norm.

use thiserror::Error;

use crate::matrix::{mat_vec, MatrixError, StochasticMatrix, Vector};
use crate::spectral::{
    self, decompose_in_eigenbasis, EigenCoordinates, NextMode, SpectralError, Spectrum, UnitMode,
};

/// Eigenvalues within this distance of 1 are unit modes.
pub const UNIT_TOL: f64 = 1e-9;
/// Upper bound on the scan performed by [`convergence_report`].
pub const SCAN_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("coordinates have {found} entries but the spectrum has {expected} pairs")]
    AlignmentMismatch { expected: usize, found: usize },
    #[error("no steady state: eigenvalue {value} has modulus at least 1 but is not 1")]
    NoSteadyState { value: f64 },
    #[error("stationary distribution is not unique ({count} unit eigenvalues)")]
    NonUniqueStationary { count: usize },
    #[error("periodic chain: eigenvalue of modulus 1 other than 1 (modulus {modulus})")]
    PeriodicChain { modulus: f64 },
    #[error("unit eigenvector cannot be scaled to a distribution")]
    NotADistribution,
    #[error("tolerance must be positive and finite")]
    InvalidTolerance,
    #[error("no step up to {cap} reaches the tolerance")]
    CapExceeded { cap: usize },
}

/// States `x₀ … x_K` of one evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<Vector>,
    dim: usize,
}

impl Trajectory {
    /// Wraps precomputed states; all must share one length.
    pub fn from_states(states: Vec<Vector>) -> Result<Self, DynamicsError> {
        let dim = states
            .first()
            .map(Vector::len)
            .ok_or(MatrixError::EmptyVector)?;
        if let Some(s) = states.iter().find(|s| s.len() != dim) {
            return Err(MatrixError::DimensionMismatch {
                expected: dim,
                found: s.len(),
            }
            .into());
        }
        Ok(Trajectory { states, dim })
    }

    pub fn states(&self) -> &[Vector] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &Vector {
        &self.states[k]
    }

    /// Number of steps `K` (one less than the number of states).
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Per-step contraction factor `max |λᵢ|` over non-unit modes.
    pub rate: f64,
    pub steady_state: Vector,
    /// Smallest `k` with `‖x_k − x*‖_∞ ≤ tol`.
    pub steps_to_tol: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionMode {
    /// Along the remaining eigenvectors: the actual limit of the dynamics.
    Oblique,
    /// Nearest point of the unit eigenspace in the Euclidean sense.
    Orthogonal,
}

/// `[x₀, A x₀, …, A^steps x₀]` by repeated products.
pub fn iterate_trajectory(
    a: &StochasticMatrix,
    x0: &Vector,
    steps: usize,
) -> Result<Trajectory, DynamicsError> {
    if x0.len() != a.dim() {
        return Err(MatrixError::DimensionMismatch {
            expected: a.dim(),
            found: x0.len(),
        }
        .into());
    }
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0.clone());
    for k in 0..steps {
        let next = mat_vec(a, &states[k])?;
        states.push(next);
    }
    Ok(Trajectory {
        states,
        dim: a.dim(),
    })
}

fn check_alignment(s: &Spectrum, c: &EigenCoordinates) -> Result<(), DynamicsError> {
    if c.len() != s.dim() {
        return Err(DynamicsError::AlignmentMismatch {
            expected: s.dim(),
            found: c.len(),
        });
    }
    Ok(())
}

/// `Σᵢ cᵢ λᵢᵏ vᵢ` restricted to the modes selected by `keep`.
fn modal_sum(s: &Spectrum, c: &EigenCoordinates, k: usize, keep: impl Fn(f64) -> bool) -> Vec<f64> {
    let exponent = i32::try_from(k).unwrap_or(i32::MAX);
    let mut out = vec![0.0; s.dim()];
    for (ci, pair) in c.coeffs.iter().zip(s.pairs()) {
        if !keep(pair.value) {
            continue;
        }
        let weight = ci * pair.value.powi(exponent);
        out.iter_mut()
            .zip(pair.vector.iter())
            .for_each(|(o, v)| *o += weight * v);
    }
    out
}

fn is_unit(value: f64) -> bool {
    (value - 1.0).abs() <= UNIT_TOL
}

/// State at step `k` from the eigenbasis expansion.
pub fn closed_form_state(
    s: &Spectrum,
    c: &EigenCoordinates,
    k: usize,
) -> Result<Vector, DynamicsError> {
    check_alignment(s, c)?;
    Ok(Vector::new(modal_sum(s, c, k, |_| true))?)
}

fn check_steady(s: &Spectrum) -> Result<(), DynamicsError> {
    for p in s.pairs() {
        if !is_unit(p.value) && p.value.abs() >= 1.0 - UNIT_TOL {
            return Err(DynamicsError::NoSteadyState { value: p.value });
        }
    }
    Ok(())
}

/// Limit of the trajectory: the sum of `cᵢ vᵢ` over unit eigenvalues.
pub fn steady_state(s: &Spectrum, c: &EigenCoordinates) -> Result<Vector, DynamicsError> {
    check_alignment(s, c)?;
    check_steady(s)?;
    Ok(Vector::new(modal_sum(s, c, 0, is_unit))?)
}

/// Probability vector `π` with `A π = π`.
///
/// 2×2 chains use the closed-form spectrum. Larger chains use power
/// iteration for the unit mode and a single deflation to inspect the next
/// eigenvalue, which detects non-unique and periodic cases without needing a
/// fully real spectrum.
pub fn stationary_distribution(a: &StochasticMatrix) -> Result<Vector, DynamicsError> {
    let n = a.dim();
    if n == 1 {
        return Ok(Vector::new(vec![1.0])?);
    }
    let unit = if n == 2 {
        let s = spectral::eigen_2x2(a)?;
        let [first, second] = [&s.pairs()[0], &s.pairs()[1]];
        classify_next(second.value.abs(), is_unit(second.value))?;
        first.vector.clone()
    } else {
        match spectral::unit_mode_and_next(a) {
            Ok(UnitMode::Found(pair, next)) => {
                match next {
                    NextMode::Real(x) => classify_next(x.abs(), is_unit(x))?,
                    NextMode::Complex { re, im } => classify_next(re.hypot(im), false)?,
                    NextMode::Tie(x, y) => {
                        classify_next(x.abs(), is_unit(x) || is_unit(y))?;
                    }
                }
                pair.vector
            }
            Ok(UnitMode::Tie(x, y)) => {
                return Err(DynamicsError::PeriodicChain {
                    modulus: f64::max(x.abs(), y.abs()),
                })
            }
            Err(SpectralError::NoConvergence { index: 0, .. }) => {
                return Err(DynamicsError::PeriodicChain { modulus: 1.0 })
            }
            Err(e) => return Err(e.into()),
        }
    };

    let total = unit.sum();
    if total.abs() <= f64::EPSILON {
        return Err(DynamicsError::NotADistribution);
    }
    let pi = unit.scaled(1.0 / total);
    if pi.iter().any(|&x| x < -1e-14) {
        return Err(DynamicsError::NotADistribution);
    }
    Ok(pi)
}

fn classify_next(modulus: f64, unit: bool) -> Result<(), DynamicsError> {
    if unit {
        Err(DynamicsError::NonUniqueStationary { count: 2 })
    } else if modulus >= 1.0 - UNIT_TOL {
        Err(DynamicsError::PeriodicChain { modulus })
    } else {
        Ok(())
    }
}

/// Contraction rate, limit and first step within `tol` of the limit.
///
/// The step count comes from a direct scan over `k` of the decaying part
/// `‖Σ_{|λᵢ|<1} cᵢ λᵢᵏ vᵢ‖_∞`, capped at [`SCAN_CAP`].
pub fn convergence_report(
    s: &Spectrum,
    c: &EigenCoordinates,
    tol: f64,
) -> Result<ConvergenceReport, DynamicsError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(DynamicsError::InvalidTolerance);
    }
    let steady = steady_state(s, c)?;
    let rate = s
        .pairs()
        .iter()
        .filter(|p| !is_unit(p.value))
        .map(|p| p.value.abs())
        .fold(0.0, f64::max);
    let decaying = |v: f64| !is_unit(v);
    let steps_to_tol = (0..=SCAN_CAP)
        .find(|&k| {
            modal_sum(s, c, k, decaying)
                .iter()
                .fold(0.0f64, |m, x| m.max(x.abs()))
                <= tol
        })
        .ok_or(DynamicsError::CapExceeded { cap: SCAN_CAP })?;
    Ok(ConvergenceReport {
        rate,
        steady_state: steady,
        steps_to_tol,
        tol,
    })
}

/// Projection of `x0` onto the unit eigenspace, which must be one-dimensional.
pub fn project_onto_dominant(
    s: &Spectrum,
    x0: &Vector,
    mode: ProjectionMode,
) -> Result<Vector, DynamicsError> {
    let units: Vec<usize> = (0..s.dim())
        .filter(|&i| is_unit(s.pairs()[i].value))
        .collect();
    if units.len() != 1 {
        return Err(DynamicsError::NonUniqueStationary { count: units.len() });
    }
    let v1 = &s.pairs()[units[0]].vector;
    match mode {
        ProjectionMode::Oblique => {
            let c = decompose_in_eigenbasis(s, x0)?;
            Ok(Vector::new(modal_sum(s, &c, 0, is_unit))?)
        }
        ProjectionMode::Orthogonal => {
            if x0.len() != v1.len() {
                return Err(MatrixError::DimensionMismatch {
                    expected: v1.len(),
                    found: x0.len(),
                }
                .into());
            }
            Ok(v1.scaled(x0.dot(v1) / v1.dot(v1)))
        }
    }
}
