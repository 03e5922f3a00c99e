//! Seeded random walks on a chain, used as an independent check of the
//! analytic stationary distribution.

use thiserror::Error;

use crate::matrix::{StochasticMatrix, Vector};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonteCarloError {
    #[error("start state {start} is out of range for a {dim}-state chain")]
    StartOutOfRange { start: usize, dim: usize },
    #[error("burn-in {burn_in} leaves no samples from a walk of {len} states")]
    BurnInTooLarge { burn_in: usize, len: usize },
    #[error("walk visits state {state}, outside a {dim}-state chain")]
    StateOutOfRange { state: usize, dim: usize },
}

/// Visited state indices, `steps + 1` of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub states: Vec<usize>,
    pub seed: u64,
}

/// Cumulative column sums for inverse-CDF sampling.
struct ColumnTables {
    cdf: Vec<Vec<f64>>,
    /// Last index with positive probability; absorbs round-off.
    last_positive: Vec<usize>,
}

impl ColumnTables {
    fn new(a: &StochasticMatrix) -> Self {
        let n = a.dim();
        let mut cdf = Vec::with_capacity(n);
        let mut last_positive = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = 0.0;
            let col: Vec<f64> = (0..n)
                .map(|i| {
                    acc += a.get(i, j);
                    acc
                })
                .collect();
            cdf.push(col);
            // every column sums to one, so some entry is positive
            last_positive.push((0..n).rev().find(|&i| a.get(i, j) > 0.0).unwrap_or(n - 1));
        }
        ColumnTables { cdf, last_positive }
    }

    fn next(&self, from: usize, u: f64) -> usize {
        let col = &self.cdf[from];
        col.iter()
            .position(|&c| u < c)
            .map_or(self.last_positive[from], |i| {
                i.min(self.last_positive[from])
            })
    }
}

/// Walk of `steps` transitions from `start`. From state `j` the next state
/// is the first `i` whose cumulative probability down column `j` exceeds a
/// uniform draw from the seed's walk stream.
pub fn sample_walk(
    a: &StochasticMatrix,
    start: usize,
    steps: usize,
    seed: u64,
) -> Result<Walk, MonteCarloError> {
    let n = a.dim();
    if start >= n {
        return Err(MonteCarloError::StartOutOfRange { start, dim: n });
    }
    let tables = ColumnTables::new(a);
    let mut g = rng::seeded(seed, rng::WALK_STREAM);
    let mut states = Vec::with_capacity(steps + 1);
    let mut current = start;
    states.push(current);
    for _ in 0..steps {
        current = tables.next(current, rng::uniform(&mut g));
        states.push(current);
    }
    Ok(Walk { states, seed })
}

/// Visit frequencies of `w.states[burn_in..]`.
pub fn empirical_distribution(
    w: &Walk,
    burn_in: usize,
    dim: usize,
) -> Result<Vector, MonteCarloError> {
    let len = w.states.len();
    if burn_in >= len {
        return Err(MonteCarloError::BurnInTooLarge { burn_in, len });
    }
    let mut counts = vec![0u64; dim];
    for &s in &w.states[burn_in..] {
        let slot = counts
            .get_mut(s)
            .ok_or(MonteCarloError::StateOutOfRange { state: s, dim })?;
        *slot += 1;
    }
    let total = (len - burn_in) as f64;
    let freq = counts.into_iter().map(|c| c as f64 / total).collect();
    Ok(Vector::new(freq).expect("dim >= 1 and finite frequencies"))
}

/// `count` integer vectors with entries uniform in `[-10, 10]`, drawn from
/// the initial-state stream of `seed`.
pub fn random_initial_states(dim: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut g = rng::seeded(seed, rng::INITIAL_STATE_STREAM);
    (0..count)
        .map(|_| {
            let entries = (0..dim)
                .map(|_| rng::uniform_int(&mut g, -10, 10) as f64)
                .collect();
            Vector::new(entries).expect("finite entries")
        })
        .collect()
}
