//! Helpers shared by the integration test targets.

use markovdyn::chain_spec::{ChainSpec, InitialState};
use markovdyn::matrix::{Matrix, Vector};
use markovdyn::rng;

/// Matrices with random shapes and exact-decimal or raw-bit entries.
pub fn seeded_spec(seed: u64) -> ChainSpec {
    let mut g = rng::seeded(seed, 0);
    let n = rng::uniform_int(&mut g, 1, 5) as usize;
    let entry = |g: &mut rng::StreamRng| {
        if rng::uniform(g) < 0.5 {
            rng::uniform_int(g, 0, 1000) as f64 / 1000.0
        } else {
            rng::uniform(g) * 10f64.powi(rng::uniform_int(g, -20, 20) as i32)
        }
    };
    let data: Vec<f64> = (0..n * n).map(|_| entry(&mut g)).collect();
    let count = rng::uniform_int(&mut g, 0, 6) as usize;
    let initials = (0..count)
        .map(|i| InitialState {
            name: format!("s_{i}"),
            state: Vector::new((0..n).map(|_| entry(&mut g) - 0.5).collect()).unwrap(),
        })
        .collect();
    ChainSpec {
        matrix: Matrix::new(n, n, data).unwrap(),
        initials,
        random_initials: rng::uniform_int(&mut g, 0, 8) as usize,
        steps: rng::uniform_int(&mut g, 1, 500) as usize,
        seed: rng::uniform_int(&mut g, 0, 1 << 40) as u64,
    }
}
