//! Analysis of discrete linear systems `x_{k+1} = A x_k` driven by a
//! column-stochastic matrix `A`.
//!
//! [`spectral`] finds eigenpairs, [`dynamics`] builds trajectories, steady
//! states and convergence reports on top of them, and [`montecarlo`]
//! samples the chain as an independent check. [`chain_spec`] reads the
//! plain-text input format, [`export`] and [`svg`] write results, and
//! [`cli`] ties these together behind the `markovdyn` binary.

pub mod chain_spec;
pub mod cli;
pub mod dynamics;
pub mod export;
pub mod matrix;
pub mod montecarlo;
pub mod numfmt;
pub mod rng;
pub mod spectral;
pub mod svg;
