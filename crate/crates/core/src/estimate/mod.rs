//! Estimating the two-dimensional stationary distribution from trajectories.
//!
//! Everything the estimators need is in [`SufficientStats`]: consecutive-pair
//! counts `N`, start and end counts `s`, `e`, and the norms `‖N_i‖` of the
//! per-trajectory count matrices. Three estimators are provided:
//!
//! - naive: `N / (n − k)`, which ignores that trajectories start and stop;
//! - ML: row-normalised counts, with `π̂` from the balance equations;
//! - WLS: `M̂ = N + (λ_v − λ_u)` on edges, where `Lλ = s − e`, normalised by
//!   the effective sample size. Its marginals agree by construction.

mod benchmark;
pub mod corpus;
mod estimators;
mod objective;
mod stats;

pub use benchmark::{
    benchmark, benchmark_csv, benchmark_grid, sample_trajectories, BenchmarkCell, BenchmarkOptions, BiasSummary,
    WlsVariant,
};
pub use estimators::{
    estimate_ml, estimate_naive, estimate_wls, estimate_wls_with, wls_raw, Diagnostic, EstimatorOutput, FallbackReason,
    NaiveEstimate, PiFix, RowRepair, WeightClass, WlsOptions, WlsRaw, DEFAULT_MIN_TRANSITIONS,
};
pub use objective::{mse, sse, SseParts};
pub use stats::{collect_stats, collect_stats_parallel, Rejection, SufficientStats};

use crate::markov::MarkovError;
use crate::spectral::SpectralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("corpus has no transitions (n = {n}, k = {k})")]
    EmptyCorpus { n: u64, k: u64 },
    #[error("effective sample size {0} is not positive")]
    DegenerateNormalization(f64),
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("weights must be non-negative and sum to 1")]
    InvalidWeights,
    #[error("statistics and graph have different vertex counts")]
    SizeMismatch,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
