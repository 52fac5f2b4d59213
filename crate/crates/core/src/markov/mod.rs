//! Markov kernels on vertices and on line digraphs, stationary
//! distributions, and the two-dimensional stationary distribution
//! `q_uv = π_u p_uv` together with its inverse.

pub mod io;
mod kernel;
pub mod random;
mod stationary;
mod two_dim;

pub use kernel::{
    edge_kernel_for_closure, validate_kernel, Kernel, KernelDiagnostics, SupportGraph, ValidationMode,
};
pub(crate) use stationary::dense_solve_raw;
pub use stationary::{
    ergodic_projection, ergodic_projection_dense, stationary, StationaryDistribution, StationaryMethod, StationaryOptions,
    DENSE_STATIONARY_LIMIT,
};
pub use two_dim::{affine_combine, p_from_q, q_from_p, TwoDimStationary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarkovError {
    #[error("row {row} sums to {sum}, not 1")]
    RowSum { row: usize, sum: f64 },
    #[error("negative entry at ({row}, {col})")]
    Negative { row: usize, col: usize },
    #[error("entry ({row}, {col}) lies outside the graph support")]
    OffSupport { row: usize, col: usize },
    #[error("column {col} out of range in row {row}")]
    OutOfRange { row: usize, col: usize },
    #[error("closure constraint violated at ({from}, {to})")]
    ClosureConstraint { from: usize, to: usize },
    #[error("kernel support is not strongly connected")]
    NotStronglyConnected,
    #[error("no convergence after {iterations} iterations (last change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },
    #[error("row and column marginals differ by {0:e}")]
    MarginalMismatch(f64),
    #[error("total mass is {0}, not 1")]
    NotNormalized(f64),
    #[error("zero marginal at vertex {0}")]
    ZeroMarginal(usize),
    #[error("matrices live on different vertex sets")]
    GraphMismatch,
    #[error("dense solve failed: singular system")]
    Singular,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
