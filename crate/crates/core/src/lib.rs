//! Markov traffic on road networks.
//!
//! The crate models vehicle movement as independent Markov random walks on a
//! road network and estimates the two-dimensional stationary distribution
//! `Q` (`q_uv = π_u p_uv`) from observed trajectories. The main pieces:
//!
//! - [`road_graph`]: simple digraphs, line digraphs, closures, connectivity.
//! - [`spectral`]: graph Laplacians and the Lagrange-vector solve.
//! - [`markov`]: kernels, stationary distributions, `Q ↔ (P, π)`.
//! - [`traffic`]: configuration laws, the configuration kernel, simulation.
//! - [`estimate`]: sufficient statistics and the naive, ML and WLS estimators.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the file formats and the command
//! line tool use.

pub mod estimate;
pub mod markov;
pub mod road_graph;
pub mod scalar;
pub mod sparse;
pub mod spectral;
pub mod toy;
pub mod traffic;

pub use scalar::Scalar;

pub type MarkovKernel = markov::Kernel<f64>;
pub type StationaryDist = markov::StationaryDistribution<f64>;
pub type TwoDimQ = markov::TwoDimStationary<f64>;
pub type Laplacians = spectral::LaplacianPair<f64>;
pub type Decomposition = spectral::SpectralDecomposition<f64>;
pub type LagrangeSolverF64 = spectral::LagrangeSolver<f64>;
pub type Estimate = estimate::EstimatorOutput<f64>;
pub type Matrix = sparse::SparseMatrix<f64>;
