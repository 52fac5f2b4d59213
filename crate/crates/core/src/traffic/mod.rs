//! Markov traffic: `k` independent walkers sharing one kernel.
//!
//! At the configuration level the stationary law is multinomial with
//! parameter `π`. [`config_kernel`] builds the induced kernel on all
//! configurations of size `k` (small cases only) as an exact oracle, and
//! [`Simulator`] runs the walkers.

mod chi2;
mod config;
pub mod io;
mod simulate;

pub use chi2::{chi_squared, ChiSquared};
pub use config::{
    config_kernel, config_kernel_power_limit, config_stationary, enumerate_configs, enumerate_transport_matrices,
    multinomial_edge_pmf, multinomial_pmf, transport_probability, ConfigKernel, LogFactorial, TrafficConfig,
    TransportMatrix, DEFAULT_CONFIG_CAP,
};
pub use simulate::{simulate, SamplingTable, SimulationRun, Simulator};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("configurations have different sizes ({0} vs {1})")]
    SizeMismatch(u64, u64),
    #[error("configuration vector has {got} entries, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{size} configurations exceed the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: usize },
    #[error("observed mass in group {0}, which has zero stationary probability")]
    OutOfSupport(usize),
    #[error("configuration is empty")]
    EmptyConfig,
}
