use super::{EstimateError, SufficientStats};
use crate::scalar::{abs, Scalar};
use crate::sparse::SparseMatrix;

/// `SSE(M, w) = Σ_i w_i⁻¹ ‖N_i − w_i M‖²` split as
/// `variance = Σ_i w_i⁻¹‖N_i‖² − ‖N‖²` plus `bias = ‖N − M‖²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SseParts<T> {
    pub variance: T,
    pub bias: T,
    pub total: T,
}

/// Evaluates the objective from sufficient statistics alone.
///
/// `weights` holds one entry per accepted trajectory in the order of
/// [`SufficientStats::trajectory_norms_sq`] (ascending norm). They must be
/// non-negative and sum to one. A zero weight on a non-empty trajectory
/// makes the variance infinite.
pub fn sse<T: Scalar>(m: &SparseMatrix<T>, weights: &[T], stats: &SufficientStats) -> Result<SseParts<T>, EstimateError> {
    let norms = stats.trajectory_norms_sq();
    if weights.len() != norms.len() || m.size() != stats.vertex_count() {
        return Err(EstimateError::SizeMismatch);
    }
    let total_w: T = weights.iter().copied().sum();
    if weights.iter().any(|&w| !(w >= T::zero())) || abs(total_w - T::one()) > T::tol(1e-9) {
        return Err(EstimateError::InvalidWeights);
    }
    let mut spread = T::zero();
    for (&sq, &w) in norms.iter().zip(weights) {
        if sq == 0 {
            continue;
        }
        spread += if w == T::zero() { T::infinity() } else { T::from_count(sq) / w };
    }
    let variance = spread - T::from_count(stats.n_squared_norm());
    let n = stats.n_matrix().map(|_, _, c| T::from_count(c));
    let bias = n.combine(T::one(), m, -T::one()).squared_norm();
    Ok(SseParts { variance, bias, total: variance + bias })
}

/// `MSE(Q, n) = SSE(n_eff Q, n / n_eff) / n_eff` for per-trajectory
/// effective sizes `n` (same order as in [`sse`]).
pub fn mse<T: Scalar>(q: &SparseMatrix<T>, eff_sizes: &[T], stats: &SufficientStats) -> Result<T, EstimateError> {
    let n_eff: T = eff_sizes.iter().copied().sum();
    if !(n_eff > T::zero()) {
        return Err(EstimateError::InvalidWeights);
    }
    let w: Vec<T> = eff_sizes.iter().map(|&x| x / n_eff).collect();
    Ok(sse(&q.scale(n_eff), &w, stats)?.total / n_eff)
}
