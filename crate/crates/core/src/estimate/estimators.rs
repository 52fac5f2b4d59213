use super::{EstimateError, SufficientStats};
use crate::markov::{
    dense_solve_raw, ergodic_projection, ergodic_projection_dense, q_from_p, stationary, Kernel,
    StationaryDistribution, StationaryOptions, TwoDimStationary, DENSE_STATIONARY_LIMIT,
};
use crate::road_graph::{is_strongly_connected, Digraph, RoadNetwork};
use crate::scalar::{sqrt, Scalar};
use crate::sparse::SparseMatrix;
use crate::spectral::{LagrangeOptions, LagrangeSolver, LagrangeVector};

/// Rows with fewer observed transitions than this fall back to ML under the
/// default repair policy.
pub const DEFAULT_MIN_TRANSITIONS: u64 = 20;

const PROJECTION_TOL: f64 = 1e-13;
const PROJECTION_MAX_ITER: usize = 1_000_000;

/// `N / (n − k)`. Its row and column sums differ by `(s − e)/(n − k)`, so
/// it is generally not a two-dimensional stationary distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct NaiveEstimate<T> {
    pub q: SparseMatrix<T>,
    /// Row sum minus column sum per vertex.
    pub marginal_gap: Vec<T>,
}

pub fn estimate_naive<T: Scalar>(stats: &SufficientStats) -> Result<NaiveEstimate<T>, EstimateError> {
    let m = transitions(stats)?;
    let denom = T::from_count(m);
    let q = counts_as::<T>(stats).scale(T::one() / denom);
    let marginal_gap = stats.s_minus_e().iter().map(|&x| T::lit(x as f64) / denom).collect();
    Ok(NaiveEstimate { q, marginal_gap })
}

fn transitions(stats: &SufficientStats) -> Result<u64, EstimateError> {
    match stats.n() - stats.k() {
        0 => Err(EstimateError::EmptyCorpus { n: stats.n(), k: stats.k() }),
        m => Ok(m),
    }
}

fn counts_as<T: Scalar>(stats: &SufficientStats) -> SparseMatrix<T> {
    stats.n_matrix().map(|_, _, c| T::from_count(c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackReason {
    FewTransitions,
    NegativeEntry,
    NonPositiveRow,
}

/// Non-fatal events met while estimating.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Diagnostic {
    /// Vertex never left in the corpus; its ML row is the identity.
    UnvisitedVertex { vertex: usize },
    RowFallback { vertex: usize, reason: FallbackReason },
    RowClamped { vertex: usize },
    /// The estimated kernel has no strongly connected support; `π̂` is the
    /// ergodic projection of the uniform law.
    Reducible,
    NegativePi { vertex: usize, value: f64 },
}

/// Treatment of negative entries in a solved stationary vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PiFix {
    /// Set negative entries to zero and renormalise.
    #[default]
    Clamp,
    /// Subtract the minimum from every entry and renormalise.
    Shift,
}

impl PiFix {
    fn apply<T: Scalar>(self, pi: &mut [T], diags: &mut Vec<Diagnostic>) {
        let mut min = T::zero();
        for (v, &x) in pi.iter().enumerate() {
            if x < T::zero() {
                diags.push(Diagnostic::NegativePi { vertex: v, value: x.as_f64() });
                if x < min {
                    min = x;
                }
            }
        }
        if min == T::zero() {
            return;
        }
        match self {
            PiFix::Clamp => pi.iter_mut().for_each(|x| {
                if *x < T::zero() {
                    *x = T::zero()
                }
            }),
            PiFix::Shift => pi.iter_mut().for_each(|x| *x -= min),
        }
        let total: T = pi.iter().copied().sum();
        pi.iter_mut().for_each(|x| *x /= total);
    }
}

/// Policy for WLS rows that do not give a probability vector directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum RowRepair {
    /// Use the ML row when the vertex has fewer than `min_transitions`
    /// observed transitions or its WLS row has a negative entry.
    FallbackToMl { min_transitions: u64 },
    /// Zero out negative entries and renormalise; ML only if nothing is
    /// left.
    ClampRenormalize,
}

impl Default for RowRepair {
    fn default() -> Self {
        RowRepair::FallbackToMl { min_transitions: DEFAULT_MIN_TRANSITIONS }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WlsOptions {
    pub lagrange: LagrangeOptions,
    pub repair: RowRepair,
    pub pi_fix: PiFix,
}

/// Trajectories sharing a count-matrix norm share a weight
/// `ŵ = ‖N_i‖ / Σ_j ‖N_j‖`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct WeightClass<T> {
    pub norm_sq: u64,
    pub multiplicity: u64,
    pub weight: T,
}

/// The WLS solution before any repair.
#[derive(Clone, Debug)]
pub struct WlsRaw<T> {
    pub lambda: LagrangeVector<T>,
    /// `M̂ = N + R` with `r_uv = λ_v − λ_u` on edges.
    pub m_hat: SparseMatrix<T>,
    /// `(n − k) + (d⁻ − d⁺)ᵀλ`, the total mass of `M̂`.
    pub n_eff: T,
    pub weights: Vec<WeightClass<T>>,
}

impl<T: Scalar> WlsRaw<T> {
    /// `M̂ / n_eff`. May have negative entries.
    pub fn q_raw(&self) -> SparseMatrix<T> {
        self.m_hat.scale(T::one() / self.n_eff)
    }
}

#[derive(Clone, Debug)]
pub struct EstimatorOutput<T> {
    pub q: TwoDimStationary<T>,
    pub p: Kernel<T>,
    pub pi: Vec<T>,
    /// `n − k` for ML, the WLS normalisation otherwise.
    pub n_eff: T,
    pub wls: Option<WlsRaw<T>>,
    pub diagnostics: Vec<Diagnostic>,
}

fn check_size(stats: &SufficientStats, g: &RoadNetwork) -> Result<(), EstimateError> {
    if stats.vertex_count() != g.vertex_count() {
        return Err(EstimateError::SizeMismatch);
    }
    Ok(())
}

fn ml_row<T: Scalar>(stats_row: &[(usize, u64)], total: u64, u: usize) -> Vec<(usize, T)> {
    if total == 0 {
        return vec![(u, T::one())];
    }
    let t = T::from_count(total);
    stats_row.iter().map(|&(v, c)| (v, T::from_count(c) / t)).collect()
}

/// Stationary law of an estimated kernel, with the reducible case handled
/// by projection.
fn solve_pi<T: Scalar>(
    p: &Kernel<T>,
    fix: PiFix,
    diags: &mut Vec<Diagnostic>,
) -> Result<StationaryDistribution<T>, EstimateError> {
    if !is_strongly_connected(&p.support_graph()) {
        diags.push(Diagnostic::Reducible);
        if p.size() <= DENSE_STATIONARY_LIMIT {
            return Ok(ergodic_projection_dense(p)?);
        }
        return Ok(ergodic_projection(p, PROJECTION_TOL, PROJECTION_MAX_ITER)?);
    }
    if p.size() <= DENSE_STATIONARY_LIMIT {
        let mut pi = dense_solve_raw(p)?;
        fix.apply(&mut pi, diags);
        Ok(StationaryDistribution::new(p, pi, 1))
    } else {
        Ok(stationary(p, StationaryOptions::default())?)
    }
}

/// `p̂_uv = n_uv / n_{u+}`; vertices never left get the identity row.
pub fn estimate_ml<T: Scalar>(stats: &SufficientStats, g: &RoadNetwork) -> Result<EstimatorOutput<T>, EstimateError> {
    check_size(stats, g)?;
    let m = transitions(stats)?;
    let counts = stats.n_matrix();
    let totals = stats.out_totals();
    let mut diagnostics = Vec::new();
    let rows = (0..g.vertex_count())
        .map(|u| {
            if totals[u] == 0 {
                diagnostics.push(Diagnostic::UnvisitedVertex { vertex: u });
            }
            ml_row(counts.row(u), totals[u], u)
        })
        .collect();
    let p = Kernel::on_graph(g, rows)?;
    let st = solve_pi(&p, PiFix::Clamp, &mut diagnostics)?;
    let q = q_from_p(&p, &st)?;
    Ok(EstimatorOutput { q, p, pi: st.pi, n_eff: T::from_count(m), wls: None, diagnostics })
}

/// The unrepaired WLS solution for a prepared Lagrange solver.
pub fn wls_raw<T: Scalar>(
    stats: &SufficientStats,
    g: &RoadNetwork,
    solver: &LagrangeSolver<T>,
) -> Result<WlsRaw<T>, EstimateError> {
    check_size(stats, g)?;
    let m = transitions(stats)?;
    let lambda = solver.solve(&stats.s_minus_e())?;
    let l = &lambda.lambda;
    let corrections = g.edges().iter().map(|&(u, v)| (u, v, l[v] - l[u]));
    let counts = stats.n_matrix();
    let observed = counts.iter().map(|(u, v, c)| (u, v, T::from_count(c)));
    let m_hat = SparseMatrix::from_triplets(g.vertex_count(), observed.chain(corrections));
    let mut n_eff = T::from_count(m);
    for (v, &x) in l.iter().enumerate() {
        n_eff += T::lit(g.in_degree(v) as f64 - g.out_degree(v) as f64) * x;
    }
    if !(n_eff > T::zero()) {
        return Err(EstimateError::DegenerateNormalization(n_eff.as_f64()));
    }
    let norm_total: T = stats.norm_classes().map(|(sq, mult)| T::from_count(mult) * sqrt(T::from_count(sq))).sum();
    let weights = stats
        .norm_classes()
        .map(|(norm_sq, multiplicity)| WeightClass { norm_sq, multiplicity, weight: sqrt(T::from_count(norm_sq)) / norm_total })
        .collect();
    Ok(WlsRaw { lambda, m_hat, n_eff, weights })
}

/// WLS estimate with a fresh Lagrange solver.
pub fn estimate_wls<T: Scalar>(
    stats: &SufficientStats,
    g: &RoadNetwork,
    opts: WlsOptions,
) -> Result<EstimatorOutput<T>, EstimateError> {
    let solver = LagrangeSolver::new(g, opts.lagrange)?;
    estimate_wls_with(stats, g, &solver, opts)
}

/// WLS estimate reusing `solver`, which must have been built for `g`.
///
/// When every row of `M̂` is usable, `Q̂ = M̂ / n_eff` and `π̂` is its
/// marginal. Otherwise the repaired kernel is solved for `π̂` and
/// `Q̂ = diag(π̂) P̂`.
pub fn estimate_wls_with<T: Scalar>(
    stats: &SufficientStats,
    g: &RoadNetwork,
    solver: &LagrangeSolver<T>,
    opts: WlsOptions,
) -> Result<EstimatorOutput<T>, EstimateError> {
    if !is_strongly_connected(g) {
        return Err(EstimateError::NotStronglyConnected);
    }
    let raw = wls_raw(stats, g, solver)?;
    let counts = stats.n_matrix();
    let totals = stats.out_totals();
    let mut diagnostics = Vec::new();
    let mut repaired = false;
    let mut rows = Vec::with_capacity(g.vertex_count());
    for u in 0..g.vertex_count() {
        let row = raw.m_hat.row(u);
        let negative = row.iter().any(|&(_, x)| x < T::zero());
        let sum: T = row.iter().map(|&(_, x)| x).sum();
        let mut fallback = |reason| {
            diagnostics.push(Diagnostic::RowFallback { vertex: u, reason });
            ml_row::<T>(counts.row(u), totals[u], u)
        };
        let new_row = match opts.repair {
            RowRepair::FallbackToMl { min_transitions } => {
                if totals[u] < min_transitions {
                    Some(fallback(FallbackReason::FewTransitions))
                } else if negative {
                    Some(fallback(FallbackReason::NegativeEntry))
                } else if sum <= T::zero() {
                    Some(fallback(FallbackReason::NonPositiveRow))
                } else {
                    None
                }
            }
            RowRepair::ClampRenormalize => {
                let kept: T = row.iter().map(|&(_, x)| if x > T::zero() { x } else { T::zero() }).sum();
                if kept <= T::zero() {
                    Some(fallback(FallbackReason::NonPositiveRow))
                } else if negative {
                    diagnostics.push(Diagnostic::RowClamped { vertex: u });
                    Some(row.iter().map(|&(v, x)| (v, if x > T::zero() { x / kept } else { T::zero() })).collect())
                } else {
                    None
                }
            }
        };
        match new_row {
            Some(r) => {
                repaired = true;
                rows.push(r);
            }
            None => rows.push(row.iter().map(|&(v, x)| (v, x / sum)).collect()),
        }
    }
    let p = Kernel::on_graph(g, rows)?;
    if !repaired {
        let q = TwoDimStationary::new(g, raw.q_raw())?;
        let pi = q.marginal().to_vec();
        return Ok(EstimatorOutput { q, p, pi, n_eff: raw.n_eff, wls: Some(raw), diagnostics });
    }
    let st = solve_pi(&p, opts.pi_fix, &mut diagnostics)?;
    let q = q_from_p(&p, &st)?;
    Ok(EstimatorOutput { q, p, pi: st.pi, n_eff: raw.n_eff, wls: Some(raw), diagnostics })
}
