use super::{estimate_ml, estimate_wls_with, wls_raw, EstimateError, SufficientStats, WlsOptions};
use crate::markov::{q_from_p, stationary, Kernel, StationaryOptions, TwoDimStationary};
use crate::road_graph::{Digraph, RoadNetwork};
use crate::sparse::SparseMatrix;
use crate::spectral::LagrangeSolver;
use crate::traffic::SamplingTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Which WLS matrix is compared against the truth.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WlsVariant {
    /// `M̂ / n_eff` before any row repair.
    #[default]
    Raw,
    /// The repaired estimate returned by the estimator.
    Repaired,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchmarkOptions {
    pub reps: usize,
    pub seed: u64,
    pub wls_variant: WlsVariant,
    pub wls: WlsOptions,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self { reps: 100, seed: 0, wls_variant: WlsVariant::Raw, wls: WlsOptions::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BiasSummary {
    pub mean: f64,
    /// Sample standard deviation (zero for a single repetition).
    pub sd: f64,
}

impl BiasSummary {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = if xs.len() < 2 { 0.0 } else { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() };
        Self { mean, sd }
    }

    /// Standard error of the mean.
    pub fn se(&self, reps: usize) -> f64 {
        self.sd / (reps as f64).sqrt()
    }
}

/// Distances `‖Q̂ − Q‖_G` for one `(k, n)` cell.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BenchmarkCell {
    pub k: usize,
    pub n: usize,
    pub ml: BiasSummary,
    pub wls: BiasSummary,
    pub ml_biases: Vec<f64>,
    pub wls_biases: Vec<f64>,
}

/// `k` trajectories of exactly `n` positions, starting from `start_cdf`.
pub fn sample_trajectories<R: Rng + ?Sized>(
    table: &SamplingTable,
    start_cdf: &[f64],
    k: usize,
    n: usize,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let top = start_cdf[start_cdf.len() - 1];
    (0..k)
        .map(|_| {
            let r = rng.random::<f64>() * top;
            let mut u = start_cdf.partition_point(|&c| c <= r).min(start_cdf.len() - 1);
            let mut t = Vec::with_capacity(n);
            t.push(u);
            for _ in 1..n {
                u = table.sample(u, rng);
                t.push(u);
            }
            t
        })
        .collect()
}

struct Setup<'a> {
    g: &'a RoadNetwork,
    table: SamplingTable,
    cdf: Vec<f64>,
    q: TwoDimStationary<f64>,
    solver: LagrangeSolver<f64>,
}

impl<'a> Setup<'a> {
    fn new(g: &'a RoadNetwork, p: &Kernel<f64>, opts: &BenchmarkOptions) -> Result<Self, EstimateError> {
        let pi = stationary(p, StationaryOptions::default())?;
        let q = q_from_p(p, &pi)?;
        let cdf = pi
            .pi
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        let solver = LagrangeSolver::new(g, opts.wls.lagrange)?;
        Ok(Self { g, table: SamplingTable::new(p), cdf, q, solver })
    }

    fn rep(&self, k: usize, n: usize, opts: &BenchmarkOptions, rep: usize) -> Result<(f64, f64), EstimateError> {
        let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(opts.seed, k, n));
        rng.set_stream(rep as u64);
        let trajs = sample_trajectories(&self.table, &self.cdf, k, n, &mut rng);
        let mut stats = SufficientStats::new(self.g.vertex_count());
        for t in &trajs {
            stats.add(t, 1, self.g).expect("sampled along the kernel support");
        }
        let truth = self.q.matrix();
        let ml = estimate_ml::<f64>(&stats, self.g)?;
        let wls: SparseMatrix<f64> = match opts.wls_variant {
            WlsVariant::Raw => wls_raw(&stats, self.g, &self.solver)?.q_raw(),
            WlsVariant::Repaired => estimate_wls_with(&stats, self.g, &self.solver, opts.wls)?.q.matrix().clone(),
        };
        Ok((ml.q.matrix().distance(truth), wls.distance(truth)))
    }

    fn cell(&self, k: usize, n: usize, opts: &BenchmarkOptions) -> Result<BenchmarkCell, EstimateError> {
        let pairs = (0..opts.reps).into_par_iter().map(|r| self.rep(k, n, opts, r)).collect::<Result<Vec<_>, _>>()?;
        let (ml_biases, wls_biases): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        Ok(BenchmarkCell { k, n, ml: BiasSummary::of(&ml_biases), wls: BiasSummary::of(&wls_biases), ml_biases, wls_biases })
    }
}

/// Per-cell base seed: splitmix64 of the user seed and the cell shape.
fn cell_seed(seed: u64, k: usize, n: usize) -> u64 {
    let mut z = seed ^ ((k as u64) << 32 | n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Samples `opts.reps` corpora of `k` trajectories with `n` positions from
/// the stationary chain and records the distance of the ML and WLS
/// estimates to the true `Q`. Repetition `r` uses ChaCha stream `r`, so
/// results are reproducible for any thread count.
pub fn benchmark(
    g: &RoadNetwork,
    p: &Kernel<f64>,
    k: usize,
    n: usize,
    opts: &BenchmarkOptions,
) -> Result<BenchmarkCell, EstimateError> {
    assert!(n >= 2 && k >= 1 && opts.reps >= 1, "need k ≥ 1, n ≥ 2 and at least one repetition");
    Setup::new(g, p, opts)?.cell(k, n, opts)
}

/// [`benchmark`] over a grid, sharing the Lagrange solver.
pub fn benchmark_grid(
    g: &RoadNetwork,
    p: &Kernel<f64>,
    ks: &[usize],
    ns: &[usize],
    opts: &BenchmarkOptions,
) -> Result<Vec<BenchmarkCell>, EstimateError> {
    assert!(ns.iter().all(|&n| n >= 2) && ks.iter().all(|&k| k >= 1) && opts.reps >= 1);
    let setup = Setup::new(g, p, opts)?;
    let mut out = Vec::with_capacity(ks.len() * ns.len());
    for &k in ks {
        for &n in ns {
            out.push(setup.cell(k, n, opts)?);
        }
    }
    Ok(out)
}

pub fn benchmark_csv(cells: &[BenchmarkCell]) -> String {
    let mut s = String::from("k,n,method,mean_bias,sd_bias\n");
    for c in cells {
        for (name, b) in [("ml", c.ml), ("wls", c.wls)] {
            writeln!(s, "{},{},{},{:?},{:?}", c.k, c.n, name, b.mean, b.sd).unwrap();
        }
    }
    s
}
