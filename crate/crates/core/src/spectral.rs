//! Graph Laplacians of the symmetrised road network and the Lagrange-vector
//! solve `Lλ = s − e` behind the WLS estimator.
//!
//! With symmetric weights `w_uv = a_uv + a_vu` and degrees
//! `d_v = deg⁺(v) + deg⁻(v)`:
//!
//! - `L = D − A − Aᵀ`, positive semi-definite with kernel spanned by `1`
//!   on a connected graph;
//! - `L̃ = D^{-1/2} L D^{-1/2} = I − Ã`, spectrum in `[0, 2]`, kernel
//!   spanned by `D^{1/2} 1`.
//!
//! `λ` is only determined up to a constant; it is always returned with
//! `1ᵀλ = 0`.

use crate::road_graph::{Digraph, RoadNetwork};
use crate::scalar::{abs, fmax, sqrt, Scalar};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("vertex {0} has no incident edges")]
    IsolatedVertex(usize),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("right-hand side has a component {0:e} along the kernel")]
    NotInSubspace(f64),
    #[error("right-hand side does not sum to zero (sum {0})")]
    Unbalanced(i64),
    #[error("right-hand side has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("graph is not connected: second eigenvalue {0:e}")]
    Disconnected(f64),
    #[error("contraction rate needs at least 3 vertices")]
    DegenerateGraph,
    #[error("normalised adjacency is not a contraction (rate {0}); the symmetrised graph is bipartite or disconnected")]
    NotContractive(f64),
    #[error("fixed-point iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Symmetrised adjacency in sparse form: neighbours with weight `a_uv + a_vu`.
#[derive(Clone, Debug)]
struct SymGraph<T> {
    nbrs: Vec<Vec<(usize, T)>>,
    degree: Vec<T>,
}

impl<T: Scalar> SymGraph<T> {
    fn new(g: &RoadNetwork) -> Result<Self, SpectralError> {
        let n = g.vertex_count();
        let mut nbrs: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for &(u, v) in g.edges() {
            for (a, b) in [(u, v), (v, u)] {
                match nbrs[a].iter_mut().find(|e| e.0 == b) {
                    Some(e) => e.1 += T::one(),
                    None => nbrs[a].push((b, T::one())),
                }
            }
        }
        for row in &mut nbrs {
            row.sort_by_key(|e| e.0);
        }
        let degree: Vec<T> = nbrs.iter().map(|r| r.iter().map(|e| e.1).sum()).collect();
        if let Some(v) = degree.iter().position(|&d| d == T::zero()) {
            return Err(SpectralError::IsolatedVertex(v));
        }
        Ok(Self { nbrs, degree })
    }

    /// `y = L x`.
    fn laplacian_apply(&self, x: &[T]) -> Vec<T> {
        self.nbrs
            .iter()
            .enumerate()
            .map(|(u, r)| self.degree[u] * x[u] - r.iter().map(|&(v, w)| w * x[v]).sum::<T>())
            .collect()
    }
}

/// `L`, `L̃` and the degree diagonal of `D`.
#[derive(Clone, Debug)]
pub struct LaplacianPair<T: Scalar> {
    pub l: DMatrix<T>,
    pub l_tilde: DMatrix<T>,
    pub degrees: Vec<T>,
}

pub fn laplacians<T: Scalar>(g: &RoadNetwork) -> Result<LaplacianPair<T>, SpectralError> {
    let sg = SymGraph::<T>::new(g)?;
    let n = g.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    let mut lt = DMatrix::zeros(n, n);
    let inv_sqrt: Vec<T> = sg.degree.iter().map(|&d| T::one() / sqrt(d)).collect();
    for u in 0..n {
        l[(u, u)] = sg.degree[u];
        lt[(u, u)] = T::one();
        for &(v, w) in &sg.nbrs[u] {
            l[(u, v)] = -w;
            lt[(u, v)] = -w * inv_sqrt[u] * inv_sqrt[v];
        }
    }
    Ok(LaplacianPair { l, l_tilde: lt, degrees: sg.degree })
}

/// Eigenpairs in ascending eigenvalue order; eigenvectors are the columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T: Scalar> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: DMatrix<T>,
}

impl<T: Scalar> SpectralDecomposition<T> {
    pub fn reconstruct(&self) -> DMatrix<T> {
        let v = &self.eigenvectors;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.eigenvalues.clone()));
        v * d * v.transpose()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vecs: Vec<Vec<f64>> = (0..self.eigenvectors.ncols())
            .map(|j| self.eigenvectors.column(j).iter().map(|x| x.as_f64()).collect())
            .collect();
        json!({
            "eigenvalues": self.eigenvalues.iter().map(|x| x.as_f64()).collect::<Vec<_>>(),
            "eigenvectors": vecs,
        })
    }
}

pub fn eigendecompose<T: Scalar>(m: &DMatrix<T>) -> Result<SpectralDecomposition<T>, SpectralError> {
    let asym = (m - m.transpose()).iter().map(|&x| abs(x)).fold(T::zero(), fmax);
    if asym > T::tol(1e-10) {
        return Err(SpectralError::NotSymmetric(asym.as_f64()));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalues"));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(m.nrows(), m.ncols());
    for (j, &i) in order.iter().enumerate() {
        eigenvectors.set_column(j, &eig.eigenvectors.column(i));
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// `Σ_{j=2}^{r} τ_j⁻¹ (α_jᵀ b) α_j`, with `r` the full size unless `rank`
/// truncates the expansion to the `rank − 1` smallest non-zero modes.
///
/// `b` must be orthogonal to the first eigenvector (within `1e-9`,
/// relative to `max(1, ‖b‖)`).
pub fn subspace_inverse_apply<T: Scalar>(
    d: &SpectralDecomposition<T>,
    b: &[T],
    rank: Option<usize>,
) -> Result<Vec<T>, SpectralError> {
    let n = d.eigenvalues.len();
    if b.len() != n {
        return Err(SpectralError::LengthMismatch { expected: n, got: b.len() });
    }
    let bv = nalgebra::DVector::from_column_slice(b);
    let kernel_part = d.eigenvectors.column(0).dot(&bv);
    if abs(kernel_part) > T::tol(1e-9) * fmax(T::one(), bv.norm()) {
        return Err(SpectralError::NotInSubspace(kernel_part.as_f64()));
    }
    let top = rank.unwrap_or(n).min(n);
    let mut out = nalgebra::DVector::<T>::zeros(n);
    for j in 1..top {
        let col = d.eigenvectors.column(j);
        let c = col.dot(&bv) / d.eigenvalues[j];
        out.axpy(c, &col, T::one());
    }
    Ok(out.iter().copied().collect())
}

/// `κ = max(|1 − τ̃₂|, |1 − τ̃_n|)`, the contraction factor of `Ã` on the
/// complement of its kernel eigenvector.
pub fn contraction_rate<T: Scalar>(decomp_tilde: &SpectralDecomposition<T>) -> Result<T, SpectralError> {
    let ev = &decomp_tilde.eigenvalues;
    if ev.len() < 3 {
        return Err(SpectralError::DegenerateGraph);
    }
    let kappa = fmax(abs(T::one() - ev[1]), abs(T::one() - ev[ev.len() - 1]));
    if kappa >= T::one() - T::tol(1e-12) {
        return Err(SpectralError::NotContractive(kappa.as_f64()));
    }
    Ok(kappa)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LagrangeMethod {
    /// Spectral pseudo-inverse of `L`.
    Dense,
    /// Neumann iteration with the normalised adjacency.
    FixedPoint,
    /// Dense up to [`DENSE_LIMIT`] vertices, fixed-point beyond.
    Auto,
}

/// Largest graph solved densely under [`LagrangeMethod::Auto`].
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LagrangeOptions {
    pub method: LagrangeMethod,
    /// Stop when successive iterates differ by less than this (max norm).
    pub tol: f64,
    pub max_iter: usize,
    /// Optional truncation of the spectral expansion (dense method).
    pub rank: Option<usize>,
}

impl Default for LagrangeOptions {
    fn default() -> Self {
        Self { method: LagrangeMethod::Auto, tol: 1e-10, max_iter: 100_000, rank: None }
    }
}

#[derive(Clone, Debug)]
pub struct LagrangeVector<T> {
    pub lambda: Vec<T>,
    /// `‖Lλ − (s − e)‖₂`.
    pub residual: T,
    /// The method actually used (never `Auto`).
    pub method: LagrangeMethod,
    pub iterations: usize,
}

/// Reusable solver for `Lλ = b` on a fixed graph. The dense variant keeps
/// the eigendecomposition of `L`, so repeated solves cost one matrix-vector
/// product each.
#[derive(Clone, Debug)]
pub struct LagrangeSolver<T: Scalar> {
    sg: SymGraph<T>,
    opts: LagrangeOptions,
    method: LagrangeMethod,
    decomp: Option<SpectralDecomposition<T>>,
}

impl<T: Scalar> LagrangeSolver<T> {
    pub fn new(g: &RoadNetwork, opts: LagrangeOptions) -> Result<Self, SpectralError> {
        let sg = SymGraph::new(g)?;
        let method = match opts.method {
            LagrangeMethod::Auto if g.vertex_count() <= DENSE_LIMIT => LagrangeMethod::Dense,
            LagrangeMethod::Auto => LagrangeMethod::FixedPoint,
            m => m,
        };
        let decomp = if method == LagrangeMethod::Dense {
            let pair = laplacians::<T>(g)?;
            let d = eigendecompose(&pair.l)?;
            if d.eigenvalues.len() > 1 {
                let tau2 = d.eigenvalues[1];
                let top = fmax(d.eigenvalues[d.eigenvalues.len() - 1], T::one());
                if tau2 <= T::tol(1e-12) * top {
                    return Err(SpectralError::Disconnected(tau2.as_f64()));
                }
            }
            Some(d)
        } else {
            None
        };
        Ok(Self { sg, opts, method, decomp })
    }

    pub fn method(&self) -> LagrangeMethod {
        self.method
    }

    pub fn decomposition(&self) -> Option<&SpectralDecomposition<T>> {
        self.decomp.as_ref()
    }

    /// Solves `Lλ = s − e` for an integer right-hand side summing to zero.
    pub fn solve(&self, s_minus_e: &[i64]) -> Result<LagrangeVector<T>, SpectralError> {
        let n = self.sg.degree.len();
        if s_minus_e.len() != n {
            return Err(SpectralError::LengthMismatch { expected: n, got: s_minus_e.len() });
        }
        let sum: i64 = s_minus_e.iter().sum();
        if sum != 0 {
            return Err(SpectralError::Unbalanced(sum));
        }
        let b: Vec<T> = s_minus_e.iter().map(|&x| T::lit(x as f64)).collect();
        let (mut lambda, iterations) = match &self.decomp {
            Some(d) => (subspace_inverse_apply(d, &b, self.opts.rank)?, 0),
            None => self.fixed_point(&b)?,
        };
        let mean = lambda.iter().copied().sum::<T>() / T::from_count(n as u64);
        lambda.iter_mut().for_each(|x| *x -= mean);
        let residual = self.residual(&lambda, &b);
        Ok(LagrangeVector { lambda, residual, method: self.method, iterations })
    }

    fn residual(&self, lambda: &[T], b: &[T]) -> T {
        let r = self.sg.laplacian_apply(lambda);
        sqrt(r.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum())
    }

    /// `λ̃ ← Ãλ̃ + D^{-1/2} b`, projected onto the complement of `D^{1/2}1`
    /// after every step so round-off cannot accumulate along the kernel.
    fn fixed_point(&self, b: &[T]) -> Result<(Vec<T>, usize), SpectralError> {
        let n = b.len();
        let d = &self.sg.degree;
        let inv_sqrt: Vec<T> = d.iter().map(|&x| T::one() / sqrt(x)).collect();
        let c: Vec<T> = b.iter().zip(&inv_sqrt).map(|(x, s)| *x * *s).collect();
        let kernel: Vec<T> = d.iter().map(|&x| sqrt(x)).collect();
        let knorm2: T = d.iter().copied().sum();
        let tol = T::tol(self.opts.tol);
        let parallel = n >= 4096;
        let step = |x: &[T]| -> Vec<T> {
            let row = |u: usize| -> T {
                self.sg.nbrs[u].iter().map(|&(v, w)| w * inv_sqrt[u] * inv_sqrt[v] * x[v]).sum::<T>() + c[u]
            };
            let mut y: Vec<T> = if parallel { (0..n).into_par_iter().map(row).collect() } else { (0..n).map(row).collect() };
            let along = y.iter().zip(&kernel).map(|(a, k)| *a * *k).sum::<T>() / knorm2;
            y.iter_mut().zip(&kernel).for_each(|(a, k)| *a -= along * *k);
            y
        };
        let mut x = vec![T::zero(); n];
        for it in 1..=self.opts.max_iter {
            let y = step(&x);
            let change = y.iter().zip(&x).map(|(a, b)| abs(*a - *b)).fold(T::zero(), fmax);
            x = y;
            if change < tol {
                let lambda = x.iter().zip(&inv_sqrt).map(|(a, s)| *a * *s).collect();
                return Ok((lambda, it));
            }
        }
        let lambda: Vec<T> = x.iter().zip(&inv_sqrt).map(|(a, s)| *a * *s).collect();
        Err(SpectralError::NoConvergence {
            iterations: self.opts.max_iter,
            residual: self.residual(&lambda, b).as_f64(),
        })
    }
}

/// One-shot Lagrange solve; see [`LagrangeSolver`] for repeated use.
pub fn lagrange_solve<T: Scalar>(
    g: &RoadNetwork,
    s_minus_e: &[i64],
    opts: LagrangeOptions,
) -> Result<LagrangeVector<T>, SpectralError> {
    LagrangeSolver::new(g, opts)?.solve(s_minus_e)
}
