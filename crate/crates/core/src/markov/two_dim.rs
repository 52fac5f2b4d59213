use super::{Kernel, MarkovError, StationaryDistribution};
use crate::road_graph::Digraph;
use crate::scalar::{abs, fmax, Scalar};
use crate::sparse::SparseMatrix;

/// Normalised non-negative matrix on `E ∪ S` whose row and column marginals
/// agree. The common marginal is the stationary law of `p_uv = q_uv / π_u`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoDimStationary<T> {
    q: SparseMatrix<T>,
    marginal: Vec<T>,
}

fn marginal_gap<T: Scalar>(q: &SparseMatrix<T>) -> T {
    q.row_sums().iter().zip(q.col_sums()).map(|(r, c)| abs(*r - c)).fold(T::zero(), fmax)
}

impl<T: Scalar> TwoDimStationary<T> {
    /// Validates non-negativity, support on `g`, total mass (`1e-12`) and
    /// equal marginals (`1e-10`).
    pub fn new<G: Digraph + ?Sized>(g: &G, q: SparseMatrix<T>) -> Result<Self, MarkovError> {
        if q.size() != g.vertex_count() {
            return Err(MarkovError::GraphMismatch);
        }
        for (u, v, _) in q.iter() {
            if u != v && !g.has_arc(u, v) {
                return Err(MarkovError::OffSupport { row: u, col: v });
            }
        }
        Self::unchecked_support(q, T::tol(1e-10))
    }

    fn unchecked_support(q: SparseMatrix<T>, gap_tol: T) -> Result<Self, MarkovError> {
        for (u, v, x) in q.iter() {
            if x < T::zero() {
                return Err(MarkovError::Negative { row: u, col: v });
            }
        }
        let total = q.total();
        if abs(total - T::one()) > T::tol(1e-12) {
            return Err(MarkovError::NotNormalized(total.as_f64()));
        }
        let gap = marginal_gap(&q);
        if gap > gap_tol {
            return Err(MarkovError::MarginalMismatch(gap.as_f64()));
        }
        let marginal = q.row_sums();
        Ok(Self { q, marginal })
    }

    pub fn matrix(&self) -> &SparseMatrix<T> {
        &self.q
    }

    pub fn marginal(&self) -> &[T] {
        &self.marginal
    }

    pub fn get(&self, u: usize, v: usize) -> T {
        self.q.get_or_zero(u, v)
    }

    pub fn size(&self) -> usize {
        self.q.size()
    }
}

/// `q_uv = π_u p_uv`. Fails if the marginals differ by more than `1e-8`,
/// which means `pi` was not stationary for `p`.
pub fn q_from_p<T: Scalar>(p: &Kernel<T>, pi: &StationaryDistribution<T>) -> Result<TwoDimStationary<T>, MarkovError> {
    if pi.pi.len() != p.size() {
        return Err(MarkovError::GraphMismatch);
    }
    let q = p.matrix().map(|u, _, x| pi.pi[u] * x);
    TwoDimStationary::unchecked_support(q, T::tol(1e-8))
}

/// `π_u = Σ_v q_uv`, `p_uv = q_uv / π_u`.
pub fn p_from_q<T: Scalar>(q: &TwoDimStationary<T>) -> Result<(Kernel<T>, StationaryDistribution<T>), MarkovError> {
    let pi = q.marginal().to_vec();
    if let Some(u) = pi.iter().position(|&x| x <= T::zero()) {
        return Err(MarkovError::ZeroMarginal(u));
    }
    let rows = q
        .matrix()
        .rows()
        .iter()
        .enumerate()
        .map(|(u, r)| r.iter().map(|&(v, x)| (v, x / pi[u])).collect())
        .collect();
    let p = Kernel::from_rows(rows)?;
    let st = StationaryDistribution::new(&p, pi, 0);
    Ok((p, st))
}

/// `λ q1 + (1 − λ) q2`.
pub fn affine_combine<T: Scalar>(
    q1: &TwoDimStationary<T>,
    q2: &TwoDimStationary<T>,
    lambda: T,
) -> Result<TwoDimStationary<T>, MarkovError> {
    if q1.size() != q2.size() {
        return Err(MarkovError::GraphMismatch);
    }
    let q = q1.matrix().combine(lambda, q2.matrix(), T::one() - lambda);
    let q = q.map(|_, _, x| crate::scalar::flush(x));
    TwoDimStationary::unchecked_support(q, T::tol(1e-10))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{stationary, StationaryOptions};
    use crate::toy;

    fn toy_q() -> TwoDimStationary<f64> {
        let p = toy::kernel();
        let pi = stationary(&p, StationaryOptions::dense()).unwrap();
        q_from_p(&p, &pi).unwrap()
    }

    #[test]
    fn toy_q_values() {
        let q = toy_q();
        let g = toy::network();
        for (u, v, x) in q.matrix().iter() {
            let (a, b) = (g.external_id(u), g.external_id(v));
            let want = if (a, b) == (4, 4) { 1.0 / 7.0 } else { 1.0 / 14.0 };
            assert!((x - want).abs() < 1e-12, "q({a},{b}) = {x}");
        }
        assert_eq!(q.matrix().nnz(), 13);
        assert!(TwoDimStationary::new(&g, q.matrix().clone()).is_ok());
    }

    #[test]
    fn round_trip() {
        let q = toy_q();
        let (p, pi) = p_from_q(&q).unwrap();
        let back = q_from_p(&p, &pi).unwrap();
        assert!(back.matrix().distance(q.matrix()) < 1e-12);
        let p0 = toy::kernel();
        assert!(p.matrix().distance(p0.matrix()) < 1e-12);
    }

    #[test]
    fn non_stationary_pi_rejected() {
        let p = toy::kernel();
        let wrong = StationaryDistribution::new(&p, vec![0.2; 5], 0);
        assert!(matches!(q_from_p(&p, &wrong), Err(MarkovError::MarginalMismatch(_))));
    }

    #[test]
    fn zero_marginal() {
        let q = SparseMatrix::from_rows(vec![vec![(0, 1.0)], vec![]]);
        let q = TwoDimStationary::unchecked_support(q, 1e-10).unwrap();
        assert!(matches!(p_from_q(&q), Err(MarkovError::ZeroMarginal(1))));
    }

    #[test]
    fn affine_endpoints_and_midpoint() {
        let q1 = toy_q();
        let g = toy::network();
        // a second valid Q: uniform mass on the 3-cycle 2 -> 3 -> 4 -> 2
        let ix = |id| g.index_of(id).unwrap();
        let q2 = SparseMatrix::from_triplets(5, [(ix(2), ix(3), 1.0 / 3.0), (ix(3), ix(4), 1.0 / 3.0), (ix(4), ix(2), 1.0 / 3.0)]);
        let q2 = TwoDimStationary::new(&g, q2).unwrap();
        assert_eq!(affine_combine(&q1, &q2, 1.0).unwrap().matrix().distance(q1.matrix()), 0.0);
        assert_eq!(affine_combine(&q1, &q2, 0.0).unwrap().matrix().distance(q2.matrix()), 0.0);
        let mid = affine_combine(&q1, &q2, 0.5).unwrap();
        for v in 0..5 {
            let want = 0.5 * q1.marginal()[v] + 0.5 * q2.marginal()[v];
            assert!((mid.marginal()[v] - want).abs() < 1e-15);
        }
        let other = TwoDimStationary::unchecked_support(SparseMatrix::from_rows(vec![vec![(0, 1.0)]]), 1e-10).unwrap();
        assert!(matches!(affine_combine(&q1, &other, 0.5), Err(MarkovError::GraphMismatch)));
    }
}
