use super::{Kernel, MarkovError};
use crate::road_graph::{is_strongly_connected, period, strongly_connected_components, Digraph};
use crate::scalar::{abs, Scalar};
use num_traits::Float;
use nalgebra::{DMatrix, DVector};
use std::collections::VecDeque;

/// Largest chain solved densely by [`StationaryMethod::Auto`].
pub const DENSE_STATIONARY_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StationaryMethod {
    /// [`DenseSolve`](Self::DenseSolve) up to [`DENSE_STATIONARY_LIMIT`]
    /// states, [`PowerCesaro`](Self::PowerCesaro) beyond.
    Auto,
    /// Power iteration from the uniform law with averaging over one period
    /// of the chain.
    PowerCesaro,
    /// Direct solve of the balance equations with one equation replaced by
    /// the normalisation.
    DenseSolve,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryOptions {
    pub method: StationaryMethod,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self { method: StationaryMethod::Auto, tol: 1e-12, max_iter: 1_000_000 }
    }
}

impl StationaryOptions {
    pub fn dense() -> Self {
        Self { method: StationaryMethod::DenseSolve, ..Self::default() }
    }

    pub fn power() -> Self {
        Self { method: StationaryMethod::PowerCesaro, ..Self::default() }
    }
}

/// An L1 change between iterates cannot be resolved below about `n`
/// rounding errors, so iterative tolerances are floored there.
fn iteration_tol<T: Scalar>(tol: f64, n: usize) -> T {
    Float::max(T::tol(tol), <T as Float>::epsilon() * T::from_count(8 * n as u64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryDistribution<T> {
    pub pi: Vec<T>,
    /// `‖πᵀP − πᵀ‖₁`.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Scalar> StationaryDistribution<T> {
    pub fn new(p: &Kernel<T>, pi: Vec<T>, iterations: usize) -> Self {
        let residual = balance_residual(p, &pi);
        Self { pi, residual, iterations }
    }
}

fn balance_residual<T: Scalar>(p: &Kernel<T>, pi: &[T]) -> T {
    let mut next = vec![T::zero(); pi.len()];
    p.left_apply(pi, &mut next);
    next.iter().zip(pi).map(|(a, b)| abs(*a - *b)).sum()
}

fn l1_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| abs(*x - *y)).sum()
}

/// Unique stationary law of a kernel with strongly connected support.
pub fn stationary<T: Scalar>(p: &Kernel<T>, opts: StationaryOptions) -> Result<StationaryDistribution<T>, MarkovError> {
    let support = p.support_graph();
    if !is_strongly_connected(&support) {
        return Err(MarkovError::NotStronglyConnected);
    }
    match opts.method {
        StationaryMethod::Auto if p.size() <= DENSE_STATIONARY_LIMIT => dense_solve(p),
        StationaryMethod::DenseSolve => dense_solve(p),
        StationaryMethod::Auto | StationaryMethod::PowerCesaro => {
            let d = period(&support).expect("checked strongly connected");
            windowed_power(p, d, iteration_tol(opts.tol, p.size()), opts.max_iter)
        }
    }
}

/// Power iteration averaged over a sliding window of `d` iterates. For an
/// irreducible chain of period `d` the window average converges
/// geometrically to `π` (the full running average only converges like
/// `1/n`); for `d = 1` this is plain power iteration.
fn windowed_power<T: Scalar>(p: &Kernel<T>, d: usize, tol: T, max_iter: usize) -> Result<StationaryDistribution<T>, MarkovError> {
    let n = p.size();
    let mut x = vec![T::one() / T::from_count(n as u64); n];
    let mut window: VecDeque<Vec<T>> = VecDeque::from([x.clone()]);
    let mut avg = x.clone();
    let scale = T::one() / T::from_count(d as u64);
    let mut next = vec![T::zero(); n];
    let mut change = T::infinity();
    for it in 1..=max_iter {
        p.left_apply(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
        window.push_back(x.clone());
        if window.len() > d {
            window.pop_front();
        }
        if window.len() < d {
            continue;
        }
        let mut fresh = vec![T::zero(); n];
        for w in &window {
            for (f, v) in fresh.iter_mut().zip(w) {
                *f += *v * scale;
            }
        }
        change = l1_diff(&fresh, &avg);
        avg = fresh;
        if change < tol {
            let total: T = avg.iter().copied().sum();
            let pi: Vec<T> = avg.iter().map(|v| *v / total).collect();
            return Ok(StationaryDistribution::new(p, pi, it));
        }
    }
    Err(MarkovError::NoConvergence { iterations: max_iter, change: change.as_f64() })
}

fn dense_solve<T: Scalar>(p: &Kernel<T>) -> Result<StationaryDistribution<T>, MarkovError> {
    let mut pi = dense_solve_raw(p)?;
    // round-off can leave entries a few ulps below zero
    pi.iter_mut().for_each(|v| {
        if *v < T::zero() {
            *v = T::zero()
        }
    });
    let total: T = pi.iter().copied().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Ok(StationaryDistribution::new(p, pi, 1))
}

/// Solution of the balance equations summing to one, without any sign
/// correction.
pub(crate) fn dense_solve_raw<T: Scalar>(p: &Kernel<T>) -> Result<Vec<T>, MarkovError> {
    let n = p.size();
    // (Pᵀ − I) π = 0 with the last equation replaced by 1ᵀπ = 1
    let mut a = DMatrix::<T>::zeros(n, n);
    for (u, v, x) in p.matrix().iter() {
        a[(v, u)] += x;
    }
    for i in 0..n {
        a[(i, i)] -= T::one();
    }
    for j in 0..n {
        a[(n - 1, j)] = T::one();
    }
    let mut b = DVector::<T>::zeros(n);
    b[n - 1] = T::one();
    let x = a.lu().solve(&b).ok_or(MarkovError::Singular)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(MarkovError::Singular);
    }
    Ok(x.iter().copied().collect())
}

/// Limit of the lazy chain `(I + P)/2` started from the uniform law. It
/// equals the Cesàro limit of `P` from the same start, so for a reducible
/// kernel it spreads the uniform start over the closed classes; with one
/// closed class it is that class's stationary law. No connectivity is
/// required.
pub fn ergodic_projection<T: Scalar>(p: &Kernel<T>, tol: f64, max_iter: usize) -> Result<StationaryDistribution<T>, MarkovError> {
    let n = p.size();
    let half = T::lit(0.5);
    let tol: T = iteration_tol(tol, n);
    let mut x = vec![T::one() / T::from_count(n as u64); n];
    let mut next = vec![T::zero(); n];
    let mut change = T::infinity();
    for it in 1..=max_iter {
        p.left_apply(&x, &mut next);
        for (nx, cur) in next.iter_mut().zip(&x) {
            *nx = half * (*nx + *cur);
        }
        change = l1_diff(&next, &x);
        std::mem::swap(&mut x, &mut next);
        if change < tol {
            return Ok(StationaryDistribution::new(p, x, it));
        }
    }
    Err(MarkovError::NoConvergence { iterations: max_iter, change: change.as_f64() })
}

/// The same limit as [`ergodic_projection`], computed exactly: each closed
/// class keeps its own uniform mass plus what it absorbs from the transient
/// states, spread by the class's stationary law. Cubic in the number of
/// states.
pub fn ergodic_projection_dense<T: Scalar>(p: &Kernel<T>) -> Result<StationaryDistribution<T>, MarkovError> {
    let n = p.size();
    let support = p.support_graph();
    let (ncomp, comp) = strongly_connected_components(&support);
    let mut closed = vec![true; ncomp];
    for u in 0..n {
        if support.successors(u).iter().any(|&v| comp[v] != comp[u]) {
            closed[comp[u]] = false;
        }
    }
    // position of each vertex inside its closed class, or in the transient block
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    let mut transient = Vec::new();
    let mut local = vec![0usize; n];
    for v in 0..n {
        let list = if closed[comp[v]] { &mut members[comp[v]] } else { &mut transient };
        local[v] = list.len();
        list.push(v);
    }
    let classes: Vec<usize> = (0..ncomp).filter(|&c| closed[c]).collect();
    let mut class_index = vec![usize::MAX; ncomp];
    for (i, &c) in classes.iter().enumerate() {
        class_index[c] = i;
    }

    let nt = transient.len();
    let mut mass: Vec<T> = classes.iter().map(|&c| T::from_count(members[c].len() as u64)).collect();
    if nt > 0 {
        // (I − P_TT) H = P_T,C gives absorption probabilities H
        let mut a = DMatrix::<T>::identity(nt, nt);
        let mut b = DMatrix::<T>::zeros(nt, classes.len());
        for (i, &t) in transient.iter().enumerate() {
            for &(v, x) in p.row(t) {
                if closed[comp[v]] {
                    b[(i, class_index[comp[v]])] += x;
                } else {
                    a[(i, local[v])] -= x;
                }
            }
        }
        let h = a.lu().solve(&b).ok_or(MarkovError::Singular)?;
        for (j, m) in mass.iter_mut().enumerate() {
            *m += h.column(j).iter().copied().sum::<T>();
        }
    }

    let mut pi = vec![T::zero(); n];
    for (i, &c) in classes.iter().enumerate() {
        let verts = &members[c];
        let weight = mass[i] / T::from_count(n as u64);
        if verts.len() == 1 {
            pi[verts[0]] = weight;
            continue;
        }
        let rows = verts.iter().map(|&u| p.row(u).iter().filter(|&&(_, x)| x > T::zero()).map(|&(v, x)| (local[v], x)).collect()).collect();
        let sub = dense_solve(&Kernel::from_rows(rows)?)?;
        for (&v, &x) in verts.iter().zip(&sub.pi) {
            pi[v] = weight * x;
        }
    }
    Ok(StationaryDistribution::new(p, pi, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    #[test]
    fn toy_stationary_both_methods() {
        let p = toy::kernel();
        let want = [1.0, 2.0, 1.0, 2.0, 1.0].map(|x| x / 7.0);
        for opts in [StationaryOptions::default(), StationaryOptions::power(), StationaryOptions::dense()] {
            let s = stationary(&p, opts).unwrap();
            for (a, b) in s.pi.iter().zip(want) {
                assert!((a - b).abs() < 1e-10, "{:?}", s.pi);
            }
            assert!(s.residual < 1e-11);
        }
    }

    #[test]
    fn lazy_two_cycle() {
        let p = Kernel::<f64>::from_rows(vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 0.5), (1, 0.5)]]).unwrap();
        let s = stationary(&p, StationaryOptions::default()).unwrap();
        assert_eq!(s.pi, vec![0.5, 0.5]);
    }

    #[test]
    fn periodic_chain_converges() {
        // deterministic 3-cycle: raw powers never settle
        let p = Kernel::<f64>::from_rows(vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(0, 1.0)]]).unwrap();
        let s = stationary(&p, StationaryOptions::power()).unwrap();
        for v in &s.pi {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        // bipartite chain with unequal weights
        let p = Kernel::<f64>::from_rows(vec![
            vec![(1, 0.3), (3, 0.7)],
            vec![(0, 0.5), (2, 0.5)],
            vec![(1, 1.0)],
            vec![(0, 1.0)],
        ])
        .unwrap();
        let a = stationary(&p, StationaryOptions::power()).unwrap();
        let b = stationary(&p, StationaryOptions::dense()).unwrap();
        for (x, y) in a.pi.iter().zip(&b.pi) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn reducible_rejected_but_projectable() {
        // 0 -> 1 <-> 2, vertex 0 transient
        let p = Kernel::<f64>::from_rows(vec![
            vec![(0, 0.5), (1, 0.5)],
            vec![(1, 0.5), (2, 0.5)],
            vec![(1, 1.0)],
        ])
        .unwrap();
        assert!(matches!(stationary(&p, StationaryOptions::default()), Err(MarkovError::NotStronglyConnected)));
        let e = ergodic_projection(&p, 1e-13, 100_000).unwrap();
        assert!(e.pi[0] < 1e-12);
        assert!((e.pi[1] - 2.0 / 3.0).abs() < 1e-10);
        assert!((e.pi[2] - 1.0 / 3.0).abs() < 1e-10);
        let d = ergodic_projection_dense(&p).unwrap();
        for (x, y) in d.pi.iter().zip(&e.pi) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_splits_mass_between_closed_classes() {
        // 2 is transient and feeds the absorbing 0 and the cycle 3 <-> 4
        let p = Kernel::<f64>::from_rows(vec![
            vec![(0, 1.0)],
            vec![(1, 0.5), (2, 0.5)],
            vec![(0, 0.25), (3, 0.75)],
            vec![(4, 1.0)],
            vec![(3, 1.0)],
        ])
        .unwrap();
        // from 1: absorbed through 2, so 1/4 to {0} and 3/4 to {3,4}
        let want = [0.2 + 0.4 * 0.25, 0.0, 0.0, (0.4 + 0.4 * 0.75) / 2.0, (0.4 + 0.4 * 0.75) / 2.0];
        let d = ergodic_projection_dense(&p).unwrap();
        let e = ergodic_projection(&p, 1e-14, 1_000_000).unwrap();
        for ((x, y), w) in d.pi.iter().zip(&e.pi).zip(want) {
            assert!((x - w).abs() < 1e-12, "{:?}", d.pi);
            assert!((y - w).abs() < 1e-9, "{:?}", e.pi);
        }
    }

    #[test]
    fn single_precision() {
        let p = toy::kernel_as::<f32>();
        let s = stationary(&p, StationaryOptions::dense()).unwrap();
        assert!((s.pi[1] - 2.0 / 7.0).abs() < 1e-6);
    }
}
