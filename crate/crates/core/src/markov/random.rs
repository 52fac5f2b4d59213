//! Random kernels for benchmarks and property tests.

use super::Kernel;
use crate::road_graph::Digraph;
use rand::Rng;
use rand_distr::Exp1;

/// Rows drawn from the flat Dirichlet law over `{out-neighbours} ∪ {self}`
/// (normalised independent unit exponentials). The result is compatible
/// with `g` almost surely.
pub fn dirichlet_kernel<G: Digraph + ?Sized, R: Rng + ?Sized>(g: &G, rng: &mut R) -> Kernel<f64> {
    let rows = (0..g.vertex_count())
        .map(|u| {
            let mut support: Vec<usize> = g.successors(u).to_vec();
            support.push(u);
            support.sort_unstable();
            let draws: Vec<f64> = support.iter().map(|_| rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE)).collect();
            let total: f64 = draws.iter().sum();
            support.into_iter().zip(draws).map(|(v, x)| (v, x / total)).collect()
        })
        .collect();
    Kernel::on_graph(g, rows).expect("dirichlet rows are stochastic")
}

/// Uniform over `{out-neighbours} ∪ {self}`.
pub fn lazy_uniform_kernel<G: Digraph + ?Sized>(g: &G) -> Kernel<f64> {
    let rows = (0..g.vertex_count())
        .map(|u| {
            let mut support: Vec<usize> = g.successors(u).to_vec();
            support.push(u);
            support.sort_unstable();
            let p = 1.0 / support.len() as f64;
            support.into_iter().map(|v| (v, p)).collect()
        })
        .collect();
    Kernel::on_graph(g, rows).expect("uniform rows are stochastic")
}
