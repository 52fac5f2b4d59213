//! Frozen reference values on the five-vertex toy network.

use approx::assert_abs_diff_eq;
use roadmarkov::estimate::{collect_stats, estimate_ml, estimate_naive, estimate_wls, SufficientStats, WlsOptions};
use roadmarkov::markov::{q_from_p, stationary, StationaryOptions};
use roadmarkov::road_graph::{adjacency_power, IntMatrix};
use roadmarkov::spectral::{
    contraction_rate, eigendecompose, lagrange_solve, laplacians, subspace_inverse_apply, LagrangeMethod,
    LagrangeOptions,
};
use roadmarkov::traffic::{config_kernel, config_kernel_power_limit, config_stationary, DEFAULT_CONFIG_CAP};
use roadmarkov::toy;

fn toy_stats() -> SufficientStats {
    let corpus = toy::corpus();
    collect_stats(corpus.iter().map(|(t, m)| (t.as_slice(), *m)), &toy::network())
}

fn assert_slice(got: &[f64], want: &[f64], eps: f64) {
    assert_eq!(got.len(), want.len());
    for (i, (a, b)) in got.iter().zip(want).enumerate() {
        assert!((a - b).abs() <= eps, "entry {i}: {a} vs {b} (eps {eps})");
    }
}

#[test]
fn fourth_power_of_adjacency() {
    let g = toy::network();
    let a4 = adjacency_power(&g, 4).unwrap();
    let want: [[u64; 5]; 5] = [[2, 2, 2, 2, 1], [2, 5, 2, 4, 2], [1, 2, 1, 2, 1], [2, 4, 2, 3, 2], [2, 2, 2, 2, 1]];
    for (u, row) in want.iter().enumerate() {
        assert_eq!(a4.row(u), row);
    }
    let direct = (0..4).fold(IntMatrix::identity(5), |m, _| m.checked_mul(&IntMatrix::adjacency(&g)).unwrap());
    assert_eq!(direct, a4);
}

#[test]
fn laplacians_and_spectra() {
    let g = toy::network();
    let pair = laplacians::<f64>(&g).unwrap();
    let l: [[f64; 5]; 5] = [
        [2., -2., 0., 0., 0.],
        [-2., 6., -1., -2., -1.],
        [0., -1., 2., -1., 0.],
        [0., -2., -1., 4., -1.],
        [0., -1., 0., -1., 2.],
    ];
    for u in 0..5 {
        for v in 0..5 {
            assert_eq!(pair.l[(u, v)], l[u][v]);
            let d = (pair.degrees[u] * pair.degrees[v]).sqrt();
            assert_abs_diff_eq!(pair.l_tilde[(u, v)], l[u][v] / d, epsilon = 1e-15);
        }
    }
    let ev = eigendecompose(&pair.l).unwrap().eigenvalues;
    assert_slice(&ev, &[0.0, 1.72, 2.0, 4.46, 7.82], 1e-2);
    let dt = eigendecompose(&pair.l_tilde).unwrap();
    assert_slice(&dt.eigenvalues, &[0.0, 0.77, 1.0, 1.5, 1.73], 1e-2);
    assert_abs_diff_eq!(contraction_rate(&dt).unwrap(), 0.73, epsilon = 1e-2);
}

#[test]
fn stationary_law_of_vertex_kernel() {
    let p = toy::kernel();
    for opts in [StationaryOptions::default(), StationaryOptions::dense()] {
        let pi = stationary(&p, opts).unwrap();
        assert_slice(&pi.pi, &[1. / 7., 2. / 7., 1. / 7., 2. / 7., 1. / 7.], 1e-10);
        let q = q_from_p(&p, &pi).unwrap();
        for (u, v, x) in q.matrix().iter() {
            let want = if (u, v) == (3, 3) { 1. / 7. } else { 1. / 14. };
            assert_abs_diff_eq!(x, want, epsilon = 1e-12);
        }
    }
}

#[test]
fn stationary_law_of_edge_kernel() {
    let (line, p) = toy::edge_kernel();
    let pi = stationary(&p, StationaryOptions::default()).unwrap().pi;
    let want = [
        ((1, 2), 1.),
        ((2, 3), 2.),
        ((3, 4), 2.),
        ((4, 2), 1.),
        ((2, 1), 1.),
        ((2, 4), 1.),
        ((4, 5), 2.),
        ((5, 2), 2.),
    ];
    let g = toy::network();
    for ((a, b), w) in want {
        let (u, v) = (g.index_of(a).unwrap(), g.index_of(b).unwrap());
        assert_abs_diff_eq!(pi[line.vertex_of(u, v).unwrap()], w / 12.0, epsilon = 1e-10);
    }
}

#[test]
fn configuration_kernel_two_walkers() {
    let p = toy::kernel();
    let r = config_kernel(&p, 2, DEFAULT_CONFIG_CAP).unwrap();
    assert_eq!(r.configs.len(), 15);
    let pi = stationary(&p, StationaryOptions::dense()).unwrap().pi;
    let rho = config_stationary(&pi, &r);
    for i in 0..15 {
        assert_abs_diff_eq!(r.matrix.row(i).sum(), 1.0, epsilon = 1e-12);
        let flow: f64 = (0..15).map(|j| rho[j] * r.matrix[(j, i)]).sum();
        assert_abs_diff_eq!(flow, rho[i], epsilon = 1e-12);
    }
    let limit = config_kernel_power_limit(&r, 200);
    for i in 0..15 {
        let dist: f64 = (0..15).map(|j| (limit[(i, j)] - rho[j]).abs()).sum();
        assert!(dist < 1e-6, "row {i}: {dist}");
        for v in 0..5 {
            let mean: f64 = (0..15).map(|j| r.configs[j][v] as f64 * limit[(i, j)]).sum::<f64>() / 2.0;
            assert_abs_diff_eq!(mean, pi[v], epsilon = 1e-6);
        }
    }
}

#[test]
fn corpus_sufficient_statistics() {
    let st = toy_stats();
    assert_eq!((st.n(), st.k()), (3350, 1000));
    let n: Vec<Vec<u64>> = (0..5).map(|u| (0..5).map(|v| st.pair_count(u, v)).collect()).collect();
    assert_eq!(n[1], vec![450, 0, 200, 150, 0]);
    assert_eq!(st.s_minus_e(), vec![-200, 0, 250, -100, 50]);
}

#[test]
fn wls_on_corpus() {
    let st = toy_stats();
    let g = toy::network();
    for method in [LagrangeMethod::Dense, LagrangeMethod::FixedPoint] {
        let opts = LagrangeOptions { method, tol: 1e-12, ..Default::default() };
        let lambda = lagrange_solve::<f64>(&g, &st.s_minus_e(), opts).unwrap();
        assert_slice(&lambda.lambda, &[-116.66, -16.66, 116.66, 0.0, 16.66], 1e-2);
        assert_slice(&lambda.lambda, &[-350. / 3., -50. / 3., 350. / 3., 0.0, 50. / 3.], 1e-8);
    }
    let est = estimate_wls::<f64>(&st, &g, WlsOptions::default()).unwrap();
    assert!(est.diagnostics.is_empty());
    let raw = est.wls.as_ref().unwrap();
    assert_eq!(raw.n_eff, 2350.0);
    let row2: Vec<f64> = (0..5).map(|v| raw.m_hat.get_or_zero(1, v)).collect();
    assert_slice(&row2, &[350.0, 0.0, 333.33, 166.66, 0.0], 1e-2);
    assert_slice(&est.pi, &[0.149, 0.362, 0.142, 0.213, 0.135], 1e-2);
    assert_slice(&est.pi, &[35. / 235., 85. / 235., 100. / 705., 50. / 235., 95. / 705.], 1e-12);
    let row4: Vec<f64> = (0..5).map(|v| est.p.get(3, v)).collect();
    assert_slice(&row4, &[0.0, 0.37, 0.0, 0.0, 0.63], 1e-2);
    for (u, v, x) in est.q.matrix().iter() {
        assert_abs_diff_eq!(x, est.pi[u] * est.p.get(u, v), epsilon = 1e-12);
    }
}

#[test]
fn ml_and_naive_on_corpus() {
    let st = toy_stats();
    let g = toy::network();
    let ml = estimate_ml::<f64>(&st, &g).unwrap();
    let row2: Vec<f64> = (0..5).map(|v| ml.p.get(1, v)).collect();
    assert_slice(&row2, &[0.5625, 0.0, 0.25, 0.1875, 0.0], 1e-12);
    assert_slice(&ml.pi, &[0.224, 0.398, 0.1, 0.174, 0.104], 1e-2);
    let naive = estimate_naive::<f64>(&st).unwrap();
    assert_abs_diff_eq!(naive.q.get_or_zero(1, 0), 450.0 / 2350.0, epsilon = 1e-15);
}

#[test]
fn neumann_partial_sums_respect_the_bound() {
    let g = toy::network();
    let pair = laplacians::<f64>(&g).unwrap();
    let dt = eigendecompose(&pair.l_tilde).unwrap();
    let kappa = contraction_rate(&dt).unwrap();
    let a_tilde = nalgebra::DMatrix::<f64>::identity(5, 5) - &pair.l_tilde;
    let root: Vec<f64> = pair.degrees.iter().map(|d| d.sqrt()).collect();
    let norm_root = root.iter().map(|x| x * x).sum::<f64>().sqrt();
    // a vector orthogonal to D^{1/2} 1
    let mut alpha = vec![3.0, -1.0, 0.5, 2.0, -4.0];
    let c: f64 = alpha.iter().zip(&root).map(|(a, r)| a * r).sum::<f64>() / (norm_root * norm_root);
    alpha.iter_mut().zip(&root).for_each(|(a, r)| *a -= c * r);
    let exact = nalgebra::DVector::from_vec(subspace_inverse_apply(&dt, &alpha, None).unwrap());
    let norm_alpha = alpha.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut term = nalgebra::DVector::from_vec(alpha.clone());
    let mut partial = term.clone();
    for n in 0..60 {
        let err = (&exact - &partial).norm();
        let bound = kappa.powi(n + 1) / (1.0 - kappa) * norm_alpha;
        assert!(err <= bound * (1.0 + 1e-12) + 1e-13, "n = {n}: {err} > {bound}");
        term = &a_tilde * term;
        partial += &term;
    }
}
