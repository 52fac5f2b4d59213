use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadmarkov::estimate::{collect_stats, collect_stats_parallel, sse, wls_raw, SufficientStats};
use roadmarkov::markov::random::dirichlet_kernel;
use roadmarkov::markov::{affine_combine, p_from_q, q_from_p, stationary, StationaryOptions};
use roadmarkov::road_graph::random::strongly_connected;
use roadmarkov::road_graph::text::{graph_from_str, graph_to_string};
use roadmarkov::road_graph::{is_strongly_connected, line_digraph, Digraph, RoadNetwork};
use roadmarkov::spectral::{eigendecompose, laplacians, LagrangeMethod, LagrangeOptions, LagrangeSolver};

fn graph(seed: u64, n: usize, extra: usize) -> RoadNetwork {
    strongly_connected(n, extra, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Random walks that may pause, with random lengths and multiplicities.
fn corpus(g: &RoadNetwork, seed: u64, k: usize) -> Vec<(Vec<usize>, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..k)
        .map(|_| {
            let len = rng.random_range(2..12);
            let mut u = rng.random_range(0..g.vertex_count());
            let mut t = vec![u];
            for _ in 1..len {
                let succ = g.successors(u);
                if rng.random_bool(0.8) {
                    u = succ[rng.random_range(0..succ.len())];
                }
                t.push(u);
            }
            (t, rng.random_range(1..4))
        })
        .collect()
}

fn stats_of(g: &RoadNetwork, c: &[(Vec<usize>, u64)]) -> SufficientStats {
    collect_stats(c.iter().map(|(t, m)| (t.as_slice(), *m)), g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_graphs_are_strongly_connected(seed in any::<u64>(), n in 3usize..40, extra in 0usize..60) {
        let g = graph(seed, n, extra);
        prop_assert!(is_strongly_connected(&g));
        let text = graph_to_string(&g);
        prop_assert_eq!(graph_to_string(&graph_from_str(&text).unwrap()), text);
        let arcs: usize = (0..n).map(|v| g.in_degree(v) * g.out_degree(v)).sum();
        prop_assert_eq!(line_digraph(&g).arcs().count(), arcs);
    }

    #[test]
    fn quadratic_forms(seed in any::<u64>(), n in 3usize..=30, extra in 0usize..40) {
        let g = graph(seed, n, extra);
        let pair = laplacians::<f64>(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = nalgebra::DVector::from_vec(alpha.clone());
        let form = a.dot(&(&pair.l * &a));
        let form_tilde = a.dot(&(&pair.l_tilde * &a));
        let d = &pair.degrees;
        let (mut want, mut want_tilde) = (0.0, 0.0);
        for &(u, v) in g.edges() {
            // each directed edge contributes once to a_uv + a_vu
            want += (alpha[u] - alpha[v]).powi(2);
            want_tilde += (alpha[u] / d[u].sqrt() - alpha[v] / d[v].sqrt()).powi(2);
        }
        prop_assert!((form - want).abs() <= 1e-9 * want.max(1.0));
        prop_assert!((form_tilde - want_tilde).abs() <= 1e-9 * want_tilde.max(1.0));
        let ev = eigendecompose(&pair.l_tilde).unwrap().eigenvalues;
        prop_assert!(ev.iter().all(|&t| (-1e-10..=2.0 + 1e-10).contains(&t)));
        let ev_l = eigendecompose(&pair.l).unwrap().eigenvalues;
        prop_assert!(ev_l[1] > 1e-9);
    }

    #[test]
    fn kernel_round_trips(seed in any::<u64>(), n in 3usize..25, extra in 0usize..30, mix in 0.0f64..=1.0) {
        let g = graph(seed, n, extra);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = dirichlet_kernel(&g, &mut rng);
        let pi = stationary(&p, StationaryOptions::power()).unwrap();
        let pi_dense = stationary(&p, StationaryOptions::dense()).unwrap();
        for (a, b) in pi.pi.iter().zip(&pi_dense.pi) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let q = q_from_p(&p, &pi).unwrap();
        let (p2, pi2) = p_from_q(&q).unwrap();
        for u in 0..n {
            prop_assert!((pi2.pi[u] - pi.pi[u]).abs() < 1e-12);
            for &(v, x) in p.row(u) {
                prop_assert!((p2.get(u, v) - x).abs() < 1e-10);
            }
        }
        let other = q_from_p(&dirichlet_kernel(&g, &mut rng), &pi_dense).ok();
        if let Some(other) = other {
            prop_assert!(affine_combine(&q, &other, mix).is_ok());
        }
    }

    #[test]
    fn count_identities(seed in any::<u64>(), n in 3usize..30, k in 1usize..60) {
        let g = graph(seed, n, n);
        let c = corpus(&g, seed, k);
        let st = stats_of(&g, &c);
        let total: u64 = st.pairs().map(|(_, x)| x).sum();
        prop_assert_eq!(total, st.n() - st.k());
        prop_assert_eq!(st.s().iter().sum::<u64>(), st.k());
        prop_assert_eq!(st.e().iter().sum::<u64>(), st.k());
        let (out, inn) = (st.out_totals(), st.in_totals());
        for v in 0..n {
            prop_assert_eq!(out[v] + st.e()[v], inn[v] + st.s()[v]);
        }
        prop_assert_eq!(collect_stats_parallel(&c, &g), st.clone());
        // any split merges back to the same statistics, in either order
        let cut = (seed as usize) % (c.len() + 1);
        let (a, b) = (stats_of(&g, &c[..cut]), stats_of(&g, &c[cut..]));
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b;
        ba.merge(&a);
        prop_assert_eq!(&ab, &st);
        prop_assert_eq!(&ba, &st);
    }

    #[test]
    fn wls_marginals_agree_before_repair(seed in any::<u64>(), n in 3usize..40, k in 1usize..80) {
        let g = graph(seed, n, n);
        let st = stats_of(&g, &corpus(&g, seed, k));
        let solver = LagrangeSolver::<f64>::new(&g, LagrangeOptions::default()).unwrap();
        let raw = wls_raw(&st, &g, &solver).unwrap();
        let (rows, cols) = (raw.m_hat.row_sums(), raw.m_hat.col_sums());
        for v in 0..n {
            prop_assert!((rows[v] - cols[v]).abs() <= 1e-9, "vertex {}: {} vs {}", v, rows[v], cols[v]);
        }
        prop_assert!((raw.m_hat.total() - raw.n_eff).abs() <= 1e-9 * raw.n_eff.max(1.0));
        let w: f64 = raw.weights.iter().map(|c| c.weight * c.multiplicity as f64).sum();
        prop_assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sse_decomposition_matches_definition(seed in any::<u64>(), n in 3usize..15, k in 1usize..20) {
        let g = graph(seed, n, n);
        let mut c = corpus(&g, seed, k);
        c.iter_mut().for_each(|r| r.1 = 1);
        let st = stats_of(&g, &c);
        let norms: Vec<u64> = c
            .iter()
            .map(|(t, _)| {
                let mut p: Vec<(usize, usize)> = t.windows(2).map(|w| (w[0], w[1])).collect();
                p.sort_unstable();
                p.chunk_by(|a, b| a == b).map(|ch| (ch.len() * ch.len()) as u64).sum()
            })
            .collect();
        let mut order: Vec<usize> = (0..c.len()).collect();
        order.sort_by_key(|&i| norms[i]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw_w: Vec<f64> = (0..c.len()).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw_w.iter().sum();
        let w: Vec<f64> = raw_w.iter().map(|x| x / total).collect();
        let m = roadmarkov::sparse::SparseMatrix::from_triplets(
            n,
            g.edges().iter().map(|&(u, v)| (u, v, rng.random_range(0.0..3.0))),
        );
        let mut literal = 0.0;
        for &i in &order {
            let ni = roadmarkov::sparse::SparseMatrix::from_triplets(n, c[i].0.windows(2).map(|p| (p[0], p[1], 1.0)));
            literal += ni.combine(1.0, &m, -w[i]).squared_norm() / w[i];
        }
        let sorted_w: Vec<f64> = order.iter().map(|&i| w[i]).collect();
        let parts = sse(&m, &sorted_w, &st).unwrap();
        prop_assert!((parts.total - literal).abs() <= 1e-9 * literal.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dense_and_fixed_point_lagrange_agree(seed in any::<u64>(), n in 3usize..=200, k in 10usize..200) {
        let g = graph(seed, n, 2 * n);
        let st = stats_of(&g, &corpus(&g, seed, k));
        let solve = |method| {
            let opts = LagrangeOptions { method, tol: 1e-12, ..Default::default() };
            LagrangeSolver::<f64>::new(&g, opts).unwrap().solve(&st.s_minus_e()).unwrap().lambda
        };
        let (a, b) = (solve(LagrangeMethod::Dense), solve(LagrangeMethod::FixedPoint));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-6, "{} vs {}", x, y);
        }
    }
}
