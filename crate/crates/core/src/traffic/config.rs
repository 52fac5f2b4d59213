use super::TrafficError;
use crate::markov::{Kernel, TwoDimStationary};
use crate::road_graph::Digraph;
use crate::scalar::Scalar;
use nalgebra::DMatrix;
use std::collections::HashMap;

/// Default cap on the number of configurations in [`config_kernel`].
pub const DEFAULT_CONFIG_CAP: usize = 5000;

/// Number of walkers on each vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TrafficConfig {
    counts: Vec<u64>,
}

impl TrafficConfig {
    pub fn new(counts: Vec<u64>) -> Result<Self, TrafficError> {
        if counts.iter().sum::<u64>() == 0 {
            return Err(TrafficError::EmptyConfig);
        }
        Ok(Self { counts })
    }

    /// All `k` walkers on vertex `v`.
    pub fn point(n: usize, v: usize, k: u64) -> Result<Self, TrafficError> {
        let mut counts = vec![0; n];
        counts[v] = k;
        Self::new(counts)
    }

    /// `k` walkers spread as evenly as possible, lower indices first.
    pub fn uniform(n: usize, k: u64) -> Result<Self, TrafficError> {
        let base = k / n as u64;
        let extra = (k % n as u64) as usize;
        Self::new((0..n).map(|v| base + u64::from(v < extra)).collect())
    }

    /// Largest-remainder rounding of `k·π`.
    pub fn proportional(pi: &[f64], k: u64) -> Result<Self, TrafficError> {
        let exact: Vec<f64> = pi.iter().map(|p| p * k as f64).collect();
        let mut counts: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
        let mut short = k.saturating_sub(counts.iter().sum());
        let mut order: Vec<usize> = (0..pi.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        for v in order {
            if short == 0 {
                break;
            }
            counts[v] += 1;
            short -= 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `k = Σ f_v`.
    pub fn size(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Table of `ln n!`.
#[derive(Clone, Debug)]
pub struct LogFactorial {
    table: Vec<f64>,
}

impl LogFactorial {
    pub fn new(max: u64) -> Self {
        let mut table = Vec::with_capacity(max as usize + 1);
        table.push(0.0);
        for i in 1..=max {
            table.push(table[i as usize - 1] + (i as f64).ln());
        }
        Self { table }
    }

    pub fn ln(&self, n: u64) -> f64 {
        self.table[n as usize]
    }

    /// `ln k! − Σ ln f_i! + Σ f_i ln p_i`, or `None` when a positive count
    /// meets a zero probability.
    fn ln_multinomial(&self, pairs: impl Iterator<Item = (u64, f64)>) -> Option<f64> {
        let mut k = 0u64;
        let mut acc = 0.0;
        for (f, p) in pairs {
            if f == 0 {
                continue;
            }
            if p <= 0.0 {
                return None;
            }
            k += f;
            acc += f as f64 * p.ln() - self.ln(f);
        }
        Some(acc + self.ln(k))
    }
}

/// Multinomial probability of configuration `f` under `π`.
pub fn multinomial_pmf<T: Scalar>(pi: &[T], f: &TrafficConfig) -> T {
    let lf = LogFactorial::new(f.size());
    multinomial_with(&lf, pi, f.counts())
}

fn multinomial_with<T: Scalar>(lf: &LogFactorial, pi: &[T], f: &[u64]) -> T {
    match lf.ln_multinomial(f.iter().zip(pi).map(|(&c, p)| (c, p.as_f64()))) {
        Some(x) => T::lit(x.exp()),
        None => T::zero(),
    }
}

/// Multinomial probability of an edge configuration `h` (counts on cells of
/// `E ∪ S`) under `Q`.
pub fn multinomial_edge_pmf<T: Scalar>(q: &TwoDimStationary<T>, h: &[((usize, usize), u64)]) -> T {
    let k: u64 = h.iter().map(|e| e.1).sum();
    let lf = LogFactorial::new(k);
    match lf.ln_multinomial(h.iter().map(|&((u, v), c)| (c, q.get(u, v).as_f64()))) {
        Some(x) => T::lit(x.exp()),
        None => T::zero(),
    }
}

/// All configurations of `k` walkers on `n` vertices in lexicographic order
/// (`(0,…,0,k)` first, `(k,0,…,0)` last).
pub fn enumerate_configs(n: usize, k: u64) -> Vec<Vec<u64>> {
    fn rec(pos: usize, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for x in 0..=left {
            cur[pos] = x;
            rec(pos + 1, left - x, cur, out);
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(0, k, &mut vec![0; n], &mut out);
    }
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Integer matrix moving configuration `f` to `g` along `E ∪ S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportMatrix {
    /// Non-zero entries `(u, v, k_uv)`, sorted.
    pub entries: Vec<(usize, usize, u64)>,
}

impl TransportMatrix {
    pub fn get(&self, u: usize, v: usize) -> u64 {
        self.entries.iter().find(|e| e.0 == u && e.1 == v).map_or(0, |e| e.2)
    }
}

fn allowed_targets<G: Digraph + ?Sized>(graph: &G, u: usize) -> Vec<usize> {
    let mut t = graph.successors(u).to_vec();
    t.push(u);
    t.sort_unstable();
    t.dedup();
    t
}

/// Every transport matrix from `f` to `g`: row sums `f`, column sums `g`,
/// support on arcs plus diagonal. Rows are filled in vertex order.
pub fn enumerate_transport_matrices<G: Digraph + ?Sized>(
    f: &TrafficConfig,
    g: &TrafficConfig,
    graph: &G,
) -> Result<Vec<TransportMatrix>, TrafficError> {
    let n = graph.vertex_count();
    for c in [f, g] {
        if c.counts().len() != n {
            return Err(TrafficError::LengthMismatch { expected: n, got: c.counts().len() });
        }
    }
    if f.size() != g.size() {
        return Err(TrafficError::SizeMismatch(f.size(), g.size()));
    }
    let targets: Vec<Vec<usize>> = (0..n).map(|u| allowed_targets(graph, u)).collect();
    let mut search = TransportSearch {
        f: f.counts(),
        targets: &targets,
        cap: g.counts().to_vec(),
        current: Vec::new(),
        out: Vec::new(),
    };
    search.row(0);
    Ok(search.out)
}

struct TransportSearch<'a> {
    f: &'a [u64],
    targets: &'a [Vec<usize>],
    cap: Vec<u64>,
    current: Vec<(usize, usize, u64)>,
    out: Vec<TransportMatrix>,
}

impl TransportSearch<'_> {
    fn row(&mut self, u: usize) {
        if u == self.f.len() {
            if self.cap.iter().all(|&c| c == 0) {
                let mut entries = self.current.clone();
                entries.sort_unstable();
                self.out.push(TransportMatrix { entries });
            }
            return;
        }
        if !self.feasible(u) {
            return;
        }
        self.cell(u, 0, self.f[u]);
    }

    /// Columns with capacity left must be reachable by rows `u..`.
    fn feasible(&self, u: usize) -> bool {
        let mut supply = vec![0u64; self.cap.len()];
        for w in u..self.f.len() {
            for &v in &self.targets[w] {
                supply[v] += self.f[w];
            }
        }
        self.cap.iter().zip(&supply).all(|(c, s)| c <= s)
    }

    fn cell(&mut self, u: usize, j: usize, left: u64) {
        let targets = &self.targets[u];
        if j + 1 == targets.len() {
            let v = targets[j];
            if left <= self.cap[v] {
                self.place(u, v, left, |s| s.row(u + 1));
            }
            return;
        }
        let v = targets[j];
        for x in 0..=left.min(self.cap[v]) {
            self.place(u, v, x, |s| s.cell(u, j + 1, left - x));
        }
    }

    fn place(&mut self, u: usize, v: usize, x: u64, next: impl FnOnce(&mut Self)) {
        self.cap[v] -= x;
        if x > 0 {
            self.current.push((u, v, x));
        }
        next(self);
        if x > 0 {
            self.current.pop();
        }
        self.cap[v] += x;
    }
}

/// `R(f, g)` by explicit summation over transport matrices:
/// `Π_u f_u! · Σ_K Π_{uv} p_uv^{k_uv} / k_uv!`.
pub fn transport_probability<T: Scalar>(p: &Kernel<T>, f: &TrafficConfig, g: &TrafficConfig) -> Result<f64, TrafficError> {
    let graph = p.support_graph();
    let lf = LogFactorial::new(f.size());
    let prefix: f64 = f.counts().iter().map(|&c| lf.ln(c)).sum();
    let mut total = 0.0;
    for k in enumerate_transport_matrices(f, g, &graph)? {
        let mut ln = prefix;
        for &(u, v, c) in &k.entries {
            ln += c as f64 * p.get(u, v).as_f64().ln() - lf.ln(c);
        }
        total += ln.exp();
    }
    Ok(total)
}

/// Kernel of the configuration chain on all configurations of size `k`.
#[derive(Clone, Debug)]
pub struct ConfigKernel<T: Scalar> {
    pub configs: Vec<Vec<u64>>,
    pub index: HashMap<Vec<u64>, usize>,
    pub matrix: DMatrix<T>,
}

/// Builds `R` row by row: the next configuration from `f` is the sum of
/// independent multinomial moves out of each occupied vertex, so each row is
/// a convolution of per-vertex multinomials. This equals the transport-
/// matrix sum computed by [`transport_probability`].
pub fn config_kernel<T: Scalar>(p: &Kernel<T>, k: u64, cap: usize) -> Result<ConfigKernel<T>, TrafficError> {
    let n = p.size();
    let size = binomial((n as u128) + (k as u128) - 1, k as u128);
    if size > cap as u128 {
        return Err(TrafficError::StateSpaceTooLarge { size, cap });
    }
    let configs = enumerate_configs(n, k);
    let index: HashMap<Vec<u64>, usize> = configs.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let lf = LogFactorial::new(k);
    let mut matrix = DMatrix::<T>::zeros(configs.len(), configs.len());
    for (i, f) in configs.iter().enumerate() {
        let mut dist: HashMap<Vec<u64>, f64> = HashMap::from([(vec![0u64; n], 1.0)]);
        for (u, &fu) in f.iter().enumerate() {
            if fu == 0 {
                continue;
            }
            let moves = row_moves(p.row(u), fu, &lf);
            let mut next: HashMap<Vec<u64>, f64> = HashMap::new();
            for (cfg, pr) in &dist {
                for (delta, q) in &moves {
                    let mut c = cfg.clone();
                    for &(v, x) in delta {
                        c[v] += x;
                    }
                    *next.entry(c).or_insert(0.0) += pr * q;
                }
            }
            dist = next;
        }
        for (cfg, pr) in dist {
            matrix[(i, index[&cfg])] += T::lit(pr);
        }
    }
    Ok(ConfigKernel { configs, index, matrix })
}

/// Multinomial distribution of `m` walkers leaving one vertex.
fn row_moves<T: Scalar>(row: &[(usize, T)], m: u64, lf: &LogFactorial) -> Vec<(Vec<(usize, u64)>, f64)> {
    let mut out = Vec::new();
    for split in enumerate_configs(row.len(), m) {
        let ln = lf.ln_multinomial(split.iter().zip(row).map(|(&c, &(_, p))| (c, p.as_f64())));
        if let Some(ln) = ln {
            let delta = split.iter().zip(row).filter(|(c, _)| **c > 0).map(|(&c, &(v, _))| (v, c)).collect();
            out.push((delta, ln.exp()));
        }
    }
    out
}

/// `Rⁿ` by repeated squaring.
pub fn config_kernel_power_limit<T: Scalar>(r: &ConfigKernel<T>, n: u32) -> DMatrix<T> {
    let m = r.matrix.nrows();
    let mut result = DMatrix::<T>::identity(m, m);
    let mut base = r.matrix.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Multinomial law `ϱ` over the enumerated configurations.
pub fn config_stationary<T: Scalar>(pi: &[T], r: &ConfigKernel<T>) -> Vec<T> {
    let k = r.configs.first().map_or(0, |c| c.iter().sum());
    let lf = LogFactorial::new(k);
    r.configs.iter().map(|c| multinomial_with(&lf, pi, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{q_from_p, stationary, StationaryOptions};
    use crate::toy;

    fn toy_pi() -> Vec<f64> {
        [1.0, 2.0, 1.0, 2.0, 1.0].iter().map(|x| x / 7.0).collect()
    }

    #[test]
    fn multinomial_examples() {
        let pi = toy_pi();
        let f = TrafficConfig::point(5, 1, 2).unwrap();
        assert!((multinomial_pmf(&pi, &f) - 4.0 / 49.0).abs() < 1e-15);
        for v in 0..5 {
            let f = TrafficConfig::point(5, v, 1).unwrap();
            assert!((multinomial_pmf(&pi, &f) - pi[v]).abs() < 1e-15);
        }
        let total: f64 = enumerate_configs(5, 2)
            .into_iter()
            .map(|c| multinomial_pmf(&pi, &TrafficConfig::new(c).unwrap()))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_k_does_not_overflow() {
        let pi = vec![0.5, 0.5];
        let f = TrafficConfig::new(vec![500_000, 500_000]).unwrap();
        let p = multinomial_pmf(&pi, &f);
        // central binomial mass ≈ 1/sqrt(π k / 2)
        let approx = 1.0 / (std::f64::consts::PI * 1e6 / 2.0).sqrt();
        assert!((p / approx - 1.0).abs() < 1e-3);
    }

    #[test]
    fn edge_multinomial() {
        let p = toy::kernel();
        let q = q_from_p(&p, &stationary(&p, StationaryOptions::dense()).unwrap()).unwrap();
        let g = toy::network();
        let ix = |id| g.index_of(id).unwrap();
        assert!((multinomial_edge_pmf(&q, &[((ix(1), ix(2)), 1)]) - 1.0 / 14.0).abs() < 1e-12);
        assert!((multinomial_edge_pmf(&q, &[((ix(4), ix(4)), 2)]) - 1.0 / 49.0).abs() < 1e-12);
        let total: f64 = q.matrix().iter().map(|(u, v, _)| multinomial_edge_pmf(&q, &[((u, v), 1)])).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transport_examples() {
        let g = toy::network();
        let f = TrafficConfig::new(vec![1, 4, 2, 2, 1]).unwrap();
        let h = TrafficConfig::new(vec![1, 2, 1, 4, 2]).unwrap();
        let all = enumerate_transport_matrices(&f, &h, &g).unwrap();
        assert!(!all.is_empty());
        for k in &all {
            let mut rows = [0u64; 5];
            let mut cols = [0u64; 5];
            for &(u, v, c) in &k.entries {
                assert!(g.allows(u, v));
                rows[u] += c;
                cols[v] += c;
            }
            assert_eq!(rows.to_vec(), f.counts());
            assert_eq!(cols.to_vec(), h.counts());
        }
        // the pictured matrix sends one walker from vertex 2 to each of 1, 2, 3, 4
        let pictured = all.iter().any(|k| (0..4).all(|v| k.get(1, v) == 1));
        assert!(pictured);

        let single = enumerate_transport_matrices(
            &TrafficConfig::point(5, 2, 3).unwrap(),
            &TrafficConfig::point(5, 2, 3).unwrap(),
            &g,
        )
        .unwrap();
        assert_eq!(single, vec![TransportMatrix { entries: vec![(2, 2, 3)] }]);

        let none =
            enumerate_transport_matrices(&TrafficConfig::point(5, 0, 1).unwrap(), &TrafficConfig::point(5, 2, 1).unwrap(), &g)
                .unwrap();
        assert!(none.is_empty());

        assert!(matches!(
            enumerate_transport_matrices(&TrafficConfig::point(5, 0, 1).unwrap(), &TrafficConfig::point(5, 0, 2).unwrap(), &g),
            Err(TrafficError::SizeMismatch(1, 2))
        ));
    }

    #[test]
    fn config_kernel_matches_transport_sum() {
        let p = toy::kernel();
        let r = config_kernel(&p, 2, DEFAULT_CONFIG_CAP).unwrap();
        assert_eq!(r.configs.len(), 15);
        for (i, f) in r.configs.iter().enumerate() {
            for (j, g) in r.configs.iter().enumerate() {
                let f = TrafficConfig::new(f.clone()).unwrap();
                let g = TrafficConfig::new(g.clone()).unwrap();
                let direct = transport_probability(&p, &f, &g).unwrap();
                assert!((direct - r.matrix[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_walker_kernel_is_p() {
        let p = toy::kernel();
        let r = config_kernel(&p, 1, DEFAULT_CONFIG_CAP).unwrap();
        for (i, f) in r.configs.iter().enumerate() {
            let u = f.iter().position(|&c| c == 1).unwrap();
            for (j, g) in r.configs.iter().enumerate() {
                let v = g.iter().position(|&c| c == 1).unwrap();
                assert_eq!(r.matrix[(i, j)], p.get(u, v));
            }
        }
    }

    #[test]
    fn cap_enforced() {
        let p = toy::kernel();
        assert!(matches!(config_kernel(&p, 30, DEFAULT_CONFIG_CAP), Err(TrafficError::StateSpaceTooLarge { .. })));
    }

    #[test]
    fn power_one_is_r() {
        let r = config_kernel(&toy::kernel(), 2, DEFAULT_CONFIG_CAP).unwrap();
        assert_eq!(config_kernel_power_limit(&r, 1), r.matrix);
    }

    #[test]
    fn config_helpers() {
        assert_eq!(TrafficConfig::uniform(3, 7).unwrap().counts(), &[3, 2, 2]);
        assert_eq!(TrafficConfig::proportional(&[0.25, 0.5, 0.25], 10).unwrap().size(), 10);
        assert!(matches!(TrafficConfig::new(vec![0, 0]), Err(TrafficError::EmptyConfig)));
        assert_eq!(enumerate_configs(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }
}
