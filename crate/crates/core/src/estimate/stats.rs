use crate::road_graph::{Digraph, RoadNetwork};
use crate::sparse::SparseMatrix;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Why a trajectory was left out of the statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Rejection {
    /// First consecutive pair that is neither an edge nor a repeat.
    InvalidTransition { u: usize, v: usize },
    /// Fewer than two positions.
    TooShort,
    /// A position outside the graph's index range.
    UnknownVertex { v: usize },
}

/// Counting statistics of a trajectory corpus.
///
/// Merging is exact integer addition over ordered maps, so it is
/// associative and commutative and any partition of a corpus yields the
/// same result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SufficientStats {
    vertices: usize,
    pairs: BTreeMap<(usize, usize), u64>,
    /// `‖N_i‖²` → number of trajectories with that squared norm.
    norms: BTreeMap<u64, u64>,
    s: Vec<u64>,
    e: Vec<u64>,
    n: u64,
    k: u64,
    rejected: BTreeMap<Rejection, u64>,
}

impl SufficientStats {
    pub fn new(vertices: usize) -> Self {
        Self {
            vertices,
            pairs: BTreeMap::new(),
            norms: BTreeMap::new(),
            s: vec![0; vertices],
            e: vec![0; vertices],
            n: 0,
            k: 0,
            rejected: BTreeMap::new(),
        }
    }

    fn check(traj: &[usize], g: &RoadNetwork) -> Result<(), Rejection> {
        if traj.len() < 2 {
            return Err(Rejection::TooShort);
        }
        if let Some(&v) = traj.iter().find(|&&v| v >= g.vertex_count()) {
            return Err(Rejection::UnknownVertex { v });
        }
        match traj.windows(2).find(|w| !g.allows(w[0], w[1])) {
            Some(w) => Err(Rejection::InvalidTransition { u: w[0], v: w[1] }),
            None => Ok(()),
        }
    }

    /// Adds `multiplicity` copies of a trajectory, or records why it was
    /// skipped.
    pub fn add(&mut self, traj: &[usize], multiplicity: u64, g: &RoadNetwork) -> Result<(), Rejection> {
        assert_eq!(g.vertex_count(), self.vertices, "graph does not match statistics");
        if let Err(r) = Self::check(traj, g) {
            *self.rejected.entry(r).or_insert(0) += multiplicity;
            return Err(r);
        }
        if multiplicity == 0 {
            return Ok(());
        }
        let mut own: Vec<(usize, usize)> = traj.windows(2).map(|w| (w[0], w[1])).collect();
        own.sort_unstable();
        let mut norm_sq = 0u64;
        for chunk in own.chunk_by(|a, b| a == b) {
            let c = chunk.len() as u64;
            norm_sq += c * c;
            *self.pairs.entry(chunk[0]).or_insert(0) += c * multiplicity;
        }
        *self.norms.entry(norm_sq).or_insert(0) += multiplicity;
        self.s[traj[0]] += multiplicity;
        self.e[traj[traj.len() - 1]] += multiplicity;
        self.n += traj.len() as u64 * multiplicity;
        self.k += multiplicity;
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.vertices, other.vertices, "statistics over different graphs");
        for (key, c) in &other.pairs {
            *self.pairs.entry(*key).or_insert(0) += c;
        }
        for (key, c) in &other.norms {
            *self.norms.entry(*key).or_insert(0) += c;
        }
        for (key, c) in &other.rejected {
            *self.rejected.entry(*key).or_insert(0) += c;
        }
        for v in 0..self.vertices {
            self.s[v] += other.s[v];
            self.e[v] += other.e[v];
        }
        self.n += other.n;
        self.k += other.k;
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    /// Total number of observed positions.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of accepted trajectories.
    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn s(&self) -> &[u64] {
        &self.s
    }

    pub fn e(&self) -> &[u64] {
        &self.e
    }

    pub fn s_minus_e(&self) -> Vec<i64> {
        self.s.iter().zip(&self.e).map(|(&a, &b)| a as i64 - b as i64).collect()
    }

    pub fn pair_count(&self, u: usize, v: usize) -> u64 {
        self.pairs.get(&(u, v)).copied().unwrap_or(0)
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.pairs.iter().map(|(&k, &c)| (k, c))
    }

    /// `N` as a sparse matrix.
    pub fn n_matrix(&self) -> SparseMatrix<u64> {
        let mut rows = vec![Vec::new(); self.vertices];
        for (&(u, v), &c) in &self.pairs {
            rows[u].push((v, c));
        }
        SparseMatrix::from_rows(rows)
    }

    /// `n_{v+}`: transitions out of each vertex (self-transitions included).
    pub fn out_totals(&self) -> Vec<u64> {
        let mut t = vec![0; self.vertices];
        for (&(u, _), &c) in &self.pairs {
            t[u] += c;
        }
        t
    }

    /// `n_{+v}`.
    pub fn in_totals(&self) -> Vec<u64> {
        let mut t = vec![0; self.vertices];
        for (&(_, v), &c) in &self.pairs {
            t[v] += c;
        }
        t
    }

    /// Distinct squared norms `‖N_i‖²` in ascending order with their
    /// multiplicities.
    pub fn norm_classes(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.norms.iter().map(|(&a, &b)| (a, b))
    }

    /// One squared norm per trajectory, ascending.
    pub fn trajectory_norms_sq(&self) -> Vec<u64> {
        self.norms.iter().flat_map(|(&x, &m)| std::iter::repeat_n(x, m as usize)).collect()
    }

    /// `‖N‖²`.
    pub fn n_squared_norm(&self) -> u64 {
        self.pairs.values().map(|c| c * c).sum()
    }

    /// Skipped trajectories by reason (counting multiplicity).
    pub fn rejected(&self) -> &BTreeMap<Rejection, u64> {
        &self.rejected
    }

    pub fn rejected_total(&self) -> u64 {
        self.rejected.values().sum()
    }
}

/// Single pass over `(trajectory, multiplicity)` records.
pub fn collect_stats<'a, I>(trajs: I, g: &RoadNetwork) -> SufficientStats
where
    I: IntoIterator<Item = (&'a [usize], u64)>,
{
    let mut stats = SufficientStats::new(g.vertex_count());
    for (t, m) in trajs {
        let _ = stats.add(t, m, g);
    }
    stats
}

/// Parallel counting with per-thread partial statistics merged at the end.
pub fn collect_stats_parallel(trajs: &[(Vec<usize>, u64)], g: &RoadNetwork) -> SufficientStats {
    trajs
        .par_iter()
        .fold(
            || SufficientStats::new(g.vertex_count()),
            |mut acc, (t, m)| {
                let _ = acc.add(t, *m, g);
                acc
            },
        )
        .reduce(
            || SufficientStats::new(g.vertex_count()),
            |mut a, b| {
                a.merge(&b);
                a
            },
        )
}
