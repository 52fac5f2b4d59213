use super::MarkovError;
use crate::road_graph::{ClosedRoadNetwork, Digraph, LineDigraph};
use crate::scalar::{abs, flush, Scalar};
use crate::sparse::SparseMatrix;
use nalgebra::DMatrix;

/// Row-stochastic sparse matrix. Rows sum to one and entries are
/// non-negative; which graph it is subordinated to is checked by the
/// graph-aware constructors.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T> {
    p: SparseMatrix<T>,
}

impl<T: Scalar> Kernel<T> {
    /// Checks non-negativity and row sums (within `1e-12`); flushes entries
    /// below `1e-15` and drops exact zeros.
    pub fn from_rows(rows: Vec<Vec<(usize, T)>>) -> Result<Self, MarkovError> {
        let n = rows.len();
        let tol = T::tol(1e-12);
        let mut clean = Vec::with_capacity(n);
        for (u, row) in rows.into_iter().enumerate() {
            let mut sum = T::zero();
            let mut out = Vec::with_capacity(row.len());
            for (v, x) in row {
                if v >= n {
                    return Err(MarkovError::OutOfRange { row: u, col: v });
                }
                if x < T::zero() && flush(x) != T::zero() {
                    return Err(MarkovError::Negative { row: u, col: v });
                }
                sum += x;
                let x = flush(x);
                if x > T::zero() {
                    out.push((v, x));
                }
            }
            if abs(sum - T::one()) > tol {
                return Err(MarkovError::RowSum { row: u, sum: sum.as_f64() });
            }
            clean.push(out);
        }
        Ok(Self { p: SparseMatrix::from_rows(clean) })
    }

    /// Like [`from_rows`](Self::from_rows), and additionally requires the
    /// support to lie in the graph's arcs plus the diagonal.
    pub fn on_graph<G: Digraph + ?Sized>(g: &G, rows: Vec<Vec<(usize, T)>>) -> Result<Self, MarkovError> {
        if rows.len() != g.vertex_count() {
            return Err(MarkovError::GraphMismatch);
        }
        let k = Self::from_rows(rows)?;
        for (u, v, _) in k.p.iter() {
            if u != v && !g.has_arc(u, v) {
                return Err(MarkovError::OffSupport { row: u, col: v });
            }
        }
        Ok(k)
    }

    pub fn from_dense(m: &DMatrix<T>) -> Result<Self, MarkovError> {
        Self::from_rows(SparseMatrix::from_dense(m).into_rows())
    }

    /// Uniform over out-neighbours (a point mass on `u` if there are none).
    pub fn uniform_out<G: Digraph + ?Sized>(g: &G) -> Self {
        let rows = (0..g.vertex_count()).map(|u| uniform_out_row(g, u)).collect();
        Self::from_rows(rows).expect("uniform rows are stochastic")
    }

    pub fn size(&self) -> usize {
        self.p.size()
    }

    pub fn row(&self, u: usize) -> &[(usize, T)] {
        self.p.row(u)
    }

    pub fn get(&self, u: usize, v: usize) -> T {
        self.p.get_or_zero(u, v)
    }

    pub fn matrix(&self) -> &SparseMatrix<T> {
        &self.p
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        self.p.to_dense()
    }

    /// `out = xᵀP`.
    pub fn left_apply(&self, x: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|o| *o = T::zero());
        for (u, row) in self.p.rows().iter().enumerate() {
            let xu = x[u];
            if xu == T::zero() {
                continue;
            }
            for &(v, p) in row {
                out[v] += xu * p;
            }
        }
    }

    /// Every off-diagonal positive entry is an arc of `g`.
    pub fn is_subordinated_to<G: Digraph + ?Sized>(&self, g: &G) -> bool {
        self.size() == g.vertex_count() && self.p.iter().all(|(u, v, _)| u == v || g.has_arc(u, v))
    }

    /// Directed graph of positive entries, diagonal included.
    pub fn support_graph(&self) -> SupportGraph {
        SupportGraph::from_rows(self.p.rows().iter().map(|r| r.iter().map(|&(v, _)| v).collect()))
    }
}

pub(crate) fn uniform_out_row<G: Digraph + ?Sized, T: Scalar>(g: &G, u: usize) -> Vec<(usize, T)> {
    let succ = g.successors(u);
    if succ.is_empty() {
        return vec![(u, T::one())];
    }
    let p = T::one() / T::from_count(succ.len() as u64);
    succ.iter().map(|&v| (v, p)).collect()
}

/// Adjacency lists of a kernel's support.
#[derive(Clone, Debug)]
pub struct SupportGraph {
    start: Vec<usize>,
    targets: Vec<usize>,
}

impl SupportGraph {
    fn from_rows(rows: impl Iterator<Item = Vec<usize>>) -> Self {
        let mut start = vec![0];
        let mut targets = Vec::new();
        for r in rows {
            targets.extend(r);
            start.push(targets.len());
        }
        Self { start, targets }
    }
}

impl Digraph for SupportGraph {
    fn vertex_count(&self) -> usize {
        self.start.len() - 1
    }

    fn successors(&self, v: usize) -> &[usize] {
        &self.targets[self.start[v]..self.start[v + 1]]
    }
}

/// Edge kernel on the line digraph of a closure, enforcing the structural
/// zeros around the ideal vertex `0`: no immediate U-turn through `0`
/// (`(u,0) → (0,u)` and `(0,v) → (v,0)`), and no waiting on an edge incident
/// to `0`.
pub fn edge_kernel_for_closure<T: Scalar>(
    closed: &ClosedRoadNetwork,
    line: &LineDigraph,
    rows: Vec<Vec<(usize, T)>>,
) -> Result<Kernel<T>, MarkovError> {
    let k = Kernel::on_graph(line, rows)?;
    let z = closed.ideal();
    let edges = line.base_edges();
    for (i, j, _) in k.matrix().iter() {
        let (u, v) = edges[i];
        let (v2, w) = edges[j];
        let waits_at_boundary = i == j && (u == z || v == z);
        let u_turn = i != j && v2 == z && u == w;
        let bounce = i != j && u == z && w == z;
        debug_assert!(i == j || v == v2);
        if waits_at_boundary || u_turn || bounce {
            return Err(MarkovError::ClosureConstraint { from: i, to: j });
        }
    }
    Ok(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    /// Support within arcs plus diagonal.
    Subordinated,
    /// Additionally every arc carries positive mass.
    Compatible,
}

/// Findings of [`validate_kernel`]. Empty lists mean the check passed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KernelDiagnostics {
    pub row_sum_violations: Vec<(usize, f64)>,
    pub negative_entries: Vec<(usize, usize, f64)>,
    pub off_support: Vec<(usize, usize, f64)>,
    /// Arcs with zero mass (compatible mode only).
    pub zero_arcs: Vec<(usize, usize)>,
}

impl KernelDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.row_sum_violations.is_empty()
            && self.negative_entries.is_empty()
            && self.off_support.is_empty()
            && self.zero_arcs.is_empty()
    }
}

/// Inspects a candidate matrix (sparse rows) against `g` without failing.
pub fn validate_kernel<G: Digraph + ?Sized, T: Scalar>(
    rows: &[Vec<(usize, T)>],
    g: &G,
    mode: ValidationMode,
) -> KernelDiagnostics {
    let mut d = KernelDiagnostics::default();
    let tol = T::tol(1e-12);
    for (u, row) in rows.iter().enumerate() {
        let sum: T = row.iter().map(|&(_, x)| x).sum();
        if abs(sum - T::one()) > tol {
            d.row_sum_violations.push((u, sum.as_f64()));
        }
        for &(v, x) in row {
            if x < T::zero() {
                d.negative_entries.push((u, v, x.as_f64()));
            }
            let on_support = u == v || (u < g.vertex_count() && v < g.vertex_count() && g.has_arc(u, v));
            if !on_support && x != T::zero() {
                d.off_support.push((u, v, x.as_f64()));
            }
        }
        if mode == ValidationMode::Compatible && u < g.vertex_count() {
            for &v in g.successors(u) {
                let mass = row.iter().find(|e| e.0 == v).map_or(T::zero(), |e| e.1);
                if mass <= T::zero() {
                    d.zero_arcs.push((u, v));
                }
            }
        }
    }
    if rows.len() != g.vertex_count() {
        d.row_sum_violations.push((rows.len(), f64::NAN));
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::road_graph::{close_network, RoadNetwork};
    use crate::toy;

    fn toy_rows() -> Vec<Vec<(usize, f64)>> {
        let g = toy::network();
        let mut rows = vec![Vec::new(); 5];
        for &(u, v, p) in &toy::KERNEL {
            rows[g.index_of(u).unwrap()].push((g.index_of(v).unwrap(), p));
        }
        rows
    }

    #[test]
    fn reference_kernel_is_compatible() {
        let g = toy::network();
        let d = validate_kernel(&toy_rows(), &g, ValidationMode::Compatible);
        assert!(d.is_valid(), "{d:?}");
        assert!(Kernel::on_graph(&g, toy_rows()).is_ok());
    }

    #[test]
    fn off_support_reported() {
        let g = toy::network();
        let mut rows = toy_rows();
        rows[0] = vec![(0, 0.5), (1, 0.25), (2, 0.25)];
        let d = validate_kernel(&rows, &g, ValidationMode::Subordinated);
        assert_eq!(d.off_support, vec![(0, 2, 0.25)]);
        assert!(matches!(Kernel::on_graph(&g, rows), Err(MarkovError::OffSupport { row: 0, col: 2 })));
    }

    #[test]
    fn subordinated_but_not_compatible() {
        let g = toy::network();
        let mut rows = toy_rows();
        // move p(2,3) onto the self-loop at 2
        rows[1] = vec![(0, 0.25), (1, 0.5), (3, 0.25)];
        assert!(validate_kernel(&rows, &g, ValidationMode::Subordinated).is_valid());
        let d = validate_kernel(&rows, &g, ValidationMode::Compatible);
        assert_eq!(d.zero_arcs, vec![(1, 2)]);
    }

    #[test]
    fn row_sum_and_sign_checks() {
        assert!(matches!(
            Kernel::<f64>::from_rows(vec![vec![(0, 0.5)]]),
            Err(MarkovError::RowSum { row: 0, .. })
        ));
        assert!(matches!(
            Kernel::<f64>::from_rows(vec![vec![(0, 1.5), (1, -0.5)], vec![(1, 1.0)]]),
            Err(MarkovError::Negative { row: 0, col: 1 })
        ));
        let k = Kernel::<f64>::from_rows(vec![vec![(0, 1.0 - 1e-16), (1, 1e-16)], vec![(1, 1.0)]]).unwrap();
        assert_eq!(k.row(0).len(), 1, "tiny entry flushed");
    }

    #[test]
    fn closure_constraints() {
        let g = RoadNetwork::from_edges(&[(1, 2), (2, 1)]).unwrap();
        let c = close_network(&g, &[0, 1], &[0, 1]).unwrap();
        let line = c.line_digraph();
        let z = c.ideal();
        let edges = line.base_edges().to_vec();
        let allowed = |i: usize, j: usize| {
            let ((u, _), (_, w)) = (edges[i], edges[j]);
            !(edges[i].1 == z && u == w) && !(u == z && w == z)
        };
        let build = |extra: Option<(usize, usize)>| {
            let rows = (0..line.vertex_count())
                .map(|i| {
                    let mut succ: Vec<usize> = line.successors(i).iter().copied().filter(|&j| allowed(i, j)).collect();
                    succ.extend(extra.filter(|e| e.0 == i).map(|e| e.1));
                    succ.sort_unstable();
                    succ.dedup();
                    let p = 1.0 / succ.len() as f64;
                    succ.into_iter().map(|j| (j, p)).collect()
                })
                .collect();
            edge_kernel_for_closure(&c, &line, rows)
        };
        assert!(build(None).is_ok());
        let leave = line.vertex_of(0, z).unwrap();
        let enter = line.vertex_of(z, 0).unwrap();
        let enter_other = line.vertex_of(z, 1).unwrap();
        let back = line.vertex_of(0, z).unwrap();
        // waiting on an edge incident to the ideal vertex
        assert!(matches!(build(Some((leave, leave))), Err(MarkovError::ClosureConstraint { .. })));
        // leave through 0 and come straight back to the same vertex
        assert!(matches!(build(Some((leave, enter))), Err(MarkovError::ClosureConstraint { .. })));
        // enter from 0 and immediately leave again
        assert!(matches!(build(Some((enter, back))), Err(MarkovError::ClosureConstraint { .. })));
        assert!(build(Some((leave, enter_other))).is_ok());
    }
}
