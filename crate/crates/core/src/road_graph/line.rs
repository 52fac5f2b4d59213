use super::algo::is_strongly_connected;
use super::{Digraph, GraphError, RoadNetwork};
use std::collections::VecDeque;

/// Directed line digraph: one vertex per base edge, one arc per pair of
/// consecutive edges `(u,v) → (v,w)`.
///
/// Vertex `i` is base edge `i` (the base network's edge order).
#[derive(Clone, Debug, PartialEq)]
pub struct LineDigraph {
    base_edges: Vec<(usize, usize)>,
    arc_start: Vec<usize>,
    arc_targets: Vec<usize>,
}

impl LineDigraph {
    /// Base edges; vertex `i` of the line digraph is `base_edges()[i]`.
    pub fn base_edges(&self) -> &[(usize, usize)] {
        &self.base_edges
    }

    /// Line-digraph vertex of base edge `(u, v)`.
    pub fn vertex_of(&self, u: usize, v: usize) -> Option<usize> {
        self.base_edges.binary_search(&(u, v)).ok()
    }

    /// Arcs as `(from, to)` line-digraph vertex pairs.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |i| self.successors(i).iter().map(move |&j| (i, j)))
    }

    fn from_adjacency(base_edges: Vec<(usize, usize)>, adj: Vec<Vec<usize>>) -> Self {
        let mut arc_start = Vec::with_capacity(adj.len() + 1);
        arc_start.push(0);
        let mut arc_targets = Vec::new();
        for mut row in adj {
            row.sort_unstable();
            arc_targets.extend(row);
            arc_start.push(arc_targets.len());
        }
        Self { base_edges, arc_start, arc_targets }
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.vertex_count()).map(|i| self.successors(i).to_vec()).collect()
    }
}

impl Digraph for LineDigraph {
    fn vertex_count(&self) -> usize {
        self.base_edges.len()
    }

    fn successors(&self, v: usize) -> &[usize] {
        &self.arc_targets[self.arc_start[v]..self.arc_start[v + 1]]
    }
}

pub fn line_digraph(g: &RoadNetwork) -> LineDigraph {
    let edges = g.edges().to_vec();
    let adj = edges.iter().map(|&(_, v)| g.out_edge_range(v).collect()).collect();
    LineDigraph::from_adjacency(edges, adj)
}

/// Line digraph with reversal arcs `(u,v) → (v,u)` removed greedily in
/// ascending `(u, v)` order, each removal kept only if strong connectivity
/// survives.
pub fn minimal_line_digraph(g: &RoadNetwork) -> Result<LineDigraph, GraphError> {
    let full = line_digraph(g);
    if !is_strongly_connected(&full) {
        return Err(GraphError::NotStronglyConnected);
    }
    let mut adj = full.adjacency();
    for (i, &(u, v)) in full.base_edges.iter().enumerate() {
        let Some(j) = full.vertex_of(v, u) else { continue };
        let pos = adj[i].iter().position(|&x| x == j).expect("reversal arc present");
        adj[i].remove(pos);
        // The rest of the graph was strongly connected with this arc, so it
        // stays so without it iff j is still reachable from i.
        if !reaches(&adj, i, j) {
            adj[i].insert(pos, j);
        }
    }
    Ok(LineDigraph::from_adjacency(full.base_edges, adj))
}

fn reaches(adj: &[Vec<usize>], from: usize, to: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if y == to {
                return true;
            }
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    fn ext_arcs(g: &RoadNetwork, l: &LineDigraph) -> Vec<(u64, u64, u64)> {
        let mut out: Vec<_> = l
            .arcs()
            .map(|(i, j)| {
                let (u, v) = l.base_edges()[i];
                let (v2, w) = l.base_edges()[j];
                assert_eq!(v, v2);
                (g.external_id(u), g.external_id(v), g.external_id(w))
            })
            .collect();
        out.sort_unstable();
        out
    }

    #[test]
    fn single_edge() {
        let g = RoadNetwork::from_edges(&[(1, 2)]).unwrap();
        let l = line_digraph(&g);
        assert_eq!(l.vertex_count(), 1);
        assert_eq!(l.arc_count(), 0);
    }

    #[test]
    fn two_cycle() {
        let g = RoadNetwork::from_edges(&[(1, 2), (2, 1)]).unwrap();
        let l = line_digraph(&g);
        assert_eq!(ext_arcs(&g, &l), vec![(1, 2, 1), (2, 1, 2)]);
        let m = minimal_line_digraph(&g).unwrap();
        assert_eq!(m, l);
    }

    #[test]
    fn toy_minimal_matches_table_support() {
        let g = toy::network();
        let m = minimal_line_digraph(&g).unwrap();
        assert_eq!(m.vertex_count(), 8);
        let mut expected: Vec<(u64, u64, u64)> = toy::EDGE_KERNEL
            .iter()
            .filter(|&&(a, b, _)| a != b)
            .map(|&((u, v), (_, w), _)| (u, v, w))
            .collect();
        expected.sort_unstable();
        assert_eq!(ext_arcs(&g, &m), expected);
        assert!(!ext_arcs(&g, &m).contains(&(1, 2, 1)));
        assert!(is_strongly_connected(&m));
    }

    #[test]
    fn no_two_cycles_means_nothing_removed() {
        let g = RoadNetwork::from_edges(&[(1, 2), (2, 3), (3, 1), (1, 3)]).unwrap();
        assert_eq!(minimal_line_digraph(&g).unwrap(), line_digraph(&g));
    }

    #[test]
    fn disconnected_line_digraph_rejected() {
        let g = RoadNetwork::from_edges(&[(1, 2), (2, 3)]).unwrap();
        assert!(matches!(minimal_line_digraph(&g), Err(GraphError::NotStronglyConnected)));
    }
}
