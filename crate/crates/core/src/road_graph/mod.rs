//! Road networks as simple digraphs, plus the derived graphs used by the
//! edge-level model: line digraphs, the minimal strongly connected line
//! digraph, and closures through an ideal vertex.
//!
//! Vertices carry a dense index `0..n` and an external 64-bit id (an OSM node
//! id, or the label used in a text file). All algorithms work on dense
//! indices.

mod algo;
mod closure;
mod line;
pub mod random;
pub mod text;

pub use algo::{
    adjacency_power, degree_histograms, is_strongly_connected, largest_strong_component, period,
    strongly_connected_components,
    DegreeHistogram, DegreeHistograms, HistogramKind, IntMatrix,
};
pub use closure::{close_network, ClosedRoadNetwork, IDEAL_VERTEX_ID};
pub use line::{line_digraph, minimal_line_digraph, LineDigraph};

use std::collections::HashMap;
use thiserror::Error;

/// Dense vertex index.
pub type VertexId = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("loop edge at vertex {0}")]
    LoopEdge(u64),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u64, u64),
    #[error("duplicate vertex {0}")]
    DuplicateVertex(u64),
    #[error("edge references unknown vertex {0}")]
    UnknownVertex(u64),
    #[error("vertex id {0} is reserved for the ideal vertex")]
    ReservedVertexId(u64),
    #[error("closure needs at least one exit and one entry")]
    EmptyBoundary,
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("integer overflow in adjacency power")]
    Overflow,
    #[error("{0} must be given for every vertex/edge or for none")]
    PartialAttribute(&'static str),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Minimal read-only digraph interface shared by the graph types.
pub trait Digraph {
    fn vertex_count(&self) -> usize;
    fn successors(&self, v: usize) -> &[usize];

    fn has_arc(&self, u: usize, v: usize) -> bool {
        self.successors(u).binary_search(&v).is_ok()
    }

    fn arc_count(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.successors(v).len()).sum()
    }
}

/// A simple directed road network: no loops, no parallel edges.
#[derive(Clone, Debug, PartialEq)]
pub struct RoadNetwork {
    ext_ids: Vec<u64>,
    index: HashMap<u64, usize>,
    /// Sorted by `(u, v)`; the position is the edge index.
    edges: Vec<(usize, usize)>,
    out_start: Vec<usize>,
    out_targets: Vec<usize>,
    in_start: Vec<usize>,
    in_sources: Vec<usize>,
    coords: Option<Vec<(f64, f64)>>,
    lengths: Option<Vec<f64>>,
}

/// Incremental construction of a [`RoadNetwork`] from external ids.
#[derive(Clone, Debug, Default)]
pub struct RoadNetworkBuilder {
    ids: Vec<u64>,
    index: HashMap<u64, usize>,
    coords: Vec<Option<(f64, f64)>>,
    edges: Vec<(usize, usize, Option<f64>)>,
}

impl RoadNetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a vertex; declaration order fixes the dense index.
    pub fn vertex(&mut self, id: u64) -> Result<usize, GraphError> {
        self.insert_vertex(id, None)
    }

    /// Declares a vertex with `(lat, lon)` coordinates in degrees.
    pub fn vertex_at(&mut self, id: u64, lat: f64, lon: f64) -> Result<usize, GraphError> {
        self.insert_vertex(id, Some((lat, lon)))
    }

    fn insert_vertex(&mut self, id: u64, at: Option<(f64, f64)>) -> Result<usize, GraphError> {
        if self.index.contains_key(&id) {
            return Err(GraphError::DuplicateVertex(id));
        }
        let ix = self.ids.len();
        self.ids.push(id);
        self.index.insert(id, ix);
        self.coords.push(at);
        Ok(ix)
    }

    pub fn edge(&mut self, u: u64, v: u64) -> Result<(), GraphError> {
        self.insert_edge(u, v, None)
    }

    pub fn edge_with_length(&mut self, u: u64, v: u64, meters: f64) -> Result<(), GraphError> {
        self.insert_edge(u, v, Some(meters))
    }

    fn insert_edge(&mut self, u: u64, v: u64, len: Option<f64>) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::LoopEdge(u));
        }
        let a = *self.index.get(&u).ok_or(GraphError::UnknownVertex(u))?;
        let b = *self.index.get(&v).ok_or(GraphError::UnknownVertex(v))?;
        self.edges.push((a, b, len));
        Ok(())
    }

    pub fn build(self) -> Result<RoadNetwork, GraphError> {
        let n = self.ids.len();
        let coords = all_or_none(self.coords, "coordinates")?;
        let mut edges = self.edges;
        edges.sort_by_key(|&(u, v, _)| (u, v));
        for w in edges.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(GraphError::DuplicateEdge(self.ids[w[0].0], self.ids[w[0].1]));
            }
        }
        let lengths = all_or_none(edges.iter().map(|e| e.2).collect(), "edge lengths")?;
        let edges: Vec<(usize, usize)> = edges.into_iter().map(|(u, v, _)| (u, v)).collect();

        let mut out_start = vec![0usize; n + 1];
        let mut in_start = vec![0usize; n + 1];
        for &(u, v) in &edges {
            out_start[u + 1] += 1;
            in_start[v + 1] += 1;
        }
        for i in 0..n {
            out_start[i + 1] += out_start[i];
            in_start[i + 1] += in_start[i];
        }
        let out_targets = edges.iter().map(|&(_, v)| v).collect();
        let mut fill = in_start.clone();
        let mut in_sources = vec![0usize; edges.len()];
        // edges are sorted by source, so each in-list comes out sorted too
        for &(u, v) in &edges {
            in_sources[fill[v]] = u;
            fill[v] += 1;
        }
        Ok(RoadNetwork {
            ext_ids: self.ids,
            index: self.index,
            edges,
            out_start,
            out_targets,
            in_start,
            in_sources,
            coords,
            lengths,
        })
    }
}

fn all_or_none<T>(xs: Vec<Option<T>>, what: &'static str) -> Result<Option<Vec<T>>, GraphError> {
    let given = xs.iter().filter(|x| x.is_some()).count();
    if given == 0 {
        Ok(None)
    } else if given == xs.len() {
        Ok(Some(xs.into_iter().flatten().collect()))
    } else {
        Err(GraphError::PartialAttribute(what))
    }
}

impl RoadNetwork {
    /// Builds a network whose vertices are the ids mentioned by `edges`,
    /// indexed in ascending id order.
    pub fn from_edges(edges: &[(u64, u64)]) -> Result<Self, GraphError> {
        let mut ids: Vec<u64> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        ids.sort_unstable();
        ids.dedup();
        Self::from_parts(&ids, edges)
    }

    /// Sub-network on the vertices with `keep[v]`, preserving index order,
    /// external ids, coordinates and edge lengths.
    pub fn induced(&self, keep: &[bool]) -> Result<Self, GraphError> {
        assert_eq!(keep.len(), self.vertex_count(), "mask length differs from vertex count");
        let mut b = RoadNetworkBuilder::new();
        for v in (0..self.vertex_count()).filter(|&v| keep[v]) {
            match &self.coords {
                Some(c) => b.vertex_at(self.ext_ids[v], c[v].0, c[v].1)?,
                None => b.vertex(self.ext_ids[v])?,
            };
        }
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if keep[u] && keep[v] {
                let (a, z) = (self.ext_ids[u], self.ext_ids[v]);
                match &self.lengths {
                    Some(l) => b.edge_with_length(a, z, l[i])?,
                    None => b.edge(a, z)?,
                }
            }
        }
        b.build()
    }

    /// Builds a network with an explicit vertex list (allows isolated vertices).
    pub fn from_parts(vertices: &[u64], edges: &[(u64, u64)]) -> Result<Self, GraphError> {
        let mut b = RoadNetworkBuilder::new();
        for &v in vertices {
            b.vertex(v)?;
        }
        for &(u, v) in edges {
            b.edge(u, v)?;
        }
        b.build()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as dense `(u, v)` pairs, sorted; the position is the edge index.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let lo = self.out_start[u];
        self.successors(u).binary_search(&v).ok().map(|k| lo + k)
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.in_sources[self.in_start[v]..self.in_start[v + 1]]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_start[v + 1] - self.out_start[v]
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_start[v + 1] - self.in_start[v]
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.vertex_count()).map(|v| self.out_degree(v)).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        (0..self.vertex_count()).map(|v| self.in_degree(v)).collect()
    }

    /// Edge indices leaving `u`, aligned with `successors(u)`.
    pub fn out_edge_range(&self, u: usize) -> std::ops::Range<usize> {
        self.out_start[u]..self.out_start[u + 1]
    }

    /// `u ⇒ v`: an edge or a self-transition.
    pub fn allows(&self, u: usize, v: usize) -> bool {
        u == v || self.has_arc(u, v)
    }

    pub fn external_id(&self, v: usize) -> u64 {
        self.ext_ids[v]
    }

    pub fn external_ids(&self) -> &[u64] {
        &self.ext_ids
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// `(lat, lon)` in degrees, if the network was built with coordinates.
    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    /// Edge lengths in meters, aligned with [`edges`](Self::edges).
    pub fn lengths(&self) -> Option<&[f64]> {
        self.lengths.as_deref()
    }
}

impl Digraph for RoadNetwork {
    fn vertex_count(&self) -> usize {
        self.ext_ids.len()
    }

    fn successors(&self, v: usize) -> &[usize] {
        &self.out_targets[self.out_start[v]..self.out_start[v + 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    #[test]
    fn toy_counts() {
        let g = toy::network();
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edge_count(), 8);
        assert_eq!(g.out_degrees(), vec![1, 3, 1, 2, 1]);
        assert_eq!(g.in_degrees(), vec![1, 3, 1, 2, 1]);
    }

    #[test]
    fn loops_and_duplicates_rejected() {
        assert!(matches!(RoadNetwork::from_edges(&[(1, 2), (3, 3)]), Err(GraphError::LoopEdge(3))));
        assert!(matches!(
            RoadNetwork::from_edges(&[(1, 2), (1, 2)]),
            Err(GraphError::DuplicateEdge(1, 2))
        ));
        assert!(matches!(RoadNetwork::from_parts(&[1], &[(1, 2)]), Err(GraphError::UnknownVertex(2))));
    }

    #[test]
    fn isolated_vertex_graph() {
        let g = RoadNetwork::from_parts(&[7], &[]).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.external_id(0), 7);
    }

    #[test]
    fn partial_lengths_rejected() {
        let mut b = RoadNetworkBuilder::new();
        for v in 1..=3 {
            b.vertex(v).unwrap();
        }
        b.edge_with_length(1, 2, 5.0).unwrap();
        b.edge(2, 3).unwrap();
        assert!(matches!(b.build(), Err(GraphError::PartialAttribute(_))));
    }

    #[test]
    fn predecessors_sorted() {
        let g = toy::network();
        let two = g.index_of(2).unwrap();
        let preds: Vec<u64> = g.predecessors(two).iter().map(|&p| g.external_id(p)).collect();
        assert_eq!(preds, vec![1, 4, 5]);
    }
}
