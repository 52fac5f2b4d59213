//! Nearest-node matching of GPS traces with shortest-path gap filling.

use crate::geo::GridIndex;
use crate::ttp::RawTrajectory;
use crate::IngestError;
use petgraph::algo::astar;
use petgraph::graph::{DiGraph, NodeIndex};
use rayon::prelude::*;
use roadmarkov::road_graph::{Digraph, RoadNetwork};

pub const DEFAULT_SNAP_RADIUS_M: f64 = 200.0;

/// Edge cost used by the router.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WeightMode {
    /// Squared great-circle length.
    #[default]
    SquaredMeters,
    Meters,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchOptions {
    pub snap_radius_m: f64,
    pub weights: WeightMode,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self { snap_radius_m: DEFAULT_SNAP_RADIUS_M, weights: WeightMode::SquaredMeters }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchedTrajectory {
    /// Vertex sequences, each a valid walk on the graph. A piece may have a
    /// single vertex.
    pub pieces: Vec<Vec<usize>>,
    /// GPS points with no vertex within the snap radius.
    pub dropped_points: usize,
    /// Gaps with no route, one per extra piece.
    pub splits: usize,
    /// Largest snap distance among the kept points.
    pub max_snap_m: f64,
}

/// Snapping index and router over one road network.
pub struct Matcher<'a> {
    g: &'a RoadNetwork,
    index: GridIndex,
    router: DiGraph<(), f64>,
    opts: MatchOptions,
}

impl<'a> Matcher<'a> {
    /// Needs vertex coordinates and edge lengths.
    pub fn new(g: &'a RoadNetwork, opts: MatchOptions) -> Result<Self, IngestError> {
        let (Some(coords), Some(lengths)) = (g.coords(), g.lengths()) else {
            return Err(IngestError::MissingGeometry);
        };
        if g.vertex_count() == 0 {
            return Err(IngestError::EmptyResult);
        }
        let index = GridIndex::new(coords.to_vec(), g.external_ids().to_vec(), opts.snap_radius_m.max(50.0));
        let mut router = DiGraph::with_capacity(g.vertex_count(), g.edge_count());
        for _ in 0..g.vertex_count() {
            router.add_node(());
        }
        for (&(u, v), &len) in g.edges().iter().zip(lengths) {
            let w = match opts.weights {
                WeightMode::SquaredMeters => len * len,
                WeightMode::Meters => len,
            };
            router.add_edge(NodeIndex::new(u), NodeIndex::new(v), w);
        }
        Ok(Self { g, index, router, opts })
    }

    /// Nearest vertex within the snap radius (ties to the lowest external
    /// id) and its distance in meters.
    pub fn snap(&self, lat: f64, lon: f64) -> Option<(usize, f64)> {
        self.index.nearest(lat, lon, self.opts.snap_radius_m)
    }

    /// Least-cost route from `u` to `v`, both ends included.
    pub fn route(&self, u: usize, v: usize) -> Option<Vec<usize>> {
        let goal = NodeIndex::new(v);
        astar(&self.router, NodeIndex::new(u), |n| n == goal, |e| *e.weight(), |_| 0.0)
            .map(|(_, path)| path.into_iter().map(|n| n.index()).collect())
    }

    pub fn match_trajectory(&self, raw: &RawTrajectory) -> Result<MatchedTrajectory, IngestError> {
        let mut seq: Vec<usize> = Vec::with_capacity(raw.points.len());
        let mut dropped = 0;
        let mut max_snap: f64 = 0.0;
        for &(lon, lat) in &raw.points {
            match self.snap(lat, lon) {
                Some((v, d)) => {
                    max_snap = max_snap.max(d);
                    if seq.last() != Some(&v) {
                        seq.push(v);
                    }
                }
                None => dropped += 1,
            }
        }
        if seq.is_empty() {
            return Err(IngestError::NoUsablePoints);
        }
        let mut pieces = vec![vec![seq[0]]];
        for &v in &seq[1..] {
            let piece = pieces.last_mut().unwrap();
            let u = *piece.last().unwrap();
            match self.route(u, v) {
                Some(path) => piece.extend_from_slice(&path[1..]),
                None => pieces.push(vec![v]),
            }
        }
        debug_assert!(pieces.iter().all(|p| p.windows(2).all(|w| self.g.has_arc(w[0], w[1]))));
        let splits = pieces.len() - 1;
        Ok(MatchedTrajectory { pieces, dropped_points: dropped, splits, max_snap_m: max_snap })
    }

    /// Matches in parallel; results keep the input order.
    pub fn match_all(&self, raws: &[RawTrajectory]) -> Vec<Result<MatchedTrajectory, IngestError>> {
        raws.par_iter().map(|r| self.match_trajectory(r)).collect()
    }
}
