//! The five-vertex example network used throughout the tests and by the
//! `toy` self-check: vertices `1..=5`, eight edges, strongly connected and
//! aperiodic.

use crate::markov::Kernel;
use crate::road_graph::{minimal_line_digraph, Digraph, LineDigraph, RoadNetwork};
use crate::Scalar;

pub const EDGES: [(u64, u64); 8] = [(1, 2), (2, 1), (2, 3), (2, 4), (3, 4), (4, 2), (4, 5), (5, 2)];

pub fn network() -> RoadNetwork {
    RoadNetwork::from_edges(&EDGES).expect("toy edges are a simple digraph")
}

/// Transition probabilities `(u, v, p_uv)` of the reference kernel,
/// self-loops included. Its stationary law is `(1,2,1,2,1)/7`.
pub const KERNEL: [(u64, u64, f64); 13] = [
    (1, 1, 0.5),
    (1, 2, 0.5),
    (2, 1, 0.25),
    (2, 2, 0.25),
    (2, 3, 0.25),
    (2, 4, 0.25),
    (3, 3, 0.5),
    (3, 4, 0.5),
    (4, 2, 0.25),
    (4, 4, 0.5),
    (4, 5, 0.25),
    (5, 2, 0.5),
    (5, 5, 0.5),
];

/// Edge-to-edge kernel on the minimal line digraph: `(from, to, p)` with
/// `from == to` for the self-transition of an edge.
pub const EDGE_KERNEL: [((u64, u64), (u64, u64), f64); 21] = [
    ((1, 2), (1, 2), 0.5),
    ((1, 2), (2, 3), 0.25),
    ((1, 2), (2, 4), 0.25),
    ((2, 3), (2, 3), 0.5),
    ((2, 3), (3, 4), 0.5),
    ((3, 4), (3, 4), 0.5),
    ((3, 4), (4, 2), 0.25),
    ((3, 4), (4, 5), 0.25),
    ((4, 2), (2, 3), 0.25),
    ((4, 2), (4, 2), 0.5),
    ((4, 2), (2, 1), 0.25),
    ((2, 1), (1, 2), 0.5),
    ((2, 1), (2, 1), 0.5),
    ((2, 4), (2, 4), 0.5),
    ((2, 4), (4, 5), 0.5),
    ((4, 5), (4, 5), 0.5),
    ((4, 5), (5, 2), 0.5),
    ((5, 2), (2, 3), 0.25),
    ((5, 2), (2, 1), 0.125),
    ((5, 2), (2, 4), 0.125),
    ((5, 2), (5, 2), 0.5),
];

/// Weighted trajectory corpus: `(vertex sequence, multiplicity)`.
/// 1000 trajectories, 3350 observed positions.
pub const CORPUS: [(&[u64], u64); 8] = [
    (&[1, 2, 3, 4], 150),
    (&[1, 2, 4, 5], 100),
    (&[3, 4, 5], 200),
    (&[5, 2, 1], 250),
    (&[5, 2, 3], 50),
    (&[3, 4, 2, 1], 100),
    (&[5, 2, 4], 50),
    (&[4, 2, 1], 100),
];

pub fn kernel() -> Kernel<f64> {
    kernel_as::<f64>()
}

/// The reference kernel in any scalar type.
pub fn kernel_as<T: Scalar>() -> Kernel<T> {
    let g = network();
    let mut rows = vec![Vec::new(); g.vertex_count()];
    for &(u, v, p) in &KERNEL {
        rows[g.index_of(u).unwrap()].push((g.index_of(v).unwrap(), T::lit(p)));
    }
    Kernel::on_graph(&g, rows).expect("reference kernel is valid")
}

/// The edge kernel on the minimal line digraph of [`network`].
pub fn edge_kernel() -> (LineDigraph, Kernel<f64>) {
    let g = network();
    let line = minimal_line_digraph(&g).expect("toy line digraph is strongly connected");
    let ix = |(u, v): (u64, u64)| {
        line.vertex_of(g.index_of(u).unwrap(), g.index_of(v).unwrap()).expect("toy edge")
    };
    let mut rows = vec![Vec::new(); line.vertex_count()];
    for &(a, b, p) in &EDGE_KERNEL {
        rows[ix(a)].push((ix(b), p));
    }
    let k = Kernel::on_graph(&line, rows).expect("edge kernel is valid");
    (line, k)
}

/// Corpus as dense-index sequences with multiplicities.
pub fn corpus() -> Vec<(Vec<usize>, u64)> {
    let g = network();
    CORPUS
        .iter()
        .map(|&(t, c)| (t.iter().map(|&id| g.index_of(id).unwrap()).collect(), c))
        .collect()
}
