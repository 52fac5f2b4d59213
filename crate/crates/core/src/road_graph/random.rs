//! Random strongly connected test graphs.

use super::{RoadNetwork, RoadNetworkBuilder};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashSet;

/// Random strongly connected, non-bipartite road network on `n ≥ 3`
/// vertices with external ids `1..=n`.
///
/// A random Hamiltonian cycle guarantees strong connectivity, one chord
/// closes a triangle in the undirected skeleton (so the symmetrised graph
/// is not bipartite), and `extra` further random edges are added.
pub fn strongly_connected<R: Rng + ?Sized>(n: usize, extra: usize, rng: &mut R) -> RoadNetwork {
    assert!(n >= 3, "need at least three vertices");
    let mut order: Vec<u64> = (1..=n as u64).collect();
    order.shuffle(rng);
    let mut edges: HashSet<(u64, u64)> = HashSet::new();
    for i in 0..n {
        edges.insert((order[i], order[(i + 1) % n]));
    }
    edges.insert((order[0], order[2]));
    let max_edges = n * (n - 1);
    let target = (edges.len() + extra).min(max_edges);
    while edges.len() < target {
        let u = rng.random_range(1..=n as u64);
        let v = rng.random_range(1..=n as u64);
        if u != v {
            edges.insert((u, v));
        }
    }
    let mut b = RoadNetworkBuilder::new();
    for id in 1..=n as u64 {
        b.vertex(id).expect("fresh id");
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();
    for (u, v) in edges {
        b.edge(u, v).expect("valid edge");
    }
    b.build().expect("simple digraph")
}

/// Random strongly connected network with geometric locality: vertices on a
/// ring, each linked to near neighbours in both directions with some
/// probability, on top of a forward ring. Closer to a street grid than
/// [`strongly_connected`].
pub fn ring_network<R: Rng + ?Sized>(n: usize, reach: usize, p_link: f64, rng: &mut R) -> RoadNetwork {
    assert!(n >= 3, "need at least three vertices");
    let mut edges: HashSet<(u64, u64)> = HashSet::new();
    for i in 0..n {
        edges.insert((i as u64 + 1, ((i + 1) % n) as u64 + 1));
    }
    edges.insert((1, 3));
    for i in 0..n {
        for d in 1..=reach.max(1) {
            let j = (i + d) % n;
            if i != j && rng.random_bool(p_link) {
                edges.insert((j as u64 + 1, i as u64 + 1));
            }
            if i != j && d > 1 && rng.random_bool(p_link) {
                edges.insert((i as u64 + 1, j as u64 + 1));
            }
        }
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();
    RoadNetwork::from_edges(&edges).expect("simple digraph")
}
