use super::{line_digraph, Digraph, GraphError, LineDigraph, RoadNetwork, RoadNetworkBuilder};

/// External id reserved for the ideal vertex of a closure.
pub const IDEAL_VERTEX_ID: u64 = 0;

/// A road network augmented with an ideal vertex through which vehicles
/// leave (`u → 0`) and enter (`0 → v`).
///
/// The augmented graph keeps the base vertex indices and appends the ideal
/// vertex as index `n`. Coordinates and lengths are not carried over.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedRoadNetwork {
    graph: RoadNetwork,
    ideal: usize,
    exits: Vec<usize>,
    entries: Vec<usize>,
}

pub fn close_network(g: &RoadNetwork, exits: &[usize], entries: &[usize]) -> Result<ClosedRoadNetwork, GraphError> {
    if exits.is_empty() || entries.is_empty() {
        return Err(GraphError::EmptyBoundary);
    }
    if g.index_of(IDEAL_VERTEX_ID).is_some() {
        return Err(GraphError::ReservedVertexId(IDEAL_VERTEX_ID));
    }
    let n = g.vertex_count();
    let mut b = RoadNetworkBuilder::new();
    for &id in g.external_ids() {
        b.vertex(id)?;
    }
    let ideal = b.vertex(IDEAL_VERTEX_ID)?;
    for &(u, v) in g.edges() {
        b.edge(g.external_id(u), g.external_id(v))?;
    }
    let mut exits = exits.to_vec();
    let mut entries = entries.to_vec();
    exits.sort_unstable();
    exits.dedup();
    entries.sort_unstable();
    entries.dedup();
    for &u in &exits {
        if u >= n {
            return Err(GraphError::UnknownVertex(u as u64));
        }
        b.edge(g.external_id(u), IDEAL_VERTEX_ID)?;
    }
    for &v in &entries {
        if v >= n {
            return Err(GraphError::UnknownVertex(v as u64));
        }
        b.edge(IDEAL_VERTEX_ID, g.external_id(v))?;
    }
    Ok(ClosedRoadNetwork { graph: b.build()?, ideal, exits, entries })
}

impl ClosedRoadNetwork {
    /// The augmented graph including the ideal vertex.
    pub fn graph(&self) -> &RoadNetwork {
        &self.graph
    }

    /// Dense index of the ideal vertex.
    pub fn ideal(&self) -> usize {
        self.ideal
    }

    pub fn exits(&self) -> &[usize] {
        &self.exits
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn line_digraph(&self) -> LineDigraph {
        line_digraph(&self.graph)
    }
}

impl Digraph for ClosedRoadNetwork {
    fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    fn successors(&self, v: usize) -> &[usize] {
        self.graph.successors(v)
    }
}
