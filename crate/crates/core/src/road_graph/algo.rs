use super::{Digraph, GraphError, RoadNetwork};
use serde::Serialize;
use std::collections::{BTreeMap, VecDeque};

/// Strongly connected components (iterative Tarjan). Each vertex gets a
/// component label; labels are in reverse topological order of the
/// condensation, so label 0 is a sink component.
pub fn strongly_connected_components<G: Digraph + ?Sized>(g: &G) -> (usize, Vec<usize>) {
    const UNSEEN: usize = usize::MAX;
    let n = g.vertex_count();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next = 0usize;
    let mut ncomp = 0usize;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = g.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    (ncomp, comp)
}

/// True iff a single strongly connected component spans every vertex.
/// The strongly connected component with the most vertices (ties go to the
/// one containing the lowest index), as a network of its own.
pub fn largest_strong_component(g: &RoadNetwork) -> Result<RoadNetwork, GraphError> {
    if g.vertex_count() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let (count, label) = strongly_connected_components(g);
    let mut size = vec![0usize; count];
    let mut first = vec![usize::MAX; count];
    for (v, &c) in label.iter().enumerate() {
        size[c] += 1;
        first[c] = first[c].min(v);
    }
    let best = (0..count).max_by_key(|&c| (size[c], std::cmp::Reverse(first[c]))).unwrap();
    let keep: Vec<bool> = label.iter().map(|&c| c == best).collect();
    g.induced(&keep)
}

pub fn is_strongly_connected<G: Digraph + ?Sized>(g: &G) -> bool {
    g.vertex_count() > 0 && strongly_connected_components(g).0 == 1
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of a strongly connected digraph from a BFS layering.
pub fn period<G: Digraph + ?Sized>(g: &G) -> Result<usize, GraphError> {
    if !is_strongly_connected(g) {
        return Err(GraphError::NotStronglyConnected);
    }
    let n = g.vertex_count();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in g.successors(u) {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut d = 0usize;
    for u in 0..n {
        for &v in g.successors(u) {
            d = gcd(d, (level[u] + 1).abs_diff(level[v]));
        }
    }
    // a single vertex with no cycles through it: treat as aperiodic
    Ok(d.max(1))
}

/// Dense square matrix of exact non-negative integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<u64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self { n, data }
    }

    pub fn adjacency<G: Digraph + ?Sized>(g: &G) -> Self {
        let n = g.vertex_count();
        let mut data = vec![0; n * n];
        for u in 0..n {
            for &v in g.successors(u) {
                data[u * n + v] = 1;
            }
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> u64 {
        self.data[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[u64] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    pub fn checked_mul(&self, rhs: &Self) -> Option<Self> {
        let n = self.n;
        let mut data = vec![0u64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let p = a.checked_mul(rhs.data[k * n + j])?;
                    data[i * n + j] = data[i * n + j].checked_add(p)?;
                }
            }
        }
        Some(Self { n, data })
    }

    pub fn checked_add(&self, rhs: &Self) -> Option<Self> {
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.checked_add(*b))
            .collect::<Option<Vec<_>>>()?;
        Some(Self { n: self.n, data })
    }
}

/// Exact `A^k`; `k = 0` gives the identity.
pub fn adjacency_power<G: Digraph + ?Sized>(g: &G, k: u32) -> Result<IntMatrix, GraphError> {
    let a = IntMatrix::adjacency(g);
    let mut acc = IntMatrix::identity(g.vertex_count());
    for _ in 0..k {
        acc = acc.checked_mul(&a).ok_or(GraphError::Overflow)?;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistogramKind {
    VertexIn,
    VertexOut,
    EdgeIn,
    EdgeOut,
}

impl HistogramKind {
    pub fn name(self) -> &'static str {
        match self {
            HistogramKind::VertexIn => "vertex-in",
            HistogramKind::VertexOut => "vertex-out",
            HistogramKind::EdgeIn => "edge-in",
            HistogramKind::EdgeOut => "edge-out",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeHistogram {
    pub kind: HistogramKind,
    pub bins: BTreeMap<usize, usize>,
}

impl DegreeHistogram {
    pub fn total(&self) -> usize {
        self.bins.values().sum()
    }

    /// `degree,count` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("degree,count\n");
        for (d, c) in &self.bins {
            s.push_str(&format!("{d},{c}\n"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeHistograms {
    pub vertex_in: DegreeHistogram,
    pub vertex_out: DegreeHistogram,
    pub edge_in: DegreeHistogram,
    pub edge_out: DegreeHistogram,
}

impl DegreeHistograms {
    pub fn all(&self) -> [&DegreeHistogram; 4] {
        [&self.vertex_in, &self.vertex_out, &self.edge_in, &self.edge_out]
    }
}

/// Vertex in/out-degree histograms and the line-digraph histograms derived
/// from them without building the line digraph.
///
/// In the line digraph every edge `(u, v)` has outdegree `deg⁺(v)`, so the
/// edge-out bin `i` collects `deg⁻(v)` over vertices with `deg⁺(v) = i`
/// (symmetrically for edge-in). Edge bins share the vertex bins' keys.
pub fn degree_histograms(g: &RoadNetwork) -> DegreeHistograms {
    let din = g.in_degrees();
    let dout = g.out_degrees();
    let mut vin = BTreeMap::new();
    let mut vout = BTreeMap::new();
    let mut ein = BTreeMap::new();
    let mut eout = BTreeMap::new();
    for v in 0..din.len() {
        *vout.entry(dout[v]).or_insert(0) += 1;
        *vin.entry(din[v]).or_insert(0) += 1;
        *eout.entry(dout[v]).or_insert(0) += din[v];
        *ein.entry(din[v]).or_insert(0) += dout[v];
    }
    let h = |kind, bins| DegreeHistogram { kind, bins };
    DegreeHistograms {
        vertex_in: h(HistogramKind::VertexIn, vin),
        vertex_out: h(HistogramKind::VertexOut, vout),
        edge_in: h(HistogramKind::EdgeIn, ein),
        edge_out: h(HistogramKind::EdgeOut, eout),
    }
}
