//! Kernel files and JSON export.
//!
//! A kernel file holds one `u v p_uv` line per positive entry (external
//! vertex ids, `u u p_uu` for staying put). Rows must sum to one within
//! `1e-9`; they are renormalised on load. Rows that are absent entirely are
//! filled with the uniform law over the vertex's out-neighbours.

use super::kernel::uniform_out_row;
use super::{Kernel, MarkovError, StationaryDistribution, TwoDimStationary};
use crate::road_graph::{Digraph, RoadNetwork};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

const LOAD_TOL: f64 = 1e-9;

pub fn write_kernel<W: Write>(p: &Kernel<f64>, g: &RoadNetwork, mut w: W) -> Result<(), MarkovError> {
    for (u, v, x) in p.matrix().iter() {
        writeln!(w, "{} {} {:?}", g.external_id(u), g.external_id(v), x)?;
    }
    Ok(())
}

pub fn kernel_to_string(p: &Kernel<f64>, g: &RoadNetwork) -> String {
    let mut buf = Vec::new();
    write_kernel(p, g, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// A loaded kernel and the vertices whose rows were filled in.
#[derive(Clone, Debug)]
pub struct LoadedKernel {
    pub kernel: Kernel<f64>,
    pub filled_rows: Vec<usize>,
}

pub fn read_kernel<R: BufRead>(r: R, g: &RoadNetwork) -> Result<LoadedKernel, MarkovError> {
    let n = g.vertex_count();
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for (ix, line) in r.lines().enumerate() {
        let line = line?;
        let err = |msg: String| MarkovError::Parse { line: ix + 1, msg };
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err(format!("expected `u v p`, got {body:?}")));
        }
        let vertex = |s: &str| {
            let id: u64 = s.parse().map_err(|_| err(format!("bad vertex id {s:?}")))?;
            g.index_of(id).ok_or_else(|| err(format!("unknown vertex {id}")))
        };
        let (u, v) = (vertex(f[0])?, vertex(f[1])?);
        let p: f64 = f[2].parse().map_err(|_| err(format!("bad probability {:?}", f[2])))?;
        if !(p >= 0.0 && p.is_finite()) {
            return Err(err(format!("probability {p} out of range")));
        }
        if u != v && !g.allows(u, v) {
            return Err(MarkovError::OffSupport { row: u, col: v });
        }
        if rows[u].insert(v, p).is_some() {
            return Err(err(format!("repeated entry ({}, {})", f[0], f[1])));
        }
    }
    let mut filled_rows = Vec::new();
    let mut out = Vec::with_capacity(n);
    for (u, row) in rows.into_iter().enumerate() {
        if row.is_empty() {
            filled_rows.push(u);
            out.push(uniform_out_row(g, u));
            continue;
        }
        let sum: f64 = row.values().sum();
        if (sum - 1.0).abs() > LOAD_TOL {
            return Err(MarkovError::RowSum { row: u, sum });
        }
        out.push(row.into_iter().map(|(v, x)| (v, x / sum)).collect());
    }
    Ok(LoadedKernel { kernel: Kernel::on_graph(g, out)?, filled_rows })
}

pub fn kernel_from_str(s: &str, g: &RoadNetwork) -> Result<LoadedKernel, MarkovError> {
    read_kernel(s.as_bytes(), g)
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexValue {
    pub vertex: u64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeValue {
    pub u: u64,
    pub v: u64,
    pub value: f64,
}

/// JSON-ready view of `Q` and its marginal `π`, keyed by external ids.
#[derive(Clone, Debug, Serialize)]
pub struct QExport {
    pub pi: Vec<VertexValue>,
    pub q: Vec<EdgeValue>,
}

pub fn export_q(q: &TwoDimStationary<f64>, g: &RoadNetwork) -> QExport {
    QExport {
        pi: export_pi(q.marginal(), g),
        q: q.matrix()
            .iter()
            .map(|(u, v, x)| EdgeValue { u: g.external_id(u), v: g.external_id(v), value: x })
            .collect(),
    }
}

pub fn export_pi(pi: &[f64], g: &RoadNetwork) -> Vec<VertexValue> {
    pi.iter().enumerate().map(|(v, &x)| VertexValue { vertex: g.external_id(v), value: x }).collect()
}

pub fn export_stationary(pi: &StationaryDistribution<f64>, g: &RoadNetwork) -> Vec<VertexValue> {
    export_pi(&pi.pi, g)
}

/// `u,v,q_uv` table of a (possibly unnormalised) matrix, for plotting.
pub fn edge_table_csv(m: &crate::sparse::SparseMatrix<f64>, g: &RoadNetwork) -> String {
    let mut s = String::from("u,v,q_uv\n");
    for (u, v, x) in m.iter() {
        s.push_str(&format!("{},{},{:?}\n", g.external_id(u), g.external_id(v), x));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    #[test]
    fn round_trip() {
        let g = toy::network();
        let p = toy::kernel();
        let s = kernel_to_string(&p, &g);
        let back = kernel_from_str(&s, &g).unwrap();
        assert!(back.filled_rows.is_empty());
        assert_eq!(back.kernel, p);
        assert_eq!(kernel_to_string(&back.kernel, &g), s);
    }

    #[test]
    fn loose_rows_renormalised_and_missing_rows_filled() {
        let g = toy::network();
        let k = kernel_from_str("2 1 0.3333333333\n2 3 0.3333333333\n2 4 0.3333333334\n", &g).unwrap();
        assert_eq!(k.filled_rows, vec![0, 2, 3, 4]);
        let four = g.index_of(4).unwrap();
        assert_eq!(k.kernel.row(four).len(), 2);
        assert_eq!(k.kernel.get(four, g.index_of(5).unwrap()), 0.5);
    }

    #[test]
    fn bad_rows_rejected() {
        let g = toy::network();
        assert!(matches!(kernel_from_str("1 2 0.9\n", &g), Err(MarkovError::RowSum { .. })));
        assert!(matches!(kernel_from_str("1 3 1.0\n", &g), Err(MarkovError::OffSupport { .. })));
        assert!(matches!(kernel_from_str("1 9 1.0\n", &g), Err(MarkovError::Parse { line: 1, .. })));
    }
}
