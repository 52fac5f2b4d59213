//! Line-oriented graph file.
//!
//! ```text
//! V <count>
//! N <id> [<lat> <lon>]     one line per vertex, in index order
//! E <u> <v> [<length_m>]   one line per edge, external ids
//! ```
//!
//! `N` lines are optional on input; without them the vertices are the ids
//! mentioned by the edges in ascending order. Blank lines and `#` comments
//! are ignored. The writer always emits `N` lines and sorted edges, and
//! floats use the shortest representation that parses back to the same
//! bits, so `write(read(write(g))) == write(g)` byte for byte.

use super::{Digraph, GraphError, RoadNetwork, RoadNetworkBuilder};
use std::io::{BufRead, Write};

pub fn write_graph<W: Write>(g: &RoadNetwork, mut w: W) -> Result<(), GraphError> {
    writeln!(w, "V {}", g.vertex_count())?;
    for v in 0..g.vertex_count() {
        match g.coords() {
            Some(c) => writeln!(w, "N {} {:?} {:?}", g.external_id(v), c[v].0, c[v].1)?,
            None => writeln!(w, "N {}", g.external_id(v))?,
        }
    }
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        let (a, b) = (g.external_id(u), g.external_id(v));
        match g.lengths() {
            Some(l) => writeln!(w, "E {a} {b} {:?}", l[i])?,
            None => writeln!(w, "E {a} {b}")?,
        }
    }
    Ok(())
}

pub fn graph_to_string(g: &RoadNetwork) -> String {
    let mut buf = Vec::new();
    write_graph(g, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_graph<R: BufRead>(r: R) -> Result<RoadNetwork, GraphError> {
    let mut count: Option<usize> = None;
    let mut nodes: Vec<(u64, Option<(f64, f64)>)> = Vec::new();
    let mut edges: Vec<(u64, u64, Option<f64>)> = Vec::new();
    for (ix, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = ix + 1;
        let err = |msg: &str| GraphError::Parse { line: lineno, msg: msg.to_string() };
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tok = body.split_whitespace();
        let tag = tok.next().unwrap_or("");
        let fields: Vec<&str> = tok.collect();
        let int = |s: &str| s.parse::<u64>().map_err(|_| err(&format!("bad integer {s:?}")));
        let float = |s: &str| s.parse::<f64>().map_err(|_| err(&format!("bad number {s:?}")));
        match (tag, fields.len()) {
            ("V", 1) if count.is_none() => count = Some(int(fields[0])? as usize),
            ("V", _) => return Err(err("expected a single `V <count>` header")),
            (_, _) if count.is_none() => return Err(err("missing `V <count>` header")),
            ("N", 1) => nodes.push((int(fields[0])?, None)),
            ("N", 3) => nodes.push((int(fields[0])?, Some((float(fields[1])?, float(fields[2])?)))),
            ("E", 2) => edges.push((int(fields[0])?, int(fields[1])?, None)),
            ("E", 3) => edges.push((int(fields[0])?, int(fields[1])?, Some(float(fields[2])?))),
            _ => return Err(err(&format!("unrecognised line {body:?}"))),
        }
    }
    let count = count.ok_or(GraphError::Parse { line: 0, msg: "empty graph file".into() })?;
    if nodes.is_empty() {
        let mut ids: Vec<u64> = edges.iter().flat_map(|&(u, v, _)| [u, v]).collect();
        ids.sort_unstable();
        ids.dedup();
        nodes = ids.into_iter().map(|id| (id, None)).collect();
    }
    if nodes.len() != count {
        return Err(GraphError::Parse {
            line: 0,
            msg: format!("header declares {count} vertices, found {}", nodes.len()),
        });
    }
    let mut b = RoadNetworkBuilder::new();
    for (id, at) in nodes {
        match at {
            Some((lat, lon)) => b.vertex_at(id, lat, lon)?,
            None => b.vertex(id)?,
        };
    }
    for (u, v, len) in edges {
        match len {
            Some(m) => b.edge_with_length(u, v, m)?,
            None => b.edge(u, v)?,
        }
    }
    b.build()
}

pub fn graph_from_str(s: &str) -> Result<RoadNetwork, GraphError> {
    read_graph(s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    #[test]
    fn toy_round_trip() {
        let g = toy::network();
        let s = graph_to_string(&g);
        assert!(s.starts_with("V 5\nN 1\n"));
        let h = graph_from_str(&s).unwrap();
        assert_eq!(h, g);
        assert_eq!(graph_to_string(&h), s);
    }

    #[test]
    fn bare_edges_accepted() {
        let g = graph_from_str("V 3\n# comment\nE 10 20 3\nE 20 30 12.5\nE 30 10 0.1\n").unwrap();
        assert_eq!(g.external_ids(), &[10, 20, 30]);
        assert_eq!(g.lengths().unwrap(), &[3.0, 12.5, 0.1]);
    }

    #[test]
    fn coordinates_round_trip_bit_exact() {
        let mut b = RoadNetworkBuilder::new();
        b.vertex_at(5, 41.1579438, -8.6291053).unwrap();
        b.vertex_at(9, 41.15, -8.61 + 1e-13).unwrap();
        b.edge_with_length(5, 9, 1.0 / 3.0).unwrap();
        let g = b.build().unwrap();
        let s = graph_to_string(&g);
        let h = graph_from_str(&s).unwrap();
        assert_eq!(h.coords().unwrap()[1].1.to_bits(), g.coords().unwrap()[1].1.to_bits());
        assert_eq!(graph_to_string(&h), s);
    }

    #[test]
    fn count_mismatch() {
        assert!(matches!(graph_from_str("V 4\nE 1 2\n"), Err(GraphError::Parse { .. })));
        assert!(matches!(graph_from_str("E 1 2\n"), Err(GraphError::Parse { line: 1, .. })));
    }
}
