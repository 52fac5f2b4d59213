//! Corpus files: one trajectory per line as whitespace-separated external
//! vertex ids, optionally followed by `| count` for repeated trajectories.
//! Blank lines and `#` comments are ignored.
//!
//! ```text
//! # id sequence | multiplicity
//! 1 2 3 4 | 150
//! 2 4 5
//! ```

use super::EstimateError;
use crate::road_graph::RoadNetwork;
use std::io::{BufRead, Write};

/// A trajectory that mentions an id missing from the graph.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct UnknownId {
    pub line: usize,
    pub id: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    /// Dense vertex indices with multiplicities.
    pub records: Vec<(Vec<usize>, u64)>,
    /// Skipped lines, one entry per line.
    pub unknown: Vec<UnknownId>,
}

impl Corpus {
    pub fn iter(&self) -> impl Iterator<Item = (&[usize], u64)> + '_ {
        self.records.iter().map(|(t, m)| (t.as_slice(), *m))
    }
}

fn parse_u64(tok: &str, line: usize) -> Result<u64, EstimateError> {
    tok.parse().map_err(|_| EstimateError::Parse { line, msg: format!("expected an integer, found {tok:?}") })
}

pub fn read_corpus<R: BufRead>(r: R, g: &RoadNetwork) -> Result<Corpus, EstimateError> {
    let mut corpus = Corpus::default();
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (ids, count) = match body.split_once('|') {
            Some((ids, c)) => (ids, parse_u64(c.trim(), line_no)?),
            None => (body, 1),
        };
        if count == 0 {
            return Err(EstimateError::Parse { line: line_no, msg: "count must be positive".into() });
        }
        let mut traj = Vec::new();
        let mut missing = None;
        for tok in ids.split_whitespace() {
            let id = parse_u64(tok, line_no)?;
            match g.index_of(id) {
                Some(v) => traj.push(v),
                None => missing = missing.or(Some(id)),
            }
        }
        match missing {
            Some(id) => corpus.unknown.push(UnknownId { line: line_no, id }),
            None => corpus.records.push((traj, count)),
        }
    }
    Ok(corpus)
}

pub fn corpus_from_str(s: &str, g: &RoadNetwork) -> Result<Corpus, EstimateError> {
    read_corpus(s.as_bytes(), g)
}

pub fn write_corpus<W: Write>(records: &[(Vec<usize>, u64)], g: &RoadNetwork, mut w: W) -> std::io::Result<()> {
    for (t, m) in records {
        let ids: Vec<String> = t.iter().map(|&v| g.external_id(v).to_string()).collect();
        if *m == 1 {
            writeln!(w, "{}", ids.join(" "))?;
        } else {
            writeln!(w, "{} | {}", ids.join(" "), m)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    #[test]
    fn round_trip() {
        let g = toy::network();
        let records = toy::corpus();
        let mut buf = Vec::new();
        write_corpus(&records, &g, &mut buf).unwrap();
        let back = read_corpus(buf.as_slice(), &g).unwrap();
        assert_eq!(back.records, records);
        assert!(back.unknown.is_empty());
    }

    #[test]
    fn comments_counts_and_unknown_ids() {
        let g = toy::network();
        let c = corpus_from_str("# header\n1 2 3 | 4\n\n2 9 4\n5 2  # tail\n", &g).unwrap();
        assert_eq!(c.records, vec![(vec![0, 1, 2], 4), (vec![4, 1], 1)]);
        assert_eq!(c.unknown, vec![UnknownId { line: 4, id: 9 }]);
    }

    #[test]
    fn malformed() {
        let g = toy::network();
        assert!(matches!(corpus_from_str("1 x 3\n", &g), Err(EstimateError::Parse { line: 1, .. })));
        assert!(matches!(corpus_from_str("1 2\n1 2 | 0\n", &g), Err(EstimateError::Parse { line: 2, .. })));
    }
}
