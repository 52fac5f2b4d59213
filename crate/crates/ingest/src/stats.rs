//! Descriptive statistics of trajectory lengths.

use roadmarkov::road_graph::RoadNetwork;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Summary of a weighted sample. The standard deviation is the sample one
/// (divisor `n − 1`, zero for a single observation).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// `None` for an empty sample.
    pub fn of(values: &BTreeMap<OrderedKey, u64>) -> Option<Self> {
        let n: u64 = values.values().sum();
        if n == 0 {
            return None;
        }
        let nf = n as f64;
        let mean = values.iter().map(|(x, &c)| x.0 * c as f64).sum::<f64>() / nf;
        let ss: f64 = values.iter().map(|(x, &c)| (x.0 - mean).powi(2) * c as f64).sum();
        let sd = if n > 1 { (ss / (nf - 1.0)).sqrt() } else { 0.0 };
        let at = |rank: u64| {
            let mut seen = 0;
            for (x, &c) in values {
                seen += c;
                if seen > rank {
                    return x.0;
                }
            }
            unreachable!("rank below total count")
        };
        let median = if n % 2 == 1 { at(n / 2) } else { (at(n / 2 - 1) + at(n / 2)) / 2.0 };
        // first maximum in ascending order, so ties go to the smallest value
        let mode = values.iter().fold((f64::NAN, 0), |best, (x, &c)| if c > best.1 { (x.0, c) } else { best }).0;
        Some(Self {
            mean,
            median,
            mode,
            sd,
            min: values.keys().next().unwrap().0,
            max: values.keys().next_back().unwrap().0,
        })
    }
}

/// Finite `f64` with a total order, for use as a map key.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderedKey(pub f64);

impl Eq for OrderedKey {}

impl PartialOrd for OrderedKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CorpusStats {
    pub trajectories: u64,
    /// Length in positions.
    pub points: Option<Summary>,
    /// Length in meters, summing edge lengths along the walk (repeats add
    /// nothing). Needs edge lengths; modes are taken over whole meters.
    pub meters: Option<Summary>,
}

fn walk_meters(t: &[usize], g: &RoadNetwork, lengths: &[f64]) -> f64 {
    t.windows(2).filter(|w| w[0] != w[1]).map(|w| g.edge_index(w[0], w[1]).map_or(0.0, |e| lengths[e])).sum()
}

/// Statistics over weighted `(trajectory, multiplicity)` records.
pub fn corpus_stats(records: &[(Vec<usize>, u64)], g: &RoadNetwork) -> CorpusStats {
    let mut points: BTreeMap<OrderedKey, u64> = BTreeMap::new();
    let mut meters: BTreeMap<OrderedKey, u64> = BTreeMap::new();
    let mut whole_meters: BTreeMap<OrderedKey, u64> = BTreeMap::new();
    for (t, m) in records {
        *points.entry(OrderedKey(t.len() as f64)).or_insert(0) += m;
        if let Some(l) = g.lengths() {
            let d = walk_meters(t, g, l);
            *meters.entry(OrderedKey(d)).or_insert(0) += m;
            *whole_meters.entry(OrderedKey(d.round())).or_insert(0) += m;
        }
    }
    let meters = Summary::of(&meters).map(|s| Summary { mode: Summary::of(&whole_meters).unwrap().mode, ..s });
    CorpusStats { trajectories: records.iter().map(|r| r.1).sum(), points: Summary::of(&points), meters }
}

/// `points,count` histogram of trajectory lengths.
pub fn length_histogram_csv(records: &[(Vec<usize>, u64)]) -> String {
    let mut h: BTreeMap<usize, u64> = BTreeMap::new();
    for (t, m) in records {
        *h.entry(t.len()).or_insert(0) += m;
    }
    let mut s = String::from("points,count\n");
    for (len, c) in h {
        writeln!(s, "{len},{c}").unwrap();
    }
    s
}
