use super::{load_graph, open};
use crate::error::{Classify, CliError};
use crate::Outcome;
use clap::{Args, ValueEnum};
use roadmarkov::estimate::corpus::write_corpus;
use roadmarkov_ingest::matching::DEFAULT_SNAP_RADIUS_M;
use roadmarkov_ingest::ttp::{Clock, DropReason};
use roadmarkov_ingest::{parse_ttp, BBox, IngestError, MatchOptions, Matcher, TimeWindow, TtpOptions, WeightMode};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum ClockArg {
    /// Portuguese civil time (WET/WEST).
    #[default]
    Lisbon,
    Utc,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum WeightArg {
    /// Squared great-circle length.
    #[default]
    Squared,
    Meters,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Trajectories in the TTP CSV layout.
    #[arg(long, value_name = "FILE")]
    pub ttp: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    /// Drop trajectories with any point outside `min_lon,min_lat,max_lon,max_lat`.
    #[arg(long, allow_hyphen_values = true)]
    pub bbox: Option<BBox>,
    /// Keep departures in `hh:mm-hh:mm` local time.
    #[arg(long)]
    pub window: Option<TimeWindow>,
    #[arg(long, value_enum, default_value_t)]
    pub clock: ClockArg,
    /// Largest distance in meters from a GPS point to its vertex.
    #[arg(long, default_value_t = DEFAULT_SNAP_RADIUS_M)]
    pub snap_radius: f64,
    /// Edge weight for shortest-path gap filling.
    #[arg(long, value_enum, default_value_t)]
    pub weights: WeightArg,
    /// Corpus file to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

pub fn run(a: &MatchArgs) -> Result<Outcome, CliError> {
    let g = load_graph(&a.graph)?;
    let clock = match a.clock {
        ClockArg::Lisbon => Clock::Lisbon,
        ClockArg::Utc => Clock::Utc,
    };
    let parsed = parse_ttp(open(&a.ttp)?, &TtpOptions { bbox: a.bbox, window: a.window, clock }).input_at(&a.ttp)?;
    let weights = match a.weights {
        WeightArg::Squared => WeightMode::SquaredMeters,
        WeightArg::Meters => WeightMode::Meters,
    };
    if !(a.snap_radius > 0.0) {
        return Err(crate::error::usage("--snap-radius must be positive"));
    }
    let matcher = Matcher::new(&g, MatchOptions { snap_radius_m: a.snap_radius, weights }).input_at(&a.graph)?;

    let mut records: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let (mut matched, mut unmatched, mut pieces, mut short, mut splits, mut dropped_points) = (0, 0, 0, 0, 0, 0);
    for r in matcher.match_all(&parsed.trajectories) {
        match r {
            Ok(m) => {
                matched += 1;
                splits += m.splits;
                dropped_points += m.dropped_points;
                for p in m.pieces {
                    if p.len() < 2 {
                        short += 1;
                        continue;
                    }
                    pieces += 1;
                    *records.entry(p).or_insert(0) += 1;
                }
            }
            Err(IngestError::NoUsablePoints) => unmatched += 1,
            Err(e) => return Err(e).internal(),
        }
    }
    let records: Vec<(Vec<usize>, u64)> = records.into_iter().collect();
    let file = std::fs::File::create(&a.out).input_at(&a.out)?;
    write_corpus(&records, &g, std::io::BufWriter::new(file)).input_at(&a.out)?;

    let dropped: BTreeMap<String, usize> = [
        DropReason::MissingData,
        DropReason::OutsideWindow,
        DropReason::OutsideBbox,
        DropReason::TooFewPoints,
        DropReason::Malformed,
    ]
    .into_iter()
    .map(|r| (serde_json::to_value(r).unwrap().as_str().unwrap().to_string(), parsed.dropped(r)))
    .collect();
    let summary = json!({
        "rows": parsed.rows,
        "kept": parsed.trajectories.len(),
        "dropped_rows": dropped,
        "row_diagnostics": parsed.diagnostics,
        "matched": matched,
        "unmatched": unmatched,
        "pieces": pieces,
        "single_vertex_pieces": short,
        "distinct_sequences": records.len(),
        "splits": splits,
        "dropped_points": dropped_points,
        "corpus": a.out.display().to_string(),
    });
    let text = format!(
        "{} rows, {} kept, {} matched into {} pieces ({} splits, {} single-vertex pieces skipped)\nwrote {}\n",
        parsed.rows,
        parsed.trajectories.len(),
        matched,
        pieces,
        splits,
        short,
        a.out.display()
    );
    Ok(Outcome::ok(summary, text))
}
