use super::{load_corpus, load_graph, write};
use crate::error::CliError;
use crate::Outcome;
use clap::Args;
use roadmarkov::estimate::collect_stats;
use roadmarkov_ingest::stats::{length_histogram_csv, Summary};
use roadmarkov_ingest::corpus_stats;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Write a `points,count` histogram of trajectory lengths.
    #[arg(long, value_name = "FILE")]
    pub histogram: Option<PathBuf>,
}

fn line(label: &str, s: &Option<Summary>) -> String {
    match s {
        Some(s) => format!(
            "{label}: mean {:.2}, median {}, mode {}, sd {:.2}, min {}, max {}\n",
            s.mean, s.median, s.mode, s.sd, s.min, s.max
        ),
        None => format!("{label}: undefined\n"),
    }
}

pub fn run(a: &StatsArgs) -> Result<Outcome, CliError> {
    let g = load_graph(&a.graph)?;
    let corpus = load_corpus(&a.corpus, &g)?;
    let st = corpus_stats(&corpus.records, &g);
    let suff = collect_stats(corpus.iter(), &g);
    if let Some(path) = &a.histogram {
        write(path.clone(), length_histogram_csv(&corpus.records))?;
    }
    let summary = json!({
        "lengths": st,
        "positions": suff.n(),
        "transitions": suff.n() - suff.k(),
        "invalid_trajectories": suff.rejected_total(),
        "unknown_ids": corpus.unknown.len(),
        "s_minus_e_abs_sum": suff.s_minus_e().iter().map(|x| x.unsigned_abs()).sum::<u64>(),
    });
    let mut text = format!("{} trajectories\n", st.trajectories);
    text += &line("points", &st.points);
    text += &line("meters", &st.meters);
    Ok(Outcome::ok(summary, text))
}
