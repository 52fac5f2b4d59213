use super::load_graph;
use super::simulate::load_kernel;
use crate::error::{usage, Classify, CliError};
use crate::Outcome;
use clap::{ArgGroup, Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roadmarkov::estimate::{benchmark_csv, benchmark_grid, BenchmarkOptions, WlsVariant};
use roadmarkov::markov::random::dirichlet_kernel;
use roadmarkov::markov::Kernel;
use roadmarkov::road_graph::random::ring_network;
use roadmarkov::road_graph::{Digraph, RoadNetwork};
use roadmarkov::toy;
use serde_json::json;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum VariantArg {
    /// Compare `M̂ / n_eff` as solved.
    #[default]
    Raw,
    /// Compare the repaired estimate (valid kernel and π).
    Repaired,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("network").required(true).args(["graph", "toy", "random_graph"])))]
pub struct BenchmarkArgs {
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// The five-vertex reference network.
    #[arg(long)]
    pub toy: bool,
    /// Random strongly connected street-like network on N vertices.
    #[arg(long, value_name = "N")]
    pub random_graph: Option<usize>,
    /// Kernel file, `dirichlet` (random rows), `uniform`, `lazy`, or `toy`.
    /// Defaults to `toy` with --toy and `dirichlet` otherwise.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Numbers of trajectories.
    #[arg(short, long, value_delimiter = ',', default_values_t = [100, 200, 500, 1000])]
    pub k: Vec<usize>,
    /// Trajectory lengths in positions.
    #[arg(short, long, value_delimiter = ',', default_values_t = [3, 5, 10])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t)]
    pub wls_variant: VariantArg,
    /// CSV output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Street-like random network: a one-way ring for strong connectivity plus
/// short links to the next two ring neighbours, each present with
/// probability 0.3 per direction (about 1.9 edges per vertex).
pub fn random_street_network(n: usize, seed: u64) -> RoadNetwork {
    ring_network(n, 2, 0.3, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Flat-Dirichlet kernel on `g`, drawn from its own stream of `seed`.
pub fn random_kernel(g: &RoadNetwork, seed: u64) -> Kernel<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    dirichlet_kernel(g, &mut rng)
}

pub fn run(a: &BenchmarkArgs) -> Result<Outcome, CliError> {
    if a.reps == 0 || a.k.contains(&0) || a.n.iter().any(|&n| n < 2) {
        return Err(usage("need --reps ≥ 1, every k ≥ 1 and every n ≥ 2"));
    }
    let g = match (&a.graph, a.toy, a.random_graph) {
        (Some(path), _, _) => load_graph(path)?,
        (_, true, _) => toy::network(),
        (_, _, Some(n)) if n >= 3 => random_street_network(n, a.seed),
        _ => return Err(usage("--random-graph needs at least 3 vertices")),
    };
    let spec = a.kernel.clone().unwrap_or_else(|| if a.toy { "toy".into() } else { "dirichlet".into() });
    let p = match spec.as_str() {
        "toy" if a.toy => toy::kernel(),
        "toy" => return Err(usage("--kernel toy needs --toy")),
        "dirichlet" => random_kernel(&g, a.seed),
        other => load_kernel(other, &g)?,
    };
    let opts = BenchmarkOptions {
        reps: a.reps,
        seed: a.seed,
        wls_variant: match a.wls_variant {
            VariantArg::Raw => WlsVariant::Raw,
            VariantArg::Repaired => WlsVariant::Repaired,
        },
        ..Default::default()
    };
    let cells = benchmark_grid(&g, &p, &a.k, &a.n, &opts).internal()?;
    let csv = benchmark_csv(&cells);
    if let Some(path) = &a.out {
        std::fs::write(path, &csv).input_at(path)?;
    }
    let summary = json!({
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "reps": a.reps,
        "seed": a.seed,
        "cells": cells.iter().map(|c| json!({
            "k": c.k,
            "n": c.n,
            "ml": { "mean": c.ml.mean, "sd": c.ml.sd },
            "wls": { "mean": c.wls.mean, "sd": c.wls.sd },
        })).collect::<Vec<_>>(),
        "out": a.out.as_ref().map(|p| p.display().to_string()),
    });
    let text = match &a.out {
        Some(path) => format!("{} cells, wrote {}\n", cells.len(), path.display()),
        None => csv,
    };
    Ok(Outcome::ok(summary, text))
}
