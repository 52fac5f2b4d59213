use super::{display, load_graph, open, out_dir};
use crate::error::{usage, Classify, CliError};
use crate::Outcome;
use clap::Args;
use roadmarkov::markov::io::read_kernel;
use roadmarkov::markov::random::lazy_uniform_kernel;
use roadmarkov::markov::{stationary, Kernel, StationaryOptions};
use roadmarkov::road_graph::{Digraph, RoadNetwork};
use roadmarkov::traffic::io::{write_chi2_row, write_counts_row, CHI2_HEADER, COUNTS_HEADER};
use roadmarkov::traffic::{chi_squared, Simulator, TrafficConfig};
use roadmarkov_ingest::osm::{read_way_names, street_groups};
use serde_json::json;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    /// Kernel file, or `uniform` / `lazy` for uniform steps along out-edges
    /// (`lazy` also allows staying put).
    #[arg(long, default_value = "uniform")]
    pub kernel: String,
    /// `uniform`, `stationary`, or `id:count,id:count,...`.
    #[arg(long, default_value = "stationary")]
    pub init: String,
    /// Number of walkers (implied by an explicit `id:count` list).
    #[arg(short, long)]
    pub k: Option<u64>,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    #[arg(long)]
    pub seed: u64,
    /// Count per street (from `build-graph`'s way_names.csv) in the
    /// chi-squared statistic instead of per vertex.
    #[arg(long, value_name = "FILE")]
    pub way_names: Option<PathBuf>,
    /// Write vertex counts every this many steps.
    #[arg(long, default_value_t = 1)]
    pub log_every: usize,
    #[arg(long, default_value = ".", value_name = "DIR")]
    pub out: PathBuf,
}

pub(crate) fn load_kernel(spec: &str, g: &RoadNetwork) -> Result<Kernel<f64>, CliError> {
    match spec {
        "uniform" => Ok(Kernel::uniform_out(g)),
        "lazy" => Ok(lazy_uniform_kernel(g)),
        path => {
            let path = Path::new(path);
            Ok(read_kernel(open(path)?, g).input_at(path)?.kernel)
        }
    }
}

fn initial(spec: &str, k: Option<u64>, pi: &[f64], g: &RoadNetwork) -> Result<TrafficConfig, CliError> {
    let need_k = || match k {
        Some(0) | None => Err(usage("-k must be a positive number of walkers")),
        Some(k) => Ok(k),
    };
    let n = g.vertex_count();
    let cfg = match spec {
        "uniform" => TrafficConfig::uniform(n, need_k()?),
        "stationary" => TrafficConfig::proportional(pi, need_k()?),
        list => {
            let mut counts = vec![0u64; n];
            for item in list.split(',') {
                let (id, c) = item
                    .split_once(':')
                    .ok_or_else(|| usage(format!("--init item {item:?} is not id:count")))?;
                let id: u64 = id.trim().parse().map_err(|_| usage(format!("bad vertex id {id:?}")))?;
                let c: u64 = c.trim().parse().map_err(|_| usage(format!("bad count {c:?}")))?;
                let v = g.index_of(id).ok_or_else(|| CliError::Input(format!("--init: unknown vertex {id}")))?;
                counts[v] += c;
            }
            let total: u64 = counts.iter().sum();
            if total == 0 {
                return Err(usage("-k must be a positive number of walkers"));
            }
            if k.is_some_and(|k| k != total) {
                return Err(usage(format!("-k {} disagrees with the --init total {total}", k.unwrap())));
            }
            TrafficConfig::new(counts)
        }
    };
    cfg.map_err(|e| usage(e.to_string()))
}

pub fn run(a: &SimulateArgs) -> Result<Outcome, CliError> {
    if a.log_every == 0 {
        return Err(usage("--log-every must be positive"));
    }
    let g = load_graph(&a.graph)?;
    let p = load_kernel(&a.kernel, &g)?;
    let pi = stationary(&p, StationaryOptions::default()).internal()?.pi;
    let init = initial(&a.init, a.k, &pi, &g)?;
    let grouping = match &a.way_names {
        Some(path) => {
            let names = read_way_names(open(path)?, &g).input_at(path)?;
            Some(street_groups(&g, &names))
        }
        None => None,
    };
    let groups = grouping.as_ref().map(|(_, gr)| gr.as_slice());

    let dir = out_dir(&a.out)?;
    let (counts_path, chi2_path) = (dir.join("counts.csv"), dir.join("chi2.csv"));
    let create = |p: &Path| std::fs::File::create(p).map(BufWriter::new).input_at(p);
    let (mut counts_out, mut chi2_out) = (create(&counts_path)?, create(&chi2_path)?);
    writeln!(counts_out, "{COUNTS_HEADER}").input_at(&counts_path)?;
    writeln!(chi2_out, "{CHI2_HEADER}").input_at(&chi2_path)?;

    let mut sim = Simulator::new(&p, &init, a.seed);
    loop {
        let step = sim.step_index();
        let counts = sim.counts();
        let x = chi_squared(&counts, &pi, groups).internal()?;
        if step.is_multiple_of(a.log_every) || step == a.steps {
            write_counts_row(&mut counts_out, step, &counts, &g).input_at(&counts_path)?;
        }
        write_chi2_row(&mut chi2_out, step, &x).input_at(&chi2_path)?;
        if step == a.steps {
            let k = init.size() as f64;
            let gap = counts.iter().zip(&pi).map(|(&c, &q)| (c as f64 / k - q).abs()).fold(0.0, f64::max);
            counts_out.flush().input_at(&counts_path)?;
            chi2_out.flush().input_at(&chi2_path)?;
            let files = display(&[counts_path, chi2_path]);
            let summary = json!({
                "walkers": init.size(),
                "steps": a.steps,
                "seed": a.seed,
                "groups": grouping.as_ref().map_or(g.vertex_count(), |(labels, _)| labels.len()),
                "final_chi2": x.statistic,
                "df": x.df,
                "final_linf_gap": gap,
                "files": files,
            });
            let text = format!(
                "{} walkers, {} steps: final chi-squared {:.3} on {} df, max |freq − π| = {:.5}\n{}\n",
                init.size(),
                a.steps,
                x.statistic,
                x.df,
                gap,
                files.iter().map(|f| format!("wrote {f}")).collect::<Vec<_>>().join("\n")
            );
            return Ok(Outcome::ok(summary, text));
        }
        sim.step();
    }
}
