use super::{display, load_corpus, load_graph, out_dir, write};
use crate::error::{Classify, CliError};
use crate::Outcome;
use clap::{Args, ValueEnum};
use roadmarkov::estimate::{
    collect_stats, estimate_ml, estimate_naive, estimate_wls, Diagnostic, EstimateError, PiFix, RowRepair,
    WlsOptions, DEFAULT_MIN_TRANSITIONS,
};
use roadmarkov::markov::io::{edge_table_csv, export_pi, kernel_to_string};
use roadmarkov::road_graph::RoadNetwork;
use roadmarkov::spectral::{LagrangeMethod, LagrangeOptions};
use roadmarkov::Matrix;
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Row-normalised transition counts.
    Ml,
    /// Weighted least squares with the Lagrange correction.
    Wls,
    /// Counts over the number of transitions (no kernel).
    Naive,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum LagrangeArg {
    #[default]
    Auto,
    Dense,
    FixedPoint,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum RepairArg {
    /// ML row for thin or negative WLS rows.
    #[default]
    Fallback,
    /// Clamp negative entries and renormalise.
    Clamp,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum PiFixArg {
    #[default]
    Clamp,
    Shift,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value = "wls")]
    pub method: Method,
    /// Lagrange-vector solver (WLS).
    #[arg(long, value_enum, default_value_t)]
    pub lagrange: LagrangeArg,
    /// Solver tolerance (fixed-point method).
    #[arg(long, default_value_t = LagrangeOptions::default().tol)]
    pub tol: f64,
    #[arg(long, default_value_t = LagrangeOptions::default().max_iter)]
    pub max_iter: usize,
    /// Keep only the smallest `rank − 1` non-zero modes (dense method).
    #[arg(long)]
    pub rank: Option<usize>,
    /// What to do with WLS rows that are not probability vectors.
    #[arg(long, value_enum, default_value_t)]
    pub repair: RepairArg,
    /// Fewest transitions for a WLS row to be kept (fallback repair).
    #[arg(long, default_value_t = DEFAULT_MIN_TRANSITIONS)]
    pub min_transitions: u64,
    /// Treatment of negative stationary entries.
    #[arg(long, value_enum, default_value_t)]
    pub pi_fix: PiFixArg,
    #[arg(long, default_value = ".", value_name = "DIR")]
    pub out: PathBuf,
}

impl EstimateArgs {
    fn wls_options(&self) -> WlsOptions {
        let method = match self.lagrange {
            LagrangeArg::Auto => LagrangeMethod::Auto,
            LagrangeArg::Dense => LagrangeMethod::Dense,
            LagrangeArg::FixedPoint => LagrangeMethod::FixedPoint,
        };
        WlsOptions {
            lagrange: LagrangeOptions { method, tol: self.tol, max_iter: self.max_iter, rank: self.rank },
            repair: match self.repair {
                RepairArg::Fallback => RowRepair::FallbackToMl { min_transitions: self.min_transitions },
                RepairArg::Clamp => RowRepair::ClampRenormalize,
            },
            pi_fix: match self.pi_fix {
                PiFixArg::Clamp => PiFix::Clamp,
                PiFixArg::Shift => PiFix::Shift,
            },
        }
    }
}

fn classify(e: EstimateError) -> CliError {
    match e {
        EstimateError::EmptyCorpus { .. } | EstimateError::NotStronglyConnected | EstimateError::SizeMismatch => {
            CliError::Input(e.to_string())
        }
        _ => CliError::Internal(e.to_string()),
    }
}

/// Row sum minus column sum per vertex, keyed by external id.
fn marginal_gap(m: &Matrix, g: &RoadNetwork) -> Value {
    let (r, c) = (m.row_sums(), m.col_sums());
    let gap: Vec<f64> = r.iter().zip(&c).map(|(a, b)| a - b).collect();
    json!(export_pi(&gap, g))
}

/// Diagnostics with vertex indices replaced by external ids.
fn diagnostics(d: &[Diagnostic], g: &RoadNetwork) -> Value {
    let mut v = serde_json::to_value(d).expect("serialisable diagnostics");
    for item in v.as_array_mut().unwrap() {
        if let Some(ix) = item.get("vertex").and_then(Value::as_u64) {
            item["vertex"] = json!(g.external_id(ix as usize));
        }
    }
    v
}

pub fn run(a: &EstimateArgs) -> Result<Outcome, CliError> {
    let g = load_graph(&a.graph)?;
    let corpus = load_corpus(&a.corpus, &g)?;
    let stats = collect_stats(corpus.iter(), &g);
    let rejected: Vec<Value> = stats
        .rejected()
        .iter()
        .map(|(r, c)| json!({ "reason": r, "trajectories": c }))
        .collect();
    let dir = out_dir(&a.out)?;
    let mut files = Vec::new();

    let mut report = json!({
        "method": a.method.to_possible_value().unwrap().get_name(),
        "trajectories": stats.k(),
        "positions": stats.n(),
        "transitions": stats.n() - stats.k(),
        "skipped_trajectories": stats.rejected_total(),
        "skipped": rejected,
        "unknown_ids": corpus.unknown.len(),
    });
    let headline;
    match a.method {
        Method::Naive => {
            let est = estimate_naive::<f64>(&stats).map_err(classify)?;
            files.push(write(dir.join("q.csv"), edge_table_csv(&est.q, &g))?);
            report["n_eff"] = json!(stats.n() - stats.k());
            report["marginal_gap"] = json!(export_pi(&est.marginal_gap, &g));
            report["max_marginal_gap"] = json!(est.marginal_gap.iter().fold(0.0f64, |m, x| m.max(x.abs())));
            headline = format!("naive estimate from {} transitions", stats.n() - stats.k());
        }
        Method::Ml | Method::Wls => {
            let est = if a.method == Method::Ml {
                estimate_ml::<f64>(&stats, &g)
            } else {
                estimate_wls::<f64>(&stats, &g, a.wls_options())
            }
            .map_err(classify)?;
            files.push(write(dir.join("kernel.txt"), kernel_to_string(&est.p, &g))?);
            files.push(write(dir.join("q.csv"), edge_table_csv(est.q.matrix(), &g))?);
            report["n_eff"] = json!(est.n_eff);
            report["pi"] = json!(export_pi(&est.pi, &g));
            report["diagnostics"] = diagnostics(&est.diagnostics, &g);
            if let Some(raw) = &est.wls {
                report["marginal_gap"] = marginal_gap(&raw.m_hat, &g);
                report["lagrange"] = json!({
                    "method": raw.lambda.method,
                    "residual": raw.lambda.residual,
                    "iterations": raw.lambda.iterations,
                    "lambda": export_pi(&raw.lambda.lambda, &g),
                });
                report["weight_classes"] = json!(raw
                    .weights
                    .iter()
                    .map(|w| json!({ "norm_sq": w.norm_sq, "trajectories": w.multiplicity, "weight": w.weight }))
                    .collect::<Vec<_>>());
            } else {
                report["marginal_gap"] = marginal_gap(est.q.matrix(), &g);
            }
            headline = format!(
                "{} estimate, n_eff = {}, {} diagnostics",
                if a.method == Method::Ml { "ML" } else { "WLS" },
                est.n_eff,
                est.diagnostics.len()
            );
        }
    }
    files.push(dir.join("report.json"));
    report["files"] = json!(display(&files));
    write(dir.join("report.json"), serde_json::to_string_pretty(&report).internal()?)?;

    let mut text = format!("{headline}\n");
    if stats.rejected_total() > 0 || !corpus.unknown.is_empty() {
        text += &format!(
            "skipped {} trajectories with invalid transitions, {} unknown vertex ids\n",
            stats.rejected_total(),
            corpus.unknown.len()
        );
    }
    for f in &files {
        text += &format!("wrote {}\n", f.display());
    }
    Ok(Outcome::ok(report, text))
}
