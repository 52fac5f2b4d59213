//! Plot-ready CSV output for simulation runs.
//!
//! - vertex counts: `step,vertex,count` with zero counts omitted;
//! - chi-squared series: `step,statistic,df`.

use super::ChiSquared;
use crate::road_graph::RoadNetwork;
use std::io::Write;

pub const COUNTS_HEADER: &str = "step,vertex,count";
pub const CHI2_HEADER: &str = "step,statistic,df";

pub fn write_counts_row<W: Write>(w: &mut W, step: usize, counts: &[u64], g: &RoadNetwork) -> std::io::Result<()> {
    for (v, &c) in counts.iter().enumerate() {
        if c > 0 {
            writeln!(w, "{step},{},{c}", g.external_id(v))?;
        }
    }
    Ok(())
}

pub fn write_chi2_row<W: Write>(w: &mut W, step: usize, x: &ChiSquared) -> std::io::Result<()> {
    writeln!(w, "{step},{:?},{}", x.statistic, x.df)
}
