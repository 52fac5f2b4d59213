use crate::error::CliError;
use crate::toy_checks::run_checks;
use crate::Outcome;
use clap::Args;
use serde_json::json;
use std::time::Instant;

#[derive(Debug, Args)]
pub struct ToyArgs {
    /// Shift one computed value before comparison (test hook).
    #[arg(long, value_name = "CHECK", hide = true)]
    pub perturb: Option<String>,
}

pub fn run(a: &ToyArgs) -> Result<Outcome, CliError> {
    let t = Instant::now();
    let checks = run_checks(a.perturb.as_deref())?;
    let elapsed = t.elapsed().as_secs_f64();
    let failed = checks.iter().filter(|c| !c.passed).count();
    let mut text = String::new();
    for c in &checks {
        text += &format!(
            "{} {:<24} {:<32} max error {:.2e} (tolerance {:.0e})\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.what,
            c.max_error,
            c.tolerance
        );
    }
    text += &format!("{} of {} checks passed in {:.3} s\n", checks.len() - failed, checks.len(), elapsed);
    let summary = json!({ "passed": failed == 0, "seconds": elapsed, "checks": checks });
    let failure = (failed > 0).then_some(CliError::ChecksFailed { failed, total: checks.len() });
    Ok(Outcome { summary, text, failure })
}
