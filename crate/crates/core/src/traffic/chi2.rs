use super::TrafficError;
use crate::scalar::Scalar;

/// Pearson statistic and its degrees of freedom (used groups − 1).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ChiSquared {
    pub statistic: f64,
    pub df: usize,
}

/// `X² = Σ_g (O_g − kπ_g)² / (kπ_g)` over groups (each vertex its own group
/// unless `grouping` maps vertices to group labels `0..G`). Groups with
/// neither mass nor observations are skipped.
pub fn chi_squared<T: Scalar>(observed: &[u64], pi: &[T], grouping: Option<&[usize]>) -> Result<ChiSquared, TrafficError> {
    if observed.len() != pi.len() {
        return Err(TrafficError::LengthMismatch { expected: pi.len(), got: observed.len() });
    }
    let k: u64 = observed.iter().sum();
    if k == 0 {
        return Err(TrafficError::EmptyConfig);
    }
    let groups = grouping.map_or(observed.len(), |g| g.iter().copied().max().map_or(0, |m| m + 1));
    let mut obs = vec![0u64; groups];
    let mut mass = vec![0.0f64; groups];
    for v in 0..observed.len() {
        let g = grouping.map_or(v, |m| m[v]);
        obs[g] += observed[v];
        mass[g] += pi[v].as_f64();
    }
    let mut stat = 0.0;
    let mut used = 0usize;
    for g in 0..groups {
        if mass[g] <= 0.0 {
            if obs[g] > 0 {
                return Err(TrafficError::OutOfSupport(g));
            }
            continue;
        }
        let expected = k as f64 * mass[g];
        let d = obs[g] as f64 - expected;
        stat += d * d / expected;
        used += 1;
    }
    Ok(ChiSquared { statistic: stat, df: used.saturating_sub(1) })
}
