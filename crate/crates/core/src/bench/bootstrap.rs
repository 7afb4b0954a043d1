use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::comb::{correlation, sample_counts_with, JointDistribution, OutcomeFrequencies, ShotCounts};
use crate::error::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 1000;

/// One-sigma bootstrap spreads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapStd {
    /// Per input setting.
    pub correlations: Vec<f64>,
    /// Per derived quantity, in the order returned by the derivation.
    pub derived: Vec<f64>,
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Parametric bootstrap over shot counts.
///
/// Each resample redraws every setting's counts from a multinomial at its
/// empirical frequencies, recomputes the correlations and passes them to
/// `derive` for the derived quantities (criteria, distances).
pub fn bootstrap_errorbars<F>(counts: &[ShotCounts], resamples: usize, seed: u64, derive: F) -> Result<BootstrapStd>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if resamples < 100 {
        return Err(Error::OutOfRange(format!("need at least 100 resamples, got {resamples}")));
    }
    if counts.is_empty() || counts.iter().any(|c| c.shots == 0 || c.counts.iter().sum::<u64>() != c.shots) {
        return Err(Error::ZeroShots);
    }
    let empirical: Vec<JointDistribution> = counts.iter().map(|c| JointDistribution { p: c.frequencies() }).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corr_draws = vec![Vec::with_capacity(resamples); counts.len()];
    let mut derived_draws: Vec<Vec<f64>> = Vec::new();
    let mut scratch = vec![0.0; counts.len()];
    for _ in 0..resamples {
        for (i, (d, c)) in empirical.iter().zip(counts).enumerate() {
            let redraw = sample_counts_with(d, c.shots, &mut rng)?;
            scratch[i] = correlation(&redraw);
            corr_draws[i].push(scratch[i]);
        }
        let values = derive(&scratch);
        if derived_draws.is_empty() {
            derived_draws = vec![Vec::with_capacity(resamples); values.len()];
        }
        for (slot, v) in derived_draws.iter_mut().zip(values) {
            slot.push(v);
        }
    }
    Ok(BootstrapStd {
        correlations: corr_draws.iter().map(|d| sample_std(d)).collect(),
        derived: derived_draws.iter().map(|d| sample_std(d)).collect(),
    })
}
