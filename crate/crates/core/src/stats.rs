//! Monte Carlo aggregates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance; zero for a single observation.
    pub variance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl TrialStats {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Statistics of `c * X` given those of `X`.
    pub fn scaled(&self, c: f64) -> Self {
        let (lo, hi) = (self.ci_low * c, self.ci_high * c);
        Self {
            count: self.count,
            mean: self.mean * c,
            variance: self.variance * c * c,
            ci_low: lo.min(hi),
            ci_high: lo.max(hi),
            seed: self.seed,
        }
    }

    pub(crate) fn shifted(mut self, by: f64) -> Self {
        self.mean += by;
        self.ci_low += by;
        self.ci_high += by;
        self
    }

    /// True if `value` lies within `k` standard errors of the mean.
    pub fn within_sigmas(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error()
    }
}

/// Mean, sample variance and a 95% normal-approximation confidence interval.
pub fn trial_stats(values: &[f64]) -> Result<TrialStats> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = values.len() as f64;
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let variance = if values.len() > 1 { m2 / (n - 1.0) } else { 0.0 };
    let half = Z_95 * (variance / n).sqrt();
    Ok(TrialStats {
        count: values.len(),
        mean,
        variance,
        ci_low: mean - half,
        ci_high: mean + half,
        seed: None,
    })
}

pub(crate) fn trial_stats_usize(values: &[usize]) -> Result<TrialStats> {
    let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
    trial_stats(&v)
}
