//! Seeded Monte Carlo estimate of the receiver's error probability.
//!
//! Each trial draws the `M`-mode total count difference from its Gaussian law
//! `Normal(Mμᵢ, Mσᵢ²)` under both hypotheses and applies the decision
//! threshold. Per-mode counts are not sampled individually, so this checks
//! the threshold and error formula, not the central-limit approximation
//! itself.
//!
//! Trials are split into fixed-size shards; shard `k` draws from ChaCha
//! stream `k` of the seed, so results do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result};
use crate::illumination::{detection_report, ScenarioParams};

/// Trials per shard (and per random stream).
pub const SHARD_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SamplingMode {
    /// Sample the M-mode totals from their Gaussian limit.
    #[default]
    GaussianTotals,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub params: ScenarioParams,
    /// Decision trials per hypothesis.
    pub trials: u64,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl TrialConfig {
    pub fn new(params: ScenarioParams, trials: u64, seed: u64) -> Result<Self> {
        params.validate()?;
        check_range("trials", trials as f64, trials >= 1, "at least 1")?;
        Ok(TrialConfig {
            params,
            trials,
            seed,
            mode: SamplingMode::GaussianTotals,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorEstimate {
    /// `(misses + false_alarms) / (2·trials)`.
    pub p_error: f64,
    /// Binomial standard error of `p_error`.
    pub std_error: f64,
    pub false_alarms: u64,
    pub misses: u64,
    pub trials: u64,
    pub threshold: f64,
    pub analytic_p_error: f64,
}

impl ErrorEstimate {
    /// Deviation from the analytic value in units of the standard error.
    pub fn z_score(&self) -> f64 {
        (self.p_error - self.analytic_p_error) / self.std_error
    }
}

pub fn estimate_error_probability(cfg: &TrialConfig) -> Result<ErrorEstimate> {
    let report = detection_report(&cfg.params)?;
    let m = cfg.params.modes as f64;
    let (mean0, mean1) = (m * report.h0.mean, m * report.h1.mean);
    let (sd0, sd1) = (
        m.sqrt() * report.h0.std_dev(),
        m.sqrt() * report.h1.std_dev(),
    );
    let threshold = report.threshold;

    let shards = cfg.trials.div_ceil(SHARD_TRIALS);
    let (false_alarms, misses) = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(shard);
            let n = SHARD_TRIALS.min(cfg.trials - shard * SHARD_TRIALS);
            let (mut fa, mut miss) = (0u64, 0u64);
            for _ in 0..n {
                let z0: f64 = rng.sample(StandardNormal);
                let z1: f64 = rng.sample(StandardNormal);
                if mean0 + sd0 * z0 > threshold {
                    fa += 1;
                }
                if mean1 + sd1 * z1 <= threshold {
                    miss += 1;
                }
            }
            (fa, miss)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let draws = 2.0 * cfg.trials as f64;
    let p_error = (false_alarms + misses) as f64 / draws;
    Ok(ErrorEstimate {
        p_error,
        std_error: (p_error * (1.0 - p_error) / draws).sqrt(),
        false_alarms,
        misses,
        trials: cfg.trials,
        threshold,
        analytic_p_error: report.p_error,
    })
}
