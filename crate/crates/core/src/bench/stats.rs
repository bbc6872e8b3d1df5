//! Paired significance test and bootstrap intervals over base-level
//! correctness bits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("no discordant pairs: the two methods agree on every case")]
    NoDiscordantPairs,
    #[error("empty sample")]
    EmptySample,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemar {
    /// a correct, b wrong
    pub b: usize,
    /// a wrong, b correct
    pub c: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Continuity-corrected McNemar test on discordant counts.
pub fn mcnemar_counts(b: usize, c: usize) -> Result<McNemar, StatsError> {
    if b + c == 0 {
        return Err(StatsError::NoDiscordantPairs);
    }
    let diff = (b as f64 - c as f64).abs();
    // unclamped: b == c gives 1/(b+c), not zero
    let statistic = (diff - 1.0).powi(2) / (b + c) as f64;
    let chi2 = ChiSquared::new(1.0).expect("one degree of freedom");
    Ok(McNemar {
        b,
        c,
        statistic,
        p_value: chi2.sf(statistic),
    })
}

pub fn mcnemar(paired: &[(bool, bool)]) -> Result<McNemar, StatsError> {
    let b = paired.iter().filter(|(a, b)| *a && !*b).count();
    let c = paired.iter().filter(|(a, b)| !*a && *b).count();
    mcnemar_counts(b, c)
}

pub const DEFAULT_TRIALS: usize = 2000;
pub const DEFAULT_LEVEL: f64 = 0.95;

/// Percentile bootstrap interval for the mean of `bits`.
pub fn bootstrap_ci(bits: &[bool], trials: usize, level: f64, seed: u64) -> Result<(f64, f64), StatsError> {
    if bits.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if trials < 1000 {
        return Err(StatsError::InvalidParameter(format!("trials must be >= 1000, got {trials}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidParameter(format!("level must be in (0, 1), got {level}")));
    }
    let n = bits.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..trials)
        .map(|_| (0..n).filter(|_| bits[rng.gen_range(0..n)]).count() as f64 / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let at = |q: f64| means[((trials - 1) as f64 * q).round() as usize];
    Ok((at(tail), at(1.0 - tail)))
}
