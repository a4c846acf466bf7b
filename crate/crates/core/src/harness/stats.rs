use serde::{Deserialize, Serialize};

use super::config::Scenario;

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959963984540054;
/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.5758293035489004;

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    // the exact endpoints at 0 and n successes; the formula only rounds to them
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Wald-Wolfowitz runs test on a binary sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunsTest {
    pub runs: u64,
    pub ones: u64,
    pub zeros: u64,
    pub z: f64,
}

impl RunsTest {
    pub fn new(bits: &[bool]) -> Self {
        let ones = bits.iter().filter(|&&b| b).count() as u64;
        let zeros = bits.len() as u64 - ones;
        let runs = if bits.is_empty() {
            0
        } else {
            1 + bits.windows(2).filter(|w| w[0] != w[1]).count() as u64
        };
        let (n1, n2) = (ones as f64, zeros as f64);
        let total = n1 + n2;
        let z = if ones == 0 || zeros == 0 {
            0.0
        } else {
            let mu = 2.0 * n1 * n2 / total + 1.0;
            let var = (mu - 1.0) * (mu - 2.0) / (total - 1.0);
            (runs as f64 - mu) / var.sqrt()
        };
        RunsTest { runs, ones, zeros, z }
    }

    /// No evidence against independence at two-sided level 0.01.
    pub fn passes_at_1_percent(&self) -> bool {
        self.z.abs() <= Z_99
    }
}

/// One row of experiment results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub scenario: Scenario,
    pub n: usize,
    pub p: f64,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub mean_queries: f64,
    pub std_queries: f64,
    pub max_queries: u64,
    pub error_rate: f64,
    pub error_ci_low: f64,
    pub error_ci_high: f64,
    pub theoretical_bound: f64,
    pub bound_satisfied: bool,
    pub flagged_trials: u64,
}

impl SummaryStats {
    /// Standard error of `mean_queries`.
    pub fn mean_standard_error(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.std_queries / (self.trials as f64).sqrt()
        }
    }
}
