//! Query-count ceilings per scenario, computed from closed forms only.

use crate::error::Result;
use crate::linear_search::lv_phase_one_ceiling;
use crate::mathcore::{
    linear_phase_one_constant, lv_graph_ceiling, rescaled_confidence, worst_case_budget_graph,
    worst_case_budget_linear, Distribution, NoiseParams,
};

/// Exact length of the fixed-budget graph strategy.
pub fn graph_adversarial(n: usize, noise: &NoiseParams, delta: f64) -> Result<u64> {
    Ok(worst_case_budget_graph(n, noise, delta)?.q)
}

/// Expected-length ceiling of Las Vegas graph search for a target of prior
/// mass `mass`.
pub fn graph_lv(mass: f64, noise: &NoiseParams, delta: f64) -> f64 {
    lv_graph_ceiling(mass, delta, noise)
}

/// Ceiling of adversarial Las Vegas graph search: the Las Vegas ceiling at
/// the rescaled confidence, for uniform mass `1/n`.
pub fn graph_lv_adversarial(n: usize, noise: &NoiseParams, delta: f64, c_prime: f64) -> Result<f64> {
    let inner = rescaled_confidence(n, delta, c_prime)?;
    Ok(lv_graph_ceiling(1.0 / n as f64, inner, noise))
}

/// Expected-length ceiling of the candidate verifier over `m` candidates.
pub fn verifier(m: usize, noise: &NoiseParams, delta: f64) -> f64 {
    ((m.max(1) as f64).log2() + (1.0 / delta).log2() + 1.0) / noise.info_rate()
}

/// Phase-one budget of fixed-budget binary search (0 for a single element).
pub fn bin_adversarial_budget(n: usize, noise: &NoiseParams, delta: f64, c_const: f64) -> Result<u64> {
    if n < 2 {
        return Ok(0);
    }
    Ok(worst_case_budget_linear(n, noise, delta, c_const)?.q)
}

/// Fixed-budget binary search: phase-one budget plus the verifier ceiling
/// over at most `min(Q, n)` candidates at confidence `delta / 3`.
pub fn bin_adversarial(n: usize, noise: &NoiseParams, delta: f64, c_const: f64) -> Result<f64> {
    if n < 2 {
        return Ok(0.0);
    }
    let q = bin_adversarial_budget(n, noise, delta, c_const)?;
    let m = (q as usize).min(n);
    Ok(q as f64 + verifier(m, noise, delta / 3.0))
}

/// Additive constant `K` of the Las Vegas binary-search ceiling
/// `(log2 1/mass + log2 1/delta + K) / I(p)`: phase one contributes
/// `3 + log2 C`, the verifier at `delta/2` over at most as many candidates
/// as phase-one queries contributes `2 + log2 1/delta + log2(phase-one ceiling)`.
pub fn bin_lv_constant(mass: f64, noise: &NoiseParams, delta: f64, c_const: f64) -> f64 {
    let phase_one = lv_phase_one_ceiling(mass, delta, noise, c_const);
    linear_phase_one_constant(c_const) + 2.0 + (1.0 / delta).log2() + phase_one.max(1.0).log2()
}

/// Expected total-length ceiling of Las Vegas binary search for a target of
/// prior mass `mass`.
pub fn bin_lv(mass: f64, noise: &NoiseParams, delta: f64, c_const: f64) -> f64 {
    let k = bin_lv_constant(mass, noise, delta, c_const);
    (-mass.log2() + (1.0 / delta).log2() + k) / noise.info_rate()
}

/// Ceiling of the shifted Las Vegas binary search: the Las Vegas ceiling for
/// the uniform prior over the doubled domain at confidence `delta / 2`.
pub fn bin_lv_adversarial(n: usize, noise: &NoiseParams, delta: f64, c_const: f64) -> f64 {
    bin_lv(1.0 / (2 * n) as f64, noise, delta / 2.0, c_const)
}

/// `sum_v mu(v) f(mu(v))` over the support of `mu`: the ceiling for a target
/// drawn from `mu`.
pub fn expected_over_prior(mu: &Distribution, f: impl Fn(f64) -> f64) -> f64 {
    mu.masses().iter().filter(|&&m| m > 0.0).map(|&m| m * f(m)).sum()
}
