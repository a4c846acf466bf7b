//! Closed-form quantities shared by every strategy: entropies, the
//! information rate of a noisy channel, fixed-budget query counts, epoch
//! lengths for binary search and the quadratic threshold solver used to seed
//! the budget scans.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default for the constant bounding the product of per-epoch excess factors
/// in the binary-search budget.
pub const DEFAULT_C_CONST: f64 = 4.0;

/// Default divisor in the rescaled confidence of adversarial Las Vegas graph search.
pub const DEFAULT_C_PRIME: f64 = 64.0;

/// Tolerance used when validating that masses sum to one.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// The per-answer error rate `p` together with the quantities derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseParams {
    p: f64,
    epsilon: f64,
    gamma: f64,
    info_rate: f64,
}

impl NoiseParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::domain(format!(
                "noise parameter must satisfy 0 < p < 1/2, got {p}"
            )));
        }
        Ok(NoiseParams {
            p,
            epsilon: 0.5 - p,
            gamma: (1.0 - p) / p,
            info_rate: 1.0 - entropy_unchecked(p),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `1/2 - p`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `(1 - p) / p`, the likelihood ratio of a truthful answer.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn log2_gamma(&self) -> f64 {
        self.gamma.log2()
    }

    /// Bits learned per query, `1 - H(p)`.
    pub fn info_rate(&self) -> f64 {
        self.info_rate
    }

    /// `H(p)`.
    pub fn entropy(&self) -> f64 {
        1.0 - self.info_rate
    }
}

impl TryFrom<f64> for NoiseParams {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        NoiseParams::new(p)
    }
}

impl From<NoiseParams> for f64 {
    fn from(noise: NoiseParams) -> f64 {
        noise.p
    }
}

/// A probability mass function over element ids `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    masses: Vec<f64>,
}

impl Distribution {
    /// Validates that `masses` is nonnegative and sums to one within [`MASS_TOLERANCE`].
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::domain("distribution has no elements"));
        }
        if let Some((i, m)) = masses
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m >= 0.0))
        {
            return Err(Error::domain(format!("mass of element {i} is {m}")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::domain(format!("masses sum to {total}, expected 1")));
        }
        Ok(Distribution { masses })
    }

    /// Scales nonnegative `masses` to sum to one.
    pub fn normalized(masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::domain(format!(
                "cannot normalize masses with total {total}"
            )));
        }
        Distribution::new(masses.into_iter().map(|m| m / total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("uniform distribution over zero elements"));
        }
        Ok(Distribution {
            masses: vec![1.0 / n as f64; n],
        })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, v: usize) -> f64 {
        self.masses[v]
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

fn entropy_unchecked(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Binary entropy `H(p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability out of range: {p}")));
    }
    Ok(entropy_unchecked(p))
}

/// Information rate `I(p) = 1 - H(p)` of a channel that errs with probability `p`.
pub fn info_rate(p: f64) -> Result<f64> {
    NoiseParams::new(p).map(|noise| noise.info_rate())
}

/// Shannon entropy of `mu` in bits.
pub fn dist_entropy(mu: &Distribution) -> f64 {
    mu.masses()
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| -m * m.log2())
        .sum()
}

/// `sum mu(x) log2 log2 (1/mu(x))`, with terms whose inner logarithm is at
/// most one contributing zero.
pub fn dist_entropy2(mu: &Distribution) -> f64 {
    mu.masses()
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| {
            let inner = -m.log2();
            if inner <= 1.0 {
                0.0
            } else {
                m * inner.log2()
            }
        })
        .sum()
}

/// The positive root of `a x = b + c sqrt(x)`.
pub fn solve_quadratic_threshold(a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain(format!("leading coefficient must be positive, got {a}")));
    }
    if !(b >= 0.0 && c >= 0.0) {
        return Err(Error::domain(format!(
            "coefficients must be nonnegative, got b = {b}, c = {c}"
        )));
    }
    let c2 = c * c;
    Ok((2.0 * a * b + c2 + (c2 * c2 + 4.0 * a * b * c2).sqrt()) / (2.0 * a * a))
}

/// A fixed query budget and the margin by which it satisfies its defining inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetResult {
    pub q: u64,
    pub slack: f64,
}

/// Smallest `q >= 1` with `a q - c sqrt(q) - b` nonnegative (or positive when
/// `strict`). Warm-started at the real root, then walked to the exact minimum.
pub(crate) fn minimal_budget(a: f64, b: f64, c: f64, strict: bool) -> Result<BudgetResult> {
    let slack = |q: u64| a * q as f64 - c * (q as f64).sqrt() - b;
    let holds = |q: u64| {
        let s = slack(q);
        if strict {
            s > 0.0
        } else {
            s >= 0.0
        }
    };
    let root = solve_quadratic_threshold(a, b, c)?;
    if !root.is_finite() || root > 1e15 {
        return Err(Error::domain(format!("budget is unbounded (root {root})")));
    }
    let mut q = (root.floor() as u64).max(1);
    if holds(q) {
        while q > 1 && holds(q - 1) {
            q -= 1;
        }
    } else {
        while !holds(q) {
            q += 1;
        }
    }
    Ok(BudgetResult { q, slack: slack(q) })
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::domain(format!(
            "confidence threshold must satisfy 0 < delta < 1/2, got {delta}"
        )));
    }
    Ok(())
}

/// Smallest `Q` with `I(p) Q >= log2 n + sqrt(Q/2 ln(1/delta)) log2 Gamma`.
pub fn worst_case_budget_graph(n: usize, noise: &NoiseParams, delta: f64) -> Result<BudgetResult> {
    if n == 0 {
        return Err(Error::domain("search space is empty"));
    }
    check_delta(delta)?;
    let c = noise.log2_gamma() * (0.5 * (1.0 / delta).ln()).sqrt();
    minimal_budget(noise.info_rate(), (n as f64).log2(), c, false)
}

/// Smallest `Q` with
/// `I(p) Q > sqrt(Q/2 ln(3/delta)) log2 Gamma + log2 n + log2(3 C / delta)`.
pub fn worst_case_budget_linear(
    n: usize,
    noise: &NoiseParams,
    delta: f64,
    c_const: f64,
) -> Result<BudgetResult> {
    if n == 0 {
        return Err(Error::domain("search space is empty"));
    }
    check_delta(delta)?;
    if !(c_const >= 1.0) {
        return Err(Error::domain(format!("c_const must be at least 1, got {c_const}")));
    }
    let c = noise.log2_gamma() * (0.5 * (3.0 / delta).ln()).sqrt();
    let b = (n as f64).log2() + (3.0 * c_const / delta).log2();
    minimal_budget(noise.info_rate(), b, c, true)
}

/// Length of the `i`-th epoch (1-based): `ceil(max(eps^-2 i^(-2/3) / 16, 1))`.
pub fn epoch_length(i: u64, noise: &NoiseParams) -> u64 {
    assert!(i >= 1, "epochs are numbered from 1");
    let eps = noise.epsilon();
    let raw = (i as f64).powf(-2.0 / 3.0) / (16.0 * eps * eps);
    // absorb rounding noise so exact integers are not bumped up
    let len = (raw - 1e-9).ceil();
    if len < 1.0 {
        1
    } else {
        len as u64
    }
}

/// Expected-length ceiling of Las Vegas graph search for a target of prior
/// mass `mass`: `(log2 1/mass + log2 1/delta + 1) / I(p)`.
pub fn lv_graph_ceiling(mass: f64, delta: f64, noise: &NoiseParams) -> f64 {
    (-mass.log2() + (1.0 / delta).log2() + 1.0) / noise.info_rate()
}

/// Rescaled confidence for adversarial Las Vegas graph search:
/// `min(1/3, delta^2 / (c' (log2 n + log2 1/delta)^2))`.
pub fn rescaled_confidence(n: usize, delta: f64, c_prime: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(c_prime >= 1.0) {
        return Err(Error::domain(format!("c_prime must be at least 1, got {c_prime}")));
    }
    let scale = (n.max(1) as f64).log2() + (1.0 / delta).log2();
    Ok((delta * delta / (c_prime * scale * scale)).min(1.0 / 3.0))
}

/// Additive constant in the expected length of phase one of Las Vegas binary
/// search: the overshoot bound of the progress measure (3 bits) plus `log2 C`.
pub fn linear_phase_one_constant(c_const: f64) -> f64 {
    3.0 + c_const.log2()
}

/// `log2(((1-p)^x p^y + (1-p)^y p^x) / 2)`, the per-epoch factor of the
/// coupled unmarked-mass bound after `x` "less" and `y` "greater" answers.
pub fn coupled_epoch_log2_factor(x: u64, y: u64, noise: &NoiseParams) -> f64 {
    let (lt, lf) = ((1.0 - noise.p()).log2(), noise.p().log2());
    let a = x as f64 * lt + y as f64 * lf;
    let b = y as f64 * lt + x as f64 * lf;
    let hi = a.max(b);
    hi + (1.0 + (a.min(b) - hi).exp2()).log2() - 1.0
}

/// Expected coupled-bound factor over an epoch of length `k`:
/// `2^(-k-1) ((1 - 4 eps^2)^k + (1 + 4 eps^2)^k)`.
pub fn expected_epoch_factor(k: u64, epsilon: f64) -> f64 {
    let e2 = 4.0 * epsilon * epsilon;
    let k = k as i32;
    0.5f64.powi(k + 1) * ((1.0 - e2).powi(k) + (1.0 + e2).powi(k))
}
