//! Deterministic weight-drop checks, attached to runs as observers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mathcore::NoiseParams;
use crate::oracle::{linear_answer, NoisePolicy};
use crate::transcript::{EpochBoundary, SearchObserver, StepEvent};
use crate::weights::WeightState;

use super::stats::RunsTest;

/// Slack for absolute log2-weight comparisons.
pub const LOG2_TOLERANCE: f64 = 1e-6;
/// Slack for the per-step halving check.
pub const STEP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantKind {
    /// `w_t(V \ {x_t}) <= 2^-t` for the heaviest vertex `x_t`.
    ExcludingHeaviest,
    /// No heavy vertex: the total weight at least halves.
    NoHeavyHalving,
    /// A heavy interval of length `k` that ended dropped the total by `2^-k`.
    HeavyIntervalEnded,
    /// A heavy interval of length `k` still running dropped the weight
    /// outside the heavy vertex by `2^-k`.
    HeavyIntervalOngoing,
    /// A strictly heavy vertex was not the queried median.
    HeavyIsMedian,
    /// Unmarked weight exceeded the coupled bound at an epoch boundary.
    CoupledBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: InvariantKind,
    pub step: u64,
    /// The side that should be smaller.
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeavyInterval {
    vertex: usize,
    start: u64,
    log2_total_at_start: f64,
}

/// Checks the graph-search weight-drop invariants after every step. Assumes
/// the run starts from total mass one.
#[derive(Debug, Default)]
pub struct GraphInvariantChecker {
    interval: Option<HeavyInterval>,
    pub steps_checked: u64,
    pub violations: Vec<Violation>,
}

impl GraphInvariantChecker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, kind: InvariantKind, step: u64, lhs: f64, rhs: f64, tol: f64) {
        if lhs > rhs + tol {
            self.violations.push(Violation { kind, step, lhs, rhs });
        }
    }

    fn check_excluding_heaviest(&mut self, w: &WeightState) {
        let x = w.heaviest();
        let lhs = w.absolute_log2_weight_excluding(x);
        self.check(InvariantKind::ExcludingHeaviest, w.step(), lhs, -(w.step() as f64), LOG2_TOLERANCE);
    }
}

/// The heavy vertex the bounds refer to: the queried vertex if it is heavy,
/// else the heaviest vertex if that is heavy.
fn heavy_vertex(w: &WeightState, query: usize) -> Option<usize> {
    if w.is_heavy(query, 0.5) {
        return Some(query);
    }
    let x = w.heaviest();
    w.is_heavy(x, 0.5).then_some(x)
}

impl SearchObserver for GraphInvariantChecker {
    fn on_step(&mut self, e: &StepEvent<'_>) {
        let (before, after) = (e.before, e.after);
        if before.step() == 0 {
            self.check_excluding_heaviest(before);
        }
        let t = after.step();
        self.steps_checked += 1;
        self.check_excluding_heaviest(after);

        let heaviest = before.heaviest();
        if before.weight(heaviest) > 0.5 + 1e-12 && heaviest != e.query {
            self.violations.push(Violation {
                kind: InvariantKind::HeavyIsMedian,
                step: t,
                lhs: before.weight(heaviest),
                rhs: 0.5,
            });
        }

        match heavy_vertex(before, e.query) {
            None => {
                self.interval = None;
                self.check(
                    InvariantKind::NoHeavyHalving,
                    t,
                    after.log2_total(),
                    before.log2_total() - 1.0,
                    STEP_TOLERANCE,
                );
            }
            Some(x) => {
                let interval = match self.interval {
                    Some(iv) if iv.vertex == x => iv,
                    _ => HeavyInterval {
                        vertex: x,
                        start: before.step(),
                        log2_total_at_start: before.log2_total(),
                    },
                };
                let k = (t - interval.start) as f64;
                let rhs = interval.log2_total_at_start - k;
                if after.is_heavy(x, 0.5) {
                    self.check(
                        InvariantKind::HeavyIntervalOngoing,
                        t,
                        after.absolute_log2_weight_excluding(x),
                        rhs,
                        LOG2_TOLERANCE,
                    );
                    self.interval = Some(interval);
                } else {
                    self.check(InvariantKind::HeavyIntervalEnded, t, after.log2_total(), rhs, LOG2_TOLERANCE);
                    self.interval = None;
                }
            }
        }
    }
}

/// Checks that unmarked weight never exceeds the coupled bound at epoch
/// boundaries.
#[derive(Debug, Default)]
pub struct CoupledBoundChecker {
    pub boundaries_checked: u64,
    pub violations: Vec<Violation>,
}

impl CoupledBoundChecker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl SearchObserver for CoupledBoundChecker {
    fn on_epoch_end(&mut self, b: &EpochBoundary, _weights: &WeightState, _marked: &[bool]) {
        self.boundaries_checked += 1;
        if b.log2_unmarked > b.coupled_log2 + LOG2_TOLERANCE {
            self.violations.push(Violation {
                kind: InvariantKind::CoupledBound,
                step: b.step,
                lhs: b.log2_unmarked,
                rhs: b.coupled_log2,
            });
        }
    }
}

/// Lower bound on the log2 absolute weight of the target after `tau`
/// queries that holds with probability at least `1 - delta`:
/// `-log2 n - sqrt(tau/2 ln 1/delta) log2 Gamma - H(p) tau`.
pub fn target_weight_floor(n: usize, tau: u64, noise: &NoiseParams, delta: f64) -> f64 {
    let tau = tau as f64;
    -(n as f64).log2() - (tau / 2.0 * (1.0 / delta).ln()).sqrt() * noise.log2_gamma() - noise.entropy() * tau
}

/// Empirical behaviour of the comparison noise channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub draws: u64,
    pub lie_rate: f64,
    /// Distance of the lie rate from `p` in binomial standard deviations.
    pub sigmas: f64,
    pub runs: RunsTest,
}

impl ChannelStats {
    pub fn within_three_sigma(&self) -> bool {
        self.sigmas.abs() <= 3.0
    }
}

/// Draws `draws` comparison replies with random targets and pivots and
/// measures the lie indicator sequence.
pub fn noise_channel_stats(noise: &NoiseParams, draws: u64, seed: u64) -> ChannelStats {
    let policy = NoisePolicy::new(*noise);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lies: Vec<bool> = (0..draws)
        .map(|_| {
            let target = rng.random_range(0..1024);
            let q = rng.random_range(0..1024);
            linear_answer(q, target, &policy, &mut rng).is_lie
        })
        .collect();
    let count = lies.iter().filter(|&&l| l).count() as f64;
    let n = draws as f64;
    let p = noise.p();
    ChannelStats {
        draws,
        lie_rate: count / n,
        sigmas: (count / n - p) / (p * (1.0 - p) / n).sqrt(),
        runs: RunsTest::new(&lies),
    }
}
