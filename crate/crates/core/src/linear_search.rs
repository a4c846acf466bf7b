//! Noisy binary search over `0..n` with comparison queries.
//!
//! Phase one queries a central pivot for a whole epoch, then marks it. The
//! marked pivots become candidates for a second, verifying search.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph_search::LV_CAP_FACTOR;
use crate::mathcore::{
    coupled_epoch_log2_factor, epoch_length, linear_phase_one_constant, worst_case_budget_linear,
    Distribution, NoiseParams,
};
use crate::oracle::{AnswerKind, ComparisonResponder};
use crate::transcript::{EpochBoundary, LinearPhaseInfo, SearchObserver, SearchTranscript, StepEvent};
use crate::weights::{WeightState, MASS_FLOOR};

/// Phase-one bookkeeping: the marked set, the epoch in progress and the
/// coupled bound on unmarked mass.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochState {
    marked: Vec<bool>,
    order: Vec<usize>,
    epoch_index: u64,
    within_epoch: u64,
    current_pivot: Option<usize>,
    coupled_log2: f64,
    less: u64,
    greater: u64,
    completed: u64,
}

impl EpochState {
    pub fn new(n: usize) -> Self {
        EpochState {
            marked: vec![false; n],
            order: Vec::new(),
            epoch_index: 1,
            within_epoch: 0,
            current_pivot: None,
            coupled_log2: 0.0,
            less: 0,
            greater: 0,
            completed: 0,
        }
    }

    pub fn marked(&self) -> &[bool] {
        &self.marked
    }

    /// Marked elements in the order they were marked.
    pub fn marked_elements(&self) -> &[usize] {
        &self.order
    }

    pub fn is_marked(&self, v: usize) -> bool {
        self.marked[v]
    }

    pub fn all_marked(&self) -> bool {
        self.order.len() == self.marked.len()
    }

    /// 1-based index of the epoch in progress, or of the next one.
    pub fn epoch_index(&self) -> u64 {
        self.epoch_index
    }

    pub fn within_epoch(&self) -> u64 {
        self.within_epoch
    }

    pub fn current_pivot(&self) -> Option<usize> {
        self.current_pivot
    }

    pub fn coupled_log2(&self) -> f64 {
        self.coupled_log2
    }

    /// Less / greater answers received in the epoch in progress.
    pub fn counts(&self) -> (u64, u64) {
        (self.less, self.greater)
    }

    /// Epochs that ran to their scheduled length.
    pub fn completed_epochs(&self) -> u64 {
        self.completed
    }

    /// Relative weight of the marked set.
    pub fn marked_mass(&self, w: &WeightState) -> f64 {
        w.mass(self.order.iter().copied())
    }
}

/// Smallest unmarked element `q` whose unmarked mass strictly left and
/// strictly right of it are each at most half the unmarked total.
pub fn central_element(state: &WeightState, marked: &[bool]) -> Result<usize> {
    let w = state.relative();
    if marked.len() != w.len() {
        return Err(Error::Structural(format!(
            "marked set over {} elements, weights over {}",
            marked.len(),
            w.len()
        )));
    }
    let total: f64 = w.iter().zip(marked).filter(|(_, &m)| !m).map(|(x, _)| x).sum();
    let first = marked
        .iter()
        .position(|&m| !m)
        .ok_or_else(|| Error::Structural("every element is marked; no central element".into()))?;
    let half = 0.5 * total * (1.0 + 1e-12);
    let mut prefix = 0.0;
    let mut fallback = (f64::INFINITY, first);
    for q in 0..w.len() {
        if marked[q] {
            continue;
        }
        let suffix = total - prefix - w[q];
        if prefix <= half && suffix <= half {
            return Ok(q);
        }
        let worst = prefix.max(suffix);
        if worst < fallback.0 {
            fallback = (worst, q);
        }
        prefix += w[q];
    }
    // only reachable through rounding; the balanced choice is still sound
    Ok(fallback.1)
}

/// Likelihood of a comparison reply for an element at position `id` when
/// `pivot` was queried: `1 - p` on the side the reply points to, `p` on the
/// other side and `1/2` for the pivot itself.
fn comparison_likelihood(id: usize, pivot: usize, answer: AnswerKind, noise: &NoiseParams) -> f64 {
    let (hit, miss) = (1.0 - noise.p(), noise.p());
    match (id.cmp(&pivot), answer) {
        (std::cmp::Ordering::Equal, _) => 0.5,
        (std::cmp::Ordering::Less, AnswerKind::Less) | (std::cmp::Ordering::Greater, AnswerKind::Greater) => hit,
        _ => miss,
    }
}

fn check_comparison(answer: AnswerKind) -> Result<()> {
    match answer {
        AnswerKind::Less | AnswerKind::Greater => Ok(()),
        other => Err(Error::Protocol(format!("{other:?} is not a comparison reply"))),
    }
}

/// Bayesian update of every element after a comparison at `pivot`.
pub fn comparison_update(state: &mut WeightState, pivot: usize, answer: AnswerKind, noise: &NoiseParams) -> Result<()> {
    check_comparison(answer)?;
    state.apply_likelihoods(|v| comparison_likelihood(v, pivot, answer, noise));
    Ok(())
}

/// Limits applied while an epoch runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLimits {
    /// Total query count (over the whole transcript) at which to cut the
    /// epoch short.
    pub max_total_queries: u64,
    /// Stop as soon as the marked set holds at least this relative mass.
    pub stop_marked_mass: Option<f64>,
}

impl EpochLimits {
    pub fn unlimited() -> Self {
        EpochLimits {
            max_total_queries: u64::MAX,
            stop_marked_mass: None,
        }
    }
}

/// How an epoch ended.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochEnd {
    pub boundary: EpochBoundary,
    /// The marked-mass stop rule fired during the epoch.
    pub stopped: bool,
}

/// Runs one epoch: queries the central element `E_i` times (fewer if a
/// limit fires), updating all weights after each reply, then marks the
/// pivot and advances the coupled bound.
pub fn run_epoch<R: ComparisonResponder + ?Sized, O: SearchObserver + ?Sized>(
    state: &mut WeightState,
    epoch: &mut EpochState,
    noise: &NoiseParams,
    responder: &mut R,
    observer: &mut O,
    transcript: &mut SearchTranscript,
    limits: EpochLimits,
) -> Result<EpochEnd> {
    let pivot = central_element(state, &epoch.marked)?;
    let length = epoch_length(epoch.epoch_index, noise);
    epoch.current_pivot = Some(pivot);
    epoch.within_epoch = 0;
    epoch.less = 0;
    epoch.greater = 0;
    let mut stopped = false;
    while epoch.within_epoch < length {
        if transcript.query_count >= limits.max_total_queries {
            break;
        }
        let answer = responder.compare(pivot);
        check_comparison(answer)?;
        let before = state.clone();
        comparison_update(state, pivot, answer, noise)?;
        let side = if answer == AnswerKind::Less { pivot } else { state.len() - pivot - 1 };
        transcript.record(pivot, answer, side);
        observer.on_step(&StepEvent {
            query: pivot,
            answer,
            was_heavy: before.is_heavy(pivot, 0.5),
            compatible: None,
            before: &before,
            after: state,
        });
        epoch.within_epoch += 1;
        if answer == AnswerKind::Less {
            epoch.less += 1;
        } else {
            epoch.greater += 1;
        }
        if let Some(threshold) = limits.stop_marked_mass {
            if epoch.marked_mass(state) >= threshold {
                stopped = true;
                break;
            }
        }
    }
    let truncated = epoch.within_epoch < length;
    epoch.marked[pivot] = true;
    epoch.order.push(pivot);
    epoch.coupled_log2 += coupled_epoch_log2_factor(epoch.less, epoch.greater, noise);
    if !truncated {
        epoch.completed += 1;
    }
    let unmarked = (0..state.len()).filter(|&v| !epoch.marked[v]);
    let log2_unmarked = state.absolute_log2_weight(unmarked).unwrap_or(f64::NEG_INFINITY);
    let boundary = EpochBoundary {
        epoch: epoch.epoch_index,
        step: transcript.query_count,
        pivot,
        length,
        truncated,
        less: epoch.less,
        greater: epoch.greater,
        coupled_log2: epoch.coupled_log2,
        log2_unmarked,
    };
    observer.on_epoch_end(&boundary, state, &epoch.marked);
    epoch.epoch_index += 1;
    epoch.current_pivot = None;
    Ok(EpochEnd { boundary, stopped })
}

/// Result of the second-phase search over candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub declared: usize,
    /// `(query, reply, candidates on the reply's side)` per query.
    pub queries: Vec<(usize, AnswerKind, usize)>,
    /// The query cap was reached before any candidate got heavy enough.
    pub flagged: bool,
}

/// Query cap of the verifier over `m` candidates.
pub fn verifier_query_cap(m: usize, delta: f64, noise: &NoiseParams) -> u64 {
    let ceiling = ((m.max(1) as f64).log2() + (1.0 / delta).log2() + 1.0) / noise.info_rate();
    (LV_CAP_FACTOR * ceiling).ceil() as u64
}

/// Multiplicative-weights search restricted to `candidates`: uniform weights,
/// query the weighted median candidate, update by comparison, stop when a
/// candidate holds at least `1 - delta`. Comparisons are asked about the
/// original element ids.
pub fn verify_candidates<R: ComparisonResponder + ?Sized>(
    candidates: &[usize],
    noise: &NoiseParams,
    delta: f64,
    responder: &mut R,
) -> Result<Verification> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let mut ids = candidates.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() {
        return Err(Error::Structural("no candidates to verify".into()));
    }
    let mut out = Verification {
        declared: ids[0],
        queries: Vec::new(),
        flagged: false,
    };
    if ids.len() == 1 {
        return Ok(out);
    }
    let cap = verifier_query_cap(ids.len(), delta, noise);
    let none_marked = vec![false; ids.len()];
    let mut w = WeightState::init_uniform(ids.len())?;
    loop {
        let top = w.heaviest();
        if w.is_heavy(top, 1.0 - delta) {
            out.declared = ids[top];
            break;
        }
        if out.queries.len() as u64 >= cap {
            out.declared = ids[top];
            out.flagged = true;
            break;
        }
        let pos = central_element(&w, &none_marked)?;
        let answer = responder.compare(ids[pos]);
        check_comparison(answer)?;
        w.apply_likelihoods(|j| comparison_likelihood(j, pos, answer, noise));
        let side = if answer == AnswerKind::Less { pos } else { ids.len() - pos - 1 };
        out.queries.push((ids[pos], answer, side));
    }
    Ok(out)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::domain(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    Ok(())
}

fn finish<R: ComparisonResponder + ?Sized>(
    mut transcript: SearchTranscript,
    epoch: &EpochState,
    epochs: Vec<EpochBoundary>,
    noise: &NoiseParams,
    delta: f64,
    responder: &mut R,
) -> Result<SearchTranscript> {
    let phase_one_queries = transcript.query_count;
    let check = verify_candidates(epoch.marked_elements(), noise, delta, responder)?;
    for &(q, a, side) in &check.queries {
        transcript.record(q, a, side);
    }
    transcript.declared = check.declared;
    transcript.flagged |= check.flagged;
    transcript.phases = Some(LinearPhaseInfo {
        phase_one_queries,
        completed_epochs: epoch.completed_epochs(),
        marked: epoch.marked_elements().to_vec(),
        verifier_queries: check.queries.len() as u64,
        verifier_flagged: check.flagged,
        epochs,
    });
    Ok(transcript)
}

/// Fixed-budget binary search: epochs for exactly `Q` queries (the last
/// epoch may be cut short; its pivot is still marked), then the verifier at
/// confidence `delta / 3` over the marked set.
pub fn run_adversarial<R: ComparisonResponder + ?Sized, O: SearchObserver + ?Sized>(
    n: usize,
    noise: &NoiseParams,
    delta: f64,
    c_const: f64,
    responder: &mut R,
    observer: &mut O,
) -> Result<SearchTranscript> {
    check_delta(delta)?;
    let budget = if n >= 2 {
        worst_case_budget_linear(n, noise, delta, c_const)?.q
    } else {
        0
    };
    let mut state = WeightState::init_uniform(n)?;
    let mut epoch = EpochState::new(n);
    let mut transcript = SearchTranscript::new();
    let mut epochs = Vec::new();
    let limits = EpochLimits {
        max_total_queries: budget,
        stop_marked_mass: None,
    };
    while transcript.query_count < budget && !epoch.all_marked() {
        let end = run_epoch(&mut state, &mut epoch, noise, responder, observer, &mut transcript, limits)?;
        epochs.push(end.boundary);
    }
    if epoch.marked_elements().is_empty() {
        // n = 1: the only element is the answer
        transcript.declared = 0;
        transcript.phases = Some(LinearPhaseInfo::default());
        return Ok(transcript);
    }
    finish(transcript, &epoch, epochs, noise, delta / 3.0, responder)
}

/// Expected phase-one length ceiling of Las Vegas binary search for a target
/// of prior mass `mass`: `(log2 1/mass + log2 1/delta + 3 + log2 C) / I(p)`.
pub fn lv_phase_one_ceiling(mass: f64, delta: f64, noise: &NoiseParams, c_const: f64) -> f64 {
    (-mass.log2() + (1.0 / delta).log2() + linear_phase_one_constant(c_const)) / noise.info_rate()
}

/// Las Vegas binary search from the prior `mu`: epochs until the marked set
/// holds at least `1 - delta/2` of the weight (checked after every query and
/// after each marking), then the verifier at confidence `delta / 2`.
pub fn run_lv_distributional<R: ComparisonResponder + ?Sized, O: SearchObserver + ?Sized>(
    mu: &Distribution,
    noise: &NoiseParams,
    delta: f64,
    c_const: f64,
    responder: &mut R,
    observer: &mut O,
) -> Result<SearchTranscript> {
    check_delta(delta)?;
    let n = mu.len();
    let lightest = mu.masses().iter().copied().fold(1.0f64, f64::min).max(MASS_FLOOR);
    let cap = (LV_CAP_FACTOR * lv_phase_one_ceiling(lightest, delta, noise, c_const)).ceil() as u64;
    let threshold = 1.0 - delta / 2.0;
    let mut state = WeightState::init_from_distribution(mu)?;
    let mut epoch = EpochState::new(n);
    let mut transcript = SearchTranscript::new();
    let mut epochs = Vec::new();
    let limits = EpochLimits {
        max_total_queries: cap,
        stop_marked_mass: Some(threshold),
    };
    loop {
        if epoch.marked_mass(&state) >= threshold || epoch.all_marked() {
            break;
        }
        if transcript.query_count >= cap {
            transcript.flagged = true;
            break;
        }
        let end = run_epoch(&mut state, &mut epoch, noise, responder, observer, &mut transcript, limits)?;
        epochs.push(end.boundary);
    }
    finish(transcript, &epoch, epochs, noise, delta / 2.0, responder)
}

/// Answers comparisons over the doubled domain `0..2n`, in which the real
/// elements sit at `shift..shift + n`. Padding elements never hold the
/// target; their answers are drawn from the same noisy channel so the run is
/// distributed exactly like a search over `2n` elements.
struct Shifted<'a, R: ?Sized, G> {
    inner: &'a mut R,
    rng: &'a mut G,
    shift: usize,
    n: usize,
    p: f64,
    padding: Vec<bool>,
}

impl<R: ComparisonResponder + ?Sized, G: Rng> ComparisonResponder for Shifted<'_, R, G> {
    fn compare(&mut self, q: usize) -> AnswerKind {
        let real = (self.shift..self.shift + self.n).contains(&q);
        self.padding.push(!real);
        if real {
            return self.inner.compare(q - self.shift);
        }
        let truth_less = q >= self.shift + self.n;
        if truth_less != self.rng.random_bool(self.p) {
            AnswerKind::Less
        } else {
            AnswerKind::Greater
        }
    }
}

/// The Las Vegas strategy with no prior: the `n` elements are shifted by a
/// uniform offset into a domain of `2n`, searched from the uniform prior at
/// confidence `delta / 2`. A fixed target then lands on a uniform position
/// among half of the domain, so its error is at most twice the average,
/// i.e. at most `delta`.
///
/// Only real elements cost queries: the transcript lists them in original
/// coordinates, and epochs whose pivot was padding are dropped from the
/// phase record. Observers see the doubled domain.
pub fn run_lv_adversarial<R, O, G>(
    n: usize,
    noise: &NoiseParams,
    delta: f64,
    c_const: f64,
    rng: &mut G,
    responder: &mut R,
    observer: &mut O,
) -> Result<SearchTranscript>
where
    R: ComparisonResponder + ?Sized,
    O: SearchObserver + ?Sized,
    G: Rng,
{
    check_delta(delta)?;
    let mu = Distribution::uniform(2 * n)?;
    let shift = rng.random_range(0..n);
    let mut wrapped = Shifted {
        inner: responder,
        rng,
        shift,
        n,
        p: noise.p(),
        padding: Vec::new(),
    };
    let virt = run_lv_distributional(&mu, noise, delta / 2.0, c_const, &mut wrapped, observer)?;
    Ok(unshift(virt, &wrapped.padding, shift, n))
}

fn unshift(virt: SearchTranscript, padding: &[bool], shift: usize, n: usize) -> SearchTranscript {
    let to_real = |v: usize| v.checked_sub(shift).filter(|&x| x < n);
    // real queries made before virtual step k
    let mut real_before = vec![0u64; padding.len() + 1];
    for (k, &pad) in padding.iter().enumerate() {
        real_before[k + 1] = real_before[k] + u64::from(!pad);
    }
    let mut out = SearchTranscript::new();
    for (rec, _) in virt.queries.iter().zip(padding).filter(|(_, &pad)| !pad) {
        let q = rec.query - shift;
        let side = if rec.answer == AnswerKind::Less { q } else { n - q - 1 };
        out.record(q, rec.answer, side);
    }
    // a padding declaration is wrong for every target; report the nearest end
    out.declared = to_real(virt.declared).unwrap_or(if virt.declared < shift { 0 } else { n - 1 });
    out.flagged = virt.flagged;
    out.phases = virt.phases.map(|ph| {
        let one = ph.phase_one_queries as usize;
        LinearPhaseInfo {
            phase_one_queries: real_before[one],
            completed_epochs: ph.completed_epochs,
            marked: ph.marked.iter().filter_map(|&v| to_real(v)).collect(),
            verifier_queries: real_before[padding.len()] - real_before[one],
            verifier_flagged: ph.verifier_flagged,
            epochs: ph
                .epochs
                .into_iter()
                .filter_map(|b| {
                    to_real(b.pivot).map(|pivot| EpochBoundary {
                        pivot,
                        step: real_before[b.step as usize],
                        ..b
                    })
                })
                .collect(),
        }
    });
    out
}
