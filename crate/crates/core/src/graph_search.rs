//! Graph search by repeatedly querying the weighted median: a fixed-budget
//! strategy for adversarial targets and Las Vegas strategies that stop once
//! one vertex is heavy enough.

use crate::error::{Error, Result};
use crate::graph::{weighted_median, DistanceMatrix, Graph};
use crate::mathcore::{
    lv_graph_ceiling, rescaled_confidence, worst_case_budget_graph, Distribution, NoiseParams,
};
use crate::oracle::{heavy_filter, AnswerKind, GraphResponder};
use crate::transcript::{SearchObserver, SearchTranscript, StepEvent};
use crate::weights::{CompatibleSet, WeightState};

/// Las Vegas runs give up after this many times their expected length.
pub const LV_CAP_FACTOR: f64 = 50.0;

/// What one median step did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub query: usize,
    pub answer: AnswerKind,
    pub was_heavy: bool,
    pub compatible: CompatibleSet,
}

/// Queries the weighted median, filters the reply through the heavy rule and
/// applies the Bayesian update in place.
pub fn step_median_update<R: GraphResponder + ?Sized, O: SearchObserver + ?Sized>(
    state: &mut WeightState,
    g: &Graph,
    d: &DistanceMatrix,
    noise: &NoiseParams,
    responder: &mut R,
    observer: &mut O,
) -> Result<StepOutcome> {
    let q = weighted_median(g, d, state);
    let was_heavy = state.is_heavy(q, 0.5);
    let answer = responder.answer(q, state);
    let compatible = heavy_filter(&answer, q, was_heavy, g, d)?;
    let before = state.clone();
    state.bayesian_update(&compatible, noise);
    observer.on_step(&StepEvent {
        query: q,
        answer,
        was_heavy,
        compatible: Some(&compatible),
        before: &before,
        after: state,
    });
    Ok(StepOutcome {
        query: q,
        answer,
        was_heavy,
        compatible,
    })
}

fn check_inputs(g: &Graph, d: &DistanceMatrix, delta: f64) -> Result<()> {
    if d.n() != g.n() {
        return Err(Error::Structural(format!(
            "distance matrix is {}x{} but the graph has {} vertices",
            d.n(),
            d.n(),
            g.n()
        )));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::domain(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    Ok(())
}

/// Exactly `Q` median steps from a uniform start, then declares the
/// heaviest vertex.
pub fn run_adversarial<R: GraphResponder + ?Sized, O: SearchObserver + ?Sized>(
    g: &Graph,
    d: &DistanceMatrix,
    noise: &NoiseParams,
    delta: f64,
    responder: &mut R,
    observer: &mut O,
) -> Result<SearchTranscript> {
    check_inputs(g, d, delta)?;
    let budget = worst_case_budget_graph(g.n(), noise, delta)?.q;
    let mut state = WeightState::init_uniform(g.n())?;
    let mut transcript = SearchTranscript::new();
    for _ in 0..budget {
        let step = step_median_update(&mut state, g, d, noise, responder, observer)?;
        transcript.record(step.query, step.answer, step.compatible.len());
    }
    transcript.declared = state.heaviest();
    Ok(transcript)
}

/// Query cap of a Las Vegas graph run: the expected-length ceiling for the
/// lightest prior element, times [`LV_CAP_FACTOR`].
pub fn lv_query_cap(mu: &Distribution, delta: f64, noise: &NoiseParams) -> u64 {
    let lightest = mu
        .masses()
        .iter()
        .copied()
        .fold(1.0f64, f64::min)
        .max(crate::weights::MASS_FLOOR);
    (LV_CAP_FACTOR * lv_graph_ceiling(lightest, delta, noise)).ceil() as u64
}

/// Median steps from the prior `mu` until some vertex holds at least
/// `1 - delta` of the weight; declares that vertex. A run that reaches the
/// query cap declares the heaviest vertex and is flagged.
pub fn run_lv_distributional<R: GraphResponder + ?Sized, O: SearchObserver + ?Sized>(
    g: &Graph,
    d: &DistanceMatrix,
    mu: &Distribution,
    noise: &NoiseParams,
    delta: f64,
    responder: &mut R,
    observer: &mut O,
) -> Result<SearchTranscript> {
    check_inputs(g, d, delta)?;
    if mu.len() != g.n() {
        return Err(Error::Structural(format!(
            "prior has {} elements but the graph has {} vertices",
            mu.len(),
            g.n()
        )));
    }
    let cap = lv_query_cap(mu, delta, noise);
    let mut state = WeightState::init_from_distribution(mu)?;
    let mut transcript = SearchTranscript::new();
    loop {
        let top = state.heaviest();
        if state.is_heavy(top, 1.0 - delta) {
            transcript.declared = top;
            break;
        }
        if transcript.query_count >= cap {
            transcript.declared = top;
            transcript.flagged = true;
            break;
        }
        let step = step_median_update(&mut state, g, d, noise, responder, observer)?;
        transcript.record(step.query, step.answer, step.compatible.len());
    }
    Ok(transcript)
}

/// The Las Vegas strategy from a uniform prior at the rescaled confidence
/// `min(1/3, delta^2 / (c' (log2 n + log2 1/delta)^2))`.
pub fn run_lv_adversarial<R: GraphResponder + ?Sized, O: SearchObserver + ?Sized>(
    g: &Graph,
    d: &DistanceMatrix,
    noise: &NoiseParams,
    delta: f64,
    c_prime: f64,
    responder: &mut R,
    observer: &mut O,
) -> Result<SearchTranscript> {
    check_inputs(g, d, delta)?;
    let inner = rescaled_confidence(g.n(), delta, c_prime)?;
    let mu = Distribution::uniform(g.n())?;
    run_lv_distributional(g, d, &mu, noise, inner, responder, observer)
}
