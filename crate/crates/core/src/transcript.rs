//! Run records and observation hooks shared by all strategies.

use serde::{Deserialize, Serialize};

use crate::oracle::{Answer, AnswerKind};
use crate::weights::{CompatibleSet, WeightState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    /// 1-based index of the query within the run.
    pub step: u64,
    pub query: usize,
    pub answer: AnswerKind,
    pub compatible_size: usize,
    /// Ground truth, attached by the harness after the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truthful: Option<AnswerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_lie: Option<bool>,
}

/// Absolute log2 weights after a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSnapshot {
    pub step: u64,
    pub heaviest: usize,
    pub log2_total: f64,
    /// `-inf` when the ground set is a single element.
    pub log2_excluding_heaviest: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log2_target: Option<f64>,
}

impl WeightSnapshot {
    pub fn capture(w: &WeightState, target: Option<usize>) -> Self {
        let heaviest = w.heaviest();
        WeightSnapshot {
            step: w.step(),
            heaviest,
            log2_total: w.log2_total(),
            log2_excluding_heaviest: w.absolute_log2_weight_excluding(heaviest),
            log2_target: target.map(|t| w.weight(t).log2() + w.log2_total()),
        }
    }
}

/// Comparison-search bookkeeping at the end of one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochBoundary {
    /// 1-based epoch index.
    pub epoch: u64,
    /// Queries answered so far.
    pub step: u64,
    pub pivot: usize,
    pub length: u64,
    /// Whether the budget or the stop rule cut the epoch short.
    pub truncated: bool,
    pub less: u64,
    pub greater: u64,
    pub coupled_log2: f64,
    /// Absolute log2 weight of the elements still unmarked.
    pub log2_unmarked: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearPhaseInfo {
    pub phase_one_queries: u64,
    pub completed_epochs: u64,
    pub marked: Vec<usize>,
    pub verifier_queries: u64,
    pub verifier_flagged: bool,
    pub epochs: Vec<EpochBoundary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTranscript {
    pub queries: Vec<QueryRecord>,
    pub declared: usize,
    pub query_count: u64,
    /// Filled in by the harness, which knows the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_hit: Option<bool>,
    /// Set when a Las Vegas run hit its query cap.
    pub flagged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_log: Option<Vec<WeightSnapshot>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<LinearPhaseInfo>,
}

impl SearchTranscript {
    pub(crate) fn new() -> Self {
        SearchTranscript {
            queries: Vec::new(),
            declared: 0,
            query_count: 0,
            target: None,
            target_hit: None,
            flagged: false,
            weight_log: None,
            phases: None,
        }
    }

    pub(crate) fn record(&mut self, query: usize, answer: AnswerKind, compatible_size: usize) {
        self.query_count += 1;
        self.queries.push(QueryRecord {
            step: self.query_count,
            query,
            answer,
            compatible_size,
            truthful: None,
            is_lie: None,
        });
    }

    /// Attaches the environment's ground truth: the target and, per query,
    /// the truthful reply and lie flag.
    pub fn attach_ground_truth(&mut self, target: usize, log: &[Answer]) {
        debug_assert_eq!(log.len(), self.queries.len());
        for (rec, a) in self.queries.iter_mut().zip(log) {
            debug_assert_eq!(rec.answer, a.kind);
            rec.truthful = Some(a.truthful);
            rec.is_lie = Some(a.is_lie);
        }
        self.target = Some(target);
        self.target_hit = Some(self.declared == target && !self.flagged);
    }

    /// Correct declaration without hitting a cap. `None` before ground truth
    /// is attached.
    pub fn succeeded(&self) -> Option<bool> {
        self.target_hit
    }
}

/// One strategy step, as seen by an observer.
pub struct StepEvent<'a> {
    pub query: usize,
    pub answer: AnswerKind,
    /// Whether the queried element was heavy before the reply.
    pub was_heavy: bool,
    pub compatible: Option<&'a CompatibleSet>,
    pub before: &'a WeightState,
    pub after: &'a WeightState,
}

/// Hooks for instrumentation; every method defaults to doing nothing.
pub trait SearchObserver {
    fn on_step(&mut self, _event: &StepEvent<'_>) {}
    fn on_epoch_end(&mut self, _boundary: &EpochBoundary, _weights: &WeightState, _marked: &[bool]) {}
}

impl SearchObserver for () {}

impl<O: SearchObserver + ?Sized> SearchObserver for &mut O {
    fn on_step(&mut self, event: &StepEvent<'_>) {
        (**self).on_step(event)
    }

    fn on_epoch_end(&mut self, boundary: &EpochBoundary, weights: &WeightState, marked: &[bool]) {
        (**self).on_epoch_end(boundary, weights, marked)
    }
}

/// Collects a [`WeightSnapshot`] after every step, including the initial
/// state.
#[derive(Debug, Default)]
pub struct WeightLogger {
    pub target: Option<usize>,
    pub snapshots: Vec<WeightSnapshot>,
}

impl WeightLogger {
    pub fn new(target: Option<usize>) -> Self {
        WeightLogger {
            target,
            snapshots: Vec::new(),
        }
    }
}

impl SearchObserver for WeightLogger {
    fn on_step(&mut self, event: &StepEvent<'_>) {
        if self.snapshots.is_empty() {
            self.snapshots.push(WeightSnapshot::capture(event.before, self.target));
        }
        self.snapshots.push(WeightSnapshot::capture(event.after, self.target));
    }
}

/// Fans events out to two observers.
pub struct Tee<A, B>(pub A, pub B);

impl<A: SearchObserver, B: SearchObserver> SearchObserver for Tee<A, B> {
    fn on_step(&mut self, event: &StepEvent<'_>) {
        self.0.on_step(event);
        self.1.on_step(event);
    }

    fn on_epoch_end(&mut self, boundary: &EpochBoundary, weights: &WeightState, marked: &[bool]) {
        self.0.on_epoch_end(boundary, weights, marked);
        self.1.on_epoch_end(boundary, weights, marked);
    }
}
