//! The environment side of a search: the hidden target, truthful replies,
//! and i.i.d. noise.
//!
//! Strategies only ever see an [`AnswerKind`] through the
//! [`GraphResponder`] / [`ComparisonResponder`] traits. The ground truth of
//! each reply ([`Answer`]) stays in the environment's log.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{consistent_set, DistanceMatrix, Graph};
use crate::mathcore::{Distribution, NoiseParams};
use crate::weights::{CompatibleSet, WeightState};

/// A reply as seen by a strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnswerKind {
    /// The queried vertex is the target.
    Yes,
    /// The target lies beyond this neighbor of the queried vertex.
    Neighbor(usize),
    /// The target is smaller than the queried element.
    Less,
    /// The target is larger than the queried element.
    Greater,
}

impl AnswerKind {
    pub fn is_no_answer(&self) -> bool {
        matches!(self, AnswerKind::Neighbor(_))
    }
}

/// A reply together with its ground truth, recorded by the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub kind: AnswerKind,
    pub truthful: AnswerKind,
    pub is_lie: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthfulTiebreak {
    /// Among several shortest-path neighbors, point to the smallest id.
    #[default]
    SmallestId,
    Random,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LieChoice {
    /// A lie is uniform over the wrong legal replies.
    #[default]
    UniformWrong,
    /// A lie picks the wrong reply whose compatible set carries the most
    /// current weight.
    AdversarialHeaviest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePolicy {
    pub noise: NoiseParams,
    pub truthful_tiebreak: TruthfulTiebreak,
    pub lie_choice: LieChoice,
}

impl NoisePolicy {
    pub fn new(noise: NoiseParams) -> Self {
        NoisePolicy {
            noise,
            truthful_tiebreak: TruthfulTiebreak::default(),
            lie_choice: LieChoice::default(),
        }
    }

    pub fn with_lie_choice(mut self, lie_choice: LieChoice) -> Self {
        self.lie_choice = lie_choice;
        self
    }

    pub fn with_tiebreak(mut self, tiebreak: TruthfulTiebreak) -> Self {
        self.truthful_tiebreak = tiebreak;
        self
    }
}

/// How the hidden target of a trial is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetModel {
    Fixed(usize),
    Sampled(Distribution),
}

impl TargetModel {
    /// Draws the target once, before the first query of a trial.
    pub fn realize<R: Rng>(&self, rng: &mut R) -> usize {
        match self {
            TargetModel::Fixed(v) => *v,
            TargetModel::Sampled(mu) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, &m) in mu.masses().iter().enumerate() {
                    acc += m;
                    if u < acc {
                        return v;
                    }
                }
                mu.masses().iter().rposition(|&m| m > 0.0).unwrap_or(0)
            }
        }
    }
}

/// Reply to a graph query at `q`. The truthful reply is `Yes` at the target,
/// else a neighbor on a shortest path towards it; with probability `p` it is
/// replaced by a wrong legal reply chosen per the policy. `weights` feeds
/// the adversarial lie choice and is ignored otherwise.
pub fn graph_answer<R: Rng>(
    q: usize,
    target: usize,
    g: &Graph,
    d: &DistanceMatrix,
    policy: &NoisePolicy,
    weights: Option<&WeightState>,
    rng: &mut R,
) -> Answer {
    let truthful = if q == target {
        AnswerKind::Yes
    } else {
        let toward = d.get(q, target) - 1;
        let mut closer = g
            .neighbors(q)
            .iter()
            .copied()
            .filter(|&u| d.get(u, target) == toward);
        let u = match policy.truthful_tiebreak {
            TruthfulTiebreak::SmallestId => closer.next(),
            TruthfulTiebreak::Random => {
                let all: Vec<usize> = closer.collect();
                Some(all[rng.random_range(0..all.len())])
            }
        };
        AnswerKind::Neighbor(u.expect("connected graph has a shortest-path neighbor"))
    };

    let lie = rng.random_bool(policy.noise.p());
    let wrong: Vec<AnswerKind> = std::iter::once(AnswerKind::Yes)
        .chain(g.neighbors(q).iter().map(|&u| AnswerKind::Neighbor(u)))
        .filter(|&a| a != truthful)
        .collect();
    if !lie || wrong.is_empty() {
        return Answer {
            kind: truthful,
            truthful,
            is_lie: false,
        };
    }
    let kind = match (policy.lie_choice, weights) {
        (LieChoice::AdversarialHeaviest, Some(w)) => {
            let was_heavy = w.is_heavy(q, 0.5);
            let mut best = wrong[0];
            let mut best_mass = f64::NEG_INFINITY;
            for &a in &wrong {
                let set = heavy_filter(&a, q, was_heavy, g, d).expect("legal reply");
                let mass = w.mass(set.members());
                if mass > best_mass {
                    best_mass = mass;
                    best = a;
                }
            }
            best
        }
        _ => wrong[rng.random_range(0..wrong.len())],
    };
    Answer {
        kind,
        truthful,
        is_lie: true,
    }
}

/// Reply to a comparison at `q`: `Less` when the target is smaller,
/// `Greater` when larger, a fair coin when equal; flipped with probability `p`.
pub fn linear_answer<R: Rng>(q: usize, target: usize, policy: &NoisePolicy, rng: &mut R) -> Answer {
    let truthful = match target.cmp(&q) {
        std::cmp::Ordering::Less => AnswerKind::Less,
        std::cmp::Ordering::Greater => AnswerKind::Greater,
        std::cmp::Ordering::Equal => {
            if rng.random_bool(0.5) {
                AnswerKind::Less
            } else {
                AnswerKind::Greater
            }
        }
    };
    let is_lie = rng.random_bool(policy.noise.p());
    let kind = match (is_lie, truthful) {
        (false, t) => t,
        (true, AnswerKind::Less) => AnswerKind::Greater,
        (true, _) => AnswerKind::Less,
    };
    Answer {
        kind,
        truthful,
        is_lie,
    }
}

/// The compatible set a strategy applies for `reply` at `q`. A no-answer at
/// a heavy vertex only says "the target is not `q`".
pub fn heavy_filter(
    reply: &AnswerKind,
    q: usize,
    was_heavy: bool,
    g: &Graph,
    d: &DistanceMatrix,
) -> Result<CompatibleSet> {
    match reply {
        AnswerKind::Neighbor(u) if was_heavy => {
            if !g.is_adjacent(q, *u) {
                return Err(Error::Protocol(format!(
                    "reply {u} is not a neighbor of queried vertex {q}"
                )));
            }
            Ok(CompatibleSet::all_but(g.n(), q))
        }
        _ => consistent_set(g, d, q, reply),
    }
}

/// Answers graph queries on behalf of a strategy.
pub trait GraphResponder {
    /// `weights` is the strategy's state before the reply; environments may
    /// use it to pick adversarial lies.
    fn answer(&mut self, q: usize, weights: &WeightState) -> AnswerKind;
}

/// Answers comparison queries on behalf of a strategy.
pub trait ComparisonResponder {
    fn compare(&mut self, q: usize) -> AnswerKind;
}

impl<F: FnMut(usize, &WeightState) -> AnswerKind> GraphResponder for F {
    fn answer(&mut self, q: usize, weights: &WeightState) -> AnswerKind {
        self(q, weights)
    }
}

impl<F: FnMut(usize) -> AnswerKind> ComparisonResponder for F {
    fn compare(&mut self, q: usize) -> AnswerKind {
        self(q)
    }
}

/// A noisy graph oracle for one trial; keeps the ground-truth log.
pub struct GraphEnvironment<'a, R> {
    graph: &'a Graph,
    dist: &'a DistanceMatrix,
    policy: NoisePolicy,
    target: usize,
    rng: R,
    log: Vec<Answer>,
}

impl<'a, R: Rng> GraphEnvironment<'a, R> {
    pub fn new(graph: &'a Graph, dist: &'a DistanceMatrix, policy: NoisePolicy, target: usize, rng: R) -> Self {
        assert!(target < graph.n(), "target outside the graph");
        GraphEnvironment {
            graph,
            dist,
            policy,
            target,
            rng,
            log: Vec::new(),
        }
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn log(&self) -> &[Answer] {
        &self.log
    }

    pub fn into_log(self) -> Vec<Answer> {
        self.log
    }
}

impl<R: Rng> GraphResponder for GraphEnvironment<'_, R> {
    fn answer(&mut self, q: usize, weights: &WeightState) -> AnswerKind {
        let a = graph_answer(
            q,
            self.target,
            self.graph,
            self.dist,
            &self.policy,
            Some(weights),
            &mut self.rng,
        );
        self.log.push(a);
        a.kind
    }
}

/// A noisy comparison oracle over `0..n` for one trial.
pub struct LinearEnvironment<R> {
    policy: NoisePolicy,
    target: usize,
    rng: R,
    log: Vec<Answer>,
}

impl<R: Rng> LinearEnvironment<R> {
    pub fn new(policy: NoisePolicy, target: usize, rng: R) -> Self {
        LinearEnvironment {
            policy,
            target,
            rng,
            log: Vec::new(),
        }
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn log(&self) -> &[Answer] {
        &self.log
    }

    pub fn into_log(self) -> Vec<Answer> {
        self.log
    }
}

impl<R: Rng> ComparisonResponder for LinearEnvironment<R> {
    fn compare(&mut self, q: usize) -> AnswerKind {
        let a = linear_answer(q, self.target, &self.policy, &mut self.rng);
        self.log.push(a);
        a.kind
    }
}

/// Parses `element_id mass` lines into a distribution over `0..n` (or over
/// `0..=max id` when `n` is `None`). Returns the distribution and the sum of
/// the masses before normalization.
pub fn parse_distribution(text: &str, origin: &str, n: Option<usize>) -> Result<(Distribution, f64)> {
    let err = |line: usize, message: String| Error::Parse {
        origin: origin.to_string(),
        line,
        message,
    };
    let mut entries: Vec<(usize, f64, usize)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [id, mass] = fields.as_slice() else {
            return Err(err(line_no, format!("expected \"element_id mass\", got {line:?}")));
        };
        let id: usize = id
            .parse()
            .map_err(|e| err(line_no, format!("bad element id {id:?}: {e}")))?;
        let mass: f64 = mass
            .parse()
            .map_err(|e| err(line_no, format!("bad mass {mass:?}: {e}")))?;
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(err(line_no, format!("mass must be nonnegative, got {mass}")));
        }
        if let Some(&(_, _, first)) = entries.iter().find(|e| e.0 == id) {
            return Err(err(line_no, format!("element {id} already given on line {first}")));
        }
        entries.push((id, mass, line_no));
    }
    let size = match n {
        Some(n) => n,
        None => entries.iter().map(|e| e.0 + 1).max().unwrap_or(0),
    };
    let mut masses = vec![0.0; size];
    for &(id, mass, line_no) in &entries {
        if id >= size {
            return Err(err(line_no, format!("element {id} outside 0..{size}")));
        }
        masses[id] = mass;
    }
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(err(1, "distribution has no positive mass".into()));
    }
    Ok((Distribution::normalized(masses)?, total))
}

pub fn load_distribution(path: &Path, n: Option<usize>) -> Result<(Distribution, f64)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_distribution(&text, &path.display().to_string(), n)
}
