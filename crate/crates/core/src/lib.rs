//! Noisy search on graphs and sorted arrays with Bayesian multiplicative
//! weights.
//!
//! Every reply to a query is wrong independently with probability `p < 1/2`.
//! Strategies keep a weight per element, multiply the weights of elements
//! consistent with each reply by `1 - p` and the rest by `p`, and query a
//! weighted median. [`graph_search`] covers vertex queries on undirected
//! graphs, [`linear_search`] covers comparison queries. [`harness`] runs
//! seeded Monte Carlo experiments and checks the weight-drop invariants.

// `!(x > 0.0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graph;
pub mod graph_search;
pub mod harness;
pub mod linear_search;
pub mod mathcore;
pub mod oracle;
pub mod transcript;
pub mod weights;

pub use error::{Error, Result};
pub use graph::{all_pairs_distances, DistanceMatrix, Graph, GraphGenerator};
pub use mathcore::{Distribution, NoiseParams};
pub use oracle::{Answer, AnswerKind, LieChoice, NoisePolicy, TargetModel, TruthfulTiebreak};
pub use transcript::SearchTranscript;
pub use weights::{CompatibleSet, WeightState};
