//! Seeded Monte Carlo experiments over the search strategies, result
//! emission, and invariant instrumentation.

pub mod bounds;
pub mod config;
pub mod emit;
pub mod invariants;
pub mod run;
pub mod stats;

pub use config::{ExperimentConfig, GraphSource, OutputFormat, OutputSpec, PriorSource, Scenario};
pub use run::{adversarial_sweep, run_experiment, run_trial, trial_rng, ExperimentResult, ScenarioContext, SweepResult, TrialOutcome};
pub use stats::{wilson_interval, SummaryStats};
