use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphGenerator;
use crate::mathcore::{NoiseParams, DEFAULT_C_CONST, DEFAULT_C_PRIME};
use crate::oracle::{LieChoice, TruthfulTiebreak};

/// Largest `n` an adversarial sweep will enumerate.
pub const MAX_SWEEP_N: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    GraphAdversarial,
    GraphLvDistr,
    GraphLvAdv,
    BinAdversarial,
    BinLvDistr,
    BinLvAdv,
    VerifyInvariants,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::GraphAdversarial,
        Scenario::GraphLvDistr,
        Scenario::GraphLvAdv,
        Scenario::BinAdversarial,
        Scenario::BinLvDistr,
        Scenario::BinLvAdv,
        Scenario::VerifyInvariants,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::GraphAdversarial => "graph-adversarial",
            Scenario::GraphLvDistr => "graph-lv-distr",
            Scenario::GraphLvAdv => "graph-lv-adv",
            Scenario::BinAdversarial => "bin-adversarial",
            Scenario::BinLvDistr => "bin-lv-distr",
            Scenario::BinLvAdv => "bin-lv-adv",
            Scenario::VerifyInvariants => "verify-invariants",
        }
    }

    pub fn is_graph(&self) -> bool {
        matches!(
            self,
            Scenario::GraphAdversarial | Scenario::GraphLvDistr | Scenario::GraphLvAdv
        )
    }

    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            Scenario::BinAdversarial | Scenario::BinLvDistr | Scenario::BinLvAdv
        )
    }

    /// Scenarios whose target is drawn from a prior.
    pub fn is_distributional(&self) -> bool {
        matches!(self, Scenario::GraphLvDistr | Scenario::BinLvDistr)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                Error::config("scenario", format!("unknown scenario {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphSource {
    File(PathBuf),
    Generator(GraphGenerator),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorSource {
    #[default]
    Uniform,
    File(PathBuf),
    /// Masses given inline; normalized on use.
    Masses(Vec<f64>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::config("format", format!("expected csv or json, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: PathBuf,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub graph: Option<GraphSource>,
    pub prior: PriorSource,
    pub p: f64,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub lie_choice: LieChoice,
    pub truthful_tiebreak: TruthfulTiebreak,
    pub c_const: f64,
    pub c_prime: f64,
    /// Fixed target for every trial. Without one, distributional scenarios
    /// draw the target from the prior and the others draw it uniformly.
    pub target: Option<usize>,
    pub output: Option<OutputSpec>,
    pub keep_transcripts: bool,
}

impl ExperimentConfig {
    /// A config with default policies and constants and no output file.
    pub fn new(scenario: Scenario, n: usize, p: f64, delta: f64, trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            scenario,
            n,
            graph: None,
            prior: PriorSource::Uniform,
            p,
            delta,
            trials,
            seed,
            lie_choice: LieChoice::default(),
            truthful_tiebreak: TruthfulTiebreak::default(),
            c_const: DEFAULT_C_CONST,
            c_prime: DEFAULT_C_PRIME,
            target: None,
            output: None,
            keep_transcripts: false,
        }
    }

    pub fn with_graph(mut self, graph: GraphSource) -> Self {
        self.graph = Some(graph);
        self
    }

    pub fn with_prior(mut self, prior: PriorSource) -> Self {
        self.prior = prior;
        self
    }

    pub fn with_target(mut self, target: usize) -> Self {
        self.target = Some(target);
        self
    }

    pub fn with_lie_choice(mut self, lie_choice: LieChoice) -> Self {
        self.lie_choice = lie_choice;
        self
    }

    pub fn with_output(mut self, path: impl Into<PathBuf>, format: OutputFormat) -> Self {
        self.output = Some(OutputSpec {
            path: path.into(),
            format,
        });
        self
    }

    pub fn noise(&self) -> Result<NoiseParams> {
        NoiseParams::new(self.p).map_err(|_| Error::config("p", format!("p must lie in (0, 1/2), got {}", self.p)))
    }

    /// Checks every field the scenario depends on.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "at least one trial is required"));
        }
        if self.n == 0 {
            return Err(Error::config("n", "n must be at least 1"));
        }
        self.noise()?;
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::config("delta", format!("delta must lie in (0, 1/2), got {}", self.delta)));
        }
        if !(self.c_const >= 1.0 && self.c_const.is_finite()) {
            return Err(Error::config("c-const", format!("c-const must be at least 1, got {}", self.c_const)));
        }
        if !(self.c_prime >= 1.0 && self.c_prime.is_finite()) {
            return Err(Error::config("c-prime", format!("c-prime must be at least 1, got {}", self.c_prime)));
        }
        if let Some(t) = self.target {
            if t >= self.n {
                return Err(Error::config("target", format!("target {t} outside 0..{}", self.n)));
            }
            if self.scenario == Scenario::VerifyInvariants {
                return Err(Error::config("target", "verify-invariants draws its own targets"));
            }
        }
        if self.scenario.is_graph() && self.graph.is_none() {
            return Err(Error::config("graph", "graph scenarios need --graph <path> or --gen <name>"));
        }
        if self.scenario.is_binary() && self.graph.is_some() {
            return Err(Error::config("graph", "binary-search scenarios do not take a graph"));
        }
        if !self.scenario.is_distributional() && self.prior != PriorSource::Uniform {
            return Err(Error::config("mu", format!("{} does not take a prior", self.scenario)));
        }
        if let PriorSource::Masses(m) = &self.prior {
            if m.len() != self.n {
                return Err(Error::config("mu", format!("prior has {} masses but n = {}", m.len(), self.n)));
            }
        }
        Ok(())
    }
}
