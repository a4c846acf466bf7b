use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use noisy_search::harness::{
    adversarial_sweep, run_experiment, ExperimentConfig, GraphSource, OutputFormat, OutputSpec, PriorSource,
    Scenario, SummaryStats,
};
use noisy_search::mathcore::{DEFAULT_C_CONST, DEFAULT_C_PRIME};
use noisy_search::{GraphGenerator, LieChoice, TruthfulTiebreak};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    GraphAdversarial,
    GraphLvDistr,
    GraphLvAdv,
    BinAdversarial,
    BinLvDistr,
    BinLvAdv,
    VerifyInvariants,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::GraphAdversarial => Scenario::GraphAdversarial,
            ScenarioArg::GraphLvDistr => Scenario::GraphLvDistr,
            ScenarioArg::GraphLvAdv => Scenario::GraphLvAdv,
            ScenarioArg::BinAdversarial => Scenario::BinAdversarial,
            ScenarioArg::BinLvDistr => Scenario::BinLvDistr,
            ScenarioArg::BinLvAdv => Scenario::BinLvAdv,
            ScenarioArg::VerifyInvariants => Scenario::VerifyInvariants,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LieArg {
    Uniform,
    Adversarial,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TiebreakArg {
    SmallestId,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Noisy graph and binary search experiments.
#[derive(Debug, Parser)]
#[command(name = "noisy-search", version)]
struct Cli {
    #[arg(value_enum)]
    scenario: ScenarioArg,
    /// Number of elements (vertices for graph scenarios).
    #[arg(long)]
    n: usize,
    /// Per-answer error probability, in (0, 1/2).
    #[arg(long)]
    p: f64,
    /// Allowed error probability, in (0, 1/2).
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list file: a header "n m", then one "u v" per line.
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,
    /// Built-in graph: path, cycle, star, complete, grid[:RxC], hypercube,
    /// random-tree, gnm:M, random-connected.
    #[arg(long)]
    gen: Option<String>,
    /// Prior for distributional scenarios: "uniform" or a file of
    /// "element_id mass" lines.
    #[arg(long, default_value = "uniform")]
    mu: String,
    #[arg(long, value_enum, default_value_t = LieArg::Uniform)]
    lie_choice: LieArg,
    /// Shortest-path neighbor chosen by truthful graph replies.
    #[arg(long, value_enum, default_value_t = TiebreakArg::SmallestId)]
    tiebreak: TiebreakArg,
    #[arg(long, default_value_t = DEFAULT_C_CONST)]
    c_const: f64,
    #[arg(long, default_value_t = DEFAULT_C_PRIME)]
    c_prime: f64,
    /// Fix the target instead of drawing it per trial.
    #[arg(long, conflicts_with = "sweep")]
    target: Option<usize>,
    /// Run once per target (n <= 256) and report the worst one.
    #[arg(long)]
    sweep: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Include a sample of transcripts in JSON output.
    #[arg(long)]
    keep_transcripts: bool,
}

impl Cli {
    fn config(&self) -> noisy_search::Result<ExperimentConfig> {
        let graph = match (&self.graph, &self.gen) {
            (Some(path), _) => Some(GraphSource::File(path.clone())),
            (None, Some(name)) => Some(GraphSource::Generator(name.parse::<GraphGenerator>()?)),
            (None, None) => None,
        };
        let prior = match self.mu.as_str() {
            "uniform" => PriorSource::Uniform,
            path => PriorSource::File(PathBuf::from(path)),
        };
        Ok(ExperimentConfig {
            scenario: self.scenario.into(),
            n: self.n,
            graph,
            prior,
            p: self.p,
            delta: self.delta,
            trials: self.trials,
            seed: self.seed,
            lie_choice: match self.lie_choice {
                LieArg::Uniform => LieChoice::UniformWrong,
                LieArg::Adversarial => LieChoice::AdversarialHeaviest,
            },
            truthful_tiebreak: match self.tiebreak {
                TiebreakArg::SmallestId => TruthfulTiebreak::SmallestId,
                TiebreakArg::Random => TruthfulTiebreak::Random,
            },
            c_const: self.c_const,
            c_prime: self.c_prime,
            target: self.target,
            output: self.out.as_ref().map(|path| OutputSpec {
                path: path.clone(),
                format: match self.format {
                    FormatArg::Csv => OutputFormat::Csv,
                    FormatArg::Json => OutputFormat::Json,
                },
            }),
            keep_transcripts: self.keep_transcripts,
        })
    }
}

fn report(s: &SummaryStats) {
    println!(
        "{} n={} p={} delta={} trials={}: mean_queries={:.3} (sd {:.3}, max {}) bound={:.3} \
         error_rate={:.4} [{:.4}, {:.4}] flagged={} bound_satisfied={}",
        s.scenario,
        s.n,
        s.p,
        s.delta,
        s.trials,
        s.mean_queries,
        s.std_queries,
        s.max_queries,
        s.theoretical_bound,
        s.error_rate,
        s.error_ci_low,
        s.error_ci_high,
        s.flagged_trials,
        s.bound_satisfied
    );
}

fn run(cli: &Cli) -> noisy_search::Result<bool> {
    let config = cli.config()?;
    if cli.sweep {
        let sweep = adversarial_sweep(&config)?;
        for (target, s) in &sweep.rows {
            print!("target {target}: ");
            report(s);
        }
        println!(
            "worst error rate {:.4} at target {}; worst mean queries {:.3} at target {}",
            sweep.max_error_rate, sweep.worst_error_target, sweep.max_mean_queries, sweep.worst_queries_target
        );
        Ok(sweep.all_bounds_satisfied())
    } else {
        let result = run_experiment(&config)?;
        report(&result.summary);
        Ok(result.summary.bound_satisfied)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("bound not satisfied");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
