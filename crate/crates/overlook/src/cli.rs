//! Command-line parsing.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use overlook_core::logistic::FitOptions;
use overlook_core::select::DEFAULT_STALL_LIMIT;
use overlook_core::sim::{CutoffSource, FsCadence, LearningMode, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "overlook", version, about = "Online defect prediction under defect overlooking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Run every dataset at every overlook probability and write summaries.
    Run(ExperimentArgs),
    /// A single repetition per dataset and probability, with traces.
    Simulate(ExperimentArgs),
    /// AUC and F1 of a two-column (score,label) CSV.
    Metrics(MetricsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Cold,
    Seeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CutoffArg {
    Prior,
    Accumulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CadenceArg {
    PerRebuild,
    Once,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// Prior-version (learning) dataset; one per --name.
    #[arg(long, value_name = "FILE", action = clap::ArgAction::Append)]
    pub train: Vec<PathBuf>,
    /// Test-version dataset; one per --name.
    #[arg(long, value_name = "FILE", action = clap::ArgAction::Append)]
    pub test: Vec<PathBuf>,
    /// Dataset name; pairs with the --train/--test at the same position.
    #[arg(long, value_name = "TEXT", action = clap::ArgAction::Append)]
    pub name: Vec<String>,
    /// Overlook probabilities in percent.
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "0,80,100")]
    pub overlook: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "cold")]
    pub mode: ModeArg,
    #[arg(long = "cutoff-source", value_enum, default_value = "prior")]
    pub cutoff_source: CutoffArg,
    #[arg(long = "fs-cadence", value_enum, default_value = "per-rebuild")]
    pub fs_cadence: CadenceArg,
    /// Learning-set size below which predictions are forced defective.
    #[arg(long, default_value_t = 5)]
    pub warmup: usize,
    /// Ridge penalty on standardized coefficients.
    #[arg(long, default_value_t = 1e-4)]
    pub lambda: f64,
    #[arg(long = "max-iter", default_value_t = 50)]
    pub max_iter: usize,
    /// Gradient infinity-norm tolerance for IRLS.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Non-improving expansions before best-first CFS stops.
    #[arg(long = "stall-limit", default_value_t = DEFAULT_STALL_LIMIT)]
    pub stall_limit: usize,
    #[arg(long, value_name = "DIR", default_value = "./out")]
    pub out: PathBuf,
    /// Write one trace CSV per run.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// CSV with a score column and a 0/1 (or true/false) label column.
    #[arg(value_name = "FILE")]
    pub scores: PathBuf,
    /// Fixed cutoff; defaults to the ROC point closest to the top-left corner.
    #[arg(long)]
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: String,
    pub train: PathBuf,
    pub test: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub datasets: Vec<DatasetSpec>,
    /// Percent values as given, in `[0, 100]`.
    pub overlook_percents: Vec<f64>,
    /// Shared settings; `overlook_probability` is set per cell.
    pub scenario: ScenarioConfig,
    pub out_dir: PathBuf,
    pub trace: bool,
}

impl ExperimentPlan {
    /// Overlook percentages paired with their probabilities.
    pub fn probabilities(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.overlook_percents.iter().map(|&p| (p, p / 100.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Run(ExperimentPlan),
    Simulate(ExperimentPlan),
    Metrics(MetricsArgs),
}

impl PartialEq for MetricsArgs {
    fn eq(&self, other: &Self) -> bool {
        self.scores == other.scores && self.cutoff == other.cutoff
    }
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> clap::Error {
    Cli::command().error(kind, msg)
}

impl ExperimentArgs {
    pub fn into_plan(self) -> Result<ExperimentPlan, clap::Error> {
        if self.name.is_empty() && self.train.is_empty() && self.test.is_empty() {
            return Err(usage_error(
                ErrorKind::MissingRequiredArgument,
                "at least one dataset is required (--train FILE --test FILE --name TEXT)",
            ));
        }
        if self.train.len() != self.name.len() || self.test.len() != self.name.len() {
            return Err(usage_error(
                ErrorKind::WrongNumberOfValues,
                format!(
                    "--train, --test and --name must be given the same number of times (got {}, {}, {})",
                    self.train.len(),
                    self.test.len(),
                    self.name.len()
                ),
            ));
        }
        if self.overlook.is_empty() {
            return Err(usage_error(ErrorKind::InvalidValue, "--overlook needs at least one percentage"));
        }
        if let Some(bad) = self.overlook.iter().find(|p| !(0.0..=100.0).contains(*p)) {
            return Err(usage_error(ErrorKind::InvalidValue, format!("overlook percentage {bad} is outside [0, 100]")));
        }
        let mut percents = self.overlook.clone();
        percents.sort_by(f64::total_cmp);
        percents.dedup();

        let scenario = ScenarioConfig {
            overlook_probability: 0.0,
            repetitions: self.reps,
            base_seed: self.seed,
            learning_mode: match self.mode {
                ModeArg::Cold => LearningMode::ColdStart,
                ModeArg::Seeded => LearningMode::SeededWithPrior,
            },
            cutoff_source: match self.cutoff_source {
                CutoffArg::Prior => CutoffSource::PriorVersion,
                CutoffArg::Accumulated => CutoffSource::Accumulated,
            },
            fs_cadence: match self.fs_cadence {
                CadenceArg::PerRebuild => FsCadence::PerRebuild,
                CadenceArg::Once => FsCadence::OnceAfterWarmup,
            },
            warmup_min_size: self.warmup,
            stall_limit: self.stall_limit,
            fit: FitOptions { lambda: self.lambda, max_iter: self.max_iter, tol: self.tol },
        };
        scenario.validate().map_err(|e| usage_error(ErrorKind::InvalidValue, e))?;

        let datasets = self
            .name
            .into_iter()
            .zip(self.train)
            .zip(self.test)
            .map(|((name, train), test)| DatasetSpec { name, train, test })
            .collect();
        Ok(ExperimentPlan { datasets, overlook_percents: percents, scenario, out_dir: self.out, trace: self.trace })
    }
}

/// Parses a full argv (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<Command, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(match cli.command {
        CliCommand::Run(args) => Command::Run(args.into_plan()?),
        CliCommand::Simulate(args) => {
            let mut plan = args.into_plan()?;
            plan.scenario.repetitions = 1;
            plan.trace = true;
            Command::Simulate(plan)
        }
        CliCommand::Metrics(args) => Command::Metrics(args),
    })
}
