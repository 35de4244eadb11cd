//! `wishart`: reproducible, file-driven experiments on compound Wishart matrices.
//!
//! Exit codes: 0 when every check holds, 1 when a check fails, 2 for usage or
//! configuration errors, 3 when an enumeration or search cap is exceeded.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wishart_core::mc::ThetaRule;
use wishart_core::{KappaConvention, RngSeed, ShapeFamily, SpdMatrix};

use crate::config::{CommandName, ExperimentConfig, OutputFormat, SweepMode};
use crate::error::{CliError, CliResult};

const THREADS_VAR: &str = "WISHART_THREADS";

#[derive(Parser, Debug)]
#[command(name = "wishart", version, about = "Compound Wishart sampling, bounds and verification")]
struct Cli {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed for all randomness.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Number of Monte Carlo trials (or sampled matrices).
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Convention for the Frobenius-type constant in the bound.
    #[arg(long, global = true, value_enum)]
    convention: Option<ConventionArg>,

    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConventionArg {
    Frobenius,
    Ratio,
}

impl From<ConventionArg> for KappaConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Frobenius => KappaConvention::Frobenius,
            ConventionArg::Ratio => KappaConvention::Ratio,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Identity,
    SkewBlock,
    Zero,
    Spike,
    RandomDiagonal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ThetaRuleArg {
    Identity,
    LinearDiagonal,
}

#[derive(Args, Debug, Default)]
struct ModelArg {
    /// Model JSON file with fields p, n, theta, shape.
    #[arg(long = "model", value_name = "PATH")]
    model_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample W (and optionally the decoupled W') into numbered files.
    Sample {
        #[command(flatten)]
        model: ModelArg,
        /// Also write the decoupled counterpart sharing the same Y.
        #[arg(long)]
        decoupled: bool,
    },
    /// Print the deviation bound for a model.
    Bound {
        #[command(flatten)]
        model: ModelArg,
    },
    /// Run a named Monte Carlo check.
    Verify {
        /// expectation | dominance | decoupling | chaos | stddev | concentration
        check: Option<String>,
        #[command(flatten)]
        model: ModelArg,
        /// Matrix JSON file of the chaos family (repeatable).
        #[arg(long = "matrix", value_name = "PATH")]
        matrices: Vec<PathBuf>,
        /// Diagonal scale matrix for chaos and stddev, comma separated.
        #[arg(long, value_delimiter = ',', value_name = "D1,D2,...")]
        theta_diag: Option<Vec<f64>>,
        /// Vector a for stddev, unit vector x for concentration.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        vector: Option<Vec<f64>>,
        /// Deviation levels t for concentration.
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
        /// Lipschitz pairs for concentration.
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Certify spectral norms of matrix files through regular vectors.
    Netcert {
        /// Matrix JSON files.
        matrices: Vec<PathBuf>,
    },
    /// Deviation sweeps over n, or empirical sample complexity over p.
    Sweep {
        mode: Option<SweepMode>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<usize>>,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        /// Seed of the random-diagonal family.
        #[arg(long)]
        family_seed: Option<u64>,
        #[arg(long, value_enum)]
        theta_rule: Option<ThetaRuleArg>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn nonempty<T>(v: Vec<T>) -> Option<Vec<T>> {
    (!v.is_empty()).then_some(v)
}

impl Cli {
    /// The part of the configuration set on the command line.
    fn flag_config(self) -> CliResult<ExperimentConfig> {
        let mut c = ExperimentConfig {
            seed: self.seed,
            trials: self.trials,
            out: self.out,
            convention: self.convention.map(Into::into),
            format: self.format,
            ..Default::default()
        };
        let Some(command) = self.command else {
            return Ok(c);
        };
        match command {
            Command::Sample { model, decoupled } => {
                c.command = Some(CommandName::Sample);
                c.model_file = model.model_file;
                c.decoupled = decoupled.then_some(true);
            }
            Command::Bound { model } => {
                c.command = Some(CommandName::Bound);
                c.model_file = model.model_file;
            }
            Command::Verify {
                check,
                model,
                matrices,
                theta_diag,
                vector,
                t_grid,
                pairs,
            } => {
                c.command = Some(CommandName::Verify);
                c.check = check;
                c.model_file = model.model_file;
                c.matrices = nonempty(matrices);
                c.theta = theta_diag
                    .map(|d| SpdMatrix::from_diagonal(&d))
                    .transpose()
                    .map_err(|e| CliError::usage(format!("--theta-diag: {e}")))?;
                c.vector = vector;
                c.t_grid = t_grid;
                c.pairs = pairs;
            }
            Command::Netcert { matrices } => {
                c.command = Some(CommandName::Netcert);
                c.matrices = nonempty(matrices);
            }
            Command::Sweep {
                mode,
                p,
                n_grid,
                p_grid,
                family,
                family_seed,
                theta_rule,
                tolerance,
            } => {
                c.command = Some(CommandName::Sweep);
                c.mode = mode;
                c.p = p;
                c.n_grid = n_grid;
                c.p_grid = p_grid;
                c.family = family.map(|f| match f {
                    FamilyArg::Identity => ShapeFamily::Identity,
                    FamilyArg::SkewBlock => ShapeFamily::SkewBlock,
                    FamilyArg::Zero => ShapeFamily::Zero,
                    FamilyArg::Spike => ShapeFamily::Spike,
                    FamilyArg::RandomDiagonal => ShapeFamily::RandomDiagonal {
                        seed: RngSeed(family_seed.unwrap_or(0)),
                    },
                });
                c.theta_rule = theta_rule.map(|r| match r {
                    ThetaRuleArg::Identity => ThetaRule::Identity,
                    ThetaRuleArg::LinearDiagonal => ThetaRule::LinearDiagonal,
                });
                c.tolerance = tolerance;
            }
        }
        Ok(c)
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot configure {threads} worker threads: {e}")))
}

fn run(cli: Cli) -> CliResult<bool> {
    configure_threads()?;
    let file = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let cfg = file.overlay(cli.flag_config()?);
    commands::run(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
