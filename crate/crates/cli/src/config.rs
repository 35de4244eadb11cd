//! Experiment configuration: a JSON file with a `command` field, overridden
//! field by field by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wishart_core::mc::ThetaRule;
use wishart_core::{KappaConvention, ShapeFamily, SpdMatrix, WishartModel};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Sample,
    Bound,
    Verify,
    Netcert,
    Sweep,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Scaling,
    Complexity,
}

/// Every parameter any command reads. Unset fields fall back to per-command
/// defaults; fields a command does not use are ignored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<CommandName>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub convention: Option<KappaConvention>,
    pub format: Option<OutputFormat>,
    /// Inline model; `model_file` takes precedence when both are present.
    pub model: Option<WishartModel>,
    pub model_file: Option<PathBuf>,
    pub decoupled: Option<bool>,
    pub check: Option<String>,
    /// Matrix JSON files: the chaos family for `verify chaos`, the inputs for `netcert`.
    pub matrices: Option<Vec<PathBuf>>,
    /// Scale matrix for `verify chaos` and `verify stddev`.
    pub theta: Option<SpdMatrix>,
    /// `a` for `verify stddev`, `x` for `verify concentration`.
    pub vector: Option<Vec<f64>>,
    pub t_grid: Option<Vec<f64>>,
    /// Lipschitz pairs for `verify concentration`.
    pub pairs: Option<usize>,
    pub mode: Option<SweepMode>,
    pub p: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub p_grid: Option<Vec<usize>>,
    pub family: Option<ShapeFamily>,
    pub theta_rule: Option<ThetaRule>,
    pub tolerance: Option<f64>,
}

/// `field = override.field.or(field)` for every listed field.
macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: invalid config: {e}", path.display())))
    }

    /// Values set in `top` win over values in `self`.
    pub fn overlay(mut self, top: ExperimentConfig) -> Self {
        if top.model_file.is_some() {
            self.model = None;
        }
        if top.model.is_some() {
            self.model_file = None;
        }
        overlay!(self, top;
            command, seed, trials, out, convention, format, model, model_file,
            decoupled, check, matrices, theta, vector, t_grid, pairs, mode, p,
            n_grid, p_grid, family, theta_rule, tolerance,
        );
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }

    pub fn convention(&self) -> KappaConvention {
        self.convention.unwrap_or_default()
    }

    /// The model from `model_file` or the inline `model`.
    pub fn model(&self) -> CliResult<WishartModel> {
        if let Some(path) = &self.model_file {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            return WishartModel::from_json(&text).map_err(|e| {
                CliError::usage(format!("{}: invalid model: {e}", path.display()))
            });
        }
        self.model
            .clone()
            .ok_or_else(|| CliError::usage("no model given: pass --model PATH or set \"model\""))
    }

    pub fn require<'a, T>(field: &'a Option<T>, name: &str) -> CliResult<&'a T> {
        field
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("missing required parameter `{name}`")))
    }
}
