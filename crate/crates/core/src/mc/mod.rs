//! Monte Carlo verification of the probabilistic statements behind the bound.
//!
//! Every check is a pure function of its configuration. Trial `i` draws from
//! `master_seed.child(stream).child(i)`, trials may run on any number of rayon
//! workers, and all reductions happen sequentially in trial order afterwards,
//! so reports are bit-identical across thread counts.
//!
//! Statistical margins: inequality checks allow 3 standard errors, equality of
//! means 4.

mod chaos;
mod concentration;
mod sweep;

pub use chaos::{check_chaos_decoupling, check_linear_form_std, ChaosReport, LinearFormReport};
pub use concentration::{
    check_sigma_concentration, check_sigma_lipschitz, compute_sigma_x, ConcentrationCheck,
    LipschitzReport,
};
pub use sweep::{
    empirical_sample_complexity, sweep_scaling, ComplexityReport, ComplexityRow, SweepReport,
    SweepRow, ThetaRule,
};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bound::{theorem1_bound, BoundReport, KappaConvention};
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::matrix::DenseMatrix;
use crate::rng::RngSeed;
use crate::wishart::{expected_wishart, WishartModel, WishartSampler};

/// Margin for one-sided inequality checks, in standard errors.
pub const INEQUALITY_MARGIN: f64 = 3.0;
/// Margin for equality-of-means checks, in standard errors.
pub const EQUALITY_MARGIN: f64 = 4.0;

pub const DEFAULT_NORM_TRIALS: usize = 2000;
pub const DEFAULT_SCALAR_TRIALS: usize = 100_000;

pub(crate) const STREAM_COUPLED: u64 = 0;
pub(crate) const STREAM_DECOUPLED: u64 = 1;

/// Seed of trial `index` within `stream`.
#[inline]
pub fn trial_seed(master: RngSeed, stream: u64, index: usize) -> RngSeed {
    master.child(stream).child(index as u64)
}

/// Maps trial indices to results in parallel; the output is in index order.
pub(crate) fn run_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

/// Short SHA-256 digest of a configuration's JSON form.
pub fn config_digest<T: Serialize + ?Sized>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configs serialize");
    Sha256::digest(&bytes)[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialConfig {
    pub model: WishartModel,
    pub trials: usize,
    pub master_seed: RngSeed,
}

impl TrialConfig {
    pub fn new(model: WishartModel, trials: usize, master_seed: RngSeed) -> Result<Self> {
        if trials < 2 {
            return Err(Error::InvalidInput(format!(
                "at least 2 trials are needed for a standard error, got {trials}"
            )));
        }
        Ok(Self {
            model,
            trials,
            master_seed,
        })
    }

    pub fn digest(&self) -> String {
        config_digest(self)
    }
}

/// Common identifying fields of every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportHeader {
    pub check_name: String,
    pub config_digest: String,
    pub master_seed: RngSeed,
}

impl ReportHeader {
    pub(crate) fn new(name: &str, digest: String, master_seed: RngSeed) -> Self {
        Self {
            check_name: name.to_owned(),
            config_digest: digest,
            master_seed,
        }
    }
}

/// Mean, standard error (`sd / √N`) and maximum of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeviationStats {
    pub mean: f64,
    pub stderr: f64,
    pub max: f64,
    pub trials: usize,
}

impl DeviationStats {
    /// Sequential reduction; needs at least two samples.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n >= 2, "standard error needs at least two samples");
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            max,
            trials: n,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.stderr * (self.trials as f64).sqrt()
    }
}

fn deviation_samples(cfg: &TrialConfig) -> Result<Vec<f64>> {
    let sampler = WishartSampler::new(&cfg.model)?;
    let mean = expected_wishart(&cfg.model);
    run_trials(cfg.trials, |i| {
        let w = sampler.sample(trial_seed(cfg.master_seed, STREAM_COUPLED, i));
        spectral_norm(&w.sub(&mean)?)
    })
    .into_iter()
    .collect()
}

fn decoupled_samples(cfg: &TrialConfig) -> Result<Vec<f64>> {
    let sampler = WishartSampler::new(&cfg.model)?;
    run_trials(cfg.trials, |i| {
        spectral_norm(&sampler.sample_decoupled(trial_seed(cfg.master_seed, STREAM_DECOUPLED, i)))
    })
    .into_iter()
    .collect()
}

/// Statistics of `‖W_i − E W‖` over the configured trials.
pub fn estimate_mean_deviation(cfg: &TrialConfig) -> Result<DeviationStats> {
    Ok(DeviationStats::from_samples(&deviation_samples(cfg)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationReport {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub trials: usize,
    pub expected: DenseMatrix,
    pub mean: DenseMatrix,
    pub stderr: DenseMatrix,
    /// Largest `|mean − expected| / stderr` over entries with positive stderr.
    pub max_z: f64,
    pub holds: bool,
}

/// Entrywise Monte Carlo mean of `W` against `(Tr B / n) Θ`.
pub fn check_expectation(cfg: &TrialConfig) -> Result<ExpectationReport> {
    let sampler = WishartSampler::new(&cfg.model)?;
    let expected = expected_wishart(&cfg.model);
    let draws = run_trials(cfg.trials, |i| {
        sampler.sample(trial_seed(cfg.master_seed, STREAM_COUPLED, i))
    });
    let p = cfg.model.p();
    let mut mean = DenseMatrix::zeros(p, p);
    let mut stderr = DenseMatrix::zeros(p, p);
    let mut max_z: f64 = 0.0;
    let mut holds = true;
    for i in 0..p {
        for j in 0..p {
            let xs: Vec<f64> = draws.iter().map(|w| w[(i, j)]).collect();
            let stats = DeviationStats::from_samples(&xs);
            let diff = (stats.mean - expected[(i, j)]).abs();
            if diff > EQUALITY_MARGIN * stats.stderr {
                holds = false;
            }
            if stats.stderr > 0.0 {
                max_z = max_z.max(diff / stats.stderr);
            }
            mean[(i, j)] = stats.mean;
            stderr[(i, j)] = stats.stderr;
        }
    }
    Ok(ExpectationReport {
        header: ReportHeader::new("expectation", cfg.digest(), cfg.master_seed),
        trials: cfg.trials,
        expected,
        mean,
        stderr,
        max_z,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceReport {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub empirical: DeviationStats,
    pub bound: BoundReport,
    /// `empirical.mean / bound_value` (0 when the mean is 0).
    pub ratio: f64,
    pub holds: bool,
}

/// `mean + 3·stderr ≤ bound`.
pub fn check_bound_dominance(
    cfg: &TrialConfig,
    convention: KappaConvention,
) -> Result<DominanceReport> {
    let bound = theorem1_bound(&cfg.model, convention)?;
    let empirical = estimate_mean_deviation(cfg)?;
    let ratio = if empirical.mean == 0.0 {
        0.0
    } else {
        empirical.mean / bound.bound_value
    };
    Ok(DominanceReport {
        header: ReportHeader::new("dominance", cfg.digest(), cfg.master_seed),
        holds: empirical.mean + INEQUALITY_MARGIN * empirical.stderr <= bound.bound_value,
        empirical,
        bound,
        ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecouplingReport {
    #[serde(flatten)]
    pub header: ReportHeader,
    /// `‖W − W⁰‖`.
    pub lhs: DeviationStats,
    /// `‖W′‖`.
    pub rhs: DeviationStats,
    pub holds: bool,
}

/// `E‖W − W⁰‖ ≤ 2 E‖W′‖`, with the two sides on independent streams.
pub fn check_wishart_decoupling(cfg: &TrialConfig) -> Result<DecouplingReport> {
    let lhs = DeviationStats::from_samples(&deviation_samples(cfg)?);
    let rhs = DeviationStats::from_samples(&decoupled_samples(cfg)?);
    let margin = INEQUALITY_MARGIN * (lhs.stderr + 2.0 * rhs.stderr);
    Ok(DecouplingReport {
        header: ReportHeader::new("decoupling", cfg.digest(), cfg.master_seed),
        holds: lhs.mean <= 2.0 * rhs.mean + margin,
        lhs,
        rhs,
    })
}
