//! Sweeps over `n` and `p`: deviation rate in `n` and empirical sample complexity.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{config_digest, estimate_mean_deviation, DeviationStats, ReportHeader, TrialConfig};
use crate::bound::{invert_bound_for_n, theorem1_bound, KappaConvention, N_CAP};
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::matrix::SpdMatrix;
use crate::rng::RngSeed;
use crate::wishart::{ShapeFamily, WishartModel};

/// Rule giving the scale matrix for each dimension `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ThetaRule {
    Identity,
    /// `diag(1, 2, …, p)`.
    LinearDiagonal,
}

impl ThetaRule {
    pub fn theta(&self, p: usize) -> SpdMatrix {
        match self {
            ThetaRule::Identity => SpdMatrix::identity(p),
            ThetaRule::LinearDiagonal => {
                let d: Vec<f64> = (1..=p).map(|i| i as f64).collect();
                SpdMatrix::from_diagonal(&d).expect("positive diagonal")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: usize,
    pub n: usize,
    pub stats: DeviationStats,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub p: usize,
    pub family: ShapeFamily,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `ln mean` against `ln n`; `None` when degenerate.
    pub slope: Option<f64>,
    pub degenerate: bool,
}

impl SweepReport {
    /// CSV with columns `p,n,mean,stderr,bound,ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,n,mean,stderr,bound,ratio\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.p, r.n, r.stats.mean, r.stats.stderr, r.bound, r.ratio
            )
            .expect("writing to a String cannot fail");
        }
        out
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Serialize)]
struct SweepConfig<'a> {
    p: usize,
    n_grid: &'a [usize],
    family: &'a ShapeFamily,
    theta: &'a SpdMatrix,
    trials: usize,
    seed: RngSeed,
}

/// Mean deviation for every `n` in `n_grid` and the fitted log-log slope.
pub fn sweep_scaling(
    p: usize,
    n_grid: &[usize],
    family: &ShapeFamily,
    theta: &SpdMatrix,
    trials: usize,
    seed: RngSeed,
) -> Result<SweepReport> {
    if n_grid.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "n grid needs at least 3 points, got {}",
            n_grid.len()
        )));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("n grid must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let model = WishartModel::new(p, n, theta.clone(), family.shape_for(n)?)?;
        let bound = theorem1_bound(&model, KappaConvention::Frobenius)?.bound_value;
        let cfg = TrialConfig::new(model, trials, seed.child(n as u64))?;
        let stats = estimate_mean_deviation(&cfg)?;
        let ratio = if stats.mean == 0.0 { 0.0 } else { stats.mean / bound };
        rows.push(SweepRow {
            p,
            n,
            stats,
            bound,
            ratio,
        });
    }
    let degenerate = rows.iter().any(|r| r.stats.mean <= 0.0);
    let slope = (!degenerate).then(|| {
        let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.stats.mean.ln()).collect();
        least_squares_slope(&x, &y)
    });
    let digest = config_digest(&SweepConfig {
        p,
        n_grid,
        family,
        theta,
        trials,
        seed,
    });
    Ok(SweepReport {
        header: ReportHeader::new("sweep", digest, seed),
        p,
        family: family.clone(),
        rows,
        slope,
        degenerate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub p: usize,
    /// First `n` of the doubling search with `mean + 2·stderr ≤ tolerance`.
    pub empirical_n: usize,
    pub empirical: DeviationStats,
    /// Minimal `n` at which the bound itself reaches the tolerance;
    /// `None` when that exceeds the search cap.
    pub theoretical_n: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityReport {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub tolerance: f64,
    pub family: ShapeFamily,
    pub rows: Vec<ComplexityRow>,
}

impl ComplexityReport {
    /// CSV with columns `p,empirical_n,mean,stderr,theoretical_n`; the last
    /// column is empty when the bound's own search exceeded the cap.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,empirical_n,mean,stderr,theoretical_n\n");
        for r in &self.rows {
            let theoretical = r.theoretical_n.map(|n| n.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                r.p, r.empirical_n, r.empirical.mean, r.empirical.stderr, theoretical
            )
            .expect("writing to a String cannot fail");
        }
        out
    }
}

#[derive(Serialize)]
struct ComplexityConfig<'a> {
    p_grid: &'a [usize],
    tolerance: f64,
    family: &'a ShapeFamily,
    theta_rule: &'a ThetaRule,
    trials: usize,
    seed: RngSeed,
}

/// Doubling search, per `p`, for the first `n` whose empirical mean deviation
/// is within `tolerance` at two standard errors, next to the `n` implied by
/// the bound.
pub fn empirical_sample_complexity(
    p_grid: &[usize],
    tolerance: f64,
    family: &ShapeFamily,
    theta_rule: &ThetaRule,
    trials: usize,
    seed: RngSeed,
) -> Result<ComplexityReport> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    if p_grid.is_empty() {
        return Err(Error::InvalidInput("p grid must be nonempty".into()));
    }
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let theta = theta_rule.theta(p);
        let mut n = family.step();
        let (empirical_n, empirical) = loop {
            let model = WishartModel::new(p, n, theta.clone(), family.shape_for(n)?)?;
            let cfg = TrialConfig::new(model, trials, seed.child(p as u64).child(n as u64))?;
            let stats = estimate_mean_deviation(&cfg)?;
            if stats.mean + 2.0 * stats.stderr <= tolerance {
                break (n, stats);
            }
            if (2 * n) as u64 > N_CAP {
                return Err(Error::NotAchievable {
                    cap: N_CAP,
                    value_at_cap: stats.mean,
                });
            }
            n *= 2;
        };
        let theta_norm = spectral_norm(theta.as_matrix())?;
        let theoretical_n = match invert_bound_for_n(p, theta_norm, tolerance, family) {
            Ok(n) => Some(n),
            Err(Error::NotAchievable { .. }) => None,
            Err(e) => return Err(e),
        };
        rows.push(ComplexityRow {
            p,
            empirical_n,
            empirical,
            theoretical_n,
        });
    }
    let digest = config_digest(&ComplexityConfig {
        p_grid,
        tolerance,
        family,
        theta_rule,
        trials,
        seed,
    });
    Ok(ComplexityReport {
        header: ReportHeader::new("complexity", digest, seed),
        tolerance,
        family: family.clone(),
        rows,
    })
}
