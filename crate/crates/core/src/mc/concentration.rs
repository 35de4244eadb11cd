//! Concentration of `σ_x(X) = (√p / n) ‖B Xᵀ x‖₂` for standard Gaussian `X`.
//!
//! `E σ_x ≤ √p ‖B‖_Frob / n`, `σ_x` is `√p ‖B‖ / n`-Lipschitz in `X` (Frobenius
//! metric), and
//! `P(σ_x ≥ √p ‖B‖_Frob / n + t) ≤ ½ exp(−t² n² / (2 p ‖B‖²))`.

use serde::Serialize;

use super::{config_digest, run_trials, DeviationStats, ReportHeader, INEQUALITY_MARGIN};
use crate::error::{Error, Result};
use crate::matrix::{norm2, DenseMatrix};
use crate::rng::{sample_standard_gaussian_matrix, RngSeed};
use crate::wishart::{ShapeMatrix, WishartModel};

const UNIT_TOLERANCE: f64 = 1e-9;
/// Tails below `MIN_TAIL_COUNT / N` are reported but not asserted.
pub const MIN_TAIL_COUNT: f64 = 10.0;

fn check_unit(x: &[f64]) -> Result<()> {
    let norm = norm2(x);
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::InvalidInput(format!("x must be a unit vector, has norm {norm}")));
    }
    Ok(())
}

fn sigma_x_shape(shape: &ShapeMatrix, x_mat: &DenseMatrix, x: &[f64]) -> Result<f64> {
    let n = shape.n();
    if x_mat.cols() != n || x_mat.rows() != x.len() {
        return Err(Error::Dimension(format!(
            "X is {} x {}, expected {} x {n}",
            x_mat.rows(),
            x_mat.cols(),
            x.len()
        )));
    }
    let p = x.len() as f64;
    let xt_x = x_mat.transpose_mul_vec(x)?;
    Ok(p.sqrt() / n as f64 * norm2(&shape.mul_vec(&xt_x)?))
}

/// `σ_x(X) = (√p / n) ‖B Xᵀ x‖₂` for `B` `n × n`, `X` `p × n`, unit `x`.
pub fn compute_sigma_x(b: &DenseMatrix, x_mat: &DenseMatrix, x: &[f64]) -> Result<f64> {
    if !b.is_square() {
        return Err(Error::Dimension("B must be square".into()));
    }
    check_unit(x)?;
    sigma_x_shape(&ShapeMatrix::Dense(b.clone()), x_mat, x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationCheck {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub trials: usize,
    pub x: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// `√p ‖B‖ / n`.
    pub lipschitz: f64,
    /// `√p ‖B‖_Frob / n`.
    pub mean_bound: f64,
    /// `3√p`, the smallest admissible deviation multiplier in the union bound.
    pub u_floor: f64,
    pub empirical_tails: Vec<f64>,
    pub theoretical_tails: Vec<f64>,
    pub binomial_stderr: Vec<f64>,
    /// Whether each grid point was asserted (theoretical tail ≥ 10/N).
    pub asserted: Vec<bool>,
    pub sigma_stats: DeviationStats,
    pub mean_holds: bool,
    pub tails_hold: bool,
    pub holds: bool,
}

#[derive(Serialize)]
struct ConcentrationConfig<'a> {
    model: &'a WishartModel,
    x: &'a [f64],
    t_grid: &'a [f64],
    trials: usize,
    seed: RngSeed,
}

/// `½ exp(−t² n² / (2 p ‖B‖²))`.
pub fn theoretical_tail(t: f64, p: usize, n: usize, b_norm: f64) -> f64 {
    let (p, n) = (p as f64, n as f64);
    0.5 * (-(t * t) * n * n / (2.0 * p * b_norm * b_norm)).exp()
}

fn whitened_shape(model: &WishartModel) -> Result<(ShapeMatrix, f64)> {
    if !model.theta().is_identity_within(1e-12) {
        return Err(Error::NotWhitened);
    }
    let shape = model.shape();
    let b_norm = shape.spectral_norm()?;
    if b_norm == 0.0 {
        return Err(Error::InvalidInput(
            "sigma_x is identically zero for B = 0; nothing to concentrate".into(),
        ));
    }
    Ok((shape, b_norm))
}

/// Empirical tails of `σ_x(X)` above its mean bound against the Gaussian
/// concentration tail, plus the mean bound itself.
pub fn check_sigma_concentration(
    model: &WishartModel,
    x: &[f64],
    t_grid: &[f64],
    trials: usize,
    seed: RngSeed,
) -> Result<ConcentrationCheck> {
    let (shape, b_norm) = whitened_shape(model)?;
    let (p, n) = (model.p(), model.n());
    if x.len() != p {
        return Err(Error::Dimension(format!("x has length {}, expected {p}", x.len())));
    }
    check_unit(x)?;
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidInput("t grid must be finite and nonnegative".into()));
    }
    if trials < 2 {
        return Err(Error::InvalidInput("at least 2 trials are needed".into()));
    }
    let root_p = (p as f64).sqrt();
    let lipschitz = root_p * b_norm / n as f64;
    let mean_bound = root_p * shape.frobenius_norm() / n as f64;

    let sigmas: Vec<f64> = run_trials(trials, |i| {
        let x_mat = sample_standard_gaussian_matrix(p, n, seed.child(i as u64));
        sigma_x_shape(&shape, &x_mat, x)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let nf = trials as f64;
    let mut empirical_tails = Vec::with_capacity(t_grid.len());
    let mut theoretical_tails = Vec::with_capacity(t_grid.len());
    let mut binomial_stderr = Vec::with_capacity(t_grid.len());
    let mut asserted = Vec::with_capacity(t_grid.len());
    let mut tails_hold = true;
    for &t in t_grid {
        let level = mean_bound + t;
        let hits = sigmas.iter().filter(|&&s| s >= level).count();
        let empirical = hits as f64 / nf;
        let theoretical = theoretical_tail(t, p, n, b_norm);
        let se = (theoretical * (1.0 - theoretical) / nf).sqrt();
        let checked = theoretical >= MIN_TAIL_COUNT / nf;
        if checked && empirical > theoretical + INEQUALITY_MARGIN * se {
            tails_hold = false;
        }
        empirical_tails.push(empirical);
        theoretical_tails.push(theoretical);
        binomial_stderr.push(se);
        asserted.push(checked);
    }
    let sigma_stats = DeviationStats::from_samples(&sigmas);
    let mean_holds = sigma_stats.mean <= mean_bound + INEQUALITY_MARGIN * sigma_stats.stderr;
    let digest = config_digest(&ConcentrationConfig {
        model,
        x,
        t_grid,
        trials,
        seed,
    });
    Ok(ConcentrationCheck {
        header: ReportHeader::new("concentration", digest, seed),
        trials,
        x: x.to_vec(),
        t_grid: t_grid.to_vec(),
        lipschitz,
        mean_bound,
        u_floor: 3.0 * root_p,
        empirical_tails,
        theoretical_tails,
        binomial_stderr,
        asserted,
        sigma_stats,
        mean_holds,
        tails_hold,
        holds: mean_holds && tails_hold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzReport {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub pairs: usize,
    pub lipschitz: f64,
    /// Largest `|σ_x(X₁) − σ_x(X₂)| / ‖X₁ − X₂‖_Frob` observed.
    pub max_ratio: f64,
    pub violations: usize,
    pub holds: bool,
}

/// Relative size of the perturbation used for the near pairs.
const NEAR_PAIR_SCALE: f64 = 1e-3;

/// `|σ_x(X₁) − σ_x(X₂)| ≤ (√p ‖B‖ / n) ‖X₁ − X₂‖_Frob` on seeded pairs.
///
/// Even-indexed pairs are independent draws; odd-indexed pairs perturb `X₁` by
/// a small Gaussian step, which probes the local slope.
pub fn check_sigma_lipschitz(
    model: &WishartModel,
    x: &[f64],
    pairs: usize,
    seed: RngSeed,
) -> Result<LipschitzReport> {
    let shape = model.shape();
    let (p, n) = (model.p(), model.n());
    if x.len() != p {
        return Err(Error::Dimension(format!("x has length {}, expected {p}", x.len())));
    }
    check_unit(x)?;
    let lipschitz = (p as f64).sqrt() * shape.spectral_norm()? / n as f64;
    let ratios: Vec<(f64, bool)> = run_trials(pairs, |k| {
        let pair_seed = seed.child(k as u64);
        let x1 = sample_standard_gaussian_matrix(p, n, pair_seed.child(0));
        let g = sample_standard_gaussian_matrix(p, n, pair_seed.child(1));
        let x2 = if k % 2 == 0 {
            g
        } else {
            x1.add(&g.scale(NEAR_PAIR_SCALE)).expect("same shape")
        };
        let s1 = sigma_x_shape(&shape, &x1, x).expect("dimensions checked");
        let s2 = sigma_x_shape(&shape, &x2, x).expect("dimensions checked");
        let dist = crate::linalg::frobenius_norm(&x1.sub(&x2).expect("same shape"));
        let diff = (s1 - s2).abs();
        let ratio = if dist > 0.0 { diff / dist } else { 0.0 };
        (ratio, diff > lipschitz * dist * (1.0 + 1e-12))
    });
    let violations = ratios.iter().filter(|r| r.1).count();
    let max_ratio = ratios.iter().map(|r| r.0).fold(0.0, f64::max);
    #[derive(Serialize)]
    struct Cfg<'a> {
        model: &'a WishartModel,
        x: &'a [f64],
        pairs: usize,
        seed: RngSeed,
    }
    let digest = config_digest(&Cfg {
        model,
        x,
        pairs,
        seed,
    });
    Ok(LipschitzReport {
        header: ReportHeader::new("lipschitz", digest, seed),
        pairs,
        lipschitz,
        max_ratio,
        violations,
        holds: violations == 0,
    })
}
