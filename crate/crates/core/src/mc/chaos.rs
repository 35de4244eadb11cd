use serde::Serialize;

use super::{config_digest, run_trials, DeviationStats, ReportHeader, INEQUALITY_MARGIN};
use crate::error::{Error, Result};
use crate::linalg::{spd_sqrt, spectral_norm};
use crate::matrix::{dot, norm2, DenseMatrix, SpdMatrix};
use crate::rng::{fill_standard_normal, RngSeed};

/// Largest family accepted by [`check_chaos_decoupling`].
pub const MAX_CHAOS_FAMILY: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChaosReport {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub family_size: usize,
    /// `sup_B |(BZ, Z) − Tr(BΘ)|`.
    pub lhs: DeviationStats,
    /// `sup_B |(BZ, Z′)|`.
    pub rhs: DeviationStats,
    pub holds: bool,
}

#[derive(Serialize)]
struct ChaosConfig<'a> {
    matrices: &'a [DenseMatrix],
    theta: &'a SpdMatrix,
    trials: usize,
    seed: RngSeed,
}

/// Draws `Z = Θ^{1/2} g` for standard `g`.
fn correlated(root: Option<&DenseMatrix>, g: Vec<f64>) -> Vec<f64> {
    match root {
        None => g,
        Some(r) => r.mul_vec(&g).expect("dimension fixed"),
    }
}

/// `E sup_B |(BZ,Z) − E(BZ,Z)| ≤ 2 E sup_B |(BZ,Z′)|` over a finite family,
/// with `E(BZ,Z) = Tr(BΘ)` exact and the suprema exact per draw.
pub fn check_chaos_decoupling(
    matrices: &[DenseMatrix],
    theta: &SpdMatrix,
    trials: usize,
    seed: RngSeed,
) -> Result<ChaosReport> {
    if matrices.is_empty() || matrices.len() > MAX_CHAOS_FAMILY {
        return Err(Error::InvalidInput(format!(
            "family size must lie in [1, {MAX_CHAOS_FAMILY}], got {}",
            matrices.len()
        )));
    }
    if trials < 2 {
        return Err(Error::InvalidInput("at least 2 trials are needed".into()));
    }
    let p = theta.p();
    if let Some(bad) = matrices.iter().find(|m| m.rows() != p || m.cols() != p) {
        return Err(Error::Dimension(format!(
            "family member is {} x {}, expected {p} x {p}",
            bad.rows(),
            bad.cols()
        )));
    }
    let root = (!theta.is_identity())
        .then(|| spd_sqrt(theta).map(SpdMatrix::into_matrix))
        .transpose()?;
    let means: Vec<f64> = matrices
        .iter()
        .map(|b| b.matmul(theta.as_matrix()).and_then(|m| m.trace()))
        .collect::<Result<_>>()?;

    let pairs = run_trials(trials, |i| {
        let mut rng = seed.child(i as u64).rng();
        let mut g = vec![0.0; p];
        let mut g2 = vec![0.0; p];
        fill_standard_normal(&mut rng, &mut g);
        fill_standard_normal(&mut rng, &mut g2);
        let z = correlated(root.as_ref(), g);
        let z2 = correlated(root.as_ref(), g2);
        let mut lhs: f64 = 0.0;
        let mut rhs: f64 = 0.0;
        for (b, mean) in matrices.iter().zip(&means) {
            let bz = b.mul_vec(&z).expect("dimension checked");
            lhs = lhs.max((dot(&bz, &z) - mean).abs());
            rhs = rhs.max(dot(&bz, &z2).abs());
        }
        (lhs, rhs)
    });
    let (l, r): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let lhs = DeviationStats::from_samples(&l);
    let rhs = DeviationStats::from_samples(&r);
    let digest = config_digest(&ChaosConfig {
        matrices,
        theta,
        trials,
        seed,
    });
    Ok(ChaosReport {
        header: ReportHeader::new("chaos", digest, seed),
        family_size: matrices.len(),
        holds: lhs.mean
            <= 2.0 * rhs.mean + INEQUALITY_MARGIN * (lhs.stderr + 2.0 * rhs.stderr),
        lhs,
        rhs,
    })
}

/// Relative margin for the standard-deviation check, in relative standard errors.
pub const STD_MARGIN: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearFormReport {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub trials: usize,
    /// `‖Θ^{1/2} a‖₂`.
    pub target: f64,
    pub sample_std: f64,
    /// `1 / √(2(N − 1))`, the relative standard error of a normal sample std.
    pub relative_stderr: f64,
    /// `‖Θ^{1/2}‖ · ‖a‖₂`.
    pub norm_bound: f64,
    pub holds: bool,
}

#[derive(Serialize)]
struct LinearFormConfig<'a> {
    theta: &'a SpdMatrix,
    a: &'a [f64],
    trials: usize,
    seed: RngSeed,
}

/// Sample standard deviation of `(a, Z)`, `Z ~ N(0, Θ)`, against `‖Θ^{1/2} a‖₂`.
pub fn check_linear_form_std(
    theta: &SpdMatrix,
    a: &[f64],
    trials: usize,
    seed: RngSeed,
) -> Result<LinearFormReport> {
    let p = theta.p();
    if a.len() != p {
        return Err(Error::Dimension(format!(
            "vector of length {} for {p} x {p} scale matrix",
            a.len()
        )));
    }
    if trials < 2 {
        return Err(Error::InvalidInput("at least 2 trials are needed".into()));
    }
    let root = spd_sqrt(theta)?.into_matrix();
    let target = norm2(&root.mul_vec(a)?);
    let norm_bound = spectral_norm(&root)? * norm2(a);
    let values = run_trials(trials, |i| {
        let mut rng = seed.child(i as u64).rng();
        let mut g = vec![0.0; p];
        fill_standard_normal(&mut rng, &mut g);
        dot(a, &root.mul_vec(&g).expect("dimension fixed"))
    });
    let sample_std = DeviationStats::from_samples(&values).std_dev();
    let relative_stderr = 1.0 / (2.0 * (trials - 1) as f64).sqrt();
    let digest = config_digest(&LinearFormConfig {
        theta,
        a,
        trials,
        seed,
    });
    Ok(LinearFormReport {
        header: ReportHeader::new("stddev", digest, seed),
        trials,
        target,
        sample_std,
        relative_stderr,
        norm_bound,
        holds: (sample_std - target).abs() <= STD_MARGIN * relative_stderr * target
            && target <= norm_bound * (1.0 + 1e-12),
    })
}
