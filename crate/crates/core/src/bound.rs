//! Closed-form bound on the expected spectral deviation of a compound Wishart
//! matrix from its mean,
//!
//! ```text
//! E‖W − W⁰‖ ≤ 24 ⌈ln 2p⌉² √p (4σ + κ√π) / n · ‖Θ‖,     σ = ‖B‖,
//! ```
//!
//! and its inversion for the sample count `n`.
//!
//! Two conventions for `κ` are in use: `κ = ‖B‖_Frob` ([`KappaConvention::Frobenius`],
//! the default, which is also what the sequence form uses with the maximum over
//! the index set) and `κ = ‖B‖_Frob / ‖B‖` ([`KappaConvention::Ratio`]). Reports
//! record which one was applied.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::wishart::{ShapeFamily, WishartModel, WishartSequenceSpec, TRACE_TOLERANCE};

/// Upper end of the sample-count search.
pub const N_CAP: u64 = 1 << 20;

const LEADING_CONSTANT: f64 = 24.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaConvention {
    /// `κ = ‖B‖_Frob`.
    #[default]
    Frobenius,
    /// `κ = ‖B‖_Frob / ‖B‖`.
    Ratio,
}

impl std::str::FromStr for KappaConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frobenius" => Ok(Self::Frobenius),
            "ratio" => Ok(Self::Ratio),
            other => Err(Error::InvalidInput(format!(
                "unknown kappa convention {other:?} (expected frobenius or ratio)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub p: usize,
    pub n: usize,
    /// `‖B‖`.
    pub sigma: f64,
    pub kappa: f64,
    /// `‖Θ‖`.
    pub theta_norm: f64,
}

impl BoundInputs {
    fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return Err(Error::InvalidInput("p and n must be positive".into()));
        }
        for (name, v) in [
            ("sigma", self.sigma),
            ("kappa", self.kappa),
            ("theta_norm", self.theta_norm),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// The bound value for these inputs.
    pub fn evaluate(&self) -> f64 {
        let lf = log_factor(self.p) as f64;
        LEADING_CONSTANT * lf * (self.p as f64).sqrt() * (4.0 * self.sigma + self.kappa * PI.sqrt())
            / self.n as f64
            * self.theta_norm
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(flatten)]
    pub inputs: BoundInputs,
    pub convention: KappaConvention,
    pub log_factor: u64,
    pub bound_value: f64,
}

impl BoundReport {
    pub fn from_inputs(inputs: BoundInputs, convention: KappaConvention) -> Result<Self> {
        inputs.validate()?;
        Ok(Self {
            inputs,
            convention,
            log_factor: log_factor(inputs.p),
            bound_value: inputs.evaluate(),
        })
    }

    /// Recomputes the bound from the stored fields.
    pub fn recompute(&self) -> f64 {
        self.inputs.evaluate()
    }
}

/// `⌈ln 2p⌉²` with the natural logarithm.
pub fn log_factor(p: usize) -> u64 {
    assert!(p >= 1, "dimension must be positive");
    let c = (2.0 * p as f64).ln().ceil() as u64;
    c * c
}

fn kappa_for(frob: f64, sigma: f64, convention: KappaConvention) -> Result<f64> {
    match convention {
        KappaConvention::Frobenius => Ok(frob),
        KappaConvention::Ratio => {
            if sigma == 0.0 {
                Err(Error::DivisionByZero(
                    "kappa = ‖B‖_Frob / ‖B‖ is undefined for B = 0".into(),
                ))
            } else {
                Ok(frob / sigma)
            }
        }
    }
}

/// Bound for a single model.
pub fn theorem1_bound(model: &WishartModel, convention: KappaConvention) -> Result<BoundReport> {
    let shape = model.shape();
    let sigma = shape.spectral_norm()?;
    let kappa = kappa_for(shape.frobenius_norm(), sigma, convention)?;
    let theta_norm = spectral_norm(model.theta().as_matrix())?;
    BoundReport::from_inputs(
        BoundInputs {
            p: model.p(),
            n: model.n(),
            sigma,
            kappa,
            theta_norm,
        },
        convention,
    )
}

/// Uniform bound over a trace-normalized sequence: `κ` and `σ` are the
/// maxima of `‖B_m‖_Frob` and `‖B_m‖` over the index set.
pub fn corollary2_bound(seq: &WishartSequenceSpec, n: usize) -> Result<BoundReport> {
    if !seq.index_set().contains(&n) {
        return Err(Error::InvalidInput(format!("n = {n} is not in the index set")));
    }
    let mut kappa: f64 = 0.0;
    let mut sigma: f64 = 0.0;
    for &m in seq.index_set() {
        let b = seq.family().realize(m)?;
        let scaled = b.trace() / m as f64;
        if (scaled - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::AssumptionViolation {
                n: m,
                scaled_trace: scaled,
                expected: 1.0,
            });
        }
        kappa = kappa.max(b.frobenius_norm());
        sigma = sigma.max(b.spectral_norm()?);
    }
    let theta_norm = spectral_norm(seq.theta().as_matrix())?;
    BoundReport::from_inputs(
        BoundInputs {
            p: seq.p(),
            n,
            sigma,
            kappa,
            theta_norm,
        },
        KappaConvention::Frobenius,
    )
}

/// Smallest `n` in the family's domain whose Frobenius-convention bound is at
/// most `tolerance`, by doubling then bisection.
///
/// The search assumes the bound decreases along the family, which holds for
/// the identity, skew-block and spike families; for random diagonal families it
/// returns a crossing point.
pub fn invert_bound_for_n(
    p: usize,
    theta_norm: f64,
    tolerance: f64,
    family: &ShapeFamily,
) -> Result<u64> {
    if tolerance.is_nan() || tolerance <= 0.0 || tolerance.is_infinite() {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    if p == 0 {
        return Err(Error::InvalidInput("p must be positive".into()));
    }
    let step = family.step() as u64;
    let bound_at = |k: u64| -> Result<f64> {
        let n = (k * step) as usize;
        let shape = family.realize(n)?;
        let inputs = BoundInputs {
            p,
            n,
            sigma: shape.spectral_norm()?,
            kappa: shape.frobenius_norm(),
            theta_norm,
        };
        Ok(BoundReport::from_inputs(inputs, KappaConvention::Frobenius)?.bound_value)
    };
    let k_cap = N_CAP / step;
    let mut hi = 1u64;
    loop {
        if bound_at(hi)? <= tolerance {
            break;
        }
        if hi == k_cap {
            return Err(Error::NotAchievable {
                cap: k_cap * step,
                value_at_cap: bound_at(k_cap)?,
            });
        }
        hi = (hi * 2).min(k_cap);
    }
    // Invariant: bound(hi) <= tol, and bound(lo) > tol whenever lo >= 1.
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound_at(mid)? <= tolerance {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi * step)
}

/// Smallest `n` with `bound ≤ tolerance` when `σ` and `κ` do not depend on `n`.
///
/// With fixed constants the bound is `C(p)/n`, so `n* = ⌈C(p)/tolerance⌉`
/// grows like `√p ⌈ln 2p⌉²` in the dimension.
pub fn min_n_for_fixed_constants(
    p: usize,
    sigma: f64,
    kappa: f64,
    theta_norm: f64,
    tolerance: f64,
) -> Result<u64> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let at_one = BoundInputs {
        p,
        n: 1,
        sigma,
        kappa,
        theta_norm,
    };
    at_one.validate()?;
    Ok(((at_one.evaluate() / tolerance).ceil() as u64).max(1))
}
