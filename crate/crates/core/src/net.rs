//! Regular vectors and discretisation certificates for the spectral norm.
//!
//! A regular vector of sparsity `s` has `s` nonzero coordinates, each equal to
//! `±1/√s`. There are `C(p, s)·2ˢ` of them and `3ᵖ − 1` in total. For any
//! `p × p` matrix `A`,
//!
//! ```text
//! max_{x,y ∈ Reg_p} (Ax, y) ≤ ‖A‖ ≤ 12 ⌈ln 2p⌉² · max_{x,y ∈ Reg_p} (Ax, y),
//! ```
//!
//! and for a δ-net `N` of the sphere, `‖A‖ ≤ (1 − δ)⁻² max_{x,y ∈ N} (Ax, y)`.
//! This module computes both right-hand sides exactly for small `p`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::log_factor;
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::matrix::{dot, norm2, DenseMatrix};

/// Largest `p` for single-level enumeration.
pub const ENUMERATION_CAP: usize = 16;
/// Largest `p` for the exhaustive outer loop of [`max_bilinear_over_regular`].
pub const BILINEAR_CAP: usize = 14;
/// Additive slack on certificate comparisons.
pub const CERTIFICATE_SLACK: f64 = 1e-9;
/// Tolerance on the unit norm of δ-net members.
pub const NET_UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegularVector {
    p: usize,
    support: Vec<usize>,
    /// `true` for a negative coordinate.
    negative: Vec<bool>,
}

impl RegularVector {
    pub fn new(p: usize, support: Vec<usize>, negative: Vec<bool>) -> Result<Self> {
        if support.is_empty() || support.len() > p {
            return Err(Error::InvalidInput(format!(
                "sparsity must lie in [1, {p}], got {}",
                support.len()
            )));
        }
        if support.len() != negative.len() {
            return Err(Error::Dimension("support and signs differ in length".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) || support[support.len() - 1] >= p {
            return Err(Error::InvalidInput(
                "support must be strictly increasing indices below p".into(),
            ));
        }
        Ok(Self {
            p,
            support,
            negative,
        })
    }

    /// The regular vector `e_i` (sparsity 1, positive sign).
    pub fn basis(p: usize, i: usize) -> Result<Self> {
        Self::new(p, vec![i], vec![false])
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// `±1` per support element.
    pub fn signs(&self) -> Vec<i8> {
        self.negative.iter().map(|&n| if n { -1 } else { 1 }).collect()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let a = 1.0 / (self.sparsity() as f64).sqrt();
        let mut v = vec![0.0; self.p];
        for (&i, &neg) in self.support.iter().zip(&self.negative) {
            v[i] = if neg { -a } else { a };
        }
        v
    }
}

/// `C(p, s)·2ˢ`.
pub fn regular_count(p: usize, s: usize) -> u128 {
    if s > p {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 0..s {
        c = c * (p - i) as u128 / (i + 1) as u128;
    }
    c << s
}

/// Iterator over `Reg_p(s)`: supports in lexicographic order, sign patterns in
/// binary order within each support.
#[derive(Clone, Debug)]
pub struct RegularVectors {
    p: usize,
    support: Vec<usize>,
    sign_bits: u32,
    done: bool,
}

impl Iterator for RegularVectors {
    type Item = RegularVector;

    fn next(&mut self) -> Option<RegularVector> {
        if self.done {
            return None;
        }
        let s = self.support.len();
        let negative = (0..s).map(|k| self.sign_bits >> k & 1 == 1).collect();
        let item = RegularVector {
            p: self.p,
            support: self.support.clone(),
            negative,
        };
        self.sign_bits += 1;
        if self.sign_bits == 1 << s {
            self.sign_bits = 0;
            self.done = !next_combination(&mut self.support, self.p);
        }
        Some(item)
    }
}

/// Advances a sorted `k`-subset of `0..p` to its lexicographic successor.
fn next_combination(c: &mut [usize], p: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < p - k + i {
            c[i] += 1;
            for j in (i + 1)..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn enumerate_regular(p: usize, s: usize) -> Result<RegularVectors> {
    if s == 0 || s > p {
        return Err(Error::InvalidInput(format!(
            "sparsity must lie in [1, {p}], got {s}"
        )));
    }
    if p > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            p,
            cap: ENUMERATION_CAP,
            count: regular_count(p, s),
        });
    }
    Ok(RegularVectors {
        p,
        support: (0..s).collect(),
        sign_bits: 0,
        done: false,
    })
}

/// Best sparsity and response value; see [`max_regular_response`].
fn best_prefix(v: &[f64], order: &mut [usize]) -> (usize, f64) {
    // Stable sort: equal magnitudes keep the lower index first.
    order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));
    let mut best = (0, f64::NEG_INFINITY);
    let mut prefix = 0.0;
    for (k, &i) in order.iter().enumerate() {
        prefix += v[i].abs();
        let s = k + 1;
        let value = prefix / (s as f64).sqrt();
        if value > best.1 {
            best = (s, value);
        }
    }
    best
}

/// `max_{y ∈ Reg_p} (v, y)` in closed form: the best `s` maximises the sum of
/// the `s` largest `|v_i|` divided by `√s`, with signs matching `v`.
pub fn max_regular_response(v: &[f64]) -> Result<(f64, RegularVector)> {
    let p = v.len();
    if p == 0 {
        return Err(Error::InvalidInput("empty vector".into()));
    }
    let mut order: Vec<usize> = (0..p).collect();
    let (s, value) = best_prefix(v, &mut order);
    let mut support = order[..s].to_vec();
    support.sort_unstable();
    let negative = support.iter().map(|&i| v[i] < 0.0).collect();
    Ok((
        value,
        RegularVector {
            p,
            support,
            negative,
        },
    ))
}

/// `max_{x,y ∈ Reg_p} (Ax, y)`, exhaustive over `x` and closed form over `y`.
///
/// `x` and `−x` give the same response, so only sign patterns with a positive
/// leading coordinate are visited.
pub fn max_bilinear_over_regular(a: &DenseMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {} x {}",
            a.rows(),
            a.cols()
        )));
    }
    let p = a.rows();
    if p > BILINEAR_CAP {
        let total: u128 = (1..=p).map(|s| regular_count(p, s)).sum();
        return Err(Error::EnumerationCap {
            p,
            cap: BILINEAR_CAP,
            count: total,
        });
    }
    let cols: Vec<Vec<f64>> = (0..p).map(|j| (0..p).map(|i| a[(i, j)]).collect()).collect();
    let best = (1u32..(1u32 << p))
        .into_par_iter()
        .map(|mask| {
            let support: Vec<usize> = (0..p).filter(|&j| mask >> j & 1 == 1).collect();
            let s = support.len();
            let scale = 1.0 / (s as f64).sqrt();
            let mut v = vec![0.0; p];
            let mut order: Vec<usize> = (0..p).collect();
            let mut best = f64::NEG_INFINITY;
            for bits in 0..(1u32 << (s - 1)) {
                v.iter_mut().for_each(|x| *x = 0.0);
                for (k, &j) in support.iter().enumerate() {
                    // Bit k−1 carries the sign of the k-th support element; the first is +.
                    let neg = k > 0 && bits >> (k - 1) & 1 == 1;
                    let c = if neg { -scale } else { scale };
                    for (vi, &aij) in v.iter_mut().zip(&cols[j]) {
                        *vi += c * aij;
                    }
                }
                for (i, slot) in order.iter_mut().enumerate() {
                    *slot = i;
                }
                best = best.max(best_prefix(&v, &mut order).1);
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetCertificate {
    pub p: usize,
    pub matrix_id: String,
    pub exact_norm: f64,
    pub reg_max: f64,
    /// `12 ⌈ln 2p⌉²`.
    pub factor: u64,
    pub holds: bool,
}

impl NetCertificate {
    /// The lower half of the sandwich, `reg_max ≤ ‖A‖`.
    pub fn lower_holds(&self) -> bool {
        self.reg_max <= self.exact_norm + CERTIFICATE_SLACK
    }
}

pub fn certify_norm_bound(a: &DenseMatrix, matrix_id: impl Into<String>) -> Result<NetCertificate> {
    let reg_max = max_bilinear_over_regular(a)?;
    let p = a.rows();
    let exact_norm = spectral_norm(a)?;
    let factor = 12 * log_factor(p);
    Ok(NetCertificate {
        p,
        matrix_id: matrix_id.into(),
        exact_norm,
        reg_max,
        factor,
        holds: exact_norm <= factor as f64 * reg_max + CERTIFICATE_SLACK,
    })
}

/// Whether net coverage was checked or taken on the caller's word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coverage {
    /// `p = 2`: coverage checked from the angular gaps.
    Verified,
    /// `p ≥ 3`: coverage asserted by the caller.
    Conditional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaNetReport {
    pub exact_norm: f64,
    pub net_max: f64,
    pub delta: f64,
    /// `(1 − δ)⁻²`.
    pub factor: f64,
    pub coverage: Coverage,
    pub holds: bool,
}

/// Checks `‖A‖ ≤ (1 − δ)⁻² max_{x,y ∈ net} (Ax, y)`.
pub fn delta_net_check(a: &DenseMatrix, delta: f64, net: &[Vec<f64>]) -> Result<DeltaNetReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !a.is_square() {
        return Err(Error::Dimension("delta-net check needs a square matrix".into()));
    }
    let p = a.rows();
    if net.is_empty() {
        return Err(Error::InvalidNet("net is empty".into()));
    }
    for (k, x) in net.iter().enumerate() {
        if x.len() != p {
            return Err(Error::InvalidNet(format!(
                "member {k} has length {}, expected {p}",
                x.len()
            )));
        }
        let norm = norm2(x);
        if (norm - 1.0).abs() > NET_UNIT_TOLERANCE {
            return Err(Error::InvalidNet(format!("member {k} has norm {norm}")));
        }
    }
    let coverage = if p == 2 {
        let radius = circle_net_radius(net);
        if radius > delta {
            return Err(Error::InvalidNet(format!(
                "net covers the circle only at radius {radius}, not {delta}"
            )));
        }
        Coverage::Verified
    } else {
        Coverage::Conditional
    };
    let images: Vec<Vec<f64>> = net.iter().map(|x| a.mul_vec(x)).collect::<Result<_>>()?;
    let net_max = images
        .iter()
        .flat_map(|ax| net.iter().map(move |y| dot(ax, y)))
        .fold(f64::NEG_INFINITY, f64::max);
    let exact_norm = spectral_norm(a)?;
    let factor = (1.0 - delta).powi(-2);
    Ok(DeltaNetReport {
        exact_norm,
        net_max,
        delta,
        factor,
        coverage,
        holds: exact_norm <= factor * net_max + CERTIFICATE_SLACK,
    })
}

/// `m` equally spaced unit vectors on the circle.
pub fn angular_net(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

/// Covering radius (Euclidean) of a finite subset of the unit circle: half the
/// largest angular gap, as a chord, `2 sin(gap/4)`.
pub fn circle_net_radius(net: &[Vec<f64>]) -> f64 {
    let mut angles: Vec<f64> = net.iter().map(|x| x[1].atan2(x[0])).collect();
    angles.sort_by(f64::total_cmp);
    let mut gap = angles[0] + 2.0 * PI - angles[angles.len() - 1];
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    2.0 * (gap / 4.0).sin()
}
