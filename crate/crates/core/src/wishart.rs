//! Compound Wishart models `W = (1/n) X B Xᵀ` with `X = Θ^{1/2} Y`.
//!
//! Sampling always goes through the whitened form
//! `W = (1/n) Θ^{1/2} Y B Yᵀ Θ^{1/2}` with `Y` a standard Gaussian `p × n`
//! matrix. For a seed `s`, `Y` is drawn from `s.child(0)` and the independent
//! copy `Y′` used by the decoupled sampler from `s.child(1)`. The decoupled
//! matrix `W′ = (1/n) Θ^{1/2} Y′ B Yᵀ Θ^{1/2}` therefore shares its `Y` with the
//! coupled draw for the same seed.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, spd_sqrt};
use crate::matrix::{DenseMatrix, SpdMatrix};
use crate::rng::{sample_standard_gaussian_matrix, RngSeed};

pub const STREAM_Y: u64 = 0;
pub const STREAM_Y_PRIME: u64 = 1;

/// Tolerance on `|Tr(B)/n − 1|` for trace normalization.
pub const TRACE_TOLERANCE: f64 = 1e-12;

/// Declarative description of the `n × n` shape matrix `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ShapeMatrixSpec {
    Identity,
    Diagonal { entries: Vec<f64> },
    /// `[[0, I_{n/2}], [−I_{n/2}, 0]]`, n even.
    SkewBlock,
    Custom { matrix: DenseMatrix },
}

/// A realized shape matrix; structured variants stay implicit until densified.
#[derive(Clone, Debug, PartialEq)]
pub enum ShapeMatrix {
    Identity(usize),
    Diagonal(Vec<f64>),
    SkewBlock(usize),
    Dense(DenseMatrix),
}

impl ShapeMatrix {
    pub fn realize(spec: &ShapeMatrixSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("sample count n must be positive".into()));
        }
        match spec {
            ShapeMatrixSpec::Identity => Ok(ShapeMatrix::Identity(n)),
            ShapeMatrixSpec::Diagonal { entries } => {
                if entries.len() != n {
                    return Err(Error::Dimension(format!(
                        "diagonal shape has {} entries, expected n = {n}",
                        entries.len()
                    )));
                }
                if entries.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput("diagonal entries must be finite".into()));
                }
                Ok(ShapeMatrix::Diagonal(entries.clone()))
            }
            ShapeMatrixSpec::SkewBlock => {
                if !n.is_multiple_of(2) {
                    return Err(Error::ShapeParity(n));
                }
                Ok(ShapeMatrix::SkewBlock(n))
            }
            ShapeMatrixSpec::Custom { matrix } => {
                if matrix.rows() != n || matrix.cols() != n {
                    return Err(Error::Dimension(format!(
                        "custom shape is {} x {}, expected {n} x {n}",
                        matrix.rows(),
                        matrix.cols()
                    )));
                }
                Ok(ShapeMatrix::Dense(matrix.clone()))
            }
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ShapeMatrix::Identity(n) | ShapeMatrix::SkewBlock(n) => *n,
            ShapeMatrix::Diagonal(d) => d.len(),
            ShapeMatrix::Dense(m) => m.rows(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            ShapeMatrix::Identity(n) => DenseMatrix::identity(*n),
            ShapeMatrix::Diagonal(d) => {
                DenseMatrix::from_diagonal(d).expect("entries validated at realization")
            }
            ShapeMatrix::SkewBlock(n) => {
                let h = n / 2;
                let mut m = DenseMatrix::zeros(*n, *n);
                for i in 0..h {
                    m[(i, h + i)] = 1.0;
                    m[(h + i, i)] = -1.0;
                }
                m
            }
            ShapeMatrix::Dense(m) => m.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            ShapeMatrix::Identity(n) => *n as f64,
            ShapeMatrix::Diagonal(d) => d.iter().sum(),
            ShapeMatrix::SkewBlock(_) => 0.0,
            ShapeMatrix::Dense(m) => m.trace().expect("square"),
        }
    }

    /// `‖B‖`, closed form for structured variants.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(match self {
            ShapeMatrix::Identity(_) | ShapeMatrix::SkewBlock(_) => 1.0,
            ShapeMatrix::Diagonal(d) => d.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            ShapeMatrix::Dense(m) => linalg::spectral_norm(m)?,
        })
    }

    /// `‖B‖_Frob`, closed form for structured variants.
    pub fn frobenius_norm(&self) -> f64 {
        match self {
            ShapeMatrix::Identity(n) | ShapeMatrix::SkewBlock(n) => (*n as f64).sqrt(),
            ShapeMatrix::Diagonal(d) => crate::matrix::norm2(d),
            ShapeMatrix::Dense(m) => linalg::frobenius_norm(m),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ShapeMatrix::Identity(_) | ShapeMatrix::SkewBlock(_) => false,
            ShapeMatrix::Diagonal(d) => d.iter().all(|&v| v == 0.0),
            ShapeMatrix::Dense(m) => m.as_slice().iter().all(|&v| v == 0.0),
        }
    }

    /// `Y · B` for a `p × n` matrix `Y`.
    pub fn right_multiply(&self, y: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.n();
        if y.cols() != n {
            return Err(Error::Dimension(format!(
                "cannot multiply {} x {} by {n} x {n} shape",
                y.rows(),
                y.cols()
            )));
        }
        match self {
            ShapeMatrix::Identity(_) => Ok(y.clone()),
            ShapeMatrix::Diagonal(d) => {
                let mut out = y.clone();
                for i in 0..y.rows() {
                    for (j, dj) in d.iter().enumerate() {
                        out[(i, j)] *= dj;
                    }
                }
                Ok(out)
            }
            ShapeMatrix::SkewBlock(_) => {
                // Column j < h of Y·B is −Y[:, h + j]; column h + j is Y[:, j].
                let h = n / 2;
                let mut out = DenseMatrix::zeros(y.rows(), n);
                for i in 0..y.rows() {
                    for j in 0..h {
                        out[(i, j)] = -y[(i, h + j)];
                        out[(i, h + j)] = y[(i, j)];
                    }
                }
                Ok(out)
            }
            ShapeMatrix::Dense(b) => y.matmul(b),
        }
    }

    /// `B · v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if v.len() != n {
            return Err(Error::Dimension(format!(
                "vector of length {} for {n} x {n} shape",
                v.len()
            )));
        }
        Ok(match self {
            ShapeMatrix::Identity(_) => v.to_vec(),
            ShapeMatrix::Diagonal(d) => d.iter().zip(v).map(|(a, b)| a * b).collect(),
            ShapeMatrix::SkewBlock(_) => {
                let h = n / 2;
                let mut out = vec![0.0; n];
                for i in 0..h {
                    out[i] = v[h + i];
                    out[h + i] = -v[i];
                }
                out
            }
            ShapeMatrix::Dense(b) => b.mul_vec(v)?,
        })
    }
}

/// Realizes a shape specification as a dense `n × n` matrix.
pub fn build_shape(spec: &ShapeMatrixSpec, n: usize) -> Result<DenseMatrix> {
    Ok(ShapeMatrix::realize(spec, n)?.to_dense())
}

/// One compound Wishart law: dimension `p`, sample count `n`, scale `Θ`, shape `B`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WishartModel {
    p: usize,
    n: usize,
    theta: SpdMatrix,
    shape: ShapeMatrixSpec,
}

#[derive(Deserialize)]
struct RawModel {
    p: usize,
    n: usize,
    theta: SpdMatrix,
    shape: ShapeMatrixSpec,
}

impl<'de> Deserialize<'de> for WishartModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawModel::deserialize(d)?;
        WishartModel::new(raw.p, raw.n, raw.theta, raw.shape).map_err(D::Error::custom)
    }
}

impl WishartModel {
    pub fn new(p: usize, n: usize, theta: SpdMatrix, shape: ShapeMatrixSpec) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::InvalidInput("p and n must be positive".into()));
        }
        if theta.p() != p {
            return Err(Error::Dimension(format!(
                "theta is {} x {}, expected p = {p}",
                theta.p(),
                theta.p()
            )));
        }
        ShapeMatrix::realize(&shape, n)?;
        Ok(Self { p, n, theta, shape })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &SpdMatrix {
        &self.theta
    }

    pub fn shape_spec(&self) -> &ShapeMatrixSpec {
        &self.shape
    }

    pub fn shape(&self) -> ShapeMatrix {
        ShapeMatrix::realize(&self.shape, self.n).expect("validated at construction")
    }

    pub fn with_theta(&self, theta: SpdMatrix) -> Result<Self> {
        Self::new(self.p, self.n, theta, self.shape.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Model with `Θ^{1/2}` and the realized shape cached, for repeated sampling.
#[derive(Clone, Debug)]
pub struct WishartSampler {
    p: usize,
    n: usize,
    /// `None` when `Θ = I` exactly.
    theta_sqrt: Option<DenseMatrix>,
    shape: ShapeMatrix,
}

impl WishartSampler {
    pub fn new(model: &WishartModel) -> Result<Self> {
        let theta_sqrt = if model.theta.is_identity() {
            None
        } else {
            Some(spd_sqrt(&model.theta)?.into_matrix())
        };
        Ok(Self {
            p: model.p,
            n: model.n,
            theta_sqrt,
            shape: model.shape(),
        })
    }

    pub fn shape(&self) -> &ShapeMatrix {
        &self.shape
    }

    /// `(1/n) Θ^{1/2} L B Rᵀ Θ^{1/2}` for standard Gaussian `L`, `R`.
    pub fn combine(&self, left: &DenseMatrix, right: &DenseMatrix) -> Result<DenseMatrix> {
        let lb = self.shape.right_multiply(left)?;
        let core = lb.matmul_transpose(right)?.scale(1.0 / self.n as f64);
        match &self.theta_sqrt {
            None => Ok(core),
            Some(r) => r.matmul(&core)?.matmul(r),
        }
    }

    pub fn standard_draw(&self, seed: RngSeed, stream: u64) -> DenseMatrix {
        sample_standard_gaussian_matrix(self.p, self.n, seed.child(stream))
    }

    pub fn sample(&self, seed: RngSeed) -> DenseMatrix {
        let y = self.standard_draw(seed, STREAM_Y);
        self.combine(&y, &y).expect("dimensions fixed by the model")
    }

    pub fn sample_decoupled(&self, seed: RngSeed) -> DenseMatrix {
        let y = self.standard_draw(seed, STREAM_Y);
        let y_prime = self.standard_draw(seed, STREAM_Y_PRIME);
        self.combine(&y_prime, &y).expect("dimensions fixed by the model")
    }
}

pub fn sample_wishart(model: &WishartModel, seed: RngSeed) -> Result<DenseMatrix> {
    Ok(WishartSampler::new(model)?.sample(seed))
}

pub fn sample_decoupled(model: &WishartModel, seed: RngSeed) -> Result<DenseMatrix> {
    Ok(WishartSampler::new(model)?.sample_decoupled(seed))
}

/// `E(W) = (Tr B / n) · Θ`.
pub fn expected_wishart(model: &WishartModel) -> DenseMatrix {
    let scaled = model.shape().trace() / model.n as f64;
    model.theta.as_matrix().scale(scaled)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceCheck {
    pub scaled_trace: f64,
    pub normalized: bool,
}

/// `Tr(B)/n` and whether it equals 1 within [`TRACE_TOLERANCE`].
pub fn check_trace_normalization(b: &DenseMatrix, n: usize) -> Result<TraceCheck> {
    if !b.is_square() || b.rows() != n {
        return Err(Error::Dimension(format!(
            "expected {n} x {n} shape, got {} x {}",
            b.rows(),
            b.cols()
        )));
    }
    let scaled_trace = b.trace()? / n as f64;
    Ok(TraceCheck {
        scaled_trace,
        normalized: (scaled_trace - 1.0).abs() <= TRACE_TOLERANCE,
    })
}

/// Rule producing a shape specification for each sample count `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ShapeFamily {
    /// `B_n = I_n`.
    Identity,
    /// Skew-symmetric block shape; defined for even `n` only.
    SkewBlock,
    /// `B_n = 0`.
    Zero,
    /// `B_n = diag(n, 0, …, 0)`.
    Spike,
    /// Diagonal with i.i.d. uniform entries rescaled so `Tr B_n = n`.
    RandomDiagonal { seed: RngSeed },
}

impl ShapeFamily {
    /// Spacing of the family's domain: every `n` that is a multiple of `step`.
    pub fn step(&self) -> usize {
        match self {
            ShapeFamily::SkewBlock => 2,
            _ => 1,
        }
    }

    pub fn admits(&self, n: usize) -> bool {
        n > 0 && n.is_multiple_of(self.step())
    }

    pub fn shape_for(&self, n: usize) -> Result<ShapeMatrixSpec> {
        if n == 0 {
            return Err(Error::InvalidInput("sample count n must be positive".into()));
        }
        Ok(match self {
            ShapeFamily::Identity => ShapeMatrixSpec::Identity,
            ShapeFamily::SkewBlock => {
                if !n.is_multiple_of(2) {
                    return Err(Error::ShapeParity(n));
                }
                ShapeMatrixSpec::SkewBlock
            }
            ShapeFamily::Zero => ShapeMatrixSpec::Diagonal {
                entries: vec![0.0; n],
            },
            ShapeFamily::Spike => {
                let mut entries = vec![0.0; n];
                entries[0] = n as f64;
                ShapeMatrixSpec::Diagonal { entries }
            }
            ShapeFamily::RandomDiagonal { seed } => {
                use rand::Rng;
                let mut rng = seed.child(n as u64).rng();
                let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                let total: f64 = raw.iter().sum();
                let entries = raw.iter().map(|v| v * n as f64 / total).collect();
                ShapeMatrixSpec::Diagonal { entries }
            }
        })
    }

    pub fn realize(&self, n: usize) -> Result<ShapeMatrix> {
        ShapeMatrix::realize(&self.shape_for(n)?, n)
    }
}

/// A sequence `{B_n}` over an ordered index set with a common scaled trace β.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WishartSequenceSpec {
    p: usize,
    theta: SpdMatrix,
    index_set: Vec<usize>,
    family: ShapeFamily,
    beta: f64,
}

impl WishartSequenceSpec {
    /// Fails unless `Tr(B_n)/n` is the same for every `n` in `index_set`.
    pub fn new(
        p: usize,
        theta: SpdMatrix,
        index_set: Vec<usize>,
        family: ShapeFamily,
    ) -> Result<Self> {
        if theta.p() != p {
            return Err(Error::Dimension(format!("theta is not {p} x {p}")));
        }
        if index_set.is_empty() {
            return Err(Error::InvalidInput("index set must be nonempty".into()));
        }
        if index_set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("index set must be strictly increasing".into()));
        }
        let mut beta = None;
        for &n in &index_set {
            let b = family.realize(n)?;
            let scaled = b.trace() / n as f64;
            match beta {
                None => beta = Some(scaled),
                Some(beta) if (scaled - beta).abs() > TRACE_TOLERANCE => {
                    return Err(Error::AssumptionViolation {
                        n,
                        scaled_trace: scaled,
                        expected: beta,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(Self {
            p,
            theta,
            index_set,
            family,
            beta: beta.expect("nonempty index set"),
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn theta(&self) -> &SpdMatrix {
        &self.theta
    }

    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    pub fn family(&self) -> &ShapeFamily {
        &self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True when β = 1, i.e. every `W_n` has expectation `Θ`.
    pub fn is_normalized(&self) -> bool {
        (self.beta - 1.0).abs() <= TRACE_TOLERANCE
    }

    pub fn model(&self, n: usize) -> Result<WishartModel> {
        WishartModel::new(self.p, n, self.theta.clone(), self.family.shape_for(n)?)
    }
}
