//! Simulation, deviation bounds and numerical verification for real compound
//! Wishart matrices `W = (1/n) X B Xᵀ`, where the columns of the `p × n`
//! matrix `X` are i.i.d. `N(0, Θ)` and `B` is an arbitrary real `n × n`
//! shape matrix.
//!
//! The crate is organised bottom-up:
//!
//! * [`matrix`], [`linalg`], [`rng`]: dense kernels and seeded Gaussian sampling.
//! * [`wishart`]: shape matrices, coupled/decoupled samplers, exact expectations.
//! * [`bound`]: the closed-form bound on `E‖W − EW‖` and its inversion in `n`.
//! * [`net`]: regular vectors and discretisation certificates for the spectral norm.
//! * [`mc`]: Monte Carlo checks of every probabilistic inequality used by the bound.
//!
//! Every random quantity is a pure function of an explicit [`RngSeed`];
//! parallel Monte Carlo loops reduce in trial order, so results do not depend
//! on the number of worker threads.

pub mod bound;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod mc;
pub mod net;
pub mod rng;
pub mod wishart;

pub use bound::{
    corollary2_bound, invert_bound_for_n, log_factor, theorem1_bound, BoundInputs, BoundReport,
    KappaConvention,
};
pub use error::{Error, Result};
pub use linalg::{frobenius_norm, spd_sqrt, spectral_norm};
pub use matrix::{DenseMatrix, SpdMatrix};
pub use net::{
    certify_norm_bound, delta_net_check, enumerate_regular, max_bilinear_over_regular,
    max_regular_response, NetCertificate, RegularVector,
};
pub use rng::{sample_standard_gaussian_matrix, RngSeed};
pub use wishart::{
    build_shape, check_trace_normalization, expected_wishart, sample_decoupled, sample_wishart,
    ShapeFamily, ShapeMatrix, ShapeMatrixSpec, WishartModel, WishartSampler, WishartSequenceSpec,
};
