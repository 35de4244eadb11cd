//! Monte Carlo checks against closed forms and independent scalar simulations.

use rand::Rng;
use rand_distr::{ChiSquared, StandardNormal};
use wishart_core::mc::{
    check_bound_dominance, check_chaos_decoupling, check_expectation, check_linear_form_std,
    check_sigma_concentration, check_sigma_lipschitz, check_wishart_decoupling, compute_sigma_x,
    empirical_sample_complexity, estimate_mean_deviation, sweep_scaling, DeviationStats,
    ThetaRule, TrialConfig,
};
use wishart_core::{
    invert_bound_for_n, DenseMatrix, Error, KappaConvention, RegularVector, RngSeed, ShapeFamily,
    ShapeMatrixSpec, SpdMatrix, WishartModel,
};

fn model(p: usize, n: usize, theta: SpdMatrix, shape: ShapeMatrixSpec) -> WishartModel {
    WishartModel::new(p, n, theta, shape).unwrap()
}

fn cfg(model: WishartModel, trials: usize, seed: u64) -> TrialConfig {
    TrialConfig::new(model, trials, RngSeed(seed)).unwrap()
}

fn zero_shape() -> ShapeMatrixSpec {
    ShapeMatrixSpec::Diagonal {
        entries: vec![0.0; 4],
    }
}

/// `|a − b| ≤ 4 √(se_a² + se_b²)`.
fn means_agree(a: &DeviationStats, b: &DeviationStats) -> bool {
    (a.mean - b.mean).abs() <= 4.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
}

#[test]
fn zero_shape_has_zero_deviation() {
    let c = cfg(model(3, 4, SpdMatrix::identity(3), zero_shape()), 10, 1);
    let s = estimate_mean_deviation(&c).unwrap();
    assert_eq!((s.mean, s.stderr), (0.0, 0.0));
}

#[test]
fn scalar_deviation_matches_chi_square_oracle() {
    let n = 64;
    let trials = 100_000;
    let c = cfg(model(1, n, SpdMatrix::identity(1), ShapeMatrixSpec::Identity), trials, 2);
    let ours = estimate_mean_deviation(&c).unwrap();
    let chi = ChiSquared::new(n as f64).unwrap();
    let mut rng = RngSeed(0xC41).rng();
    let oracle: Vec<f64> = (0..trials)
        .map(|_| (rng.sample(chi) / n as f64 - 1.0).abs())
        .collect();
    let oracle = DeviationStats::from_samples(&oracle);
    assert!(means_agree(&ours, &oracle), "{ours:?} vs {oracle:?}");
}

#[test]
fn scaling_theta_scales_deviation_exactly() {
    let base = model(3, 6, SpdMatrix::identity(3), ShapeMatrixSpec::SkewBlock);
    let scaled = base
        .with_theta(SpdMatrix::from_diagonal(&[2.5; 3]).unwrap())
        .unwrap();
    let a = estimate_mean_deviation(&cfg(base, 200, 3)).unwrap();
    let b = estimate_mean_deviation(&cfg(scaled, 200, 3)).unwrap();
    assert!((b.mean - 2.5 * a.mean).abs() <= 1e-12 * b.mean);
    assert!((b.max - 2.5 * a.max).abs() <= 1e-12 * b.max);
}

#[test]
fn stderr_halves_when_trials_quadruple() {
    let m = model(2, 8, SpdMatrix::identity(2), ShapeMatrixSpec::Identity);
    let small = estimate_mean_deviation(&cfg(m.clone(), 2000, 4)).unwrap();
    let large = estimate_mean_deviation(&cfg(m, 8000, 4)).unwrap();
    let ratio = small.stderr / large.stderr;
    assert!((ratio / 2.0 - 1.0).abs() <= 0.3, "ratio {ratio}");
}

#[test]
fn expectation_check_holds_for_spike_shape() {
    let mut entries = vec![0.0; 10];
    entries[0] = 10.0;
    let m = model(
        3,
        10,
        SpdMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap(),
        ShapeMatrixSpec::Diagonal { entries },
    );
    let r = check_expectation(&cfg(m, 20_000, 5)).unwrap();
    assert!(r.holds, "max z {}", r.max_z);
    assert_eq!(r.expected.as_slice(), &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
}

#[test]
fn dominance_examples() {
    let zero = check_bound_dominance(
        &cfg(model(2, 4, SpdMatrix::identity(2), zero_shape()), 10, 6),
        KappaConvention::Frobenius,
    )
    .unwrap();
    assert!(zero.holds);
    assert_eq!(zero.ratio, 0.0);

    let id = check_bound_dominance(
        &cfg(model(4, 32, SpdMatrix::identity(4), ShapeMatrixSpec::Identity), 2000, 7),
        KappaConvention::Frobenius,
    )
    .unwrap();
    assert!(id.holds && id.ratio < 1.0, "{id:?}");

    let skew = check_bound_dominance(
        &cfg(
            model(2, 8, SpdMatrix::from_diagonal(&[1.0, 3.0]).unwrap(), ShapeMatrixSpec::SkewBlock),
            2000,
            8,
        ),
        KappaConvention::Frobenius,
    )
    .unwrap();
    assert!(skew.holds && skew.ratio < 1.0, "{skew:?}");
}

#[test]
fn wishart_decoupling_examples() {
    let zero = check_wishart_decoupling(&cfg(model(2, 4, SpdMatrix::identity(2), zero_shape()), 10, 9))
        .unwrap();
    assert!(zero.holds);
    assert_eq!((zero.lhs.mean, zero.rhs.mean), (0.0, 0.0));

    let id = check_wishart_decoupling(&cfg(
        model(3, 16, SpdMatrix::identity(3), ShapeMatrixSpec::Identity),
        5000,
        10,
    ))
    .unwrap();
    assert!(id.holds, "{id:?}");

    let skew = check_wishart_decoupling(&cfg(
        model(2, 8, SpdMatrix::identity(2), ShapeMatrixSpec::SkewBlock),
        5000,
        11,
    ))
    .unwrap();
    assert!(skew.holds, "{skew:?}");
}

#[test]
fn chaos_with_zero_matrix_is_exactly_zero() {
    let r = check_chaos_decoupling(&[DenseMatrix::zeros(3, 3)], &SpdMatrix::identity(3), 100, RngSeed(12))
        .unwrap();
    assert_eq!((r.lhs.mean, r.rhs.mean), (0.0, 0.0));
    assert!(r.holds);
}

#[test]
fn chaos_identity_matches_scalar_oracle() {
    let trials = 100_000;
    let r = check_chaos_decoupling(&[DenseMatrix::identity(3)], &SpdMatrix::identity(3), trials, RngSeed(13))
        .unwrap();
    assert!(r.holds, "{r:?}");
    // Independent simulation of |‖Z‖² − 3| and |(Z, Z′)| for standard Z, Z′ in R³.
    let mut rng = RngSeed(0xC4A05).rng();
    let (mut lhs, mut rhs) = (Vec::with_capacity(trials), Vec::with_capacity(trials));
    for _ in 0..trials {
        let z: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let w: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        lhs.push((z.iter().map(|v| v * v).sum::<f64>() - 3.0).abs());
        rhs.push(z.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().abs());
    }
    let (lhs, rhs) = (DeviationStats::from_samples(&lhs), DeviationStats::from_samples(&rhs));
    assert!(means_agree(&r.lhs, &lhs), "{:?} vs {lhs:?}", r.lhs);
    assert!(means_agree(&r.rhs, &rhs), "{:?} vs {rhs:?}", r.rhs);
}

#[test]
fn chaos_random_family_with_correlated_theta() {
    let family: Vec<DenseMatrix> = (0..4)
        .map(|k| wishart_core::sample_standard_gaussian_matrix(3, 3, RngSeed(100 + k)))
        .collect();
    let theta = SpdMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
    let r = check_chaos_decoupling(&family, &theta, 100_000, RngSeed(14)).unwrap();
    assert!(r.holds, "{r:?}");
    assert_eq!(r.family_size, 4);
}

#[test]
fn chaos_rejects_bad_families() {
    let theta = SpdMatrix::identity(3);
    assert!(check_chaos_decoupling(&[], &theta, 10, RngSeed(0)).is_err());
    assert!(matches!(
        check_chaos_decoupling(&[DenseMatrix::identity(2)], &theta, 10, RngSeed(0)),
        Err(Error::Dimension(_))
    ));
    let many = vec![DenseMatrix::identity(3); 17];
    assert!(check_chaos_decoupling(&many, &theta, 10, RngSeed(0)).is_err());
}

#[test]
fn linear_form_std_examples() {
    let zero = check_linear_form_std(&SpdMatrix::identity(2), &[0.0, 0.0], 1000, RngSeed(15)).unwrap();
    assert_eq!((zero.sample_std, zero.target), (0.0, 0.0));
    assert!(zero.holds);

    let unit = check_linear_form_std(&SpdMatrix::identity(3), &[1.0, 0.0, 0.0], 100_000, RngSeed(16))
        .unwrap();
    assert!(unit.holds && (unit.target - 1.0).abs() < 1e-15, "{unit:?}");

    let theta = SpdMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
    let r = check_linear_form_std(&theta, &[1.0, 1.0], 100_000, RngSeed(17)).unwrap();
    assert!((r.target - 5f64.sqrt()).abs() < 1e-12);
    assert!((r.norm_bound - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!(r.holds, "{r:?}");

    assert!(matches!(
        check_linear_form_std(&theta, &[1.0], 10, RngSeed(0)),
        Err(Error::Dimension(_))
    ));
}

#[test]
fn sigma_x_closed_forms() {
    let x_mat = wishart_core::sample_standard_gaussian_matrix(3, 5, RngSeed(18));
    let e1 = [1.0, 0.0, 0.0];
    assert_eq!(compute_sigma_x(&DenseMatrix::zeros(5, 5), &x_mat, &e1).unwrap(), 0.0);
    let row = x_mat.row(0);
    let direct = 3f64.sqrt() / 5.0 * row.iter().map(|v| v * v).sum::<f64>().sqrt();
    let got = compute_sigma_x(&DenseMatrix::identity(5), &x_mat, &e1).unwrap();
    assert!((got - direct).abs() <= 1e-12 * direct);
    assert!(compute_sigma_x(&DenseMatrix::identity(5), &x_mat, &[1.0, 1.0, 0.0]).is_err());
}

#[test]
fn concentration_tails_and_mean() {
    let m = model(3, 16, SpdMatrix::identity(3), ShapeMatrixSpec::Identity);
    let x = RegularVector::basis(3, 0).unwrap().to_dense();
    let l = 3f64.sqrt() / 16.0;
    let grid: Vec<f64> = (0..5).map(|k| k as f64 * l).collect();
    let r = check_sigma_concentration(&m, &x, &grid, 100_000, RngSeed(19)).unwrap();
    assert!(r.holds, "{r:?}");
    assert!(r.asserted.iter().all(|a| *a));
    assert_eq!(r.theoretical_tails[0], 0.5);
    assert!((r.lipschitz - l).abs() < 1e-15);
    assert!((r.mean_bound - 3f64.sqrt() * 4.0 / 16.0).abs() < 1e-15);
    assert!((r.u_floor - 3.0 * 3f64.sqrt()).abs() < 1e-15);
    for (k, t) in grid.iter().enumerate() {
        let expected = 0.5 * (-(t * t) * 256.0 / (2.0 * 3.0)).exp();
        assert!((r.theoretical_tails[k] - expected).abs() <= 1e-12 * expected);
    }
}

#[test]
fn concentration_requires_whitened_model() {
    let m = model(2, 4, SpdMatrix::from_diagonal(&[1.0, 2.0]).unwrap(), ShapeMatrixSpec::Identity);
    assert!(matches!(
        check_sigma_concentration(&m, &[1.0, 0.0], &[0.0], 10, RngSeed(0)),
        Err(Error::NotWhitened)
    ));
}

#[test]
fn lipschitz_has_no_violations() {
    let m = model(3, 16, SpdMatrix::identity(3), ShapeMatrixSpec::SkewBlock);
    let x = RegularVector::new(3, vec![0, 2], vec![false, true]).unwrap().to_dense();
    let r = check_sigma_lipschitz(&m, &x, 1000, RngSeed(20)).unwrap();
    assert!(r.holds && r.violations == 0, "{r:?}");
    assert!(r.max_ratio <= r.lipschitz * (1.0 + 1e-9));
}

#[test]
fn sweep_is_reproducible_and_zero_family_degenerate() {
    let theta = SpdMatrix::identity(2);
    let a = sweep_scaling(2, &[4, 8, 16], &ShapeFamily::Identity, &theta, 200, RngSeed(21)).unwrap();
    let b = sweep_scaling(2, &[4, 8, 16], &ShapeFamily::Identity, &theta, 200, RngSeed(21)).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.slope.unwrap() < 0.0);

    let z = sweep_scaling(2, &[4, 8, 16], &ShapeFamily::Zero, &theta, 20, RngSeed(22)).unwrap();
    assert!(z.degenerate && z.slope.is_none());
    assert!(z.rows.iter().all(|r| r.stats.mean == 0.0));
}

#[test]
fn sweep_rejects_short_or_unsorted_grids() {
    let theta = SpdMatrix::identity(2);
    assert!(sweep_scaling(2, &[4, 8], &ShapeFamily::Identity, &theta, 20, RngSeed(0)).is_err());
    assert!(sweep_scaling(2, &[4, 16, 8], &ShapeFamily::Identity, &theta, 20, RngSeed(0)).is_err());
}

#[test]
fn huge_tolerance_stops_at_first_n() {
    for family in [ShapeFamily::Identity, ShapeFamily::SkewBlock] {
        let r = empirical_sample_complexity(&[2, 3], 1e6, &family, &ThetaRule::Identity, 50, RngSeed(23))
            .unwrap();
        assert!(r.rows.iter().all(|row| row.empirical_n == family.step()));
    }
}

#[test]
fn theoretical_complexity_dominates_empirical() {
    let tol = 1.5;
    let r = empirical_sample_complexity(
        &[2, 4, 8],
        tol,
        &ShapeFamily::Identity,
        &ThetaRule::Identity,
        500,
        RngSeed(24),
    )
    .unwrap();
    let mut previous = 0;
    for row in &r.rows {
        let theoretical = row.theoretical_n.expect("within the search cap");
        assert_eq!(theoretical, invert_bound_for_n(row.p, 1.0, tol, &ShapeFamily::Identity).unwrap());
        assert!(theoretical >= row.empirical_n as u64, "{row:?}");
        assert!(row.empirical_n >= previous, "{:?}", r.rows);
        previous = row.empirical_n;
    }
}

#[test]
fn complexity_rejects_nonpositive_tolerance() {
    assert!(empirical_sample_complexity(
        &[2],
        0.0,
        &ShapeFamily::Identity,
        &ThetaRule::Identity,
        10,
        RngSeed(0)
    )
    .is_err());
}
