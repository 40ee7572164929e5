use proptest::prelude::*;
use varmatch::{
    check_pd, f_map, homotopy_solve, is_schur, poly_product_full, random_problem, random_schur,
    spectral_factor, varma_cov_linear, yule_walker_solve, CovSequence, DMatrix, Error,
    FactorConfig, GenConfig, HomotopyConfig, MaInput, MatPoly, PseudoPoly, SchurClassSpec,
};

fn max_gap(a: &MatPoly, b: &MatPoly) -> f64 {
    a.axpy(-1.0, b)
        .coeffs()
        .iter()
        .map(|c| c.amax())
        .fold(0.0, f64::max)
}

#[test]
fn factor_round_trip_recovers_generator() {
    for seed in 0..30 {
        let b = random_schur(&GenConfig::new(seed, 2, 3)).unwrap();
        let a = spectral_factor(&poly_product_full(&b), &FactorConfig::default()).unwrap();
        assert!(max_gap(&a, &b) < 1e-8, "seed {seed}");
    }
}

#[test]
fn solve_recovers_generating_model() {
    for seed in 0..20 {
        let g = random_problem(&GenConfig::new(seed, 2, 2)).unwrap();
        let r = homotopy_solve(
            &g.data,
            &MaInput::Polynomial(g.b),
            &HomotopyConfig::default(),
        )
        .unwrap();
        assert!(r.verified());
        assert!(max_gap(&r.a, &g.a_star) < 1e-7, "seed {seed}");
    }
}

#[test]
fn pseudo_and_polynomial_ma_agree() {
    let g = random_problem(&GenConfig::new(5, 2, 2)).unwrap();
    let cfg = HomotopyConfig::default();
    let p = poly_product_full(&g.b);
    let via_poly = homotopy_solve(&g.data, &MaInput::Polynomial(g.b), &cfg).unwrap();
    let via_pseudo = homotopy_solve(&g.data, &MaInput::Pseudo(p), &cfg).unwrap();
    assert!(via_pseudo.verified());
    assert!(max_gap(&via_poly.a, &via_pseudo.a) < 1e-9);
}

#[test]
fn normalization_does_not_change_the_answer() {
    let g = random_problem(&GenConfig::new(9, 3, 1)).unwrap();
    let ma = MaInput::Polynomial(g.b);
    let on = homotopy_solve(&g.data, &ma, &HomotopyConfig::default()).unwrap();
    let off_cfg = HomotopyConfig {
        normalize: false,
        ..HomotopyConfig::default()
    };
    let off = homotopy_solve(&g.data, &ma, &off_cfg).unwrap();
    assert!(on.normalized && !off.normalized);
    assert!(max_gap(&on.a, &off.a) < 1e-8);
}

#[test]
fn trivial_ma_matches_normal_equations() {
    for seed in 0..20 {
        let g = random_problem(&GenConfig::new(seed, 2, 3)).unwrap();
        let yw = yule_walker_solve(&g.data).unwrap();
        let r = homotopy_solve(&g.data, &MaInput::Trivial, &HomotopyConfig::default()).unwrap();
        assert!(max_gap(&r.a, &yw) < 1e-8, "seed {seed}");
    }
}

#[test]
fn order_zero_is_closed_form() {
    let data =
        CovSequence::new(vec![DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 2.0])]).unwrap();
    let r = homotopy_solve(&data, &MaInput::Trivial, &HomotopyConfig::default()).unwrap();
    let a0 = r.a.coeff(0);
    let back = a0 * data.coeff(0) * a0.transpose();
    assert!((back - DMatrix::identity(2, 2)).amax() < 1e-12);
    assert_eq!(a0[(0, 1)], 0.0);
}

#[test]
fn indefinite_data_is_rejected() {
    let data = CovSequence::from_scalars(&[1.0, 1.1]).unwrap();
    let err = homotopy_solve(&data, &MaInput::Trivial, &HomotopyConfig::default()).unwrap_err();
    assert!(matches!(err.error, Error::DataNotPd { .. }));
    assert!(err.to_string().contains("T_n not positive definite"));
}

#[test]
fn ma_spectrum_touching_zero_is_rejected() {
    let data = CovSequence::from_scalars(&[1.0, 0.2]).unwrap();
    let p = PseudoPoly::from_scalars(&[2.0, 1.0]).unwrap();
    let err = homotopy_solve(&data, &MaInput::Pseudo(p), &HomotopyConfig::default()).unwrap_err();
    assert!(matches!(err.error, Error::PNotPositive { .. }));
}

#[test]
fn vanishing_last_ma_coefficient_warns() {
    let g = random_problem(&GenConfig::new(1, 2, 1)).unwrap();
    let b = MatPoly::new(vec![g.b.coeff(0).clone(), DMatrix::zeros(2, 2)]).unwrap();
    let outcome = homotopy_solve(&g.data, &MaInput::Polynomial(b), &HomotopyConfig::default());
    let warnings = match outcome {
        Ok(r) => r.warnings,
        Err(f) => f.report.map(|r| r.warnings).unwrap_or_default(),
    };
    assert!(
        warnings.iter().any(|w| w.contains("det P_n")),
        "{warnings:?}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_data_is_matched_by_its_model(seed in any::<u64>(), m in 1usize..=3, n in 1usize..=3) {
        let g = random_problem(&GenConfig::new(seed, m, n)).unwrap();
        prop_assert!(check_pd(&g.data).is_pd);
        prop_assert!(is_schur(&g.a_star, &SchurClassSpec::default()).is_member());
        // the generating model solves the matching equation exactly
        let resid = f_map(&g.a_star, &g.data).unwrap().axpy(-1.0, &poly_product_full(&g.b));
        prop_assert!(resid.norm() < 1e-10 * (1.0 + g.data.coeff(0).amax()));
    }

    #[test]
    fn generator_is_deterministic(seed in any::<u64>(), m in 1usize..=3, n in 0usize..=3) {
        let cfg = GenConfig::new(seed, m, n);
        prop_assert_eq!(random_schur(&cfg).unwrap(), random_schur(&cfg).unwrap());
    }

    #[test]
    fn stationary_covariance_is_symmetric_pd(seed in any::<u64>(), m in 1usize..=3, n in 1usize..=3) {
        let a = random_schur(&GenConfig::new(seed, m, n)).unwrap();
        let b = random_schur(&GenConfig::new(seed ^ 0x5a5a, m, n)).unwrap();
        let s = varma_cov_linear(&a, &b).unwrap();
        let s0 = s.coeff(0);
        prop_assert!((s0 - s0.transpose()).amax() < 1e-12 * (1.0 + s0.amax()));
        prop_assert!(s0.clone().cholesky().is_some());
    }
}
