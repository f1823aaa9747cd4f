use ere_core::models::*;
use ere_core::symplectic::jj;
use ere_core::Mat;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn brake_symmetry_along_the_heteroclinics(tau in -12.0f64..12.0, beta in 0.01f64..2.0) {
        for fam in [Family::Euler(beta), Family::Lagrange(1.0 + 4.0 * beta)] {
            let cfg = build_config(fam).unwrap();
            let n = cfg.n_hat().unwrap();
            for side in [HeteroclinicSide::L0, HeteroclinicSide::LPlus] {
                let a = hat_b(heteroclinic(side, tau), &cfg);
                let b = hat_b(heteroclinic(side, -tau), &cfg);
                let lhs = &n * &b;
                let rhs = &a * &n;
                prop_assert!((lhs - rhs).norm() < 1e-10 * a.norm().max(1.0), "{fam:?} {side:?} τ = {tau}");
            }
        }
    }

    #[test]
    fn essential_coefficient_is_symmetric(t in 0.0f64..6.3, e in 0.0f64..0.99, beta in 0.01f64..2.0) {
        let cfg = build_config(Family::Euler(beta)).unwrap();
        let b = essential_b(t, &cfg, e).unwrap();
        prop_assert!((&b - b.transpose()).norm() < 1e-14);
    }

    #[test]
    fn blowup_orbits_keep_their_energy(e in 0.0f64..0.95, t in 0.0f64..6.3) {
        let p = orbit_point(e, t).unwrap();
        let p0 = orbit_point(e, 0.0).unwrap();
        prop_assert!((p.energy() - p0.energy()).abs() < 1e-12);
    }
}

#[test]
fn ring3_thresholds() {
    let (_, lm) = ring3_lambda(ring3_mc_zero());
    assert!(lm.abs() < 1e-12, "{lm}");
    let (_, lm) = ring3_lambda(ring3_mc_minus_one());
    assert!((lm + 1.0).abs() < 1e-12, "{lm}");
    for mc in [0.01, 0.3, 2.0] {
        let (lp, lm) = ring3_lambda(mc);
        for minus in [true, false] {
            let blk = ring3_block(mc, minus);
            let mut ev: Vec<f64> = blk.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            assert!((ev[0] - lm).abs() < 1e-10 && (ev[1] - lp).abs() < 1e-10, "m_c = {mc}: {ev:?}");
        }
    }
}

#[test]
fn equilibria_are_hyperbolic_exactly_above_minus_one_eighth() {
    for (r, hyp) in [(-0.2, false), (-0.125 - 1e-9, false), (-0.1, true), (0.0, true), (3.0, true)] {
        let cfg = CentralConfig::custom(Mat::from_element(1, 1, r), None).unwrap();
        assert_eq!(cfg.hyperbolic_equilibria(), hyp, "r = {r}");
        if hyp {
            let d = equilibrium_data(&cfg, EqSign::Minus).unwrap();
            assert!(ere_core::symplectic::intersection_dim(&d.v_u, &d.v_s, 1e-8) == 0);
        } else {
            assert!(equilibrium_data(&cfg, EqSign::Minus).is_err());
        }
    }
}

#[test]
fn brake_involutions_anticommute_with_j() {
    for fam in [Family::Euler(0.1), Family::Lagrange(6.0)] {
        let cfg = build_config(fam).unwrap();
        let n = cfg.n().unwrap();
        let k = cfg.k();
        let j = jj(k);
        assert!((n * &j + &j * n).norm() < 1e-14);
        let (vp, vm) = cfg.brake_subspaces().unwrap();
        assert_eq!(ere_core::symplectic::intersection_dim(&vp, &vm, 1e-8), 0);
    }
}

#[test]
fn family_parsing() {
    assert_eq!(Family::parse("euler", 0.1).unwrap(), Family::Euler(0.1));
    assert_eq!(Family::parse("lagrange", 6.0).unwrap(), Family::Lagrange(6.0));
    assert!(Family::parse("nope", 1.0).is_err());
    assert!(build_config(Family::Euler(-1.0)).is_err());
}
