use std::f64::consts::PI;
use std::sync::Arc;

use ere_core::flow::*;
use ere_core::models::{build_config, Family};
use ere_core::properties::random_symmetric;
use ere_core::symplectic::j_matrix;
use ere_core::Mat;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn essential(fam: Family, e: f64) -> Arc<dyn Coefficient> {
    Arc::new(EssentialCoeff { cfg: build_config(fam).unwrap(), e })
}

#[test]
fn semigroup_property() {
    let tol = Tolerances::default();
    for (fam, e) in [(Family::Euler(0.1), 0.5), (Family::Lagrange(6.0), 0.3), (Family::Euler(0.0), 0.7)] {
        let coef = essential(fam, e);
        let (t1, t2) = (1.3, 2.0 * PI);
        let full = integrate_fundamental(coef.clone(), 0.0, t2, tol).unwrap();
        let tail = integrate_fundamental(coef, t1, t2, tol).unwrap();
        let composed = tail.end() * full.at(t1);
        let scale = full.end().norm();
        let err = (composed - full.end()).norm() / scale;
        assert!(err < 1e3 * tol.rel, "{fam:?} e = {e}: {err:e}");
    }
}

#[test]
fn monodromy_spectrum_is_reciprocal() {
    for (fam, e) in [
        (Family::Euler(0.1), 0.9),
        (Family::Euler(0.5), 0.2),
        (Family::Lagrange(6.0), 0.6),
        (Family::Lagrange(8.5), 0.4),
        (Family::Ring3(0.05), 0.3),
    ] {
        let (rep, path) = monodromy_true_anomaly(&build_config(fam).unwrap(), e).unwrap();
        assert!(path.rel_drift < 1e-9, "{fam:?}");
        let ev = rep.eigenvalues_c();
        for l in &ev {
            let inv = l.inv();
            let best = ev.iter().map(|m| (m - inv).norm() / inv.norm().max(1.0)).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-7, "{fam:?} e = {e}: {l} has no reciprocal partner");
        }
    }
}

#[test]
fn true_anomaly_and_blowup_monodromies_are_conjugate() {
    // both start at the pericenter, so the monodromies agree up to the
    // change of variables at t = 0, which preserves the spectrum
    for (fam, e) in [(Family::Euler(0.1), 0.6), (Family::Lagrange(6.0), 0.8)] {
        let cfg = build_config(fam).unwrap();
        let (rep, _) = monodromy_true_anomaly(&cfg, e).unwrap();
        let bf = blowup_flow(&cfg, e).unwrap();
        let m = bf.path.monodromy().unwrap();
        let a = rep.m.trace();
        assert!((a - m.matrix().trace()).abs() < 1e-6 * a.abs().max(1.0), "{fam:?}");
        assert_eq!(classify(&m).classification, rep.classification);
    }
}

#[test]
fn blowup_energy_is_conserved() {
    let cfg = build_config(Family::Euler(0.1)).unwrap();
    for e in [0.3, 0.9, 0.99] {
        let bf = blowup_flow(&cfg, e).unwrap();
        assert!(bf.energy_drift < 1e-9, "e = {e}: {:e}", bf.energy_drift);
        assert!(bf.period > 0.0);
    }
}

#[test]
fn classification_of_model_matrices() {
    let id = ere_core::SymplecticMatrix::identity(2);
    assert_eq!(classify(&id).classification, Classification::SpectrallyStableDegenerate);
    let rot = ere_core::symplectic::rotation(2, 0.4);
    let r = ere_core::SymplecticMatrix::new(rot.clone()).unwrap();
    assert_eq!(classify(&r).classification, Classification::Elliptic);
    let mut h = Mat::identity(4, 4);
    h[(0, 0)] = 3.0;
    h[(2, 2)] = 1.0 / 3.0;
    h[(1, 1)] = 0.5;
    h[(3, 3)] = 2.0;
    let hm = ere_core::SymplecticMatrix::new(h.clone()).unwrap();
    assert_eq!(classify(&hm).classification, Classification::Hyperbolic);
    let mut eh = rot;
    eh[(0, 0)] = 3.0;
    eh[(2, 2)] = 1.0 / 3.0;
    eh[(0, 2)] = 0.0;
    eh[(2, 0)] = 0.0;
    let ehm = ere_core::SymplecticMatrix::new(eh).unwrap();
    assert_eq!(classify(&ehm).classification, Classification::EllipticHyperbolic);
}

#[test]
fn eccentricity_outside_the_unit_interval_is_a_domain_error() {
    let cfg = build_config(Family::Euler(0.0)).unwrap();
    for e in [-0.1, 1.0, 1.5] {
        assert!(matches!(
            fundamental_true_anomaly(&cfg, e, 0.0, Tolerances::default()),
            Err(ere_core::Error::Domain(_))
        ));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constant_coefficients_match_the_exponential(seed in any::<u64>(), k in 1usize..3, t in 0.5f64..6.0) {
        let mut r = StdRng::seed_from_u64(seed);
        let b = random_symmetric(&mut r, 2 * k, 0.5);
        let tol = Tolerances::new(1e-12, 1e-12);
        let p = integrate_fundamental(Arc::new(ConstantCoeff(b.clone())), 0.0, t, tol).unwrap();
        let exact = (j_matrix(k) * &b * t).exp();
        let err = (p.end() - &exact).norm() / exact.norm();
        prop_assert!(err < 1e-9, "{err:e}");
        prop_assert!(p.rel_drift < 1e-10);
    }
}
