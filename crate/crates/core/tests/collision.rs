use ere_core::collision::*;
use ere_core::flow::Tolerances;
use ere_core::maslov::hormander_index;
use ere_core::models::{build_config, equilibrium_data, CentralConfig, EqSign, Family, HeteroclinicSide};
use ere_core::{LagrangianFrame, Mat};

fn scalar(r: f64) -> CentralConfig {
    CentralConfig::custom(Mat::from_element(1, 1, r), None).unwrap()
}

#[test]
fn exterior_and_frame_methods_agree() {
    let fams = [
        Family::Euler(0.03),
        Family::Euler(0.1),
        Family::Lagrange(4.0),
        Family::Lagrange(6.0),
        Family::Lagrange(8.0),
    ];
    for fam in fams {
        let cfg = build_config(fam).unwrap();
        for axes in [[0, 1], [0, 3], [1, 2], [2, 3]] {
            let v1 = LagrangianFrame::coordinate(2, &axes).unwrap();
            let p = HalfClinicProblem::new(Side::LPlusMinus, cfg.clone(), v1);
            let frame = half_clinic_index(&p).unwrap();
            let (trace, ext) = exterior_index_4d(&p).unwrap();
            assert_eq!(frame.index, ext.index, "{fam:?} axes {axes:?}: {:?}", trace.times);
            assert_eq!(frame.diagnostics.converged, Some(true));
        }
    }
}

#[test]
fn additivity_over_the_split_point() {
    for fam in [Family::Euler(0.1), Family::Lagrange(6.0)] {
        let cfg = build_config(fam).unwrap();
        let t = default_t_max(&cfg);
        let vu0 = unstable_path(&cfg, HeteroclinicSide::LPlus, -t, 0.0, Tolerances::default())
            .unwrap()
            .end_frame();
        for v in [LagrangianFrame::dirichlet(2), LagrangianFrame::neumann(2)] {
            let full = heteroclinic_index_lplus(&cfg, &v).unwrap().index;
            let minus = half_clinic_index(&HalfClinicProblem::new(Side::LPlusMinus, cfg.clone(), v.clone()))
                .unwrap()
                .index;
            let plus = half_clinic_index(
                &HalfClinicProblem::new(Side::LPlusPlus, cfg.clone(), v.clone()).with_v0(vu0.clone()),
            )
            .unwrap()
            .index;
            assert_eq!(full, minus + plus, "{fam:?}");
        }
    }
}

#[test]
fn neumann_dirichlet_difference_is_morse_index() {
    for fam in [Family::Euler(0.05), Family::Lagrange(6.0)] {
        let cfg = build_config(fam).unwrap();
        let d = heteroclinic_index_lplus(&cfg, &LagrangianFrame::dirichlet(2)).unwrap().index;
        let n = heteroclinic_index_lplus(&cfg, &LagrangianFrame::neumann(2)).unwrap().index;
        assert_eq!(n - d, cfg.phi() as i64, "{fam:?}");
    }
}

#[test]
fn scalar_l0_has_no_bounded_boundary_solutions() {
    for r in [-0.1, -0.02, 0.3, 2.0] {
        let cfg = scalar(r);
        for v in [LagrangianFrame::dirichlet(1), LagrangianFrame::neumann(1)] {
            let rep = half_clinic_index(&HalfClinicProblem::new(Side::L0Plus, cfg.clone(), v)).unwrap();
            assert_eq!(rep.index, 0, "r = {r}");
            assert_eq!(rep.diagnostics.converged, Some(true));
        }
    }
}

#[test]
fn l0_tables_match_closed_form() {
    for r in [-0.1, 0.5] {
        let cfg = scalar(r);
        let (num, _) = l0_numerical_table(&cfg, Truncation::default()).unwrap();
        assert_eq!(num, l0_analytic_indices(&cfg).unwrap(), "r = {r}");
    }
}

#[test]
fn hormander_bridge_on_l0() {
    for r in [-0.1, 0.5] {
        let cfg = scalar(r);
        let (vd, vn) = (LagrangianFrame::dirichlet(1), LagrangianFrame::neumann(1));
        let vu = equilibrium_data(&cfg, EqSign::Minus).unwrap().v_u;
        let s = hormander_index(&vd, &vn, &vd, &vu).unwrap();
        // i₊(V₁, V₀; l₀⁻): V₀ = V_d is transported, V₁ is the reference
        let dd = half_clinic_index(&HalfClinicProblem::new(Side::L0Minus, cfg.clone(), vd.clone()).with_v0(vd.clone()))
            .unwrap()
            .index;
        let nd = half_clinic_index(&HalfClinicProblem::new(Side::L0Minus, cfg.clone(), vn.clone()).with_v0(vd.clone()))
            .unwrap()
            .index;
        assert_eq!(dd - nd, s, "r = {r}");
    }
}

#[test]
fn brake_sum_rules() {
    for fam in [Family::Euler(0.1), Family::Lagrange(6.0)] {
        let cfg = build_config(fam).unwrap();
        let bs = brake_split(&cfg, Truncation::default(), Tolerances::default()).unwrap();
        assert_eq!(bs.l0_plus_d + bs.l0_minus_d, cfg.k() as i64, "{fam:?}");
        assert_eq!(bs.l0_minus_plus + bs.l0_plus_minus, cfg.phi() as i64, "{fam:?}");
        let d = heteroclinic_index_lplus(&cfg, &LagrangianFrame::dirichlet(2)).unwrap().index;
        assert_eq!(bs.lplus_sum(), d, "{fam:?}");
    }
}

#[test]
fn probe_is_stable_inside_the_euler_window() {
    let p = nondegeneracy_probe(Family::Euler(0.1), Truncation::default());
    assert_eq!(p.status, ProbeStatus::Stable, "{:?}", p.samples);
    let p = nondegeneracy_probe(Family::Lagrange(6.0), Truncation::default());
    assert_eq!(p.status, ProbeStatus::Stable, "{:?}", p.samples);
}

#[test]
fn probe_detects_the_kepler_jump() {
    let p = nondegeneracy_probe(Family::Euler(0.0), Truncation::default());
    assert_eq!(p.status, ProbeStatus::JumpDetected, "{:?}", p.samples);
    let (a, b) = p.candidate.unwrap();
    assert!(a <= 0.0 && b >= 0.0 && b - a <= 2e-3, "{a} {b}");
}

#[test]
fn sturm_comparison_bound() {
    let r1 = 0.5;
    let zeros = sturm_zero_count(-0.125 - r1, 20.0, Tolerances::default()).unwrap();
    let bound = sturm_lower_bound(r1, 20.0);
    assert!(zeros >= bound, "{zeros} < {bound}");
    assert!(bound >= 4);
}

#[test]
fn exterior_count_grows_in_the_oscillatory_regime() {
    let cfg = build_config(Family::Euler(1.0)).unwrap();
    let v1 = LagrangianFrame::dirichlet(2);
    for t in [50.0, 100.0] {
        let a = exterior_trace(&cfg, &v1, t, Tolerances::default()).unwrap();
        let b = exterior_trace(&cfg, &v1, 2.0 * t, Tolerances::default()).unwrap();
        assert!(b.count() + 2 >= 2 * a.count(), "T = {t}: {} vs {}", a.count(), b.count());
        assert!(a.count() > 0);
        assert_eq!(b.tail_behavior, TailBehavior::Growing);
    }
}

#[test]
fn truncation_failure_is_reported_not_hidden() {
    let cfg = build_config(Family::Euler(0.1)).unwrap();
    let tr = Truncation { t_max: Some(3.0), ..Truncation::default() };
    let p = HalfClinicProblem::new(Side::LPlusFull, cfg, LagrangianFrame::dirichlet(2)).with_truncation(tr);
    let rep = half_clinic_index(&p).unwrap();
    assert_eq!(rep.diagnostics.converged, Some(false));
    assert!(!rep.diagnostics.notes.is_empty());
}

#[test]
fn oscillatory_endpoint_is_rejected_by_the_frame_method() {
    let cfg = build_config(Family::Euler(1.0)).unwrap();
    let p = HalfClinicProblem::new(Side::LPlusMinus, cfg, LagrangianFrame::dirichlet(2));
    assert!(matches!(half_clinic_index(&p), Err(ere_core::Error::NonHyperbolic(_))));
}
