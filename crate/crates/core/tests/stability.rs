use ere_core::flow::{Classification, Domain};
use ere_core::maslov::index_pm1;
use ere_core::models::{build_config, Family};
use ere_core::stability::*;

fn opts() -> AnalysisOptions {
    AnalysisOptions::default()
}

#[test]
fn brake_halves_recombine_to_the_full_period_indices() {
    for (fam, e) in [
        (Family::Euler(0.1), 0.3),
        (Family::Euler(0.4), 0.7),
        (Family::Euler(1.5), 0.2),
        (Family::Lagrange(6.0), 0.5),
        (Family::Lagrange(8.5), 0.9),
    ] {
        let cfg = build_config(fam).unwrap();
        let h = brake_half_indices(&cfg, e, &opts()).unwrap();
        let pm = index_pm1(&period_system(&cfg, e, &opts()).unwrap().fundamental().unwrap()).unwrap();
        assert_eq!((h.i1(), h.im1()), (pm.i1, pm.im1), "{fam:?} e = {e}: {h:?}");
        assert_eq!(h.i1(), h.pp + h.mm - cfg.k() as i64);
    }
}

#[test]
fn euler_row_is_monotone_with_even_steps() {
    let params: Vec<f64> = (1..=16).map(|i| 0.25 * i as f64).collect();
    let res = sweep(Family::Euler(0.0), &params, &[0.5], &opts());
    assert!(res.violations.is_empty(), "{:?}", res.violations);
    assert_eq!(res.ok_fraction(), 1.0);
    let i1: Vec<i64> = res.cells.iter().map(|c| c.i1.unwrap()).collect();
    for w in i1.windows(2) {
        assert!(w[1] >= w[0] && (w[1] - w[0]) % 2 == 0, "{i1:?}");
    }
    assert!(i1.last() > i1.first());
}

#[test]
fn index_relations_hold_on_a_grid() {
    for fam in [Family::Euler(0.3), Family::Euler(2.0), Family::Lagrange(5.0), Family::Ring3(0.05)] {
        for e in [0.0, 0.4, 0.8] {
            let c = compute_cell(fam, e, &opts());
            assert_eq!(c.status, CellStatus::Ok, "{fam:?} e = {e}: {:?}", c.error);
            let k = build_config(fam).unwrap().k();
            let (i1, im1) = (c.i1.unwrap(), c.im1.unwrap());
            assert!((i1 - im1).abs() <= k as i64, "{fam:?} e = {e}: {i1} {im1}");
            assert!(c.phi_d(k).unwrap() <= c.phi_n().unwrap(), "{fam:?} e = {e}");
            assert!(c.drift < 1e-9);
        }
    }
}

#[test]
fn degenerate_roots_have_the_expected_kernels() {
    let t = TraceOptions { delta_max: Some(3.0), cells: 60, ..TraceOptions::default() };
    let row = trace_row(0.5, &t).unwrap();
    assert!(row.gaps.is_empty(), "{:?}", row.gaps);
    assert!(row.ordering_holds(), "{row:?}");
    let phi = row.phi_j(1).unwrap();
    let cfg = build_config(Family::Euler(phi)).unwrap();
    let d = analyze(&cfg, 0.5, &opts()).unwrap();
    assert_eq!(d.pm.nu1, 2, "φ₁ = {phi}");
    // across φ₁ the index i₁ moves by two
    let below = compute_cell(Family::Euler(phi - 1e-3), 0.5, &opts()).i1.unwrap();
    let above = compute_cell(Family::Euler(phi + 1e-3), 0.5, &opts()).i1.unwrap();
    assert_eq!(above - below, 2);
    // between ψ₁ˢ and ψ₁ˡ the count i₋₁ is odd
    let (s, l) = row.psi_sl(1).unwrap();
    let mid = compute_cell(Family::Euler(0.5 * (s + l)), 0.5, &opts()).im1.unwrap();
    let before = compute_cell(Family::Euler(0.5 * s), 0.5, &opts()).im1.unwrap();
    assert_eq!(mid % 2, 1, "ψ₁ = ({s}, {l})");
    assert_eq!(before % 2, 0);
}

#[test]
fn near_collision_lagrange_is_hyperbolic() {
    let cfg = build_config(Family::Lagrange(6.0)).unwrap();
    let c = hyperbolicity_check(&cfg, 0.999, &opts()).unwrap();
    assert!(c.certified);
    assert_eq!(c.classification, Classification::Hyperbolic);
    assert_eq!(c.morse.domain, Domain::TrueAnomaly);
    assert_eq!(opts().domain_for(0.9999), Domain::BlowupTau);
}

#[test]
fn sweep_is_deterministic_and_isolates_failures() {
    let params = [0.1, 0.5];
    let es = [0.2, 1.2, 0.6];
    let a = sweep(Family::Euler(0.0), &params, &es, &opts());
    let b = sweep(Family::Euler(0.0), &params, &es, &opts());
    let strip = |r: &SweepResult| -> Vec<(Option<i64>, Option<i64>, CellStatus)> {
        r.cells.iter().map(|c| (c.i1, c.im1, c.status)).collect()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.cells.len(), 6);
    // row-major with e outer
    assert_eq!((a.cells[1].e, a.cells[1].param), (0.2, 0.5));
    for c in &a.cells {
        let bad = c.e > 1.0;
        assert_eq!(c.status == CellStatus::DomainError, bad, "{c:?}");
        assert_eq!(c.i1.is_none(), bad);
    }
    assert!((a.ok_fraction() - 4.0 / 6.0).abs() < 1e-12);
}

#[test]
fn tolerance_changes_do_not_move_the_indices() {
    let tight = AnalysisOptions { tol: opts().tol.scaled(0.1), ..opts() };
    for (fam, e) in [(Family::Euler(0.1), 0.9), (Family::Lagrange(6.0), 0.95), (Family::Euler(1.0), 0.5)] {
        let a = compute_cell(fam, e, &opts());
        let b = compute_cell(fam, e, &tight);
        assert_eq!((a.i1, a.im1, a.mu_d, a.mu_n), (b.i1, b.im1, b.mu_d, b.mu_n), "{fam:?} e = {e}");
        assert_eq!(a.classification, b.classification);
    }
}
