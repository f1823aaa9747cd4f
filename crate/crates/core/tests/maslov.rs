use ere_core::maslov::*;
use ere_core::properties::{self, random_lagrangian, Case, Relation};
use ere_core::symplectic::{intersection_dim, rotation};
use ere_core::LagrangianFrame;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn holds(check: properties::CheckFn, rel: Relation, seed: u64) -> std::result::Result<(), TestCaseError> {
    let v = check(seed).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(rel.holds(v), "seed {seed}: {v:?}");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reparametrization(seed in any::<u64>()) {
        holds(properties::check_reparametrization, Relation::Equal, seed)?;
    }

    #[test]
    fn homotopy_with_fixed_ends(seed in any::<u64>()) {
        holds(properties::check_homotopy, Relation::Equal, seed)?;
    }

    #[test]
    fn additivity(seed in any::<u64>()) {
        holds(properties::check_additivity, Relation::Equal, seed)?;
    }

    #[test]
    fn symplectic_invariance(seed in any::<u64>()) {
        holds(properties::check_symplectic_invariance, Relation::Equal, seed)?;
    }

    #[test]
    fn direct_sum(seed in any::<u64>()) {
        holds(properties::check_direct_sum, Relation::Equal, seed)?;
    }

    #[test]
    fn monotone_in_the_coefficient(seed in any::<u64>()) {
        holds(properties::check_monotone, Relation::GreaterOrEqual, seed)?;
    }

    #[test]
    fn graph_reduction(seed in any::<u64>()) {
        holds(properties::check_graph_reduction, Relation::Equal, seed)?;
    }

    #[test]
    fn reversal_flips_the_sign(seed in any::<u64>()) {
        let c = Case::from_seed(seed);
        let traj = c.trajectory().unwrap();
        let t1 = c.t1;
        let back = FnPath::uniform(c.k, 0.0, t1, 400, |t| traj.raw(t1 - t));
        let end = traj.end_frame();
        // endpoint crossings are weighted asymmetrically; only test transverse ends
        prop_assume!(intersection_dim(&c.v, &c.w, 1e-6) == 0 && intersection_dim(&end, &c.w, 1e-6) == 0);
        let fwd = maslov_index(&traj, &c.w).unwrap();
        prop_assert_eq!(fwd.index, -maslov_index(&back, &c.w).unwrap().index);
        prop_assert_eq!(fwd.index, fwd.recombined());
    }

    #[test]
    fn hormander_formula_matches_path(seed in any::<u64>(), k in 1usize..4) {
        let mut r = StdRng::seed_from_u64(seed);
        let f: Vec<LagrangianFrame> = (0..5).map(|_| random_lagrangian(&mut r, k)).collect();
        let (v0, v1, l0, l1, l2) = (&f[0], &f[1], &f[2], &f[3], &f[4]);
        let s = hormander_index(v0, v1, l0, l1).unwrap();
        prop_assert_eq!(s, hormander_by_path(v0, v1, l0, l1).unwrap());
        prop_assert!(s.abs() <= 2 * k as i64);
        prop_assert_eq!(s, -hormander_index(v1, v0, l0, l1).unwrap());
        prop_assert_eq!(s, -hormander_index(v0, v1, l1, l0).unwrap());
        let s12 = hormander_index(v0, v1, l1, l2).unwrap();
        prop_assert_eq!(s + s12, hormander_index(v0, v1, l0, l2).unwrap());
    }
}

#[test]
fn rotation_counts_two_per_turn() {
    for k in 1..4 {
        let v = LagrangianFrame::dirichlet(k);
        let w = LagrangianFrame::dirichlet(k);
        let vc = v.columns().clone();
        let p = FnPath::uniform(k, 0.0, 3.0 * std::f64::consts::PI, 90, move |t| rotation(k, t) * &vc);
        // crossings at 0, π, 2π, 3π, each of dimension k with positive form
        let rep = maslov_index(&p, &w).unwrap();
        // a positive crossing counts at the start and not at the end
        assert_eq!(rep.index, 3 * k as i64);
        assert_eq!(rep.endpoint_contributions, (k as i64, 0));
        let rs = maslov_rs(&p, &w).unwrap();
        assert_eq!(rs, 3.0 * k as f64);
    }
}

#[test]
fn pm1_indices_of_a_harmonic_oscillator() {
    // B = I: γ(t) is the rotation by t. Over [0, 2π + 0.5] the identity is
    // met at 0 and 2π (two-dimensional each) and −I at π, so i₁ = 2 + 2 − 1
    use ere_core::flow::{ConstantCoeff, Tolerances};
    use std::sync::Arc;
    let coef = Arc::new(ConstantCoeff(ere_core::Mat::identity(2, 2)));
    let r = index_pm1_flow(coef, 0.0, 2.0 * std::f64::consts::PI + 0.5, Tolerances::default()).unwrap();
    assert_eq!((r.i1, r.im1, r.nu1, r.num1), (3, 2, 0, 0));
}
