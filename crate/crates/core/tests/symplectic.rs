use ere_core::maslov::graph_reference;
use ere_core::properties::{random_lagrangian, random_symmetric, random_symplectic};
use ere_core::symplectic::*;
use ere_core::{LagrangianFrame, Mat, SymplecticMatrix};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn products_and_sums_stay_symplectic(seed in any::<u64>(), k in 1usize..4, k2 in 1usize..3) {
        let mut r = rng(seed);
        let (a, b) = (random_symplectic(&mut r, k), random_symplectic(&mut r, k));
        let c = random_symplectic(&mut r, k2);
        prop_assert!(SymplecticMatrix::new(&a * &b).is_ok());
        prop_assert!(SymplecticMatrix::new(a.clone().try_inverse().unwrap()).is_ok());
        let s = symplectic_sum(&a, &c).unwrap();
        prop_assert!(SymplecticMatrix::new(s).is_ok());
    }

    #[test]
    fn sum_acts_on_frame_sums(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (m1, m2) = (random_symplectic(&mut r, 1), random_symplectic(&mut r, 2));
        let (f1, f2) = (random_lagrangian(&mut r, 1), random_lagrangian(&mut r, 2));
        let lhs = frame_sum(&f1, &f2).transform(&symplectic_sum(&m1, &m2).unwrap()).unwrap();
        let rhs = frame_sum(&f1.transform(&m1).unwrap(), &f2.transform(&m2).unwrap());
        prop_assert!(subspace_gap(&lhs, &rhs).unwrap() < 1e-10);
    }

    #[test]
    fn gap_is_a_metric(seed in any::<u64>(), k in 1usize..4) {
        let mut r = rng(seed);
        let (a, b, c) = (random_lagrangian(&mut r, k), random_lagrangian(&mut r, k), random_lagrangian(&mut r, k));
        let ab = subspace_gap(&a, &b).unwrap();
        prop_assert!((ab - subspace_gap(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(ab <= subspace_gap(&a, &c).unwrap() + subspace_gap(&c, &b).unwrap() + 1e-12);
        prop_assert!(subspace_gap(&a, &a).unwrap() < 1e-12);
        prop_assert!(ab <= 1.0 + 1e-12);
    }

    #[test]
    fn frames_are_gauge_invariant(seed in any::<u64>(), k in 1usize..4) {
        let mut r = rng(seed);
        let f = random_lagrangian(&mut r, k);
        let g = random_symmetric(&mut r, k, 0.4) + Mat::identity(k, k) * 2.0;
        let h = LagrangianFrame::new(f.columns() * g).unwrap();
        prop_assert!(subspace_gap(&f, &h).unwrap() < 1e-10);
        prop_assert_eq!(intersection_dim(&f, &h, 1e-8), k);
    }

    #[test]
    fn intersection_dim_is_invariant_under_symplectic_maps(seed in any::<u64>(), k in 2usize..4) {
        let mut r = rng(seed);
        // share exactly one direction: rotate only the first coordinate plane
        let f = LagrangianFrame::dirichlet(k);
        let mut rot = Mat::identity(2 * k, 2 * k);
        let th: f64 = 0.7;
        rot[(0, 0)] = th.cos();
        rot[(0, k)] = -th.sin();
        rot[(k, 0)] = th.sin();
        rot[(k, k)] = th.cos();
        let g = f.transform(&rot).unwrap();
        prop_assert_eq!(intersection_dim(&f, &g, 1e-8), k - 1);
        let m = random_symplectic(&mut r, k);
        let (mf, mg) = (f.transform(&m).unwrap(), g.transform(&m).unwrap());
        prop_assert_eq!(intersection_dim(&mf, &mg, 1e-8), k - 1);
    }

    #[test]
    fn graphs_of_symplectic_maps_are_lagrangian(seed in any::<u64>(), k in 1usize..3) {
        let mut r = rng(seed);
        let m = SymplecticMatrix::new(random_symplectic(&mut r, k)).unwrap();
        for sign in [1.0, -1.0] {
            let gr = graph_embed(&m, sign).unwrap();
            prop_assert!(gr.isotropy_residual() < 1e-9);
            let std = gr.to_standard();
            let j = j_matrix(2 * k);
            prop_assert!((std.columns().transpose() * j * std.columns()).norm() < 1e-9);
        }
    }
}

#[test]
fn identity_graphs_match_the_references() {
    for k in 1..4 {
        let id = SymplecticMatrix::identity(k);
        for sign in [1.0, -1.0] {
            let a = graph_embed(&id, sign).unwrap().to_standard();
            let b = graph_reference(k, sign);
            assert!(subspace_gap(&a, &b).unwrap() < 1e-12, "k = {k}, sign = {sign}");
        }
    }
}

#[test]
fn direct_sum_with_the_diagonal_detects_fixed_points() {
    // dim(Δ ∩ Gr M) = dim ker(M − I)
    let k = 2;
    let mut m = Mat::identity(4, 4);
    m[(1, 1)] = 2.0;
    m[(3, 3)] = 0.5;
    let m = SymplecticMatrix::new(m).unwrap();
    let gr = graph_embed(&m, 1.0).unwrap().to_standard();
    assert_eq!(intersection_dim(&gr, &graph_reference(k, 1.0), 1e-8), 2);
    assert_eq!(intersection_dim(&gr, &graph_reference(k, -1.0), 1e-8), 0);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(LagrangianFrame::new(Mat::from_row_slice(2, 1, &[0.0, 0.0])).is_err());
    assert!(LagrangianFrame::new(Mat::identity(4, 2) + Mat::from_fn(4, 2, |i, j| if i == 3 && j == 0 { 1.0 } else { 0.0 })).is_err());
    let mut bad = Mat::identity(2, 2);
    bad[(0, 0)] = 2.0;
    assert!(SymplecticMatrix::new(bad).is_err());
    assert!(symplectic_sum(&Mat::identity(3, 3), &Mat::identity(2, 2)).is_err());
    let id = SymplecticMatrix::identity(1);
    assert!(graph_embed(&id, 0.5).is_err());
}
