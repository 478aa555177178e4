use bjgeo::lp::{LpProblem, Relation, VarDomain};
use bjgeo::ortho::{
    giles_orthogonal, in_x_minus, in_x_plus, verify_certificate, verify_refutation, LineSearch,
};
use bjgeo::sampling::{self, random_matrix, random_nonzero_vector, random_polyhedral, random_vector, SampleRng};
use bjgeo::scalar::{int, rat};
use bjgeo::space::gauge_by_lp;
use bjgeo::support::cones_of_face;
use bjgeo::*;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn space_for(rng: &mut SampleRng, which: u8, dim: usize) -> PolyhedralSpace {
    match which % 3 {
        0 => PolyhedralSpace::linf(dim).unwrap(),
        1 => PolyhedralSpace::l1(dim).unwrap(),
        _ => random_polyhedral(rng, dim, dim + 2),
    }
}

/// A point with a non-trivial orthogonality set: a vertex, a face point, or generic.
fn base_point(rng: &mut SampleRng, space: &PolyhedralSpace, style: u8) -> Vector {
    use rand::Rng;
    match style % 3 {
        0 => sampling::pick(rng, space.vertices()).clone(),
        1 => {
            let a = sampling::pick(rng, space.vertices()).clone();
            let b = sampling::pick(rng, space.vertices()).clone();
            let t = rat(rng.gen_range(1..4), 4);
            let p = a.scale(&t).add(&b.scale(&(int(1) - &t)));
            if p.is_zero() { a } else { p }
        }
        _ => random_nonzero_vector(rng, space.dim(), 6, 3),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn norm_axioms(seed in any::<u64>(), which in 0u8..3, dim in 2usize..5) {
        let mut rng = sampling::rng(seed);
        let s = space_for(&mut rng, which, dim);
        let x = random_vector(&mut rng, dim, 9, 4);
        let y = random_vector(&mut rng, dim, 9, 4);
        let c = sampling::random_rational(&mut rng, 7, 5);
        prop_assert!(s.norm(&x.add(&y)) <= s.norm(&x) + s.norm(&y));
        prop_assert_eq!(s.norm(&x.scale(&c)), c.abs() * s.norm(&x));
        prop_assert_eq!(s.norm(&x).is_zero(), x.is_zero());
        let f = random_vector(&mut rng, dim, 5, 3).as_functional();
        prop_assert!(f.apply(&x).abs() <= s.dual_norm(&f) * s.norm(&x));
    }

    #[test]
    fn duality_round_trip_and_gauge(seed in any::<u64>(), which in 0u8..3, dim in 2usize..4) {
        let mut rng = sampling::rng(seed);
        let s = space_for(&mut rng, which, dim);
        prop_assert_eq!(s.dual().dual(), s.clone());
        let x = random_vector(&mut rng, dim, 9, 4);
        prop_assert_eq!(gauge_by_lp(s.vertices(), &x), Some(s.norm(&x)));
        for v in s.vertices() {
            prop_assert_eq!(s.norm(v), int(1));
        }
    }

    #[test]
    fn characterisation_matches_oracle(seed in any::<u64>(), which in 0u8..3, dim in 2usize..5, style in 0u8..3) {
        let mut rng = sampling::rng(seed);
        let s = space_for(&mut rng, which, dim);
        let x = base_point(&mut rng, &s, style);
        let y = random_nonzero_vector(&mut rng, dim, 6, 3);
        let r = is_orthogonal(&s, &x, &y).unwrap();
        prop_assert_eq!(r.is_orthogonal(), oracle_is_orthogonal(&s, &x, &y).unwrap().orthogonal);
        match (r.certificate(), r.refutation()) {
            (Some(c), _) => prop_assert!(verify_certificate(&s, &x, &y, c)),
            (_, Some(f)) => prop_assert!(verify_refutation(&s, &x, &y, f)),
            _ => unreachable!(),
        }
        let env = s.minimize_along(&x, &y);
        let all = s.minimize_along_all_pairs(&x, &y);
        prop_assert_eq!(env.value, all.value);
    }

    #[test]
    fn sides_intersect_to_orthogonality(seed in any::<u64>(), which in 0u8..3, dim in 2usize..5, style in 0u8..3) {
        let mut rng = sampling::rng(seed);
        let s = space_for(&mut rng, which, dim);
        let x = base_point(&mut rng, &s, style);
        let y = random_nonzero_vector(&mut rng, dim, 6, 3);
        let both = in_x_plus(&s, &x, &y).unwrap().member && in_x_minus(&s, &x, &y).unwrap().member;
        prop_assert_eq!(both, is_orthogonal(&s, &x, &y).unwrap().is_orthogonal());
    }

    #[test]
    fn orthogonality_is_homogeneous(seed in any::<u64>(), which in 0u8..3, dim in 2usize..5, style in 0u8..3) {
        let mut rng = sampling::rng(seed);
        let s = space_for(&mut rng, which, dim);
        let x = base_point(&mut rng, &s, style);
        let y = random_nonzero_vector(&mut rng, dim, 6, 3);
        let a = sampling::random_rational(&mut rng, 5, 3);
        let b = sampling::random_rational(&mut rng, 5, 3);
        prop_assume!(!a.is_zero());
        let base = is_orthogonal(&s, &x, &y).unwrap().is_orthogonal();
        prop_assert!(!base || is_orthogonal(&s, &x.scale(&a), &y.scale(&b)).unwrap().is_orthogonal());
    }

    #[test]
    fn cones_cover_orthogonality_set(seed in any::<u64>(), which in 0u8..3, dim in 2usize..5, style in 0u8..3) {
        let mut rng = sampling::rng(seed);
        let s = space_for(&mut rng, which, dim);
        let x = base_point(&mut rng, &s, style);
        let cones = associated_cones(&s, &x).unwrap();
        for _ in 0..8 {
            let y = random_vector(&mut rng, dim, 6, 3);
            let member = cones.iter().any(|c| c.contains(&y).unwrap());
            prop_assert_eq!(member, is_orthogonal(&s, &x, &y).unwrap().is_orthogonal());
        }
        for c in &cones {
            for g in c.generators() {
                prop_assert!(is_orthogonal(&s, &x, &g).unwrap().is_orthogonal());
            }
        }
    }

    #[test]
    fn lp_agrees_with_elimination(seed in any::<u64>(), vars in 1usize..4, rows in 1usize..5) {
        use rand::Rng;
        let mut rng = sampling::rng(seed);
        let mut lp = LpProblem::new(vars);
        if rng.gen_bool(0.5) {
            lp.set_domain(0, VarDomain::Free);
        }
        for _ in 0..rows {
            let coeffs: Vec<Rational> = (0..vars).map(|_| int(rng.gen_range(-3..=3))).collect();
            let rel = [Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..3)];
            lp.add(coeffs, rel, int(rng.gen_range(-4..=4)));
        }
        let outcome = lp.solve();
        prop_assert_eq!(outcome.is_feasible(), lp.fourier_motzkin_feasible());
        if let Some(p) = outcome.point() {
            prop_assert!(lp.check(p));
        }
    }

    #[test]
    fn preservation_reports_are_consistent(seed in any::<u64>(), which in 0u8..2, dim in 2usize..4, style in 0u8..2) {
        let mut rng = sampling::rng(seed);
        let s = space_for(&mut rng, which, dim);
        let t = random_matrix(&mut rng, dim, dim, 2);
        let x = base_point(&mut rng, &s, style);
        prop_assume!(!t.apply(&x).unwrap().is_zero());
        let tx = t.apply(&x).unwrap();
        let at = preserves_at_point(&s, &s, &t, &x).unwrap();
        if let Some(v) = &at.violation {
            prop_assert!(is_orthogonal(&s, &x, &v.y).unwrap().is_orthogonal());
            prop_assert!(!is_orthogonal(&s, &tx, &v.ty).unwrap().is_orthogonal());
        }
        prop_assert!(at.verdict || at.violation.is_some());
        let cones = associated_cones(&s, &x).unwrap();
        for c in &cones {
            for g in c.generators() {
                if at.verdict {
                    prop_assert!(preserves_in_direction(&s, &s, &t, &x, &g).unwrap().verdict);
                }
            }
        }
        let ex = exists_preserved_direction(&s, &s, &t, &x).unwrap();
        if at.verdict {
            prop_assert!(ex.verdict);
        }
        if let Some(preserve::Witness::Direction { y, .. }) = &ex.witness {
            prop_assert!(!y.is_zero());
            prop_assert!(preserves_in_direction(&s, &s, &t, &x, y).unwrap().verdict);
        }
        if !ex.verdict {
            for c in &cones {
                for g in c.generators() {
                    prop_assert!(!preserves_in_direction(&s, &s, &t, &x, &g).unwrap().verdict);
                }
            }
        }
    }

    #[test]
    fn kernel_verdicts_match_sampled_directions(seed in any::<u64>(), dim in 2usize..4) {
        let mut rng = sampling::rng(seed);
        let s = PolyhedralSpace::linf(dim).unwrap();
        let t = random_matrix(&mut rng, dim, dim, 2);
        let x = base_point(&mut rng, &s, 0);
        prop_assume!(!t.apply(&x).unwrap().is_zero());
        let face = support_face(&s, &x).unwrap();
        for f in &face.extreme_functionals {
            let r = preserves_wrt_kernel(&s, &s, &t, &x, f).unwrap();
            if let Some(v) = r.violation {
                prop_assert!(f.apply(&v.y).is_zero());
                prop_assert!(!preserves_in_direction(&s, &s, &t, &x, &v.y).unwrap().verdict);
            }
            if r.verdict {
                for b in linalg::common_kernel(std::slice::from_ref(f), dim) {
                    prop_assert!(preserves_in_direction(&s, &s, &t, &x, &b).unwrap().verdict);
                }
            }
        }
    }
}

/// Points of `l_p` where `|f(y)| / ‖y‖` falls in this band are decided by
/// a floating-point tie and left out of the comparison.
const LP_BAND: f64 = 1e-3;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lp_oracle_matches_outside_the_tie_band(seed in any::<u64>(), dim in 2usize..5, pick in 0usize..4) {
        let p = [rat(3, 2), int(3), int(4), rat(7, 3)][pick].clone();
        let s = LpSpace::new(dim, p).unwrap();
        let mut rng = sampling::rng(seed);
        let x = sampling::random_vector_f64(&mut rng, dim);
        let y = sampling::random_vector_f64(&mut rng, dim);
        prop_assume!(s.norm(&x) > 1e-3 && s.norm(&y) > 1e-3);
        let f = support_face(&s, &x).unwrap().extreme_functionals.remove(0);
        prop_assume!(f.apply(&y).abs() >= LP_BAND * s.norm(&y));
        let r = is_orthogonal(&s, &x, &y).unwrap();
        prop_assert_eq!(r.is_orthogonal(), oracle_is_orthogonal(&s, &x, &y).unwrap().orthogonal);
    }

    #[test]
    fn lp_kernel_directions_are_orthogonal(seed in any::<u64>(), dim in 2usize..5, pick in 0usize..3) {
        let p = [rat(3, 2), int(3), int(5)][pick].clone();
        let s = LpSpace::new(dim, p).unwrap();
        let mut rng = sampling::rng(seed);
        let x = sampling::random_vector_f64(&mut rng, dim);
        prop_assume!(s.norm(&x) > 1e-2);
        let f = support_face(&s, &x).unwrap().extreme_functionals.remove(0);
        for b in linalg::common_kernel(std::slice::from_ref(&f), dim) {
            prop_assert!(is_orthogonal(&s, &x, &b).unwrap().is_orthogonal());
            prop_assert!(giles_orthogonal(x.coords(), b.coords(), s.p_f64()).unwrap());
            prop_assert!(oracle_is_orthogonal(&s, &x, &b).unwrap().orthogonal);
        }
    }
}

#[test]
fn signed_permutations_of_linf4_are_isometries() {
    let space: NormedSpace = PolyhedralSpace::linf(4).unwrap().into();
    let mut rng = sampling::rng(5);
    for _ in 0..12 {
        let t = sampling::random_signed_permutation(&mut rng, 4);
        assert_eq!(certify_isometry(&space, &t).unwrap().verdict, IsometryVerdict::Isometry);
    }
}

#[test]
fn polyhedral_self_maps_are_isometries() {
    // The regular hexagon ball is preserved by the rotation through 60 degrees.
    let pts: Vec<Vector> = [[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]]
        .iter()
        .map(|c| Vector::from_ints(c))
        .collect();
    let space: NormedSpace = PolyhedralSpace::from_vertices(pts).unwrap().into();
    let rot = Matrix::from_rows(vec![vec![int(0), int(-1)], vec![int(1), int(1)]]).unwrap();
    let c = certify_isometry(&space, &rot).unwrap();
    assert_eq!(c.verdict, IsometryVerdict::Isometry);
    assert_eq!(c.permutes_vertices, Some(true));
    let shear = Matrix::from_rows(vec![vec![int(1), int(1)], vec![int(0), int(1)]]).unwrap();
    assert!(!certify_isometry(&space, &shear).unwrap().is_positive());
}

#[test]
fn cones_of_smooth_points_are_kernels() {
    let s = PolyhedralSpace::l1(3).unwrap();
    let x = Vector::from_ints(&[1, 2, -3]);
    let cones = cones_of_face(&support_face(&s, &x).unwrap());
    assert_eq!(cones.len(), 1);
    assert!(cones[0].is_kernel());
}
