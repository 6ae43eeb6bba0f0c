//! Property-based invariants: metric axioms of d_L, operator-norm geometry
//! of isometries, angle wrapping, and norm-composition closure.

use holonomic::matrix;
use holonomic::{
    build_fiber_space, compose_norm_with_subadditive, operator_norm, rotation_sample,
    validate_group_norm, wrap_angle, GroupElement, HolonomicSpace, Matrix,
};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn fiber() -> &'static HolonomicSpace {
    static SPACE: OnceLock<HolonomicSpace> = OnceLock::new();
    SPACE.get_or_init(|| build_fiber_space(1.0, 64).expect("fiber space builds"))
}

fn vec2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-25.0f64..25.0, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_symmetric_and_dominated(u in vec2(), v in vec2()) {
        let space = fiber();
        let duv = space.distance(&u, &v).unwrap();
        let dvu = space.distance(&v, &u).unwrap();
        prop_assert!((duv - dvu).abs() <= 1e-10, "symmetry: {duv} vs {dvu}");
        prop_assert!(duv <= matrix::distance(&u, &v) + 1e-12);
        prop_assert!(duv >= 0.0);
    }

    #[test]
    fn distance_triangle_inequality(u in vec2(), v in vec2(), w in vec2()) {
        let space = fiber();
        let duw = space.distance(&u, &w).unwrap();
        let duv = space.distance(&u, &v).unwrap();
        let dvw = space.distance(&v, &w).unwrap();
        prop_assert!(duw <= duv + dvw + 1e-9, "triangle: {duw} > {duv} + {dvw}");
    }

    #[test]
    fn norm_recovery(v in vec2()) {
        let space = fiber();
        let recovered = space.recover_norm(&v).unwrap();
        let expected = matrix::norm(&v);
        prop_assert!((recovered - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn isometries_sit_within_two_of_identity(theta in -PI..PI) {
        let r = Matrix::rotation2(theta);
        let d = Matrix::identity(2).sub(&r);
        let norm = operator_norm(&d).unwrap();
        prop_assert!(norm <= 2.0 + 1e-12);
        // closed form for plane rotations
        prop_assert!((norm - 2.0 * (theta / 2.0).sin().abs()).abs() <= 1e-12);
    }

    #[test]
    fn operator_norm_triangle(a in -PI..PI, b in -PI..PI, c in -PI..PI) {
        let (ra, rb, rc) = (Matrix::rotation2(a), Matrix::rotation2(b), Matrix::rotation2(c));
        let ab = operator_norm(&ra.sub(&rb)).unwrap();
        let ac = operator_norm(&ra.sub(&rc)).unwrap();
        let cb = operator_norm(&rc.sub(&rb)).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn wrap_angle_is_idempotent_and_in_range(x in -50.0f64..50.0) {
        let w = wrap_angle(x);
        prop_assert!(-PI < w && w <= PI);
        prop_assert!((wrap_angle(w) - w).abs() <= 1e-15);
        // wrapping preserves the angle mod 2 pi
        prop_assert!(((x - w) / std::f64::consts::TAU).round() * std::f64::consts::TAU - (x - w) < 1e-9);
    }

    #[test]
    fn left_invariant_distance_invariance(i in 0usize..25, j in 0usize..25, k in 0usize..25) {
        let sample = rotation_sample(12);
        let entries = sample.entries();
        let a = &entries[i].element;
        let b = &entries[j].element;
        let c = &entries[k].element;
        let d = holonomic::left_invariant_distance(&sample, a, b).unwrap();
        let d_rev = holonomic::left_invariant_distance(&sample, b, a).unwrap();
        let d_shift =
            holonomic::left_invariant_distance(&sample, &c.compose(a), &c.compose(b)).unwrap();
        prop_assert!((d - d_rev).abs() <= 1e-10);
        prop_assert!((d - d_shift).abs() <= 1e-10);
    }

    #[test]
    fn subadditive_composition_preserves_validity(clamp in 0.5f64..4.0) {
        let sample = rotation_sample(8);
        let composed = compose_norm_with_subadditive(&sample, |t| t.min(clamp)).unwrap();
        prop_assert!(validate_group_norm(&composed, 1e-9).is_valid());
        let rooted = compose_norm_with_subadditive(&sample, f64::sqrt).unwrap();
        prop_assert!(validate_group_norm(&rooted, 1e-9).is_valid());
    }

    #[test]
    fn convexity_slack_vanishes_for_identity(u in vec2(), v in vec2()) {
        let id = GroupElement::identity(2);
        let slack = holonomic::space::convexity_slack(&u, &v, id.matrix(), 0.0);
        prop_assert!(slack.abs() <= 1e-9 * (matrix::norm(&u) + matrix::norm(&v)).powi(2).max(1.0));
    }
}
