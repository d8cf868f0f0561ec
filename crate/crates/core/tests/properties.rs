use std::f64::consts::PI;

use octa_sh::{
    deviation, in_fundamental_zone, quaternion_from_euler, quotient_distance,
    reduce_to_fundamental_zone, residuals, rotate_coeffs, EulerAngles, Sh4Coeffs, UnitQuaternion,
};
use proptest::prelude::*;

fn coeffs() -> impl Strategy<Value = Sh4Coeffs> {
    prop::array::uniform9(-2.0f64..2.0).prop_map(Sh4Coeffs::from_array)
}

fn euler() -> impl Strategy<Value = EulerAngles> {
    (-PI..PI, -PI..PI, -PI..PI).prop_map(|(a, b, g)| EulerAngles::new(a, b, g))
}

fn quaternion() -> impl Strategy<Value = UnitQuaternion> {
    euler().prop_map(|e| quaternion_from_euler(&e))
}

proptest! {
    #[test]
    fn deviation_is_rotation_invariant(a in coeffs(), e in euler()) {
        let d = deviation(&a);
        prop_assert!((deviation(&rotate_coeffs(&a, &e)) - d).abs() <= 1e-9 * (1.0 + d));
    }

    #[test]
    fn rotation_preserves_norm_residual(a in coeffs(), e in euler()) {
        let before = residuals(&a).norm_residual;
        let after = residuals(&rotate_coeffs(&a, &e)).norm_residual;
        prop_assert!((before - after).abs() <= 1e-12 * (1.0 + a.norm().powi(2)));
    }

    #[test]
    fn quadric_residuals_are_quadratic(a in coeffs(), lambda in 0.1f64..3.0) {
        let r = residuals(&a).quadric_residuals;
        let rl = residuals(&(lambda * a)).quadric_residuals;
        for k in 0..5 {
            prop_assert!((rl[k] - lambda * lambda * r[k]).abs() <= 1e-12 * (1.0 + lambda * lambda * r[k].abs()));
        }
    }

    #[test]
    fn reduction_lands_in_zone(q in quaternion()) {
        let (red, _) = reduce_to_fundamental_zone(&q);
        prop_assert!(in_fundamental_zone(&red.rodrigues().unwrap(), 1e-10));
        let (again, index) = reduce_to_fundamental_zone(&red);
        prop_assert_eq!(index, 0);
        prop_assert_eq!(again, red);
        prop_assert!(quotient_distance(&q, &red) < 1e-7);
    }

    #[test]
    fn quotient_distance_symmetric(p in quaternion(), q in quaternion()) {
        prop_assert!((quotient_distance(&p, &q) - quotient_distance(&q, &p)).abs() < 1e-12);
    }
}
