mod common;

use common::{angle, any_geometry, config};
use ortho3r::geometry::{
    cross_section_coords, forward_kinematics, jacobian_det, mirror_theta2, numeric_jacobian_det, JointConfig,
    ManipulatorGeometry, DEFAULT_FD_STEP,
};
use proptest::prelude::*;

fn reference_ratio() -> f64 {
    let g = ManipulatorGeometry::new(0.7, 1.3, 0.4, 0.9, 1.1).unwrap();
    numeric_jacobian_det(&g, &JointConfig::new(0.0, 0.3, -1.2), DEFAULT_FD_STEP) / jacobian_det(&g, 0.3, -1.2)
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn cross_section_ignores_theta1(g in any_geometry(), t1 in angle(), t2 in angle(), t3 in angle()) {
        let l = g.char_length();
        let p = forward_kinematics(&g, &JointConfig::new(t1, t2, t3)).cross_section();
        let q = cross_section_coords(&g, t2, t3);
        prop_assert!((p.rho - q.rho).abs() < 1e-12 * l);
        prop_assert!((p.z - q.z).abs() < 1e-12 * l);
    }

    #[test]
    fn every_point_has_a_mirror(g in any_geometry(), t2 in angle(), t3 in angle()) {
        let l = g.char_length();
        let p = cross_section_coords(&g, t2, t3);
        if let Some(m) = mirror_theta2(&g, t2, t3) {
            let q = cross_section_coords(&g, m, t3);
            prop_assert!((q.rho - p.rho).abs() < 1e-10 * l, "{p:?} {q:?}");
            prop_assert!((q.z + p.z).abs() < 1e-10 * l, "{p:?} {q:?}");
        }
    }

    #[test]
    fn lengths_scale(g in any_geometry(), t2 in angle(), t3 in angle(), lambda in 0.05..20.0f64) {
        let s = g.scaled(lambda).unwrap();
        let (p, q) = (cross_section_coords(&g, t2, t3), cross_section_coords(&s, t2, t3));
        let tol = 1e-12 * s.char_length();
        prop_assert!((q.rho - lambda * p.rho).abs() < tol && (q.z - lambda * p.z).abs() < tol);
        let (d, ds) = (jacobian_det(&g, t2, t3), jacobian_det(&s, t2, t3));
        prop_assert!((ds - lambda.powi(3) * d).abs() < 1e-11 * s.char_length().powi(3));
    }

    #[test]
    fn determinant_is_a_fixed_multiple_of_finite_differences(
        g in any_geometry(), t1 in angle(), t2 in angle(), t3 in angle()
    ) {
        let l3 = g.char_length().powi(3);
        let closed = jacobian_det(&g, t2, t3);
        prop_assume!(closed.abs() > 1e-3 * l3);
        let fd = numeric_jacobian_det(&g, &JointConfig::new(t1, t2, t3), DEFAULT_FD_STEP);
        let k = reference_ratio();
        prop_assert!((fd / closed - k).abs() < 1e-5 * k.abs(), "ratio {} vs {k}", fd / closed);
    }

    #[test]
    fn finite_differences_vanish_where_the_closed_form_does(g in any_geometry(), t1 in angle(), t3 in angle()) {
        // Bracket a zero of the closed form along θ2.
        let f = |a: f64| jacobian_det(&g, a, t3);
        let n = 360;
        let h = std::f64::consts::TAU / n as f64;
        let start = -std::f64::consts::PI;
        if let Some(k) = (0..n).find(|&k| f(start + k as f64 * h).signum() != f(start + (k + 1) as f64 * h).signum()) {
            let (mut lo, mut hi) = (start + k as f64 * h, start + (k + 1) as f64 * h);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == f(lo).signum() { lo = mid } else { hi = mid }
            }
            let fd = numeric_jacobian_det(&g, &JointConfig::new(t1, lo, t3), DEFAULT_FD_STEP);
            prop_assert!(fd.abs() < 1e-6 * g.char_length().powi(3), "{fd}");
        }
    }
}
