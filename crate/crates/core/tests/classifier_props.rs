mod common;

use common::{any_geometry, config, family_geometry};
use ortho3r::classifier::{classify_label, Family, Side, Surface, TypeLabel, EPS_TRANS};
use ortho3r::geometry::ManipulatorGeometry;
use proptest::prelude::*;

fn side_of(p: [f64; 5], surface: Surface) -> Side {
    classify_label(&ManipulatorGeometry::from_params(p).unwrap())
        .surfaces
        .into_iter()
        .find(|s| s.surface == surface)
        .map(|s| s.side)
        .unwrap()
}

/// Sides just below and just above `d4 = value`.
fn sides_across(mut p: [f64; 5], value: f64, surface: Surface) -> (Side, Side) {
    let step = 10.0 * EPS_TRANS * (p[..4].iter().sum::<f64>() + value);
    p[4] = value - step;
    let below = side_of(p, surface);
    p[4] = value + step;
    (below, side_of(p, surface))
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn labels_ignore_scale(g in any_geometry(), k in 0..2usize) {
        let lambda = [0.1, 10.0][k];
        let a = classify_label(&g).type_label;
        let b = classify_label(&g.scaled(lambda).unwrap()).type_label;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn family_members_get_exactly_one_type(g in family_geometry()) {
        let c = classify_label(&g);
        let named = !matches!(c.family.label, Family::Generic | Family::GenericR3Zero | Family::Unlisted);
        let on_surface = c.surfaces.iter().any(|s| s.side == Side::On);
        prop_assume!(named && !on_surface);
        prop_assert!(matches!(c.type_label, TypeLabel::Type(_)), "{}", c.type_label);
        prop_assert!(c.table1.is_some());
    }

    #[test]
    fn case_a_sides_flip_across_surfaces(d3 in 0.2..3.0f64, r2 in 0.2..3.0f64) {
        let p = [0.0, d3, r2, 0.0, 1.0];
        prop_assert_eq!(sides_across(p, d3, Surface::E2), (Side::Below, Side::Above));
        prop_assert_eq!(sides_across(p, d3.hypot(r2), Surface::E3), (Side::Below, Side::Above));
    }

    #[test]
    fn case_f_sides_flip_across_sigma1(d3 in 0.2..3.0f64, r2 in 0.2..3.0f64, r3 in 0.2..3.0f64) {
        let p = [0.0, d3, r2, r3, 1.0];
        prop_assert_eq!(sides_across(p, d3.hypot(r2), Surface::Sigma1), (Side::Below, Side::Above));
    }

    #[test]
    fn case_b_sides_flip(d3 in 0.2..3.0f64) {
        prop_assert_eq!(sides_across([0.0, d3, 0.0, 0.0, 1.0], d3, Surface::E2), (Side::Below, Side::Above));
    }

    #[test]
    fn on_side_iff_small_residual(g in any_geometry()) {
        for s in classify_label(&g).surfaces {
            if let Some(r) = s.residual {
                prop_assert_eq!(s.side == Side::On, r.abs() < EPS_TRANS);
            }
        }
    }
}
