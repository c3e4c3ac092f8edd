mod common;

use common::{any_geometry, config, family_geometry};
use ortho3r::geometry::CrossSectionPoint;
use ortho3r::ik::count_ik;
use ortho3r::oracle::distance_to_curves;
use ortho3r::singularity::{analyze_singularities, detect_cusps, CriticalPoint, SingularityConfig};
use ortho3r::topology::{analyze_workspace, TopologyConfig, FRAME};
use proptest::prelude::*;

fn paired(points: &[CriticalPoint], tol: f64) -> bool {
    points.iter().all(|p| {
        let m = p.location.mirrored();
        points.iter().any(|q| q.location.distance(&m) <= tol)
    })
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn families_have_no_cusps(g in family_geometry()) {
        prop_assert!(detect_cusps(&g).unwrap().is_empty());
    }

    #[test]
    fn critical_sets_are_mirror_symmetric(g in any_geometry()) {
        let cfg = SingularityConfig::default();
        let a = analyze_singularities(&g, &cfg).unwrap();
        let tol = cfg.eps_pt * g.char_length();
        prop_assert!(paired(&a.cusps, tol), "{:?}", a.cusps);
        prop_assert!(paired(&a.nodes, tol), "{:?}", a.nodes);
    }

    #[test]
    fn critical_points_separate_counts(g in any_geometry()) {
        let a = analyze_singularities(&g, &SingularityConfig::default()).unwrap();
        let l = g.char_length();
        let (r, delta) = (1e-2 * l, 1e-6 * l);
        for c in a.cusps.iter().chain(&a.nodes).filter(|c| !c.on_axis && c.location.rho > 2.0 * r) {
            // Some nearby stretch of curve must carry a count change of two.
            let mut found = false;
            for img in a.images.iter().filter(|i| !i.degenerate_to_point) {
                for w in img.vertices.windows(2) {
                    let d = w[0].distance(&c.location);
                    if !(r..2.0 * r).contains(&d) {
                        continue;
                    }
                    let (tr, tz) = (w[1].rho - w[0].rho, w[1].z - w[0].z);
                    let norm = tr.hypot(tz);
                    if norm == 0.0 {
                        continue;
                    }
                    let (nr, nz) = (-tz / norm, tr / norm);
                    let plus = count_ik(&g, w[0].rho + delta * nr, w[0].z + delta * nz);
                    let minus = count_ik(&g, w[0].rho - delta * nr, w[0].z - delta * nz);
                    if plus.abs_diff(minus) == 2 {
                        found = true;
                        break;
                    }
                }
                if found {
                    break;
                }
            }
            prop_assert!(found, "{:?} at {:?}", c.kind, c.location);
        }
    }

    #[test]
    fn certification_is_scale_free(g in any_geometry(), k in 0..2usize) {
        let cfg = SingularityConfig::default();
        let s = g.scaled([0.1, 10.0][k]).unwrap();
        let (a, b) = (analyze_singularities(&g, &cfg).unwrap(), analyze_singularities(&s, &cfg).unwrap());
        prop_assert_eq!(a.cusps.len(), b.cusps.len());
        prop_assert_eq!(a.offaxis_nodes(), b.offaxis_nodes());
        for c in a.cusps.iter().chain(&a.nodes).chain(&b.cusps).chain(&b.nodes) {
            prop_assert!(c.residuals.iter().all(|r| *r < cfg.eps_cert), "{:?}", c.residuals);
        }
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn regions_tile_the_frame(g in any_geometry()) {
        let a = analyze_workspace(&g, &TopologyConfig::default()).unwrap();
        let l = g.char_length();
        let total: f64 = a.topology.regions.iter().map(|r| r.area_estimate).sum();
        let frame = FRAME * l * 2.0 * FRAME * l;
        prop_assert!((total - frame).abs() < 1e-9 * frame, "{total} vs {frame}");
    }

    #[test]
    fn region_counts_are_even_in_z(g in any_geometry()) {
        let a = analyze_workspace(&g, &TopologyConfig::default()).unwrap();
        let clear = 1e-2 * g.char_length();
        for r in a.topology.regions.iter().filter(|r| r.resolved) {
            for p in &r.sample_points {
                let m = CrossSectionPoint::new(p.rho, -p.z);
                if distance_to_curves(&m, &a.singularities.images) > clear {
                    prop_assert_eq!(count_ik(&g, m.rho, m.z), r.ik_count, "region {} at {:?}", r.id, p);
                }
            }
        }
    }

    #[test]
    fn resolved_counts_are_even(g in any_geometry()) {
        let a = analyze_workspace(&g, &TopologyConfig::default()).unwrap();
        for r in a.topology.regions.iter().filter(|r| r.resolved) {
            prop_assert!(r.ik_count % 2 == 0 && r.ik_count <= 4, "{}", r.ik_count);
        }
    }
}
