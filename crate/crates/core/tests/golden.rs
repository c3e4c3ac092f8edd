use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ortho3r::classifier::{classify_label, classify_topology, TypeLabel};
use ortho3r::geometry::{CrossSectionPoint, ManipulatorGeometry};
use ortho3r::ik::count_ik;
use ortho3r::oracle::{distance_to_curves, reachable_probes, OracleConfig, OracleGrid};
use ortho3r::topology::{analyze_workspace, TopologyConfig};

/// Expected (off-axis nodes, voids) per type. The two case-I types with
/// d3 < d2 come out swapped against the catalog, see `case_i_swap`.
const EXPECTED: &[(&str, usize, usize)] = &[
    ("A1", 0, 0),
    ("A2", 2, 0),
    ("A3", 4, 0),
    ("B1", 0, 0),
    ("B2", 1, 0),
    ("D1", 2, 1),
    ("D2", 0, 0),
    ("D3", 1, 0),
    ("D4", 2, 0),
    ("D5", 0, 0),
    ("D6", 0, 1),
    ("F1", 0, 0),
    ("F2", 2, 0),
    ("I1", 0, 0),
    ("I2", 2, 1),
    ("I3", 2, 1),
    ("I4", 0, 1),
];

fn sample(case: char, rng: &mut ChaCha8Rng) -> [f64; 5] {
    let mut u = |lo: f64, hi: f64| rng.gen_range(lo..hi);
    match case {
        'A' => [0.0, u(0.3, 3.0), u(0.3, 3.0), 0.0, u(0.3, 5.0)],
        'B' => [0.0, u(0.3, 3.0), 0.0, 0.0, u(0.3, 3.0)],
        'D' => [1.0, u(0.2, 3.0), 0.0, 0.0, u(0.2, 3.0)],
        'F' => [0.0, u(0.3, 2.0), u(0.3, 2.0), u(0.3, 2.0), u(0.3, 4.0)],
        'I' => [1.0, u(0.1, 3.0), 0.0, u(0.2, 1.5), u(0.1, 4.0)],
        _ => unreachable!(),
    }
}

/// Three random arms per type, each at least 3% of L away from every surface.
fn domain_members(name: &str) -> Vec<ManipulatorGeometry> {
    let case = name.chars().next().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(name.bytes().map(u64::from).sum());
    let mut out = Vec::new();
    while out.len() < 3 {
        let g = ManipulatorGeometry::from_params(sample(case, &mut rng)).unwrap();
        let c = classify_label(&g);
        let clear = c.surfaces.iter().all(|s| s.residual.is_none_or(|r| r.abs() > 0.03));
        if clear && c.type_label.to_string() == name {
            out.push(g);
        }
    }
    out
}

#[test]
fn node_and_void_counts_per_domain() {
    let failures: Vec<String> = EXPECTED
        .par_iter()
        .flat_map_iter(|&(name, nodes, voids)| {
            domain_members(name).into_iter().filter_map(move |g| {
                let t = analyze_workspace(&g, &TopologyConfig::default()).unwrap().topology;
                (t.n_nodes_offaxis != nodes || t.n_voids != voids).then(|| {
                    format!("{name} {:?}: {} nodes {} voids", g.params(), t.n_nodes_offaxis, t.n_voids)
                })
            })
        })
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn case_i_swap() {
    for (label, other) in [("I3", "I4"), ("I4", "I3")] {
        let g = domain_members(label).remove(0);
        let t = analyze_workspace(&g, &TopologyConfig::default()).unwrap().topology;
        let c = classify_topology(&g, t);
        assert_eq!(c.type_label.to_string(), label);
        assert!(!c.consistent);
        assert!(
            c.warnings.iter().any(|w| w.contains(&format!("catalog row of {other}"))),
            "{:?}",
            c.warnings
        );
    }
}

#[test]
fn single_four_solution_types() {
    for p in [
        [0.0, 2.0, 0.0, 0.0, 1.0],
        [0.0, 2.0, 0.0, 0.0, 3.0],
        [0.0, 0.0, 1.5, 0.0, 2.0],
        [1.0, 0.0, 0.0, 0.0, 1.5],
        [0.0, 1.0, 0.0, 1.0, 3.0],
        [0.0, 0.0, 3.0, 1.0, 1.0],
        [1.0, 0.0, 0.0, 1.0, 2.0],
    ] {
        let g = ManipulatorGeometry::from_params(p).unwrap();
        let c = classify_label(&g);
        let row = c.table1.unwrap();
        assert_eq!(row.four_solution_note, "All the workspace", "{p:?}");
        let t = analyze_workspace(&g, &TopologyConfig::default()).unwrap().topology;
        assert!(t.well_shaped.single_4region_covers_workspace, "{p:?} {:?}", t.region_counts());
        for q in reachable_probes(&g, 50, 3) {
            assert_eq!(count_ik(&g, q.rho, q.z), 4, "{p:?} at {q:?}");
        }
    }
}

#[test]
fn void_boundaries_lie_on_singular_curves() {
    for p in [
        [1.0, 0.0, 0.0, 1.0, 2.0],
        [1.0, 1.4, 0.0, 0.0, 0.7],
        [1.0, 0.7, 0.0, 0.0, 0.5],
        [1.0, 3.0, 0.0, 0.5, 0.7],
    ] {
        let g = ManipulatorGeometry::from_params(p).unwrap();
        let a = analyze_workspace(&g, &TopologyConfig::default()).unwrap();
        let l = g.char_length();
        let voids: Vec<_> = a.topology.regions.iter().filter(|r| r.ik_count == 0 && !r.touches_frame).collect();
        assert_eq!(voids.len(), 1, "{p:?}");
        let start = voids[0].sample_points[0];
        // March outwards until the point becomes reachable, then bisect the edge.
        for k in 0..16 {
            let t = k as f64 * std::f64::consts::TAU / 16.0;
            let at = |s: f64| CrossSectionPoint::new(start.rho + s * t.cos(), start.z + s * t.sin());
            let step = 1e-3 * l;
            let mut s = 0.0;
            while count_ik(&g, at(s).rho, at(s).z) == 0 {
                s += step;
                assert!(s < l, "{p:?}: ray {k} never leaves the void");
            }
            let (mut lo, mut hi) = (s - step, s);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if count_ik(&g, at(mid).rho, at(mid).z) == 0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let d = distance_to_curves(&at(hi), &a.singularities.images);
            assert!(d < 1e-4 * l, "{p:?}: void edge {d:.2e} from the curves");
        }
    }
}

#[test]
fn doubling_the_oracle_grid_never_loses_solutions() {
    let g = ManipulatorGeometry::new(1.0, 3.0, 2.0, 0.0, 4.0).unwrap();
    let cfg = OracleConfig::default();
    let (coarse, fine) = (OracleGrid::new(&g, 256), OracleGrid::new(&g, 512));
    for p in reachable_probes(&g, 50, cfg.seed) {
        let (a, b) = (coarse.count(p.rho, p.z, &cfg).0, fine.count(p.rho, p.z, &cfg).0);
        assert!(b >= a, "{p:?}: {a} then {b}");
    }
}

#[test]
fn transition_example_sets() {
    for (p, want) in [
        ([0.0, 2.0, 0.0, 0.0, 2.0], "Transition(B1,B2)"),
        ([1.0, 2.0, 0.0, 0.0, 1.0], "Transition(D1,D2)"),
        ([1.0, 2.0, 0.0, 0.0, 2.0], "Transition(D2,D3)"),
        ([1.0, 1.0, 0.0, 0.0, 2.0], "Transition(D3,D4)"),
        ([1.0, 0.5, 0.0, 0.0, 1.0], "Transition(D4,D5)"),
        ([1.0, 0.6, 0.0, 0.0, 0.6], "Transition(D5,D6)"),
        ([1.0, 1.0, 0.0, 0.0, 0.5], "Transition(D1,D6)"),
        ([1.0, 3.0, 0.0, 0.5, (33.0f64 / 32.0).sqrt()], "Transition(I1,I2)"),
        ([1.0, 1.0, 0.0, 0.5, 0.7], "Transition(I2,I3)"),
    ] {
        let l = classify_label(&ManipulatorGeometry::from_params(p).unwrap()).type_label;
        assert!(matches!(l, TypeLabel::Transition(..)));
        assert_eq!(l.to_string(), want, "{p:?}");
    }
}

#[test]
fn rounded_case_i_transition_set_falls_inside_a_domain() {
    // The surface sits at d4 = sqrt(33/32), about 1.0155; d4 = 1 is below it.
    let g = ManipulatorGeometry::new(1.0, 3.0, 0.0, 0.5, 1.0).unwrap();
    assert_eq!(classify_label(&g).type_label.to_string(), "I2");
}
