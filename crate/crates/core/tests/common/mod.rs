#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use ortho3r::geometry::ManipulatorGeometry;

/// Deterministic runner settings shared by the property suites.
pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(7),
        failure_persistence: None,
        ..Config::default()
    }
}

fn length() -> impl Strategy<Value = f64> {
    0.2..3.0f64
}

fn maybe_zero() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 3 => length()]
}

/// Any valid geometry, zero parameters included.
pub fn any_geometry() -> impl Strategy<Value = ManipulatorGeometry> {
    (maybe_zero(), maybe_zero(), maybe_zero(), maybe_zero(), 0.3..3.0f64)
        .prop_filter_map("valid geometry", |(d2, d3, r2, r3, d4)| {
            ManipulatorGeometry::new(d2, d3, r2, r3, d4).ok()
        })
}

/// Geometries with every parameter nonzero.
pub fn generic_geometry() -> impl Strategy<Value = ManipulatorGeometry> {
    (length(), length(), length(), length(), 0.3..3.0f64)
        .prop_map(|(d2, d3, r2, r3, d4)| ManipulatorGeometry::new(d2, d3, r2, r3, d4).unwrap())
}

/// Geometries in one of the ten zero-parameter families: d2, d3 or r2 is zero.
pub fn family_geometry() -> impl Strategy<Value = ManipulatorGeometry> {
    (any_geometry(), 0..3usize).prop_filter_map("family member", |(g, k)| {
        let mut p = g.params();
        p[k] = 0.0;
        ManipulatorGeometry::from_params(p).ok()
    })
}

pub fn angle() -> impl Strategy<Value = f64> {
    -std::f64::consts::PI..std::f64::consts::PI
}
