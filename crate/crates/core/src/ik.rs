//! Inverse kinematics of the orthogonal 3R arm.
//!
//! For `d2 > 0` the problem reduces to a polynomial of degree at most four in
//! `t = tan(θ3/2)` whose coefficients depend on the target only through
//! `R = ρ²` and `Z = z²`. Every real root gives exactly one `(θ2, θ3)` pair.
//!
//! For `d2 = 0` the distance equation is linear in `(s3, c3)` and each of its
//! (at most two) roots carries up to two θ2 branches.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{forward_kinematics, wrap_angle, CartesianPoint, JointConfig, ManipulatorGeometry};
use crate::poly;

/// Default round-trip tolerance, relative to the characteristic length.
pub const DEFAULT_TOL: f64 = 1e-9;
/// On-axis threshold relative to the characteristic length.
pub const EPS_AXIS: f64 = 1e-9;
/// A parameter counts as zero when it is below this fraction of the characteristic length.
pub const EPS_ZERO: f64 = 1e-12;

/// Extremum value (relative) under which a quartic is taken to touch zero.
const REAL_TOL: f64 = 1e-12;
const NEAR_TOL: f64 = 1e-4;
const CLUSTER_TOL: f64 = 1e-7;

/// Whether `d2` is small enough that the reduced solver must be used.
pub fn uses_reduced_path(geom: &ManipulatorGeometry) -> bool {
    geom.d2() <= EPS_ZERO * geom.char_length()
}

/// The inverse kinematic polynomial `P(t)` for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarticPolynomial {
    /// `c0..c4`, ascending powers of `t`.
    pub coeffs: [f64; 5],
    pub target_r: f64,
    pub target_z: f64,
    pub effective_degree: usize,
}

impl QuarticPolynomial {
    pub fn eval(&self, t: f64) -> f64 {
        poly::eval(&self.coeffs, t)
    }

    pub fn derivative(&self) -> Vec<f64> {
        poly::derivative(&self.coeffs)
    }
}

/// Coefficients of `P(t)` as a function of `R = ρ²` and `Z = z²`.
pub(crate) fn quartic_coeffs(g: &ManipulatorGeometry, r: f64, z2: f64) -> [f64; 5] {
    let (d2, d3, d4, r2, r3) = (g.d2(), g.d3(), g.d4(), g.r2(), g.r3());
    let k = r + z2 - d2 * d2 - r3 * r3 - d3 * d3 - d4 * d4 - r2 * r2;
    // (1 + t²)·(2·d2·U) with U the in-plane offset of the wrist centre
    let nq = [k - 2.0 * d3 * d4, -4.0 * r2 * d4, k + 2.0 * d3 * d4];
    // (1 + t²)·F
    let fq = [d3 + d4, 0.0, d3 - d4];
    let one_t2_sq = [1.0, 0.0, 2.0, 0.0, 1.0];
    let closure = poly::add(
        &poly::scale(&one_t2_sq, z2 - r3 * r3),
        &poly::scale(&poly::mul(&fq, &fq), -1.0),
    );
    let p = poly::add(&poly::mul(&nq, &nq), &poly::scale(&closure, 4.0 * d2 * d2));
    let mut out = [0.0; 5];
    for (o, v) in out.iter_mut().zip(p.iter()) {
        *o = *v;
    }
    out
}

/// Builds `P(t)` for the target `(ρ, z)`. Requires `d2 > 0`.
pub fn ik_polynomial(geom: &ManipulatorGeometry, rho: f64, z: f64) -> Result<QuarticPolynomial> {
    if uses_reduced_path(geom) {
        return Err(Error::ZeroD2Path);
    }
    let coeffs = quartic_coeffs(geom, rho * rho, z * z);
    Ok(QuarticPolynomial {
        coeffs,
        target_r: rho * rho,
        target_z: z * z,
        effective_degree: poly::effective_degree(&coeffs),
    })
}

/// Multiplicity classification of one inverse kinematic solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    Simple,
    DoubleRoot,
    NearSingular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IkSolutionSet {
    pub solutions: Vec<JointConfig>,
    pub multiplicity_flags: Vec<Multiplicity>,
    /// Target on the base axis: θ1 is undetermined and reported as 0.
    pub on_axis: bool,
    /// The polynomial had a near-double root or a branch merge.
    pub near_singular: bool,
}

impl IkSolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }
}

/// A `(θ2, θ3)` solution of the planar problem plus its multiplicity.
#[derive(Debug, Clone, Copy)]
struct PlanarSolution {
    theta2: f64,
    theta3: f64,
    mult: Multiplicity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IkCount {
    pub count: usize,
    pub near_singular: bool,
}

/// θ3 roots with their multiplicity (1 or 2) for the general path.
fn theta3_roots_general(g: &ManipulatorGeometry, r: f64, z2: f64) -> (Vec<(f64, usize)>, bool) {
    let c = quartic_coeffs(g, r, z2);
    let deg = poly::effective_degree(&c);
    let found = poly::real_roots(&c[..=deg], REAL_TOL, NEAR_TOL);
    let mut near = found.near_real > 0;
    let mut thetas: Vec<f64> = Vec::new();
    for &(t, m) in &found.roots {
        thetas.extend(std::iter::repeat_n(2.0 * t.atan(), m));
    }
    // Roots at t = ∞ (θ3 = π) show up as a drop of the effective degree.
    for _ in deg..4 {
        thetas.push(-PI);
    }
    thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let clustered = cluster_angles(&thetas);
    if clustered.iter().any(|(_, m)| *m > 1) {
        near = true;
    }
    (clustered, near)
}

/// Merges angles closer than the cluster tolerance (with wraparound).
fn cluster_angles(sorted: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &a in sorted {
        match out.last_mut() {
            Some((b, m)) if wrap_angle(a - *b).abs() < CLUSTER_TOL => *m += 1,
            _ => out.push((a, 1)),
        }
    }
    if out.len() > 1 {
        let first = out[0].0;
        let last = out[out.len() - 1].0;
        if wrap_angle(first - last).abs() < CLUSTER_TOL {
            let (_, m) = out.pop().unwrap();
            out[0].1 += m;
        }
    }
    out
}

fn planar_general(g: &ManipulatorGeometry, rho: f64, z: f64) -> (Vec<PlanarSolution>, bool) {
    let r = rho * rho;
    let (roots, mut near) = theta3_roots_general(g, r, z * z);
    let (d2, d3, d4, r2, r3) = (g.d2(), g.d3(), g.d4(), g.r2(), g.r3());
    let mut out = Vec::with_capacity(roots.len());
    for (theta3, m) in roots {
        let (s3, c3) = theta3.sin_cos();
        let f = d3 + d4 * c3;
        let n = r + z * z - d2 * d2 - r3 * r3 - d3 * d3 - d4 * d4 - r2 * r2
            - 2.0 * d3 * d4 * c3
            - 2.0 * r2 * d4 * s3;
        let u = n / (2.0 * d2);
        let den = f * f + r3 * r3;
        let theta2 = if den > 0.0 {
            let c2 = (f * u + r3 * z) / den;
            let s2 = (r3 * u - f * z) / den;
            s2.atan2(c2)
        } else {
            near = true;
            0.0
        };
        let mult = if m > 1 {
            Multiplicity::DoubleRoot
        } else {
            Multiplicity::Simple
        };
        out.push(PlanarSolution {
            theta2: wrap_angle(theta2),
            theta3: wrap_angle(theta3),
            mult,
        });
    }
    (out, near)
}

/// Solves `A·s3 + B·c3 + C = 0` for the `d2 = 0` family.
pub fn solve_theta3_reduced(geom: &ManipulatorGeometry, rho: f64, z: f64) -> Result<Vec<f64>> {
    Ok(reduced_theta3(geom, rho, z)?.0)
}

fn reduced_theta3(g: &ManipulatorGeometry, rho: f64, z: f64) -> Result<(Vec<f64>, bool)> {
    let (d3, d4, r2, r3) = (g.d3(), g.d4(), g.r2(), g.r3());
    let l = g.char_length();
    let a = 2.0 * r2 * d4;
    let b = 2.0 * d3 * d4;
    let c = d3 * d3 + d4 * d4 + r2 * r2 + r3 * r3 - rho * rho - z * z;
    let s = a.hypot(b);
    if s <= EPS_ZERO * l * l {
        return Err(Error::DegenerateReduced);
    }
    // b·c3 + a·s3 = s·cos(θ3 − φ)
    let phi = a.atan2(b);
    let gap = c.abs() - s;
    let tol = 1e-12 * l * l;
    if gap > tol {
        return Ok((Vec::new(), false));
    }
    if gap.abs() <= tol {
        let theta = if c < 0.0 { phi } else { phi + PI };
        return Ok((vec![wrap_angle(theta)], true));
    }
    let delta = (-c / s).acos();
    let mut roots = vec![wrap_angle(phi + delta), wrap_angle(phi - delta)];
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok((roots, false))
}

fn planar_reduced(g: &ManipulatorGeometry, rho: f64, z: f64) -> (Vec<PlanarSolution>, bool) {
    let (roots, mut near) = match reduced_theta3(g, rho, z) {
        Ok(v) => v,
        Err(_) => return (Vec::new(), true),
    };
    let (d3, d4, r3) = (g.d3(), g.d4(), g.r3());
    let l = g.char_length();
    let tol = 1e-12 * l * l;
    let mut out = Vec::new();
    for theta3 in roots {
        let f = d3 + d4 * theta3.cos();
        let den = f * f + r3 * r3;
        let w = den - z * z;
        let mult = if near {
            Multiplicity::DoubleRoot
        } else {
            Multiplicity::Simple
        };
        if den <= tol {
            // The whole θ2 circle lands on one point.
            near = true;
            if z.abs() <= tol.sqrt() {
                out.push(PlanarSolution {
                    theta2: 0.0,
                    theta3,
                    mult: Multiplicity::NearSingular,
                });
            }
            continue;
        }
        let branches: Vec<f64> = if w > tol {
            let u = w.sqrt();
            vec![u, -u]
        } else if w.abs() <= tol {
            near = true;
            vec![0.0]
        } else {
            Vec::new()
        };
        for u in branches {
            let c2 = (f * u + r3 * z) / den;
            let s2 = (r3 * u - f * z) / den;
            let m = if u == 0.0 { Multiplicity::DoubleRoot } else { mult };
            out.push(PlanarSolution {
                theta2: wrap_angle(s2.atan2(c2)),
                theta3,
                mult: m,
            });
        }
    }
    (out, near)
}

fn planar_solutions(geom: &ManipulatorGeometry, rho: f64, z: f64) -> (Vec<PlanarSolution>, bool) {
    if uses_reduced_path(geom) {
        planar_reduced(geom, rho, z)
    } else {
        planar_general(geom, rho, z)
    }
}

/// Number of distinct `(θ2, θ3)` solutions reaching the cross-section point `(ρ, z)`.
pub fn count_ik(geom: &ManipulatorGeometry, rho: f64, z: f64) -> usize {
    count_ik_detailed(geom, rho, z).count
}

pub fn count_ik_detailed(geom: &ManipulatorGeometry, rho: f64, z: f64) -> IkCount {
    let (sols, near) = planar_solutions(geom, rho, z);
    IkCount {
        count: sols.len(),
        near_singular: near,
    }
}

/// All inverse kinematic solutions for a Cartesian target.
pub fn solve_ik(geom: &ManipulatorGeometry, target: &CartesianPoint, tol: f64) -> IkSolutionSet {
    let l = geom.char_length();
    let rho = target.x.hypot(target.y);
    let on_axis = rho < EPS_AXIS * l;
    let (planar, near) = planar_solutions(geom, rho, target.z);
    let mut solutions = Vec::with_capacity(planar.len());
    let mut flags = Vec::with_capacity(planar.len());
    for s in planar {
        let p = geom.frame1_position(s.theta2, s.theta3);
        let theta1 = if on_axis {
            0.0
        } else {
            target.y.atan2(target.x) - p[1].atan2(p[0])
        };
        let q = JointConfig::new(theta1, s.theta2, s.theta3);
        let mut mult = s.mult;
        if mult == Multiplicity::Simple {
            let err = forward_kinematics(geom, &q).distance(target);
            if err > tol * l {
                mult = Multiplicity::NearSingular;
            }
        }
        solutions.push(q);
        flags.push(mult);
    }
    IkSolutionSet {
        solutions,
        multiplicity_flags: flags,
        on_axis,
        near_singular: near,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> ManipulatorGeometry {
        ManipulatorGeometry::new(1.0, 3.0, 2.0, 0.0, 4.0).unwrap()
    }

    #[test]
    fn home_point_is_a_root() {
        let p = ik_polynomial(&fig3(), 68f64.sqrt(), 0.0).unwrap();
        let scale = poly::max_abs(&p.coeffs);
        assert!(p.eval(0.0).abs() < 1e-12 * scale);
    }

    #[test]
    fn unreachable_target_has_no_roots() {
        assert_eq!(count_ik(&fig3(), 100.0, 0.0), 0);
        let p = ik_polynomial(&fig3(), 100.0, 0.0).unwrap();
        assert!(poly::real_roots(&p.coeffs, REAL_TOL, NEAR_TOL).roots.is_empty());
    }

    #[test]
    fn polynomial_depends_on_z_squared_only() {
        let a = ik_polynomial(&fig3(), 5.0, 1.7).unwrap();
        let b = ik_polynomial(&fig3(), 5.0, -1.7).unwrap();
        assert_eq!(a.coeffs, b.coeffs);
    }

    #[test]
    fn reduced_path_errors() {
        let g = ManipulatorGeometry::new(0.0, 2.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(ik_polynomial(&g, 2.0, 0.0), Err(Error::ZeroD2Path));
        let boundary = solve_theta3_reduced(&g, 3.0, 0.0).unwrap();
        assert_eq!(boundary.len(), 1);
        assert!(boundary[0].abs() < 1e-12);
        assert!(solve_theta3_reduced(&g, 10.0, 0.0).unwrap().is_empty());
    }

    #[test]
    fn home_round_trip() {
        let g = fig3();
        let set = solve_ik(&g, &CartesianPoint::new(8.0, 2.0, 0.0), DEFAULT_TOL);
        let home = JointConfig::new(0.0, 0.0, 0.0);
        assert!(set.solutions.iter().any(|q| q.torus_distance(&home) < 1e-9));
        for q in &set.solutions {
            let p = forward_kinematics(&g, q);
            assert!(p.distance(&CartesianPoint::new(8.0, 2.0, 0.0)) < 1e-9 * g.char_length());
        }
    }

    #[test]
    fn shell_interior_has_four_solutions() {
        let g = ManipulatorGeometry::new(0.0, 2.0, 0.0, 0.0, 1.0).unwrap();
        let set = solve_ik(&g, &CartesianPoint::new(2.0, 0.0, 0.0), DEFAULT_TOL);
        assert_eq!(set.len(), 4);
        assert_eq!(count_ik(&g, 2.0, 0.0), 4);
    }

    #[test]
    fn cluster_wraps_around() {
        let c = cluster_angles(&[-PI, -1.0, PI - 1e-9]);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].1, 2);
    }
}
