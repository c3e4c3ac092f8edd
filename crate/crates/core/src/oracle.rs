//! Brute-force validators that share nothing with the polynomial solver:
//! a torus-grid scan of the planar map followed by damped Newton.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cross_section_coords, wrap_angle, CrossSectionPoint, ManipulatorGeometry};
use crate::singularity::PlanarCurve;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub grid_n: usize,
    pub refine_iters: usize,
    /// Joint-space distance (radians) under which two converged roots are the same.
    pub dedupe_tol: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            grid_n: 1024,
            refine_iters: 30,
            dedupe_tol: 1e-6,
            seed: 7,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 256 {
            return Err(Error::InvalidArgument(format!(
                "oracle grid_n must be at least 256 (got {})",
                self.grid_n
            )));
        }
        if !(self.dedupe_tol > 0.0) {
            return Err(Error::InvalidArgument("oracle dedupe_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCount {
    pub count: usize,
    /// Distinct roots as `(θ2, θ3)`.
    pub roots: Vec<[f64; 2]>,
    /// Some bracketing cell failed to converge and the grid was doubled.
    pub convergence_warning: bool,
}

/// Sampled `(ρ², z)` values of one geometry, reusable across targets.
/// Works on the geometry normalized to unit characteristic length.
pub struct OracleGrid {
    geom: ManipulatorGeometry,
    scale: f64,
    n: usize,
    values: Vec<[f64; 2]>,
}

impl OracleGrid {
    pub fn new(geom: &ManipulatorGeometry, n: usize) -> Self {
        let unit = geom.normalized();
        let h = 2.0 * PI / n as f64;
        let trig: Vec<(f64, f64)> = (0..n).map(|k| (-PI + k as f64 * h).sin_cos()).collect();
        let mut values = Vec::with_capacity(n * n);
        for &(s3, c3) in &trig {
            for &(s2, c2) in &trig {
                let p = unit.frame1_position_sc(s2, c2, s3, c3);
                values.push([p[0] * p[0] + p[1] * p[1], p[2]]);
            }
        }
        Self {
            geom: unit,
            scale: geom.char_length(),
            n,
            values,
        }
    }

    fn angle(&self, k: f64) -> f64 {
        -PI + k * 2.0 * PI / self.n as f64
    }

    /// Counts distinct solutions for `(ρ, z)` given in the original units.
    pub fn count(&self, rho: f64, z: f64, cfg: &OracleConfig) -> (usize, Vec<[f64; 2]>, usize) {
        let target = [(rho / self.scale).powi(2), z / self.scale];
        let n = self.n;
        let mut roots: Vec<[f64; 2]> = Vec::new();
        let mut failures = 0;
        for j in 0..n {
            let j1 = (j + 1) % n;
            for i in 0..n {
                let i1 = (i + 1) % n;
                let corners = [
                    self.values[j * n + i],
                    self.values[j * n + i1],
                    self.values[j1 * n + i],
                    self.values[j1 * n + i1],
                ];
                if !brackets(&corners, &target) {
                    continue;
                }
                let start = [self.angle(i as f64 + 0.5), self.angle(j as f64 + 0.5)];
                match newton(&self.geom, start, target, cfg.refine_iters) {
                    Some(q) => {
                        if !roots.iter().any(|r| torus_dist(r, &q) < cfg.dedupe_tol) {
                            roots.push(q);
                        }
                    }
                    None => failures += 1,
                }
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (roots.len(), roots, failures)
    }
}

fn brackets(corners: &[[f64; 2]; 4], target: &[f64; 2]) -> bool {
    (0..2).all(|k| {
        let lo = corners.iter().map(|c| c[k]).fold(f64::INFINITY, f64::min);
        let hi = corners.iter().map(|c| c[k]).fold(f64::NEG_INFINITY, f64::max);
        lo <= target[k] && target[k] <= hi
    })
}

fn torus_dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    wrap_angle(a[0] - b[0]).abs().max(wrap_angle(a[1] - b[1]).abs())
}

/// Damped Newton on `(ρ²(q) − R, z(q) − Z)`.
fn newton(g: &ManipulatorGeometry, start: [f64; 2], target: [f64; 2], iters: usize) -> Option<[f64; 2]> {
    let resid = |q: [f64; 2]| {
        let v = g.rho2_z(q[0], q[1]);
        [v[0] - target[0], v[1] - target[1]]
    };
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut q = start;
    let mut r = resid(q);
    for _ in 0..iters {
        if norm(r) < 1e-13 {
            return Some([wrap_angle(q[0]), wrap_angle(q[1])]);
        }
        let m = g.image_jacobian(q[0], q[1]);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-300 {
            return None;
        }
        let dx = [
            (m[1][1] * r[0] - m[0][1] * r[1]) / det,
            (-m[1][0] * r[0] + m[0][0] * r[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let cand = [q[0] - lambda * dx[0], q[1] - lambda * dx[1]];
            let rc = resid(cand);
            if norm(rc) < norm(r) {
                q = cand;
                r = rc;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm(r) < 1e-11 {
        Some([wrap_angle(q[0]), wrap_angle(q[1])])
    } else {
        None
    }
}

/// Distinct-solution count at `(ρ, z)` by exhaustive torus scan.
pub fn brute_force_count(geom: &ManipulatorGeometry, rho: f64, z: f64, cfg: &OracleConfig) -> usize {
    brute_force_detailed(geom, rho, z, cfg).count
}

pub fn brute_force_detailed(geom: &ManipulatorGeometry, rho: f64, z: f64, cfg: &OracleConfig) -> OracleCount {
    let grid = OracleGrid::new(geom, cfg.grid_n);
    let (count, roots, failures) = grid.count(rho, z, cfg);
    if failures == 0 {
        return OracleCount {
            count,
            roots,
            convergence_warning: false,
        };
    }
    let fine = OracleGrid::new(geom, cfg.grid_n * 2);
    let (count2, roots2, _) = fine.count(rho, z, cfg);
    if count2 >= count {
        OracleCount {
            count: count2,
            roots: roots2,
            convergence_warning: true,
        }
    } else {
        OracleCount {
            count,
            roots,
            convergence_warning: true,
        }
    }
}

/// Images of `n` uniformly drawn joint configurations: reachable by construction.
pub fn reachable_probes(geom: &ManipulatorGeometry, n: usize, seed: u64) -> Vec<CrossSectionPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let t2 = rng.gen_range(-PI..PI);
            let t3 = rng.gen_range(-PI..PI);
            cross_section_coords(geom, t2, t3)
        })
        .collect()
}

/// `n` points drawn uniformly from the half-plane box `ρ ∈ [0, 1.05 L]`,
/// `z ∈ [−1.05 L, 1.05 L]`.
pub fn box_probes(geom: &ManipulatorGeometry, n: usize, seed: u64) -> Vec<CrossSectionPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = 1.05 * geom.char_length();
    (0..n)
        .map(|_| CrossSectionPoint::new(rng.gen_range(0.0..b), rng.gen_range(-b..b)))
        .collect()
}

/// Distance from `p` to the nearest vertex-to-vertex segment of any curve.
pub fn distance_to_curves(p: &CrossSectionPoint, curves: &[PlanarCurve]) -> f64 {
    let mut best = f64::INFINITY;
    for c in curves {
        let v = &c.vertices;
        if v.len() == 1 {
            best = best.min(p.distance(&v[0]));
        }
        for w in v.windows(2) {
            let (a, b) = ([w[0].rho, w[0].z], [w[1].rho, w[1].z]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let t = if len2 > 0.0 {
                (((p.rho - a[0]) * d[0] + (p.z - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            best = best.min((p.rho - a[0] - t * d[0]).hypot(p.z - a[1] - t * d[1]));
        }
    }
    best
}

/// `(min, max)` of the end-point distance to the base origin over all configurations.
pub fn reach_bounds(geom: &ManipulatorGeometry) -> (f64, f64) {
    let n = 512;
    let h = 2.0 * PI / n as f64;
    let dist2 = |a: f64, b: f64| {
        let p = geom.frame1_position(a, b);
        p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
    };
    let mut best_min = (f64::INFINITY, [0.0, 0.0]);
    let mut best_max = (f64::NEG_INFINITY, [0.0, 0.0]);
    for j in 0..n {
        for i in 0..n {
            let q = [-PI + i as f64 * h, -PI + j as f64 * h];
            let v = dist2(q[0], q[1]);
            if v < best_min.0 {
                best_min = (v, q);
            }
            if v > best_max.0 {
                best_max = (v, q);
            }
        }
    }
    let lo = pattern_search(&|q: [f64; 2]| dist2(q[0], q[1]), best_min.1, h);
    let hi = pattern_search(&|q: [f64; 2]| -dist2(q[0], q[1]), best_max.1, h);
    (lo.max(0.0).sqrt(), (-hi).max(0.0).sqrt())
}

/// Compass search minimizing `f` from `q`, starting with step `h`.
fn pattern_search(f: &dyn Fn([f64; 2]) -> f64, mut q: [f64; 2], mut h: f64) -> f64 {
    let mut v = f(q);
    while h > 1e-12 {
        let mut improved = false;
        for d in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            let c = [q[0] + h * d[0], q[1] + h * d[1]];
            let vc = f(c);
            if vc < v {
                v = vc;
                q = c;
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_bounds() {
        let g = ManipulatorGeometry::new(0.0, 2.0, 0.0, 0.0, 1.0).unwrap();
        let (lo, hi) = reach_bounds(&g);
        assert!((lo - 1.0).abs() < 1e-9, "{lo}");
        assert!((hi - 3.0).abs() < 1e-9, "{hi}");
    }

    #[test]
    fn bounds_within_characteristic_length() {
        let g = ManipulatorGeometry::new(1.0, 3.0, 2.0, 0.0, 4.0).unwrap();
        let (_, hi) = reach_bounds(&g);
        assert!(hi <= 10.0);
        let (_, hi10) = reach_bounds(&g.scaled(10.0).unwrap());
        assert!((hi10 - 10.0 * hi).abs() < 1e-8);
    }

    #[test]
    fn oracle_counts() {
        let cfg = OracleConfig::default();
        let fig3 = ManipulatorGeometry::new(1.0, 3.0, 2.0, 0.0, 4.0).unwrap();
        assert_eq!(brute_force_count(&fig3, 100.0, 0.0, &cfg), 0);
        let shell = ManipulatorGeometry::new(0.0, 2.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(brute_force_count(&shell, 2.0, 0.0, &cfg), 4);
    }

    #[test]
    fn probes_are_seeded() {
        let g = ManipulatorGeometry::new(1.0, 3.0, 2.0, 0.0, 4.0).unwrap();
        assert_eq!(reachable_probes(&g, 20, 3), reachable_probes(&g, 20, 3));
        assert_ne!(box_probes(&g, 20, 3), box_probes(&g, 20, 4));
        let (_, hi) = reach_bounds(&g);
        assert!(reachable_probes(&g, 200, 1)
            .iter()
            .all(|p| p.rho.hypot(p.z) <= hi + 1e-9));
    }

    #[test]
    fn config_validation() {
        let bad = OracleConfig {
            grid_n: 100,
            ..OracleConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(OracleConfig::default().validate().is_ok());
    }
}
