//! Manipulator model: the five DH lengths, the positional kinematic map, the
//! half cross-section map and the closed-form Jacobian determinant.
//!
//! Frames follow the modified DH convention with twists α2 = −90° and
//! α3 = +90°. At θ1 = 0 the end point expressed in the base frame is
//!
//! ```text
//! px = d2 + c2·F + r3·s2
//! py = d4·s3 + r2
//! pz = r3·c2 − F·s2        with F = d3 + d4·c3
//! ```
//!
//! and a non-zero θ1 rotates that point about the base z-axis.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default central-difference step for [`numeric_jacobian_det`], in radians.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut w = theta - two_pi * ((theta + PI) / two_pi).floor();
    if w >= PI {
        w -= two_pi;
    }
    if w < -PI {
        w += two_pi;
    }
    w
}

/// The five length parameters of a 3R orthogonal manipulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManipulatorGeometry {
    d2: f64,
    d3: f64,
    r2: f64,
    r3: f64,
    d4: f64,
    #[serde(skip)]
    length: f64,
}

impl ManipulatorGeometry {
    /// Validates and builds a geometry. Arguments follow the `(d2, d3, r2, r3, d4)` order.
    pub fn new(d2: f64, d3: f64, r2: f64, r3: f64, d4: f64) -> Result<Self> {
        for (name, value) in [("d2", d2), ("d3", d3), ("r2", r2), ("r3", r3), ("d4", d4)] {
            if !value.is_finite() {
                return Err(Error::NonFinite { name });
            }
        }
        if d4 <= 0.0 {
            return Err(Error::NonPositiveD4(d4));
        }
        for (name, value) in [("d2", d2), ("d3", d3), ("r2", r2), ("r3", r3)] {
            if value < 0.0 {
                return Err(Error::NegativeParameter { name, value });
            }
        }
        if d2 == 0.0 && d3 == 0.0 && r2 == 0.0 {
            return Err(Error::DegenerateGeometry);
        }
        Ok(Self {
            d2,
            d3,
            r2,
            r3,
            d4,
            length: d2 + d3 + d4 + r2 + r3,
        })
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }
    pub fn d3(&self) -> f64 {
        self.d3
    }
    pub fn r2(&self) -> f64 {
        self.r2
    }
    pub fn r3(&self) -> f64 {
        self.r3
    }
    pub fn d4(&self) -> f64 {
        self.d4
    }

    /// Characteristic length `d2 + d3 + d4 + r2 + r3`, an upper bound on reach.
    pub fn char_length(&self) -> f64 {
        self.length
    }

    /// All five lengths multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.d2 * factor,
            self.d3 * factor,
            self.r2 * factor,
            self.r3 * factor,
            self.d4 * factor,
        )
    }

    /// The same manipulator rescaled so that its characteristic length is 1.
    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.length)
            .expect("rescaling a valid geometry stays valid")
    }

    /// Parameters as `(d2, d3, r2, r3, d4)`.
    pub fn params(&self) -> [f64; 5] {
        [self.d2, self.d3, self.r2, self.r3, self.d4]
    }

    /// Looks a parameter up by name (`d2`, `d3`, `r2`, `r3` or `d4`).
    pub fn param(&self, name: &str) -> Option<f64> {
        match name {
            "d2" => Some(self.d2),
            "d3" => Some(self.d3),
            "r2" => Some(self.r2),
            "r3" => Some(self.r3),
            "d4" => Some(self.d4),
            _ => None,
        }
    }

    /// Copy of the parameters with one of them replaced; the result is not validated.
    pub fn with_param(params: [f64; 5], name: &str, value: f64) -> Option<[f64; 5]> {
        let idx = PARAM_NAMES.iter().position(|p| *p == name)?;
        let mut out = params;
        out[idx] = value;
        Some(out)
    }

    pub fn from_params(p: [f64; 5]) -> Result<Self> {
        Self::new(p[0], p[1], p[2], p[3], p[4])
    }

    /// Parses the flat JSON geometry document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: GeometryDoc =
            serde_json::from_str(text).map_err(|e| Error::GeometryFile(e.to_string()))?;
        Self::new(doc.d2, doc.d3, doc.r2, doc.r3, doc.d4)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::GeometryFile(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Position of the end point at θ1 = 0, i.e. expressed in frame 1.
    pub fn frame1_position(&self, theta2: f64, theta3: f64) -> [f64; 3] {
        let (s2, c2) = theta2.sin_cos();
        let (s3, c3) = theta3.sin_cos();
        self.frame1_position_sc(s2, c2, s3, c3)
    }

    #[inline]
    pub(crate) fn frame1_position_sc(&self, s2: f64, c2: f64, s3: f64, c3: f64) -> [f64; 3] {
        let f = self.d3 + self.d4 * c3;
        [
            self.d2 + c2 * f + self.r3 * s2,
            self.d4 * s3 + self.r2,
            self.r3 * c2 - f * s2,
        ]
    }

    /// `(ρ², z)` at the given joint angles. Smooth everywhere, unlike `ρ`.
    #[inline]
    pub fn rho2_z(&self, theta2: f64, theta3: f64) -> [f64; 2] {
        let p = self.frame1_position(theta2, theta3);
        [p[0] * p[0] + p[1] * p[1], p[2]]
    }

    /// Jacobian of `(ρ², z)` with respect to `(θ2, θ3)`, row-major.
    pub fn image_jacobian(&self, theta2: f64, theta3: f64) -> [[f64; 2]; 2] {
        let (s2, c2) = theta2.sin_cos();
        let (s3, c3) = theta3.sin_cos();
        let f = self.d3 + self.d4 * c3;
        let px = self.d2 + c2 * f + self.r3 * s2;
        let py = self.d4 * s3 + self.r2;
        let dpx2 = -s2 * f + self.r3 * c2;
        let dpx3 = -c2 * self.d4 * s3;
        let dpy3 = self.d4 * c3;
        let dpz2 = -self.r3 * s2 - f * c2;
        let dpz3 = self.d4 * s3 * s2;
        [
            [2.0 * px * dpx2, 2.0 * (px * dpx3 + py * dpy3)],
            [dpz2, dpz3],
        ]
    }
}

/// Parameter names in storage order.
pub const PARAM_NAMES: [&str; 5] = ["d2", "d3", "r2", "r3", "d4"];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryDoc {
    d2: f64,
    d3: f64,
    r2: f64,
    r3: f64,
    d4: f64,
}

/// Joint angles, each wrapped into `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointConfig {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl JointConfig {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self {
            theta1: wrap_angle(theta1),
            theta2: wrap_angle(theta2),
            theta3: wrap_angle(theta3),
        }
    }

    /// Distance on the 3-torus (max-norm of wrapped differences).
    pub fn torus_distance(&self, other: &JointConfig) -> f64 {
        [
            self.theta1 - other.theta1,
            self.theta2 - other.theta2,
            self.theta3 - other.theta3,
        ]
        .iter()
        .map(|d| wrap_angle(*d).abs())
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartesianPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &CartesianPoint) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn cross_section(&self) -> CrossSectionPoint {
        CrossSectionPoint {
            rho: self.x.hypot(self.y),
            z: self.z,
        }
    }
}

/// A point of the half cross-section `(ρ ≥ 0, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionPoint {
    pub rho: f64,
    pub z: f64,
}

impl CrossSectionPoint {
    pub fn new(rho: f64, z: f64) -> Self {
        Self { rho, z }
    }

    pub fn distance(&self, other: &CrossSectionPoint) -> f64 {
        (self.rho - other.rho).hypot(self.z - other.z)
    }

    pub fn mirrored(&self) -> Self {
        Self {
            rho: self.rho,
            z: -self.z,
        }
    }
}

/// End-point position in the base frame.
pub fn forward_kinematics(geom: &ManipulatorGeometry, q: &JointConfig) -> CartesianPoint {
    let p = geom.frame1_position(q.theta2, q.theta3);
    let (s1, c1) = q.theta1.sin_cos();
    CartesianPoint {
        x: c1 * p[0] - s1 * p[1],
        y: s1 * p[0] + c1 * p[1],
        z: p[2],
    }
}

/// Half cross-section coordinates of the end point, independent of θ1.
pub fn cross_section_coords(geom: &ManipulatorGeometry, theta2: f64, theta3: f64) -> CrossSectionPoint {
    let p = geom.frame1_position(theta2, theta3);
    CrossSectionPoint {
        rho: p[0].hypot(p[1]),
        z: p[2],
    }
}

/// Closed-form Jacobian determinant of the orthogonal 3R arm:
///
/// `d4·{(d3 + d4·c3)·[(d2 + r3·s2)·s3 + (d3·s3 − r2·c3)·c2] − r3·(r2 + d4·s3)·s2·c3}`
pub fn jacobian_det(geom: &ManipulatorGeometry, theta2: f64, theta3: f64) -> f64 {
    let (s2, c2) = theta2.sin_cos();
    let (s3, c3) = theta3.sin_cos();
    jacobian_det_sc(geom, s2, c2, s3, c3)
}

#[inline]
pub(crate) fn jacobian_det_sc(g: &ManipulatorGeometry, s2: f64, c2: f64, s3: f64, c3: f64) -> f64 {
    let f = g.d3 + g.d4 * c3;
    let h = (g.d2 + g.r3 * s2) * s3 + (g.d3 * s3 - g.r2 * c3) * c2;
    g.d4 * (f * h - g.r3 * (g.r2 + g.d4 * s3) * s2 * c3)
}

/// Gradient of [`jacobian_det`] with respect to `(θ2, θ3)`.
pub fn jacobian_det_gradient(g: &ManipulatorGeometry, theta2: f64, theta3: f64) -> [f64; 2] {
    let (s2, c2) = theta2.sin_cos();
    let (s3, c3) = theta3.sin_cos();
    let f = g.d3 + g.d4 * c3;
    let h = (g.d2 + g.r3 * s2) * s3 + (g.d3 * s3 - g.r2 * c3) * c2;
    let dh2 = g.r3 * c2 * s3 - (g.d3 * s3 - g.r2 * c3) * s2;
    let dh3 = (g.d2 + g.r3 * s2) * c3 + (g.d3 * c3 + g.r2 * s3) * c2;
    let k2 = g.r3 * (g.r2 + g.d4 * s3) * c2 * c3;
    let k3 = g.r3 * s2 * (g.d4 * c3 * c3 - (g.r2 + g.d4 * s3) * s3);
    [
        g.d4 * (f * dh2 - k2),
        g.d4 * (-g.d4 * s3 * h + f * dh3 - k3),
    ]
}

/// Determinant of the central-difference 3×3 positional Jacobian of
/// [`forward_kinematics`].
pub fn numeric_jacobian_det(geom: &ManipulatorGeometry, q: &JointConfig, step: f64) -> f64 {
    let base = [q.theta1, q.theta2, q.theta3];
    let mut cols = [[0.0; 3]; 3];
    for (j, col) in cols.iter_mut().enumerate() {
        let mut plus = base;
        let mut minus = base;
        plus[j] += step;
        minus[j] -= step;
        let pp = forward_kinematics(geom, &JointConfig { theta1: plus[0], theta2: plus[1], theta3: plus[2] });
        let pm = forward_kinematics(geom, &JointConfig { theta1: minus[0], theta2: minus[1], theta3: minus[2] });
        *col = [
            (pp.x - pm.x) / (2.0 * step),
            (pp.y - pm.y) / (2.0 * step),
            (pp.z - pm.z) / (2.0 * step),
        ];
    }
    let [a, b, c] = cols;
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// For a joint pair `(θ2, θ3)` returns `θ2'` such that `(θ2', θ3)` reaches the
/// mirror point `(ρ, −z)`.
pub fn mirror_theta2(geom: &ManipulatorGeometry, theta2: f64, theta3: f64) -> Option<f64> {
    let p = geom.frame1_position(theta2, theta3);
    let f = geom.d3 + geom.d4 * theta3.cos();
    let r3 = geom.r3;
    let denom = f * f + r3 * r3;
    if denom == 0.0 {
        return None;
    }
    let u = p[0] - geom.d2;
    let z = -p[2];
    let c2 = (f * u + r3 * z) / denom;
    let s2 = (r3 * u - f * z) / denom;
    Some(wrap_angle(s2.atan2(c2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> ManipulatorGeometry {
        ManipulatorGeometry::new(1.0, 3.0, 2.0, 0.0, 4.0).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert_eq!(fig3().char_length(), 10.0);
        assert_eq!(
            ManipulatorGeometry::new(1.0, 3.0, 2.0, 0.0, 0.0),
            Err(Error::NonPositiveD4(0.0))
        );
        assert_eq!(
            ManipulatorGeometry::new(0.0, 0.0, 0.0, 1.0, 2.0),
            Err(Error::DegenerateGeometry)
        );
        assert!(matches!(
            ManipulatorGeometry::new(-1.0, 3.0, 2.0, 0.0, 4.0),
            Err(Error::NegativeParameter { name: "d2", .. })
        ));
        assert!(matches!(
            ManipulatorGeometry::new(f64::NAN, 3.0, 2.0, 0.0, 4.0),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn degenerate_pattern_collapses_to_sphere() {
        // d2 = d3 = r2 = 0: every image point sits on ρ² + z² = d4² + r3².
        let (r3, d4) = (1.0, 2.0);
        let n = 64;
        for i in 0..n {
            for j in 0..n {
                let t2 = -PI + 2.0 * PI * i as f64 / n as f64;
                let t3 = -PI + 2.0 * PI * j as f64 / n as f64;
                let (s2, c2) = t2.sin_cos();
                let (s3, c3) = t3.sin_cos();
                let f = d4 * c3;
                let px = c2 * f + r3 * s2;
                let py = d4 * s3;
                let pz = r3 * c2 - f * s2;
                let r = px * px + py * py + pz * pz;
                assert!((r - (d4 * d4 + r3 * r3)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn home_configuration() {
        let p = forward_kinematics(&fig3(), &JointConfig::new(0.0, 0.0, 0.0));
        assert_eq!((p.x, p.y, p.z), (8.0, 2.0, 0.0));
        let cs = cross_section_coords(&fig3(), 0.0, 0.0);
        assert!((cs.rho - 68f64.sqrt()).abs() < 1e-14);
        assert_eq!(cs.z, 0.0);
    }

    #[test]
    fn jacobian_det_home_value() {
        assert!((jacobian_det(&fig3(), 0.0, 0.0) + 56.0).abs() < 1e-12);
        let num = numeric_jacobian_det(&fig3(), &JointConfig::new(0.0, 0.0, 0.0), DEFAULT_FD_STEP);
        assert!((num.abs() - 56.0).abs() < 1e-6, "{num}");
    }

    #[test]
    fn determinant_tracks_positional_jacobian_with_offset() {
        let g = ManipulatorGeometry::new(0.7, 1.3, 0.4, 0.9, 1.1).unwrap();
        let ratios: Vec<f64> = [(0.3, -1.2, 0.1), (2.0, 0.5, -0.4), (-2.8, 3.0, 1.7), (1.1, 1.9, 0.0)]
            .iter()
            .map(|&(a, b, t1)| numeric_jacobian_det(&g, &JointConfig::new(t1, a, b), DEFAULT_FD_STEP) / jacobian_det(&g, a, b))
            .collect();
        for r in &ratios {
            assert!((r - ratios[0]).abs() < 1e-6 * ratios[0].abs(), "{ratios:?}");
        }
    }

    #[test]
    fn singular_line_maps_to_a_point() {
        let g = fig3();
        let t3 = (-3.0f64 / 4.0).acos();
        assert!(jacobian_det(&g, 0.7, t3).abs() < 1e-12);
        let p0 = cross_section_coords(&g, 0.0, t3);
        for k in 0..32 {
            let t2 = -PI + k as f64 * 0.2;
            let p = cross_section_coords(&g, t2, t3);
            assert!(p.distance(&p0) < 1e-12);
            assert!(p.z.abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = ManipulatorGeometry::new(0.7, 1.3, 0.4, 0.9, 1.1).unwrap();
        for &(a, b) in &[(0.3, -1.2), (2.0, 0.5), (-2.8, 3.0)] {
            let gr = jacobian_det_gradient(&g, a, b);
            let h = 1e-6;
            let d2 = (jacobian_det(&g, a + h, b) - jacobian_det(&g, a - h, b)) / (2.0 * h);
            let d3 = (jacobian_det(&g, a, b + h) - jacobian_det(&g, a, b - h)) / (2.0 * h);
            assert!((gr[0] - d2).abs() < 1e-7);
            assert!((gr[1] - d3).abs() < 1e-7);
        }
    }

    #[test]
    fn wrap_is_idempotent() {
        for &x in &[-7.0, -PI, 0.0, PI, 3.0 * PI, 1e3] {
            let w = wrap_angle(x);
            assert!((-PI..PI).contains(&w));
            assert_eq!(wrap_angle(w), w);
        }
    }

    #[test]
    fn geometry_file_rejects_unknown_keys() {
        let ok = ManipulatorGeometry::from_json_str(r#"{"d2":1,"d3":3,"r2":2,"r3":0,"d4":4}"#).unwrap();
        assert_eq!(ok, fig3());
        assert!(ManipulatorGeometry::from_json_str(r#"{"d2":1,"d3":3,"r2":2,"r3":0,"d4":4,"x":1}"#).is_err());
        assert!(ManipulatorGeometry::from_json_str(r#"{"d2":1,"d3":3,"r2":2,"r3":0}"#).is_err());
        assert_eq!(
            ManipulatorGeometry::from_json_str(r#"{"d2":1,"d3":3,"r2":2,"r3":0,"d4":-1}"#),
            Err(Error::NonPositiveD4(-1.0))
        );
    }
}
