//! Singular curves of the arm: their trace on the `(θ2, θ3)` torus, their
//! image in the `(ρ, z)` half-plane, and the cusps, nodes and isolated points
//! they carry.
//!
//! All numerical work runs on the geometry rescaled to unit characteristic
//! length; locations are converted back to the caller's units on output and
//! residuals stay in unit-length terms.

mod critical;
mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CrossSectionPoint, ManipulatorGeometry};

pub use critical::certify_critical_point;

pub(crate) use trace::det;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityConfig {
    /// Torus grid resolution per axis.
    pub grid_n: usize,
    /// Bound on `|det J| / L³` at refined vertices.
    pub eps_sing: f64,
    /// Image diameter (relative to L) below which a curve is a single point.
    pub eps_pt: f64,
    /// Certification bound on the scaled residuals.
    pub eps_cert: f64,
    /// Distance to the z-axis (relative to L) under which a point counts as on it.
    pub eps_axis: f64,
}

impl Default for SingularityConfig {
    fn default() -> Self {
        Self {
            grid_n: 720,
            eps_sing: 1e-9,
            eps_pt: 1e-7,
            eps_cert: 1e-7,
            eps_axis: 1e-6,
        }
    }
}

impl SingularityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 64 {
            return Err(Error::InvalidArgument(format!(
                "singular-curve grid must be at least 64 (got {})",
                self.grid_n
            )));
        }
        for (name, v) in [
            ("eps_sing", self.eps_sing),
            ("eps_pt", self.eps_pt),
            ("eps_cert", self.eps_cert),
            ("eps_axis", self.eps_axis),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// A connected component of the singular set on the joint torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusCurve {
    /// `(θ2, θ3)` pairs in `[-π, π)²`.
    pub vertices: Vec<[f64; 2]>,
    pub closed: bool,
    /// Number of turns around the θ2 and θ3 circles.
    pub wrap_count: [i32; 2],
}

/// Image of a [`TorusCurve`] in the half cross-section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarCurve {
    pub vertices: Vec<CrossSectionPoint>,
    /// Index of the source curve.
    pub preimage: usize,
    pub degenerate_to_point: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Cusp,
    Node,
    Isolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub kind: CriticalKind,
    pub location: CrossSectionPoint,
    /// Joint-space preimages `(θ2, θ3)`.
    pub preimages: Vec<[f64; 2]>,
    /// Certification residuals, scaled to unit characteristic length.
    pub residuals: Vec<f64>,
    pub on_axis: bool,
    /// Set for contacts that are not counted, e.g. near-tangent crossings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

/// Everything found on the singular set of one geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityAnalysis {
    pub curves: Vec<TorusCurve>,
    pub images: Vec<PlanarCurve>,
    pub cusps: Vec<CriticalPoint>,
    pub nodes: Vec<CriticalPoint>,
    pub isolated: Vec<CriticalPoint>,
    /// Near-tangent contacts between curve images; never counted as nodes.
    pub tangencies: Vec<CriticalPoint>,
    pub warnings: Vec<String>,
}

impl SingularityAnalysis {
    pub fn offaxis_nodes(&self) -> usize {
        self.nodes.iter().filter(|n| !n.on_axis).count()
    }

    pub fn onaxis_nodes(&self) -> usize {
        self.nodes.iter().filter(|n| n.on_axis).count()
    }
}

/// Trace on the unit-length geometry, shared by the public entry points.
pub(crate) struct UnitTrace {
    pub unit: ManipulatorGeometry,
    pub scale: f64,
    pub trace: trace::Trace,
    pub warnings: Vec<String>,
}

pub(crate) fn trace_unit(geom: &ManipulatorGeometry, cfg: &SingularityConfig) -> Result<UnitTrace> {
    cfg.validate()?;
    let unit = geom.normalized();
    let mut warnings = Vec::new();
    let mut tr = trace::trace(&unit, cfg.grid_n, cfg.eps_sing);
    if tr.ambiguous_cells > 0 {
        let finer = trace::trace(&unit, cfg.grid_n * 2, cfg.eps_sing);
        if finer.ambiguous_cells > 0 {
            warnings.push(format!(
                "resolution: {} grid cells still hold two curve branches at grid {}",
                finer.ambiguous_cells, finer.grid_n
            ));
        }
        tr = finer;
    }
    for (k, c) in tr.curves.iter().enumerate() {
        let worst = c
            .curve
            .vertices
            .iter()
            .map(|q| det(&unit, *q).abs())
            .fold(0.0, f64::max);
        if worst >= cfg.eps_sing {
            warnings.push(format!("curve {k}: vertex residual {worst:.3e} above tolerance"));
        }
    }
    Ok(UnitTrace {
        unit,
        scale: geom.char_length(),
        trace: tr,
        warnings,
    })
}

/// Zero set of the Jacobian determinant on the joint torus.
pub fn joint_space_singular_curves(geom: &ManipulatorGeometry, grid_n: usize) -> Result<Vec<TorusCurve>> {
    let cfg = SingularityConfig {
        grid_n,
        ..SingularityConfig::default()
    };
    let t = trace_unit(geom, &cfg)?;
    Ok(t.trace.curves.into_iter().map(|c| c.curve).collect())
}

/// Vertex-wise image of each curve in the half cross-section.
pub fn workspace_singular_image(geom: &ManipulatorGeometry, curves: &[TorusCurve]) -> Vec<PlanarCurve> {
    image_curves(geom, curves, SingularityConfig::default().eps_pt)
}

pub(crate) fn image_curves(geom: &ManipulatorGeometry, curves: &[TorusCurve], eps_pt: f64) -> Vec<PlanarCurve> {
    let tol = eps_pt * geom.char_length();
    curves
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let vertices: Vec<CrossSectionPoint> = c
                .vertices
                .iter()
                .map(|q| crate::geometry::cross_section_coords(geom, q[0], q[1]))
                .collect();
            PlanarCurve {
                degenerate_to_point: image_diameter(&vertices) < tol,
                vertices,
                preimage: k,
            }
        })
        .collect()
}

fn image_diameter(v: &[CrossSectionPoint]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in v {
        lo = [lo[0].min(p.rho), lo[1].min(p.z)];
        hi = [hi[0].max(p.rho), hi[1].max(p.z)];
    }
    if v.is_empty() {
        return 0.0;
    }
    (hi[0] - lo[0]).hypot(hi[1] - lo[1])
}

/// Traces, maps and searches the singular set for critical points.
pub fn analyze_singularities(geom: &ManipulatorGeometry, cfg: &SingularityConfig) -> Result<SingularityAnalysis> {
    let t = trace_unit(geom, cfg)?;
    Ok(critical::analyze(&t, cfg))
}

/// Certified cusps at the default configuration.
pub fn detect_cusps(geom: &ManipulatorGeometry) -> Result<Vec<CriticalPoint>> {
    Ok(analyze_singularities(geom, &SingularityConfig::default())?.cusps)
}

/// Certified nodes (on and off the axis) at the default configuration.
pub fn detect_nodes(geom: &ManipulatorGeometry) -> Result<Vec<CriticalPoint>> {
    Ok(analyze_singularities(geom, &SingularityConfig::default())?.nodes)
}
