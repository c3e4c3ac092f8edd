//! Serializable analysis reports, their canonical JSON text and the SVG
//! rendering of a half cross-section.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};

use crate::classifier::{
    classify_label, classify_topology, FamilyCase, LabelClassification, SurfaceEvaluation, Table1Row,
    TypeLabel,
};
use crate::error::Result;
use crate::geometry::ManipulatorGeometry;
use crate::ik::count_ik;
use crate::singularity::{CriticalKind, CriticalPoint};
use crate::topology::{analyze_workspace, TopologyConfig, WorkspaceAnalysis, WorkspaceTopology};

/// Fill colours of the cross-section plot, by solution count.
pub const FILL_4: &str = "#6E6E6E";
pub const FILL_2: &str = "#C8C8C8";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryEcho {
    pub d2: f64,
    pub d3: f64,
    pub r2: f64,
    pub r3: f64,
    pub d4: f64,
}

impl From<&ManipulatorGeometry> for GeometryEcho {
    fn from(g: &ManipulatorGeometry) -> Self {
        let [d2, d3, r2, r3, d4] = g.params();
        Self { d2, d3, r2, r3, d4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub grid_n: usize,
    pub raster_n: usize,
    pub eps_sing: f64,
    pub eps_pt: f64,
    pub eps_cert: f64,
    pub eps_axis: f64,
    pub eps_trans: f64,
    pub eps_zero: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ConfigEcho {
    pub fn new(cfg: &TopologyConfig, seed: Option<u64>) -> Self {
        Self {
            grid_n: cfg.singularity.grid_n,
            raster_n: cfg.raster_n,
            eps_sing: cfg.singularity.eps_sing,
            eps_pt: cfg.singularity.eps_pt,
            eps_cert: cfg.singularity.eps_cert,
            eps_axis: cfg.singularity.eps_axis,
            eps_trans: crate::classifier::EPS_TRANS,
            eps_zero: crate::classifier::EPS_ZERO,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub geometry: GeometryEcho,
    pub family: FamilyCase,
    pub type_label: TypeLabel,
    pub surfaces: Vec<SurfaceEvaluation>,
    /// Catalog metadata; every row carries its provenance tag.
    pub table1: Option<Table1Row>,
    /// Absent on the label-only path.
    pub computed: Option<WorkspaceTopology>,
    pub consistent: Option<bool>,
    /// Cusps, nodes and isolated points, in that order.
    pub critical_points: Vec<CriticalPoint>,
    /// Near-tangent contacts that were not counted.
    pub tangencies: Vec<CriticalPoint>,
    pub config: ConfigEcho,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    /// Label-only report: no curve tracing.
    pub fn label_only(geom: &ManipulatorGeometry, cfg: &TopologyConfig) -> Self {
        let LabelClassification {
            family,
            type_label,
            surfaces,
            table1,
            warnings,
        } = classify_label(geom);
        Self {
            geometry: geom.into(),
            family,
            type_label,
            surfaces,
            table1,
            computed: None,
            consistent: None,
            critical_points: Vec::new(),
            tangencies: Vec::new(),
            config: ConfigEcho::new(cfg, None),
            warnings,
        }
    }

    /// Full report from an existing workspace analysis.
    pub fn from_analysis(geom: &ManipulatorGeometry, analysis: &WorkspaceAnalysis, cfg: &TopologyConfig) -> Self {
        let c = classify_topology(geom, analysis.topology.clone());
        let s = &analysis.singularities;
        let critical_points = s
            .cusps
            .iter()
            .chain(&s.nodes)
            .chain(&s.isolated)
            .cloned()
            .collect();
        Self {
            geometry: geom.into(),
            family: c.family,
            type_label: c.type_label,
            surfaces: c.surfaces,
            table1: c.table1,
            computed: Some(c.computed),
            consistent: Some(c.consistent),
            critical_points,
            tangencies: s.tangencies.clone(),
            config: ConfigEcho::new(cfg, None),
            warnings: c.warnings,
        }
    }

    pub fn analyze(geom: &ManipulatorGeometry, cfg: &TopologyConfig) -> Result<(Self, WorkspaceAnalysis)> {
        let analysis = analyze_workspace(geom, cfg)?;
        Ok((Self::from_analysis(geom, &analysis, cfg), analysis))
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// JSON number formatting with 17 significant digits for every float.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Canonical single-line JSON text of any serializable value.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value
        .serialize(&mut ser)
        .expect("report values always serialize");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// Pixel frame of a plot of the half-plane box `ρ ∈ [0, 1.05 L]`,
/// `z ∈ [−1.05 L, 1.05 L]`.
struct Frame {
    half: f64,
    scale: f64,
    margin: f64,
}

impl Frame {
    fn new(geom: &ManipulatorGeometry, height_px: f64) -> Self {
        let half = 1.05 * geom.char_length();
        Self {
            half,
            scale: height_px / (2.0 * half),
            margin: 20.0,
        }
    }

    fn x(&self, rho: f64) -> f64 {
        self.margin + rho * self.scale
    }

    fn y(&self, z: f64) -> f64 {
        self.margin + (self.half - z) * self.scale
    }

    fn width(&self) -> f64 {
        2.0 * self.margin + self.half * self.scale
    }

    fn height(&self) -> f64 {
        2.0 * self.margin + 2.0 * self.half * self.scale
    }
}

/// SVG of the half cross-section: solution-count shading, singular curves,
/// cusps (circles), nodes (crosses) and isolated points (diamonds).
pub fn cross_section_svg(geom: &ManipulatorGeometry, analysis: &WorkspaceAnalysis) -> String {
    let f = Frame::new(geom, 800.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.1}" height="{:.1}" viewBox="0 0 {:.1} {:.1}">"#,
        f.width(),
        f.height(),
        f.width(),
        f.height()
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{:.1}" height="{:.1}" fill="white"/>"#, f.width(), f.height());

    // shading from a solution-count raster, one rect per run of equal counts
    let nx = 200usize;
    let nz = 2 * nx;
    let cell = f.half / nx as f64;
    s.push_str("<g id=\"regions\" stroke=\"none\">\n");
    for j in 0..nz {
        let z = f.half - (j as f64 + 0.5) * cell;
        let mut i = 0;
        while i < nx {
            let c = count_ik(geom, (i as f64 + 0.5) * cell, z);
            let mut k = i + 1;
            while k < nx && count_ik(geom, (k as f64 + 0.5) * cell, z) == c {
                k += 1;
            }
            let fill = match c {
                4 => Some(FILL_4),
                2 => Some(FILL_2),
                _ => None,
            };
            if let Some(fill) = fill {
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                    f.x(i as f64 * cell),
                    f.y(f.half - j as f64 * cell),
                    (k - i) as f64 * cell * f.scale,
                    cell * f.scale
                );
            }
            i = k;
        }
    }
    s.push_str("</g>\n");

    s.push_str("<g id=\"curves\" fill=\"none\" stroke=\"black\" stroke-width=\"1\">\n");
    for c in analysis.singularities.images.iter().filter(|c| !c.degenerate_to_point) {
        let mut pts = String::new();
        for v in &c.vertices {
            let _ = write!(pts, "{:.2},{:.2} ", f.x(v.rho), f.y(v.z));
        }
        let _ = writeln!(s, r#"<polyline points="{}"/>"#, pts.trim_end());
    }
    s.push_str("</g>\n");

    let marks = |kind: CriticalKind| {
        analysis
            .singularities
            .cusps
            .iter()
            .chain(&analysis.singularities.nodes)
            .chain(&analysis.singularities.isolated)
            .filter(move |p| p.kind == kind)
    };
    s.push_str("<g id=\"cusps\" fill=\"none\" stroke=\"black\">\n");
    for p in marks(CriticalKind::Cusp) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="5"/>"#,
            f.x(p.location.rho),
            f.y(p.location.z)
        );
    }
    s.push_str("</g>\n<g id=\"nodes\" stroke=\"black\" stroke-width=\"1.5\">\n");
    for p in marks(CriticalKind::Node) {
        let (x, y) = (f.x(p.location.rho), f.y(p.location.z));
        let _ = writeln!(
            s,
            r#"<path d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}"/>"#,
            x - 5.0,
            y - 5.0,
            x + 5.0,
            y + 5.0,
            x - 5.0,
            y + 5.0,
            x + 5.0,
            y - 5.0
        );
    }
    s.push_str("</g>\n<g id=\"isolated\" fill=\"black\">\n");
    for p in marks(CriticalKind::Isolated) {
        let (x, y) = (f.x(p.location.rho), f.y(p.location.z));
        let _ = writeln!(
            s,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/>"#,
            x,
            y - 5.0,
            x + 5.0,
            y,
            x,
            y + 5.0,
            x - 5.0,
            y
        );
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r#"<line id="axis" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="4 4"/>"#,
        f.x(0.0),
        f.y(f.half),
        f.x(0.0),
        f.y(-f.half)
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_uses_seventeen_digits() {
        let text = to_json(&[0.1f64, 8.0, -2.5e-300]);
        assert_eq!(text, "[1.0000000000000001e-1,8.0000000000000000e0,-2.5000000000000000e-300]");
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, [0.1, 8.0, -2.5e-300]);
    }

    #[test]
    fn label_only_report_round_trips() {
        let g = ManipulatorGeometry::new(0.0, 2.0, 1.0, 0.0, 1.5).unwrap();
        let r = AnalysisReport::label_only(&g, &TopologyConfig::default());
        assert_eq!(r.type_label.to_string(), "A1");
        let text = r.to_json();
        let back: AnalysisReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);
    }
}
