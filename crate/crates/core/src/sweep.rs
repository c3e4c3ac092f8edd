//! Two-parameter sweeps of the classification over a rectangular grid.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::classify_label;
use crate::error::{Error, Result};
use crate::geometry::{ManipulatorGeometry, PARAM_NAMES};
use crate::singularity::{analyze_singularities, SingularityConfig};

/// Label of a cell whose parameters do not form a valid geometry.
pub const INVALID: &str = "INVALID";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl SweepAxis {
    pub fn value(&self, k: usize) -> f64 {
        if self.n == 1 {
            return self.lo;
        }
        self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64
    }

    /// Spacing between samples.
    pub fn step(&self) -> f64 {
        if self.n == 1 {
            0.0
        } else {
            (self.hi - self.lo) / (self.n - 1) as f64
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    /// Parses `param:lo:hi:n`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidArgument(format!("axis `{s}`: {why}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [param, lo, hi, n] = parts[..] else {
            return Err(bad("expected param:lo:hi:n"));
        };
        if !PARAM_NAMES.contains(&param) {
            return Err(bad("unknown parameter"));
        }
        let lo: f64 = lo.parse().map_err(|_| bad("lo is not a number"))?;
        let hi: f64 = hi.parse().map_err(|_| bad("hi is not a number"))?;
        let n: usize = n.parse().map_err(|_| bad("n is not a count"))?;
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(bad("need finite lo <= hi"));
        }
        if n == 0 {
            return Err(bad("n must be positive"));
        }
        Ok(Self {
            param: param.to_string(),
            lo,
            hi,
            n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Type label from the parameter inequalities.
    Label,
    /// Off-axis node count from the traced singular curves.
    Nodes,
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "label" => Ok(SweepMode::Label),
            "nodes" => Ok(SweepMode::Nodes),
            _ => Err(Error::InvalidArgument(format!("unknown sweep mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub x: SweepAxis,
    pub y: SweepAxis,
    pub fixed: BTreeMap<String, f64>,
    pub mode: SweepMode,
}

impl SweepSpec {
    /// Checks that the axes differ and that the fixed values cover the rest.
    pub fn validate(&self) -> Result<()> {
        if self.x.param == self.y.param {
            return Err(Error::InvalidArgument("the two swept parameters must differ".into()));
        }
        for k in self.fixed.keys() {
            if !PARAM_NAMES.contains(&k.as_str()) {
                return Err(Error::InvalidArgument(format!("unknown fixed parameter `{k}`")));
            }
            if *k == self.x.param || *k == self.y.param {
                return Err(Error::InvalidArgument(format!("`{k}` is both swept and fixed")));
            }
        }
        for p in PARAM_NAMES {
            if p != self.x.param && p != self.y.param && !self.fixed.contains_key(p) {
                return Err(Error::InvalidArgument(format!("parameter `{p}` is neither swept nor fixed")));
            }
        }
        Ok(())
    }

    fn params_at(&self, x: f64, y: f64) -> [f64; 5] {
        let mut p = [0.0; 5];
        for (k, name) in PARAM_NAMES.iter().enumerate() {
            p[k] = if *name == self.x.param {
                x
            } else if *name == self.y.param {
                y
            } else {
                self.fixed[*name]
            };
        }
        p
    }
}

/// Parses a `key=value` fixed-parameter assignment.
pub fn parse_fixed(s: &str) -> Result<(String, f64)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidArgument(format!("fixed value `{s}`: expected key=value")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("fixed value `{s}`: not a number")))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub x: f64,
    pub y: f64,
    pub label: String,
    pub on_transition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMap {
    pub spec: SweepSpec,
    /// Row-major: `y` outer, `x` inner.
    pub cells: Vec<SweepCell>,
}

/// A maximal 4-connected set of cells sharing a label.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub label: String,
    pub cells: Vec<usize>,
}

fn cell_at(spec: &SweepSpec, x: f64, y: f64) -> SweepCell {
    let geom = match ManipulatorGeometry::from_params(spec.params_at(x, y)) {
        Ok(g) => g,
        Err(_) => {
            return SweepCell {
                x,
                y,
                label: INVALID.to_string(),
                on_transition: false,
            }
        }
    };
    match spec.mode {
        SweepMode::Label => {
            let c = classify_label(&geom);
            SweepCell {
                x,
                y,
                label: c.type_label.to_string(),
                on_transition: c.type_label.is_transition(),
            }
        }
        SweepMode::Nodes => {
            let c = classify_label(&geom);
            let label = match analyze_singularities(&geom, &SingularityConfig::default()) {
                Ok(a) => a.offaxis_nodes().to_string(),
                Err(_) => INVALID.to_string(),
            };
            SweepCell {
                x,
                y,
                label,
                on_transition: c.type_label.is_transition(),
            }
        }
    }
}

pub fn sweep(spec: &SweepSpec) -> Result<SweepMap> {
    spec.validate()?;
    let (nx, ny) = (spec.x.n, spec.y.n);
    let cells = (0..nx * ny)
        .into_par_iter()
        .map(|k| cell_at(spec, spec.x.value(k % nx), spec.y.value(k / nx)))
        .collect();
    Ok(SweepMap {
        spec: spec.clone(),
        cells,
    })
}

impl SweepMap {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,label,on_transition\n");
        for c in &self.cells {
            let _ = writeln!(s, "{},{},{},{}", c.x, c.y, c.label, c.on_transition);
        }
        s
    }

    /// Labels in order of first appearance.
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.label.as_str()) {
                out.push(&c.label);
            }
        }
        out
    }

    /// Connected label domains, transition and invalid cells excluded.
    pub fn domains(&self) -> Vec<Domain> {
        let (nx, ny) = (self.spec.x.n, self.spec.y.n);
        let skip = |c: &SweepCell| c.on_transition || c.label == INVALID;
        let mut seen = vec![false; self.cells.len()];
        let mut out = Vec::new();
        for start in 0..self.cells.len() {
            if seen[start] || skip(&self.cells[start]) {
                continue;
            }
            let label = &self.cells[start].label;
            let mut stack = vec![start];
            let mut cells = Vec::new();
            seen[start] = true;
            while let Some(k) = stack.pop() {
                cells.push(k);
                let (i, j) = (k % nx, k / nx);
                let mut next = Vec::with_capacity(4);
                if i > 0 {
                    next.push(k - 1);
                }
                if i + 1 < nx {
                    next.push(k + 1);
                }
                if j > 0 {
                    next.push(k - nx);
                }
                if j + 1 < ny {
                    next.push(k + nx);
                }
                for m in next {
                    if !seen[m] && !skip(&self.cells[m]) && self.cells[m].label == *label {
                        seen[m] = true;
                        stack.push(m);
                    }
                }
            }
            cells.sort_unstable();
            out.push(Domain {
                label: label.clone(),
                cells,
            });
        }
        out
    }

    /// Colour-coded grid with a legend.
    pub fn to_svg(&self) -> String {
        const PALETTE: [&str; 12] = [
            "#4E79A7", "#F28E2B", "#E15759", "#76B7B2", "#59A14F", "#EDC948", "#B07AA1", "#FF9DA7", "#9C755F",
            "#BAB0AC", "#86BCB6", "#D37295",
        ];
        let (nx, ny) = (self.spec.x.n, self.spec.y.n);
        let px = (600.0 / nx.max(ny) as f64).max(2.0);
        let (w, h) = (nx as f64 * px, ny as f64 * px);
        let labels: Vec<&str> = self
            .labels()
            .into_iter()
            .filter(|l| !l.starts_with("Transition") && *l != INVALID)
            .collect();
        let colour = |c: &SweepCell| -> &str {
            if c.on_transition {
                "black"
            } else if c.label == INVALID {
                "white"
            } else {
                let k = labels.iter().position(|l| *l == c.label).unwrap_or(0);
                PALETTE[k % PALETTE.len()]
            }
        };
        let legend_w = 160.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.1}" height="{:.1}" viewBox="0 0 {:.1} {:.1}">"#,
            w + legend_w + 60.0,
            h + 60.0,
            w + legend_w + 60.0,
            h + 60.0
        );
        s.push_str("<g id=\"cells\" stroke=\"none\">\n");
        for (k, c) in self.cells.iter().enumerate() {
            let (i, j) = (k % nx, k / nx);
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                40.0 + i as f64 * px,
                20.0 + (ny - 1 - j) as f64 * px,
                px,
                px,
                colour(c)
            );
        }
        s.push_str("</g>\n");
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{} [{}, {}]</text>"#,
            40.0 + w / 2.0,
            h + 45.0,
            self.spec.x.param,
            self.spec.x.lo,
            self.spec.x.hi
        );
        let _ = writeln!(
            s,
            r#"<text x="12" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 12 {:.1})">{} [{}, {}]</text>"#,
            20.0 + h / 2.0,
            20.0 + h / 2.0,
            self.spec.y.param,
            self.spec.y.lo,
            self.spec.y.hi
        );
        s.push_str("<g id=\"legend\" font-size=\"12\">\n");
        let lx = 60.0 + w;
        let mut entries: Vec<(String, String)> = labels
            .iter()
            .enumerate()
            .map(|(k, l)| (l.to_string(), PALETTE[k % PALETTE.len()].to_string()))
            .collect();
        entries.push(("transition".to_string(), "black".to_string()));
        for (k, (name, fill)) in entries.iter().enumerate() {
            let y = 20.0 + k as f64 * 18.0;
            let _ = writeln!(
                s,
                r#"<rect x="{lx:.1}" y="{y:.1}" width="12" height="12" fill="{fill}"/><text x="{:.1}" y="{:.1}">{name}</text>"#,
                lx + 18.0,
                y + 10.0
            );
        }
        s.push_str("</g>\n</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(x: &str, y: &str, fixed: &[(&str, f64)]) -> SweepSpec {
        SweepSpec {
            x: x.parse().unwrap(),
            y: y.parse().unwrap(),
            fixed: fixed.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            mode: SweepMode::Label,
        }
    }

    #[test]
    fn axis_parsing() {
        let a: SweepAxis = "d3:0.2:3:60".parse().unwrap();
        assert_eq!((a.param.as_str(), a.lo, a.hi, a.n), ("d3", 0.2, 3.0, 60));
        assert!((a.value(59) - 3.0).abs() < 1e-15);
        for bad in ["d3:1:0:5", "x:0:1:5", "d3:0:1", "d3:0:1:0", "d3:a:1:4"] {
            assert!(bad.parse::<SweepAxis>().is_err(), "{bad}");
        }
        assert_eq!(parse_fixed("r2=1").unwrap(), ("r2".to_string(), 1.0));
        assert!(parse_fixed("r2").is_err());
    }

    #[test]
    fn spec_must_cover_all_parameters() {
        assert!(spec("d3:0:1:3", "d3:0:1:3", &[]).validate().is_err());
        assert!(spec("d3:0:1:3", "d4:0:1:3", &[("d2", 0.0), ("r2", 1.0)]).validate().is_err());
        assert!(spec("d3:0:1:3", "d4:0:1:3", &[("d2", 0.0), ("r2", 1.0), ("r3", 0.0)])
            .validate()
            .is_ok());
    }

    #[test]
    fn case_b_has_two_domains() {
        let m = sweep(&spec("d3:0.2:3:30", "d4:0.25:3.05:30", &[("d2", 0.0), ("r2", 0.0), ("r3", 0.0)])).unwrap();
        assert_eq!(m.cells.len(), 900);
        let mut labels: Vec<String> = m.domains().into_iter().map(|d| d.label).collect();
        labels.sort();
        assert_eq!(labels, ["B1", "B2"]);
    }

    #[test]
    fn csv_layout() {
        let m = sweep(&spec("d3:1:2:2", "d4:1:1:1", &[("d2", 0.0), ("r2", 0.0), ("r3", 0.0)])).unwrap();
        assert_eq!(
            m.to_csv(),
            "x,y,label,on_transition\n1,1,Transition(B1,B2),true\n2,1,B1,false\n"
        );
    }
}
