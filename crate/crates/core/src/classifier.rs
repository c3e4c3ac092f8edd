//! Family cases, separating surfaces and type labels for manipulators with at
//! least one vanishing DH parameter, plus the static catalog of type
//! properties.
//!
//! Labels come from inequalities on the parameters; the catalog entries are
//! reference metadata and never computed. The computed topology is attached
//! to every classification and compared against the catalog.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::ManipulatorGeometry;
use crate::topology::{analyze_workspace, TopologyConfig, WorkspaceTopology};

/// Relative size under which a parameter counts as zero.
pub const EPS_ZERO: f64 = 1e-12;
/// Relative residual under which a geometry sits on a separating surface.
pub const EPS_TRANS: f64 = 1e-9;
/// Relative step used to name the types on either side of a surface.
const FLANK_STEP: f64 = 1e-6;

/// Provenance tag carried by every catalog record.
pub const CATALOG_PROVENANCE: &str = "reference-catalog";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    /// `r3 = 0` with `d2`, `d3` and `r2` all nonzero.
    #[serde(rename = "GENERIC_R3ZERO")]
    GenericR3Zero,
    /// All five parameters nonzero.
    #[serde(rename = "GENERIC")]
    Generic,
    /// `d3 = 0` with `d2` and `r2` nonzero: outside the ten families.
    #[serde(rename = "UNLISTED")]
    Unlisted,
}

impl Family {
    pub fn is_single_type(self) -> bool {
        matches!(self, Family::C | Family::E | Family::G | Family::H | Family::J)
    }
}

/// Which of `(d2, r2, d3, r3)` vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroPattern {
    pub d2: bool,
    pub r2: bool,
    pub d3: bool,
    pub r3: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCase {
    pub label: Family,
    pub zero_pattern: ZeroPattern,
}

pub fn family_case(geom: &ManipulatorGeometry, eps_zero: f64) -> FamilyCase {
    let tol = eps_zero * geom.char_length();
    let z = ZeroPattern {
        d2: geom.d2() < tol,
        r2: geom.r2() < tol,
        d3: geom.d3() < tol,
        r3: geom.r3() < tol,
    };
    use Family::*;
    let label = match (z.d2, z.r2, z.d3, z.r3) {
        (true, false, false, true) => A,
        (true, true, false, true) => B,
        (true, false, true, true) => C,
        (false, true, false, true) => D,
        (false, true, true, true) => E,
        (true, false, false, false) => F,
        (true, true, false, false) => G,
        (true, false, true, false) => H,
        (false, true, false, false) => I,
        (false, true, true, false) => J,
        (false, false, false, true) => GenericR3Zero,
        (false, false, false, false) => Generic,
        (false, false, true, _) => Unlisted,
        // d2 = r2 = d3 = 0 is rejected when the geometry is built
        (true, true, true, _) => Unlisted,
    };
    FamilyCase { label, zero_pattern: z }
}

/// The 22 manipulator types, in catalog order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ManipulatorType {
    A1,
    A2,
    A3,
    B1,
    B2,
    C,
    D1,
    D2,
    D3,
    D4,
    D5,
    D6,
    E,
    F1,
    F2,
    G,
    H,
    I1,
    I2,
    I3,
    I4,
    J,
}

impl ManipulatorType {
    pub const ALL: [ManipulatorType; 22] = {
        use ManipulatorType::*;
        [A1, A2, A3, B1, B2, C, D1, D2, D3, D4, D5, D6, E, F1, F2, G, H, I1, I2, I3, I4, J]
    };

    pub fn name(self) -> &'static str {
        use ManipulatorType::*;
        match self {
            A1 => "A1",
            A2 => "A2",
            A3 => "A3",
            B1 => "B1",
            B2 => "B2",
            C => "C",
            D1 => "D1",
            D2 => "D2",
            D3 => "D3",
            D4 => "D4",
            D5 => "D5",
            D6 => "D6",
            E => "E",
            F1 => "F1",
            F2 => "F2",
            G => "G",
            H => "H",
            I1 => "I1",
            I2 => "I2",
            I3 => "I3",
            I4 => "I4",
            J => "J",
        }
    }
}

impl fmt::Display for ManipulatorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ManipulatorType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownType(s.to_string()))
    }
}

/// Outcome of the label rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeLabel {
    Type(ManipulatorType),
    /// On a separating surface; the two flanking types in catalog order.
    Transition(ManipulatorType, ManipulatorType),
    Generic,
    GenericR3Zero,
    Unlisted,
}

impl TypeLabel {
    pub fn manipulator_type(&self) -> Option<ManipulatorType> {
        match self {
            TypeLabel::Type(t) => Some(*t),
            _ => None,
        }
    }

    pub fn is_transition(&self) -> bool {
        matches!(self, TypeLabel::Transition(..))
    }
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeLabel::Type(t) => write!(f, "{t}"),
            TypeLabel::Transition(a, b) => write!(f, "Transition({a},{b})"),
            TypeLabel::Generic => f.write_str("GENERIC"),
            TypeLabel::GenericR3Zero => f.write_str("GENERIC_R3ZERO"),
            TypeLabel::Unlisted => f.write_str("UNLISTED"),
        }
    }
}

impl FromStr for TypeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "GENERIC" => return Ok(TypeLabel::Generic),
            "GENERIC_R3ZERO" => return Ok(TypeLabel::GenericR3Zero),
            "UNLISTED" => return Ok(TypeLabel::Unlisted),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("Transition(").and_then(|r| r.strip_suffix(')')) {
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::UnknownType(s.to_string()))?;
            return Ok(TypeLabel::Transition(a.trim().parse()?, b.trim().parse()?));
        }
        Ok(TypeLabel::Type(s.parse()?))
    }
}

impl Serialize for TypeLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TypeLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Surface {
    E1,
    E2,
    E3,
    #[serde(rename = "Σ1")]
    Sigma1,
    #[serde(rename = "Σ2_low")]
    Sigma2Low,
    #[serde(rename = "Σ2_high")]
    Sigma2High,
    #[serde(rename = "D_equalities")]
    DEqualities,
    #[serde(rename = "I_asymptote")]
    IAsymptote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Below,
    On,
    Above,
    /// The surface has no real point for these parameters.
    Undefined,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SurfaceAux {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceEvaluation {
    pub surface: Surface,
    /// The equation in readable form, e.g. `d4 = d3`.
    pub equation: String,
    /// `(lhs − rhs) / L`; absent when the surface is undefined.
    pub residual: Option<f64>,
    pub side: Side,
    pub aux: SurfaceAux,
}

/// Parameters the surfaces of one case depend on.
#[derive(Debug, Clone, Copy)]
struct P {
    d2: f64,
    d3: f64,
    r2: f64,
    r3: f64,
    d4: f64,
}

impl P {
    fn of(g: &ManipulatorGeometry) -> Self {
        let [d2, d3, r2, r3, d4] = g.params();
        P { d2, d3, r2, r3, d4 }
    }

    fn len(&self) -> f64 {
        self.d2 + self.d3 + self.r2 + self.r3 + self.d4
    }

    fn ab(&self) -> (f64, f64) {
        (
            (self.d3 + self.d2).hypot(self.r2),
            (self.d3 - self.d2).hypot(self.r2),
        )
    }

    /// Square of the case-I surface value; negative when it has no real point.
    fn delta_sq(&self) -> f64 {
        let (d2, d3) = (self.d2, self.d3);
        d2 * d2 * (1.0 + self.r3 * self.r3 / (d3 * d3 - d2 * d2))
    }
}

/// Which parameter is nudged to see both sides of a surface.
#[derive(Debug, Clone, Copy)]
enum Axis {
    D3,
    D4,
}

struct Eval {
    eval: SurfaceEvaluation,
    axis: Axis,
}

fn side_of(residual: f64) -> Side {
    if residual.abs() < EPS_TRANS {
        Side::On
    } else if residual < 0.0 {
        Side::Below
    } else {
        Side::Above
    }
}

fn plane(surface: Surface, equation: &str, lhs: f64, rhs: f64, len: f64, axis: Axis, aux: SurfaceAux) -> Eval {
    let r = (lhs - rhs) / len;
    Eval {
        eval: SurfaceEvaluation {
            surface,
            equation: equation.to_string(),
            residual: Some(r),
            side: side_of(r),
            aux,
        },
        axis,
    }
}

fn surfaces_of(p: &P, case: Family) -> Vec<Eval> {
    let l = p.len();
    let (a, b) = p.ab();
    let ab = SurfaceAux {
        a: Some(a),
        b: Some(b),
        delta: None,
    };
    match case {
        Family::A => vec![
            plane(Surface::E2, "d4 = d3", p.d4, p.d3, l, Axis::D4, ab),
            plane(Surface::E3, "d4 = sqrt(d3^2 + r2^2)", p.d4, p.d3.hypot(p.r2), l, Axis::D4, ab),
        ],
        Family::B => vec![plane(Surface::E2, "d4 = d3", p.d4, p.d3, l, Axis::D4, ab)],
        Family::D => vec![
            plane(Surface::DEqualities, "d4 = d2", p.d4, p.d2, l, Axis::D4, ab),
            plane(Surface::DEqualities, "d4 = d3", p.d4, p.d3, l, Axis::D4, ab),
            plane(Surface::DEqualities, "d3 = d2", p.d3, p.d2, l, Axis::D3, ab),
        ],
        Family::F => vec![plane(
            Surface::Sigma1,
            "d4 = sqrt(d3^2 + r2^2)",
            p.d4,
            p.d3.hypot(p.r2),
            l,
            Axis::D4,
            ab,
        )],
        Family::I => {
            let asym = plane(
                Surface::IAsymptote,
                "d3 = d2",
                p.d3,
                p.d2,
                l,
                Axis::D3,
                SurfaceAux::default(),
            );
            let dsq = p.delta_sq();
            let delta = (dsq >= 0.0 && dsq.is_finite()).then(|| dsq.sqrt());
            let sigma = match delta {
                Some(d) => plane(
                    Surface::Sigma2Low,
                    "d4 = delta",
                    p.d4,
                    d,
                    l,
                    Axis::D4,
                    SurfaceAux {
                        delta: Some(d),
                        ..SurfaceAux::default()
                    },
                ),
                None => Eval {
                    eval: SurfaceEvaluation {
                        surface: Surface::Sigma2Low,
                        equation: "d4 = delta".to_string(),
                        residual: None,
                        side: Side::Undefined,
                        aux: SurfaceAux::default(),
                    },
                    axis: Axis::D4,
                },
            };
            vec![sigma, asym]
        }
        _ => Vec::new(),
    }
}

/// Separating surfaces of a family, evaluated at `geom`.
///
/// Only families A, B, D, F and I have surfaces; the single-type families and
/// the generic cases return an empty list. With `r2 = 0` the node surface has
/// a single root, reported as the low branch; when its radicand is negative
/// the evaluation is kept with side `Undefined`.
pub fn evaluate_surfaces(geom: &ManipulatorGeometry, case: Family) -> Vec<SurfaceEvaluation> {
    surfaces_of(&P::of(geom), case)
        .into_iter()
        .map(|e| e.eval)
        .collect()
}

/// Type from the strict inequalities alone; `None` exactly on a surface.
fn type_by_inequalities(p: &P, case: Family) -> Option<ManipulatorType> {
    use std::cmp::Ordering::*;
    use ManipulatorType::*;
    let cmp = |x: f64, y: f64| x.partial_cmp(&y).unwrap_or(Equal);
    match case {
        Family::A => match (cmp(p.d4, p.d3), cmp(p.d4, p.d3.hypot(p.r2))) {
            (Less, _) => Some(A1),
            (Greater, Less) => Some(A2),
            (_, Greater) => Some(A3),
            _ => None,
        },
        Family::B => match cmp(p.d3, p.d4) {
            Greater => Some(B1),
            Less => Some(B2),
            Equal => None,
        },
        Family::C => Some(C),
        Family::E => Some(E),
        Family::G => Some(G),
        Family::H => Some(H),
        Family::J => Some(J),
        Family::D => {
            let (d2, d3, d4) = (p.d2, p.d3, p.d4);
            if d2 == d3 || d2 == d4 || d3 == d4 {
                None
            } else if d4 < d2 && d2 < d3 {
                Some(D1)
            } else if d2 < d4 && d4 < d3 {
                Some(D2)
            } else if d2 < d3 && d3 < d4 {
                Some(D3)
            } else if d3 < d2 && d2 < d4 {
                Some(D4)
            } else if d3 < d4 && d4 < d2 {
                Some(D5)
            } else {
                Some(D6)
            }
        }
        Family::F => match cmp(p.d4, p.d3.hypot(p.r2)) {
            Less => Some(F1),
            Greater => Some(F2),
            Equal => None,
        },
        Family::I => {
            // d4² against δ² keeps the d3 < d2 side continuous where δ² < 0
            let side = cmp(p.d4 * p.d4, p.delta_sq());
            match (cmp(p.d3, p.d2), side) {
                (Greater, Greater) => Some(I1),
                (Greater, Less) => Some(I2),
                (Less, Greater) => Some(I3),
                (Less, Less) => Some(I4),
                _ => None,
            }
        }
        Family::GenericR3Zero | Family::Generic | Family::Unlisted => None,
    }
}

fn flank(p: &P, case: Family, axis: Axis) -> Option<(ManipulatorType, ManipulatorType)> {
    let step = FLANK_STEP * p.len();
    let nudge = |s: f64| {
        let mut q = *p;
        match axis {
            Axis::D3 => q.d3 += s,
            Axis::D4 => q.d4 += s,
        }
        type_by_inequalities(&q, case)
    };
    let (lo, hi) = (nudge(-step)?, nudge(step)?);
    (lo != hi).then(|| (lo.min(hi), lo.max(hi)))
}

/// Label-only result: no curve tracing involved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelClassification {
    pub family: FamilyCase,
    pub type_label: TypeLabel,
    pub surfaces: Vec<SurfaceEvaluation>,
    pub table1: Option<Table1Row>,
    pub warnings: Vec<String>,
}

/// Family, surfaces and type label from the parameter inequalities.
pub fn classify_label(geom: &ManipulatorGeometry) -> LabelClassification {
    let family = family_case(geom, EPS_ZERO);
    let p = P::of(geom);
    let evals = surfaces_of(&p, family.label);
    let mut warnings = Vec::new();

    let on: Vec<&Eval> = evals.iter().filter(|e| e.eval.side == Side::On).collect();
    let type_label = match family.label {
        Family::Generic => TypeLabel::Generic,
        Family::GenericR3Zero => TypeLabel::GenericR3Zero,
        Family::Unlisted => {
            warnings.push("zero pattern outside the ten families: no type label".to_string());
            TypeLabel::Unlisted
        }
        case if !on.is_empty() => {
            if on.len() > 1 {
                warnings.push(format!("geometry lies on {} separating surfaces at once", on.len()));
            }
            match on.iter().find_map(|e| flank(&p, case, e.axis)) {
                Some((a, b)) => TypeLabel::Transition(a, b),
                None => {
                    warnings.push("no type change across the separating surface".to_string());
                    TypeLabel::Unlisted
                }
            }
        }
        case => TypeLabel::Type(
            type_by_inequalities(&p, case).expect("off-surface geometry always has a type"),
        ),
    };
    if family.label == Family::I && evals.iter().any(|e| e.eval.side == Side::Undefined) {
        warnings.push(
            "surface-undefined: delta has a negative radicand; d4^2 is compared with delta^2 instead".to_string(),
        );
    }

    LabelClassification {
        family,
        table1: type_label.manipulator_type().map(table1_row),
        type_label,
        surfaces: evals.into_iter().map(|e| e.eval).collect(),
        warnings,
    }
}

/// Catalog record for one type, reproduced as published.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub type_label: String,
    pub conditions: String,
    pub voids: usize,
    pub nodes: usize,
    /// Entry of the 4-solution column (often blank).
    pub four_solution_note: String,
    pub t_connected: bool,
    pub well_connected: bool,
    /// Places where the row disagrees with the type definitions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<String>,
    pub provenance: String,
}

fn table1_row(t: ManipulatorType) -> Table1Row {
    use ManipulatorType::*;
    let all = "All the workspace";
    let (cond, voids, nodes, note, tc, wc): (&str, usize, usize, &str, bool, bool) = match t {
        B1 => ("d2=0, r2=0, r3=0, d3>d4", 0, 0, all, true, true),
        C => ("d3=0, r3=0", 0, 0, all, true, true),
        E => ("d3=0, r2=0, r3=0", 0, 0, all, true, true),
        G => ("d2=0, r2=0", 0, 0, all, true, true),
        H => ("d2=0, d3=0", 0, 0, all, true, true),
        A1 => ("d2=0, r3=0, d4<d3", 0, 0, "", true, false),
        D5 => ("r2=0, r3=0, d3<d4<d2", 0, 0, "", true, false),
        F1 => ("d2=0, d4<sqrt(d3^2+r2^2)", 0, 0, "", true, false),
        D2 => ("r2=0, r3=0, d2<d4<d3", 0, 0, "", false, false),
        I1 => ("r2=0, d3>d2 and d4>delta", 0, 0, "", false, false),
        B2 => ("d2=0, r2=0, r3=0, d3<d4", 0, 1, all, false, false),
        D3 => ("r2=0, r3=0, d2<d3<d4", 0, 1, "", false, false),
        A2 => ("d2=0, r3=0, d3<d4<sqrt(d3^2+r2^2)", 0, 2, "", true, false),
        D4 => ("r2=0, r3=0, d3<d2<d4", 0, 2, "", false, false),
        F2 => ("d2=0, d4>sqrt(d3^2+r2^2)", 0, 2, "", false, false),
        A3 => ("d2=0, r3=0, d4>sqrt(d3^2+r2^2)", 0, 4, "", true, false),
        D6 => ("r2=0, r3=0, d4<d3<d2", 1, 0, "Null", true, false),
        I3 => ("r2=0, d3<d2 and d4>delta", 1, 0, "", true, false),
        J => ("r2=0 and d3=0", 1, 0, all, true, false),
        D1 => ("r2=0, r3=0, d4>d2>d3", 1, 2, "", false, false),
        I2 => ("r2=0, d3>d2 and d4<delta", 1, 2, "", false, false),
        I4 => ("r2=0", 1, 2, "", true, false),
    };
    let annotations: Vec<&str> = match t {
        C => vec!["conditions omit d2=0, which the family requires"],
        D1 => vec!["conditions read d4>d2>d3; the type definition d4<d2<d3 is used"],
        I3 => vec!["the d4-versus-delta inequality disagrees with the example geometries of this type"],
        I4 => vec![
            "t-connected reads Yes while the type description says not t-connected",
            "the d4-versus-delta inequality disagrees with the example geometries of this type",
        ],
        _ => Vec::new(),
    };
    Table1Row {
        type_label: t.name().to_string(),
        conditions: cond.to_string(),
        voids,
        nodes,
        four_solution_note: note.to_string(),
        t_connected: tc,
        well_connected: wc,
        annotations: annotations.into_iter().map(String::from).collect(),
        provenance: CATALOG_PROVENANCE.to_string(),
    }
}

/// Catalog lookup by type name.
pub fn table1_properties(type_label: &str) -> Result<Table1Row> {
    Ok(table1_row(type_label.parse()?))
}

/// Full classification: label, catalog row and the computed topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeClassification {
    pub family: FamilyCase,
    pub type_label: TypeLabel,
    pub surfaces: Vec<SurfaceEvaluation>,
    pub table1: Option<Table1Row>,
    pub computed: WorkspaceTopology,
    /// Computed off-axis nodes and voids match the catalog row (vacuously
    /// true when there is no row).
    pub consistent: bool,
    pub warnings: Vec<String>,
}

/// Compares a computed topology with a catalog row; returns
/// `(consistent, warnings)`.
pub fn check_consistency(row: &Table1Row, topo: &WorkspaceTopology) -> (bool, Vec<String>) {
    let mut warnings = Vec::new();
    let mut consistent = true;
    if topo.n_nodes_offaxis != row.nodes {
        consistent = false;
        warnings.push(format!(
            "type {}: computed {} off-axis node(s), catalog lists {}",
            row.type_label, topo.n_nodes_offaxis, row.nodes
        ));
    }
    if topo.n_voids != row.voids {
        consistent = false;
        warnings.push(format!(
            "type {}: computed {} void(s), catalog lists {}",
            row.type_label, topo.n_voids, row.voids
        ));
    }
    if row.four_solution_note == "All the workspace" && !topo.well_shaped.single_4region_covers_workspace {
        warnings.push(format!(
            "type {}: catalog says four solutions everywhere, computed regions {:?}",
            row.type_label,
            topo.region_counts()
        ));
    }
    if row.four_solution_note == "Null" && !topo.well_shaped.binary {
        warnings.push(format!(
            "type {}: catalog says binary, computed max_ik = {}",
            row.type_label, topo.max_ik
        ));
    }
    (consistent, warnings)
}

/// Type whose catalog row matches a computed topology, if exactly one of the
/// candidates does.
fn matching_type(candidates: &[ManipulatorType], topo: &WorkspaceTopology) -> Option<ManipulatorType> {
    let hits: Vec<ManipulatorType> = candidates
        .iter()
        .copied()
        .filter(|t| check_consistency(&table1_row(*t), topo).0)
        .collect();
    (hits.len() == 1).then(|| hits[0])
}

pub fn classify_with(geom: &ManipulatorGeometry, cfg: &TopologyConfig) -> Result<TypeClassification> {
    let computed = analyze_workspace(geom, cfg)?.topology;
    Ok(classify_topology(geom, computed))
}

/// Classification against an already computed topology.
pub fn classify_topology(geom: &ManipulatorGeometry, computed: WorkspaceTopology) -> TypeClassification {
    let label = classify_label(geom);
    let mut warnings = label.warnings;
    let mut consistent = true;
    if let Some(row) = &label.table1 {
        let (ok, w) = check_consistency(row, &computed);
        consistent = ok;
        warnings.extend(w);
        if !ok && label.family.label == Family::I {
            use ManipulatorType::*;
            let side = if geom.d3() > geom.d2() { [I1, I2] } else { [I3, I4] };
            if let Some(t) = matching_type(&side, &computed) {
                warnings.push(format!(
                    "computed signature matches the catalog row of {t}; the type inequalities and the examples disagree for this family"
                ));
            }
        }
    } else if matches!(label.type_label, TypeLabel::GenericR3Zero | TypeLabel::Generic) {
        warnings.push("generic geometry: no catalog row to compare".to_string());
    }
    warnings.extend(computed.warnings.iter().cloned());
    TypeClassification {
        family: label.family,
        type_label: label.type_label,
        surfaces: label.surfaces,
        table1: label.table1,
        computed,
        consistent,
        warnings,
    }
}

pub fn classify(geom: &ManipulatorGeometry) -> Result<TypeClassification> {
    classify_with(geom, &TopologyConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(p: [f64; 5]) -> ManipulatorGeometry {
        ManipulatorGeometry::from_params(p).unwrap()
    }

    fn label(p: [f64; 5]) -> String {
        classify_label(&geom(p)).type_label.to_string()
    }

    #[test]
    fn family_tree() {
        let cases = [
            ([0.0, 2.0, 1.0, 0.0, 1.5], Family::A),
            ([0.0, 2.0, 0.0, 0.0, 1.0], Family::B),
            ([0.0, 0.0, 1.5, 0.0, 2.0], Family::C),
            ([1.0, 2.0, 0.0, 0.0, 1.5], Family::D),
            ([1.0, 0.0, 0.0, 0.0, 1.5], Family::E),
            ([0.0, 2.0, 1.0, 1.0, 1.5], Family::F),
            ([0.0, 1.0, 0.0, 1.0, 3.0], Family::G),
            ([0.0, 0.0, 3.0, 1.0, 1.0], Family::H),
            ([1.0, 3.0, 0.0, 0.5, 0.7], Family::I),
            ([1.0, 0.0, 0.0, 1.0, 2.0], Family::J),
            ([1.0, 3.0, 2.0, 0.0, 4.0], Family::GenericR3Zero),
            ([1.0, 3.0, 2.0, 0.5, 4.0], Family::Generic),
            ([1.0, 0.0, 2.0, 0.5, 4.0], Family::Unlisted),
        ];
        for (p, fam) in cases {
            assert_eq!(family_case(&geom(p), EPS_ZERO).label, fam, "{p:?}");
        }
    }

    #[test]
    fn labels_follow_inequalities() {
        assert_eq!(label([0.0, 2.0, 1.0, 0.0, 1.5]), "A1");
        assert_eq!(label([0.0, 2.0, 1.5, 0.0, 2.2]), "A2");
        assert_eq!(label([0.0, 2.0, 1.0, 0.0, 3.0]), "A3");
        assert_eq!(label([0.0, 2.0, 0.0, 0.0, 1.0]), "B1");
        assert_eq!(label([0.0, 2.0, 0.0, 0.0, 3.0]), "B2");
        assert_eq!(label([0.0, 2.0, 1.0, 1.0, 1.5]), "F1");
        assert_eq!(label([0.0, 1.0, 1.0, 1.0, 2.0]), "F2");
        assert_eq!(label([1.0, 2.5, 0.0, 0.5, 1.5]), "I1");
        assert_eq!(label([1.0, 3.0, 0.0, 0.5, 0.7]), "I2");
        assert_eq!(label([1.0, 3.0, 2.0, 0.0, 4.0]), "GENERIC_R3ZERO");
    }

    #[test]
    fn d_types_are_orderings() {
        let sets = [
            (1.4, 0.7, "D1"),
            (2.0, 1.5, "D2"),
            (2.0, 2.5, "D3"),
            (0.5, 2.0, "D4"),
            (0.6, 0.7, "D5"),
            (0.7, 0.5, "D6"),
            (2.0, 1.0, "Transition(D1,D2)"),
            (2.0, 2.0, "Transition(D2,D3)"),
            (1.0, 2.0, "Transition(D3,D4)"),
            (0.5, 1.0, "Transition(D4,D5)"),
            (0.6, 0.6, "Transition(D5,D6)"),
            (1.0, 0.5, "Transition(D1,D6)"),
        ];
        for (d3, d4, want) in sets {
            assert_eq!(label([1.0, d3, 0.0, 0.0, d4]), want, "d3={d3} d4={d4}");
        }
    }

    #[test]
    fn transitions_on_case_a_surfaces() {
        let g = geom([0.0, 3.0, 4.0, 0.0, 5.0]);
        let c = classify_label(&g);
        assert_eq!(c.type_label, TypeLabel::Transition(ManipulatorType::A2, ManipulatorType::A3));
        let e3 = c.surfaces.iter().find(|s| s.surface == Surface::E3).unwrap();
        assert!(e3.residual.unwrap().abs() < EPS_TRANS);
        assert_eq!(label([0.0, 2.0, 1.0, 0.0, 2.0]), "Transition(A1,A2)");
    }

    #[test]
    fn delta_closed_form() {
        let g = geom([1.0, 3.0, 0.0, 0.5, 1.0]);
        let s = evaluate_surfaces(&g, Family::I);
        let d = s[0].aux.delta.unwrap();
        assert!((d - (33.0f64 / 32.0).sqrt()).abs() < 1e-12);
        // negative radicand on the near side of the asymptote
        let g = geom([1.0, 0.9, 0.0, 0.5, 1.0]);
        let s = evaluate_surfaces(&g, Family::I);
        assert_eq!(s[0].side, Side::Undefined);
        assert_eq!(label([1.0, 0.9, 0.0, 0.5, 1.0]), "I3");
    }

    #[test]
    fn asymptote_transition() {
        assert_eq!(label([1.0, 1.0, 0.0, 0.5, 0.7]), "Transition(I2,I3)");
    }

    #[test]
    fn catalog_rows() {
        let b2 = table1_properties("B2").unwrap();
        assert_eq!((b2.voids, b2.nodes, b2.t_connected, b2.well_connected), (0, 1, false, false));
        assert_eq!(b2.four_solution_note, "All the workspace");
        let j = table1_properties("J").unwrap();
        assert_eq!((j.voids, j.nodes, j.t_connected, j.well_connected), (1, 0, true, false));
        let a2 = table1_properties("A2").unwrap();
        assert_eq!((a2.voids, a2.nodes, a2.t_connected), (0, 2, true));
        assert!(matches!(table1_properties("K9"), Err(Error::UnknownType(_))));
        assert!(ManipulatorType::ALL
            .iter()
            .all(|t| table1_properties(t.name()).unwrap().provenance == CATALOG_PROVENANCE));
    }

    #[test]
    fn well_connected_set() {
        let set: Vec<&str> = ManipulatorType::ALL
            .iter()
            .filter(|t| table1_row(**t).well_connected)
            .map(|t| t.name())
            .collect();
        assert_eq!(set, ["B1", "C", "E", "G", "H"]);
    }

    #[test]
    fn label_strings_round_trip() {
        for l in [
            TypeLabel::Type(ManipulatorType::D4),
            TypeLabel::Transition(ManipulatorType::A1, ManipulatorType::A2),
            TypeLabel::Generic,
            TypeLabel::GenericR3Zero,
            TypeLabel::Unlisted,
        ] {
            assert_eq!(l.to_string().parse::<TypeLabel>().unwrap(), l);
            let json = serde_json::to_string(&l).unwrap();
            assert_eq!(serde_json::from_str::<TypeLabel>(&json).unwrap(), l);
        }
    }
}
