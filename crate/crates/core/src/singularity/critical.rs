//! Cusps, nodes and isolated points on the traced singular set.
//!
//! Detection is geometric: cusps are reversals of the image velocity along a
//! curve, nodes are crossings of curve images. Every candidate is refined to
//! machine precision and then certified. For `d2 > 0` certification also
//! evaluates the inverse-kinematics quartic at the point.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::geometry::ManipulatorGeometry;
use crate::ik::{quartic_coeffs, uses_reduced_path};
use crate::poly;

use super::trace::{det, grad, project_between, tdiff, tdist};
use super::{
    image_curves, CriticalKind, CriticalPoint, CrossSectionPoint, SingularityAnalysis, SingularityConfig, UnitTrace,
};

/// Crossing angle (radians) below which two images are treated as tangent.
const TANGENT_ANGLE: f64 = 1e-3;
/// Arc-length window and distance bound of the overlap test (unit length).
const OVERLAP_WINDOW: f64 = 1e-2;
const OVERLAP_TOL: f64 = 1e-5;
/// Grid steps around a junction inside which image contacts are not crossings.
const JUNCTION_REACH: f64 = 8.0;
/// Relative image speed under which a branch is folding back onto itself.
const FOLD_BACK: f64 = 1e-4;
/// Distance (unit length) under which two refined critical points coincide.
const SAME_POINT: f64 = 1e-6;

#[inline]
fn image(g: &ManipulatorGeometry, q: [f64; 2]) -> [f64; 2] {
    let p = g.frame1_position(q[0], q[1]);
    [p[0].hypot(p[1]), p[2]]
}

#[inline]
fn tangent(g: &ManipulatorGeometry, q: [f64; 2]) -> [f64; 2] {
    let gr = grad(g, q);
    [-gr[1], gr[0]]
}

/// Image velocity in `(ρ², z)` for a joint-space direction.
#[inline]
fn velocity(g: &ManipulatorGeometry, q: [f64; 2], tau: [f64; 2]) -> [f64; 2] {
    let m = g.image_jacobian(q[0], q[1]);
    [m[0][0] * tau[0] + m[0][1] * tau[1], m[1][0] * tau[0] + m[1][1] * tau[1]]
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Relative image speed along the singular curve: zero exactly at a cusp.
fn relative_speed(g: &ManipulatorGeometry, q: [f64; 2]) -> f64 {
    let t = tangent(g, q);
    let nt = norm(t);
    let m = g.image_jacobian(q[0], q[1]);
    let mf = (m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2)).sqrt();
    if nt == 0.0 || mf == 0.0 {
        return 1.0;
    }
    norm(velocity(g, q, [t[0] / nt, t[1] / nt])) / mf
}

/// Quartic residuals at the preimage angle θ3, evaluated in `t` or `1/t`
/// (whichever is bounded) relative to the largest coefficient.
fn quartic_residuals(g: &ManipulatorGeometry, loc: [f64; 2], theta3: f64, kind: CriticalKind) -> Vec<f64> {
    let c = quartic_coeffs(g, loc[0] * loc[0], loc[1] * loc[1]);
    let (coeffs, x) = if theta3.abs() <= 0.5 * PI {
        (c.to_vec(), (0.5 * theta3).tan())
    } else {
        (poly::reversed(&c), 1.0 / (0.5 * theta3).tan())
    };
    // |x| <= 1, so the coefficient size bounds every term
    let s = poly::max_abs(&coeffs);
    let scaled = |p: &[f64]| if s == 0.0 { 0.0 } else { poly::eval(p, x).abs() / s };
    let d1 = poly::derivative(&coeffs);
    let mut out = vec![scaled(&coeffs), scaled(&d1)];
    if kind == CriticalKind::Cusp {
        out.push(scaled(&poly::derivative(&d1)));
    }
    out
}

/// Residuals on the unit-length geometry `g` for a point at `loc` (unit length).
fn residuals(g: &ManipulatorGeometry, kind: CriticalKind, loc: [f64; 2], pre: &[[f64; 2]]) -> Vec<f64> {
    let mut out = Vec::new();
    let algebraic = !uses_reduced_path(g);
    match kind {
        CriticalKind::Cusp => {
            let q = pre[0];
            if algebraic {
                out.extend(quartic_residuals(g, loc, q[1], kind));
            }
            out.push(det(g, q).abs());
            out.push(relative_speed(g, q));
            out.push(dist(image(g, q), loc));
        }
        CriticalKind::Node => {
            let (qa, qb) = (pre[0], pre[pre.len().min(2) - 1]);
            if algebraic {
                // each preimage angle is a double root
                out.extend(quartic_residuals(g, loc, qa[1], kind));
                if (qa[1] - qb[1]).abs() > 1e-9 {
                    out.extend(quartic_residuals(g, loc, qb[1], kind));
                }
            }
            out.push(dist(image(g, qa), image(g, qb)));
            out.push(det(g, qa).abs());
            out.push(det(g, qb).abs());
            out.push(dist(image(g, qa), loc));
        }
        CriticalKind::Isolated => {
            for q in pre {
                out.push(det(g, *q).abs());
                out.push(dist(image(g, *q), loc));
            }
        }
    }
    out
}

/// Scaled certification residuals of `point` for `kind`: the quartic system
/// (for `d2 > 0`) followed by geometric residuals. The point is not modified.
pub fn certify_critical_point(geom: &ManipulatorGeometry, point: &CriticalPoint, kind: CriticalKind) -> Vec<f64> {
    if point.preimages.is_empty() {
        return vec![f64::INFINITY];
    }
    let unit = geom.normalized();
    let l = geom.char_length();
    let loc = [point.location.rho / l, point.location.z / l];
    residuals(&unit, kind, loc, &point.preimages)
}

struct Image {
    pts: Vec<[f64; 2]>,
    q: Vec<[f64; 2]>,
    closed: bool,
}

impl Image {
    fn segs(&self) -> usize {
        if self.closed {
            self.pts.len()
        } else {
            self.pts.len().saturating_sub(1)
        }
    }

    fn seg(&self, k: usize) -> ([f64; 2], [f64; 2]) {
        (self.pts[k], self.pts[(k + 1) % self.pts.len()])
    }

    fn index_gap(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        if self.closed {
            d.min(self.pts.len() - d)
        } else {
            d
        }
    }

    /// Vertex indices within arc length `w` of vertex `k`, walking both ways.
    fn window(&self, k: usize, w: f64) -> Vec<usize> {
        let m = self.pts.len();
        let mut out = vec![k];
        for dir in [1i64, -1] {
            let mut acc = 0.0;
            let mut cur = k as i64;
            for _ in 0..m {
                let next = cur + dir;
                let nk = if self.closed {
                    next.rem_euclid(m as i64)
                } else if next < 0 || next >= m as i64 {
                    break;
                } else {
                    next
                };
                acc += dist(self.pts[cur.rem_euclid(m as i64) as usize], self.pts[nk as usize]);
                if acc > w || nk as usize == k {
                    break;
                }
                out.push(nk as usize);
                cur = nk;
            }
        }
        out
    }
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    let t = if l2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0)
    };
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

/// Whether the two images run along each other near a crossing candidate.
fn overlaps(a: &Image, ia: usize, b: &Image, ib: usize) -> bool {
    let wa = a.window(ia, OVERLAP_WINDOW);
    let wb = b.window(ib, 3.0 * OVERLAP_WINDOW);
    let near_b = |p: [f64; 2]| {
        wb.iter()
            .filter(|&&k| k < b.segs())
            .map(|&k| {
                let (s0, s1) = b.seg(k);
                point_segment_distance(p, s0, s1)
            })
            .fold(f64::INFINITY, f64::min)
    };
    wa.len() > 2 && wa.iter().all(|&k| near_b(a.pts[k]) < OVERLAP_TOL)
}

fn segment_intersection(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> Option<(f64, f64)> {
    let r = [p1[0] - p0[0], p1[1] - p0[1]];
    let s = [q1[0] - q0[0], q1[1] - q0[1]];
    let den = r[0] * s[1] - r[1] * s[0];
    if den.abs() < 1e-300 {
        return None;
    }
    let w = [q0[0] - p0[0], q0[1] - p0[1]];
    let t = (w[0] * s[1] - w[1] * s[0]) / den;
    let u = (w[0] * r[1] - w[1] * r[0]) / den;
    let e = 1e-12;
    (t >= -e && t <= 1.0 + e && u >= -e && u <= 1.0 + e).then_some((t.clamp(0.0, 1.0), u.clamp(0.0, 1.0)))
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in row + 1..4 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Newton on `E(qa) = E(qb) = 0`, `f(qa) = f(qb)` in `(ρ², z)`.
fn refine_node(g: &ManipulatorGeometry, qa: [f64; 2], qb: [f64; 2], reach: f64) -> Option<([f64; 2], [f64; 2])> {
    let resid = |a: [f64; 2], b: [f64; 2]| {
        let fa = g.rho2_z(a[0], a[1]);
        let fb = g.rho2_z(b[0], b[1]);
        [det(g, a), det(g, b), fa[0] - fb[0], fa[1] - fb[1]]
    };
    let size = |r: [f64; 4]| r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (mut a, mut b) = (qa, qb);
    let mut r = resid(a, b);
    for _ in 0..40 {
        if size(r) < 1e-15 {
            break;
        }
        let ga = grad(g, a);
        let gb = grad(g, b);
        let ma = g.image_jacobian(a[0], a[1]);
        let mb = g.image_jacobian(b[0], b[1]);
        let jac = [
            [ga[0], ga[1], 0.0, 0.0],
            [0.0, 0.0, gb[0], gb[1]],
            [ma[0][0], ma[0][1], -mb[0][0], -mb[0][1]],
            [ma[1][0], ma[1][1], -mb[1][0], -mb[1][1]],
        ];
        let dx = solve4(jac, [-r[0], -r[1], -r[2], -r[3]])?;
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..10 {
            let na = [a[0] + lambda * dx[0], a[1] + lambda * dx[1]];
            let nb = [b[0] + lambda * dx[2], b[1] + lambda * dx[3]];
            let nr = resid(na, nb);
            if size(nr) < size(r) {
                a = na;
                b = nb;
                r = nr;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved || tdist(a, qa) > reach || tdist(b, qb) > reach {
            break;
        }
    }
    (size(r) < 1e-12 && tdist(a, qa) <= reach && tdist(b, qb) <= reach).then(|| {
        (
            [crate::geometry::wrap_angle(a[0]), crate::geometry::wrap_angle(a[1])],
            [crate::geometry::wrap_angle(b[0]), crate::geometry::wrap_angle(b[1])],
        )
    })
}

/// Unsigned angle between the two image branches at a refined node, in `(ρ, z)`.
fn crossing_angle(g: &ManipulatorGeometry, qa: [f64; 2], qb: [f64; 2], rho: f64) -> f64 {
    let to_rho = |v: [f64; 2]| [v[0] / (2.0 * rho), v[1]];
    let va = to_rho(velocity(g, qa, tangent(g, qa)));
    let vb = to_rho(velocity(g, qb, tangent(g, qb)));
    let (na, nb) = (norm(va), norm(vb));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    ((va[0] * vb[1] - va[1] * vb[0]).abs() / (na * nb)).min(1.0).asin()
}

struct Collector {
    points: Vec<CriticalPoint>,
}

impl Collector {
    fn near(&self, loc: [f64; 2], tol: f64) -> bool {
        self.points
            .iter()
            .any(|p| (p.location.rho - loc[0]).hypot(p.location.z - loc[1]) < tol)
    }
}

pub(crate) fn analyze(t: &UnitTrace, cfg: &SingularityConfig) -> SingularityAnalysis {
    let g = &t.unit;
    let h = 2.0 * PI / t.trace.grid_n as f64;
    let curves: Vec<_> = t.trace.curves.iter().map(|c| c.curve.clone()).collect();
    let unit_images = image_curves(g, &curves, cfg.eps_pt);
    let degenerate: Vec<bool> = unit_images.iter().map(|c| c.degenerate_to_point).collect();
    let mut warnings = t.warnings.clone();
    let mut dropped = 0usize;

    let images: Vec<Image> = curves
        .iter()
        .map(|c| Image {
            pts: c.vertices.iter().map(|q| image(g, *q)).collect(),
            q: c.vertices.clone(),
            closed: c.closed,
        })
        .collect();

    // Curves through each junction.
    let mut through: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, c) in t.trace.curves.iter().enumerate() {
        for &(_, jid) in &c.junctions {
            through.entry(jid).or_default().push(k);
        }
    }

    let mut nodes = Collector { points: Vec::new() };
    let mut tangencies = Collector { points: Vec::new() };
    let mut isolated = Vec::new();

    // Point images that sit on other curves through joint-space crossings.
    for (k, img) in images.iter().enumerate() {
        if !degenerate[k] || img.pts.is_empty() {
            continue;
        }
        let n = img.pts.len() as f64;
        let loc = [
            img.pts.iter().map(|p| p[0]).sum::<f64>() / n,
            img.pts.iter().map(|p| p[1]).sum::<f64>() / n,
        ];
        let mut links: Vec<[f64; 2]> = Vec::new();
        for &(_, jid) in &t.trace.curves[k].junctions {
            let others = through.get(&jid).map(|v| v.as_slice()).unwrap_or(&[]);
            if others.iter().any(|&o| o != k && !degenerate[o]) {
                let jq = t.trace.junctions[jid];
                if !links.iter().any(|l| tdist(*l, jq) < 1e-9) {
                    links.push(jq);
                }
            }
        }
        if links.len() >= 2 {
            let pre = vec![links[0], links[1]];
            let res = residuals(g, CriticalKind::Node, loc, &pre);
            if res.iter().all(|r| *r < cfg.eps_cert) {
                if !nodes.near(loc, SAME_POINT) {
                    nodes.points.push(CriticalPoint {
                        kind: CriticalKind::Node,
                        location: CrossSectionPoint { rho: loc[0], z: loc[1] },
                        preimages: pre,
                        residuals: res,
                        on_axis: loc[0] < cfg.eps_axis,
                        annotation: None,
                    });
                }
                continue;
            }
            dropped += 1;
        }
        let pre = vec![img.q[0]];
        isolated.push(CriticalPoint {
            kind: CriticalKind::Isolated,
            location: CrossSectionPoint { rho: loc[0], z: loc[1] },
            residuals: residuals(g, CriticalKind::Isolated, loc, &pre),
            preimages: pre,
            on_axis: loc[0] < cfg.eps_axis,
            annotation: None,
        });
    }

    let cusps = find_cusps(g, &images, &degenerate, cfg, h, &mut dropped);

    // Segment crossings through a uniform spatial hash.
    let cell = 1e-2;
    let key = |p: [f64; 2]| ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<(u32, u32)>> = HashMap::new();
    for (ci, img) in images.iter().enumerate() {
        if degenerate[ci] {
            continue;
        }
        for k in 0..img.segs() {
            let (a, b) = img.seg(k);
            let (x0, y0) = key([a[0].min(b[0]), a[1].min(b[1])]);
            let (x1, y1) = key([a[0].max(b[0]), a[1].max(b[1])]);
            for x in x0..=x1 {
                for y in y0..=y1 {
                    buckets.entry((x, y)).or_default().push((ci as u32, k as u32));
                }
            }
        }
    }
    let mut keys: Vec<_> = buckets.keys().copied().collect();
    keys.sort();
    let mut candidates = Vec::new();
    for kk in keys {
        let segs = &buckets[&kk];
        for i in 0..segs.len() {
            for j in i + 1..segs.len() {
                let (ca, ka) = (segs[i].0 as usize, segs[i].1 as usize);
                let (cb, kb) = (segs[j].0 as usize, segs[j].1 as usize);
                if ca == cb && images[ca].index_gap(ka, kb) <= 2 {
                    continue;
                }
                let (p0, p1) = images[ca].seg(ka);
                let (q0, q1) = images[cb].seg(kb);
                let Some((ta, tb)) = segment_intersection(p0, p1, q0, q1) else {
                    continue;
                };
                let x = [p0[0] + ta * (p1[0] - p0[0]), p0[1] + ta * (p1[1] - p0[1])];
                if key(x) != kk {
                    continue;
                }
                candidates.push((ca, ka, ta, cb, kb, tb, x));
            }
        }
    }

    let mut rejected: Vec<[f64; 2]> = Vec::new();
    for (ca, ka, ta, cb, kb, tb, x) in candidates {
        if nodes.near(x, 1e-4) || tangencies.near(x, 1e-4) {
            continue;
        }
        let (a, b) = (&images[ca], &images[cb]);
        if overlaps(a, ka, b, kb) || overlaps(b, kb, a, ka) {
            continue;
        }
        if rejected.iter().any(|r| dist(*r, x) < 1e-6) {
            continue;
        }
        let lerp = |img: &Image, k: usize, s: f64| {
            let q0 = img.q[k];
            let q1 = img.q[(k + 1) % img.q.len()];
            let d = tdiff(q0, q1);
            [q0[0] + s * d[0], q0[1] + s * d[1]]
        };
        let qa0 = lerp(a, ka, ta);
        let qb0 = lerp(b, kb, tb);
        if t
            .trace
            .junctions
            .iter()
            .any(|j| tdist(*j, qa0) < JUNCTION_REACH * h && tdist(*j, qb0) < JUNCTION_REACH * h)
        {
            // images touch where the two branches meet in joint space
            continue;
        }
        let Some((qa, qb)) = refine_node(g, qa0, qb0, 4.0 * h) else {
            rejected.push(x);
            dropped += 1;
            continue;
        };
        if tdist(qa, qb) < 1e-6 {
            rejected.push(x);
            continue;
        }
        let fa = image(g, qa);
        let loc = [0.5 * (fa[0] + image(g, qb)[0]), 0.5 * (fa[1] + image(g, qb)[1])];
        if nodes.near(loc, SAME_POINT) || tangencies.near(loc, SAME_POINT) {
            continue;
        }
        let on_axis = loc[0] < cfg.eps_axis;
        if relative_speed(g, qa) < FOLD_BACK || relative_speed(g, qb) < FOLD_BACK {
            // a branch ends at a fold-back point: the image continues, it does not cross
            continue;
        }
        let pre = vec![qa, qb];
        let res = residuals(g, CriticalKind::Node, loc, &pre);
        let point = CriticalPoint {
            kind: CriticalKind::Node,
            location: CrossSectionPoint { rho: loc[0], z: loc[1] },
            preimages: pre,
            residuals: res.clone(),
            on_axis,
            annotation: None,
        };
        if !on_axis && crossing_angle(g, qa, qb, loc[0]) < TANGENT_ANGLE {
            tangencies.points.push(CriticalPoint {
                annotation: Some("transition-degenerate".into()),
                ..point
            });
            continue;
        }
        if res.iter().all(|r| *r < cfg.eps_cert) {
            nodes.points.push(point);
        } else {
            rejected.push(x);
            dropped += 1;
        }
    }

    if dropped > 0 {
        warnings.push(format!("{dropped} critical-point candidate(s) failed certification and were dropped"));
    }

    let scale = t.scale;
    let to_units = |mut p: CriticalPoint| {
        p.location = CrossSectionPoint {
            rho: p.location.rho * scale,
            z: p.location.z * scale,
        };
        p
    };
    let canon = |mut v: Vec<CriticalPoint>| {
        v.sort_by(|a, b| {
            (a.location.rho, a.location.z)
                .partial_cmp(&(b.location.rho, b.location.z))
                .unwrap()
        });
        v.into_iter().map(to_units).collect::<Vec<_>>()
    };
    let mut scaled_images = image_curves(&scale_geometry(g, scale), &curves, cfg.eps_pt);
    for (img, deg) in scaled_images.iter_mut().zip(&degenerate) {
        img.degenerate_to_point = *deg;
    }
    SingularityAnalysis {
        curves,
        images: scaled_images,
        cusps: canon(cusps),
        nodes: canon(nodes.points),
        isolated: canon(isolated),
        tangencies: canon(tangencies.points),
        warnings,
    }
}

fn scale_geometry(g: &ManipulatorGeometry, s: f64) -> ManipulatorGeometry {
    g.scaled(s).unwrap_or(*g)
}

fn find_cusps(
    g: &ManipulatorGeometry,
    images: &[Image],
    degenerate: &[bool],
    cfg: &SingularityConfig,
    h: f64,
    dropped: &mut usize,
) -> Vec<CriticalPoint> {
    let mut found: Vec<CriticalPoint> = Vec::new();
    for (ci, img) in images.iter().enumerate() {
        if degenerate[ci] || img.q.len() < 3 {
            continue;
        }
        let m = img.q.len();
        let oriented = |k: usize, q: [f64; 2]| -> Option<[f64; 2]> {
            let prev = if k == 0 { if img.closed { m - 1 } else { 0 } } else { k - 1 };
            let next = if k + 1 == m { if img.closed { 0 } else { m - 1 } } else { k + 1 };
            let d = tdiff(img.q[prev], img.q[next]);
            let t = tangent(g, q);
            let n = norm(t);
            if n < 1e-8 {
                return None;
            }
            let s = if t[0] * d[0] + t[1] * d[1] < 0.0 { -1.0 } else { 1.0 };
            Some([s * t[0] / n, s * t[1] / n])
        };
        let vel: Vec<Option<[f64; 2]>> = (0..m)
            .map(|k| oriented(k, img.q[k]).map(|t| velocity(g, img.q[k], t)))
            .collect();
        let segs = img.segs();
        for k in 0..segs {
            let k1 = (k + 1) % m;
            let (Some(va), Some(vb)) = (vel[k], vel[k1]) else {
                continue;
            };
            if va[0] * vb[0] + va[1] * vb[1] >= 0.0 {
                continue;
            }
            let u = [va[0] / norm(va), va[1] / norm(va)];
            let chord = tdiff(img.q[k], img.q[k1]);
            let signed = |s: f64| -> Option<(f64, [f64; 2])> {
                let q = project_between(g, img.q[k], img.q[k1], s, h);
                let t = tangent(g, q);
                let n = norm(t);
                if n < 1e-8 {
                    return None;
                }
                let sg = if t[0] * chord[0] + t[1] * chord[1] < 0.0 { -1.0 } else { 1.0 };
                let v = velocity(g, q, [sg * t[0] / n, sg * t[1] / n]);
                Some((u[0] * v[0] + u[1] * v[1], q))
            };
            let (mut lo, mut hi) = (0.0, 1.0);
            let mut q = img.q[k];
            let mut ok = true;
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                match signed(mid) {
                    Some((c, qm)) => {
                        q = qm;
                        if c > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                *dropped += 1;
                continue;
            }
            let loc = image(g, q);
            if loc[0] < cfg.eps_axis {
                // Fold of the half-plane map on the axis, not a cusp.
                continue;
            }
            if retraces(img, k) {
                continue;
            }
            let gr = grad(g, q);
            if norm(gr) < 1e-6 {
                *dropped += 1;
                continue;
            }
            let res = residuals(g, CriticalKind::Cusp, loc, &[q]);
            if !res.iter().all(|r| *r < cfg.eps_cert) {
                *dropped += 1;
                continue;
            }
            if found
                .iter()
                .any(|p| (p.location.rho - loc[0]).hypot(p.location.z - loc[1]) < SAME_POINT)
            {
                continue;
            }
            found.push(CriticalPoint {
                kind: CriticalKind::Cusp,
                location: CrossSectionPoint { rho: loc[0], z: loc[1] },
                preimages: vec![q],
                residuals: res,
                on_axis: false,
                annotation: None,
            });
        }
    }
    found
}

/// Whether the image runs back over itself across segment `k`, which makes a
/// velocity reversal a fold-back rather than a cusp. Near a cusp the two sides
/// separate like `s^(3/2)`, so the comparison reaches out to `2·OVERLAP_WINDOW`.
fn retraces(img: &Image, k: usize) -> bool {
    let m = img.pts.len() as i64;
    let walk = |start: i64, dir: i64, reach: f64| -> Vec<usize> {
        let mut out = Vec::new();
        let mut acc = 0.0;
        let mut cur = start;
        for _ in 0..m {
            let idx = if img.closed {
                cur.rem_euclid(m)
            } else if (0..m).contains(&cur) {
                cur
            } else {
                break;
            };
            if let Some(&prev) = out.last() {
                acc += dist(img.pts[prev], img.pts[idx as usize]);
            }
            out.push(idx as usize);
            if acc > reach {
                break;
            }
            cur += dir;
        }
        out
    };
    let before = walk(k as i64, -1, 2.0 * OVERLAP_WINDOW);
    let after = walk(k as i64 + 1, 1, 4.0 * OVERLAP_WINDOW);
    if before.len() < 3 || after.len() < 2 {
        return false;
    }
    before.iter().all(|&i| {
        after
            .windows(2)
            .map(|w| point_segment_distance(img.pts[i], img.pts[w[0]], img.pts[w[1]]))
            .fold(f64::INFINITY, f64::min)
            < OVERLAP_TOL
    })
}
