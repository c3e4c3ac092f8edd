//! Marching-squares extraction of the zero set of the Jacobian determinant on
//! the `(θ2, θ3)` torus.
//!
//! Crossings of two branches (common when the determinant factors) are found
//! first as critical points of the determinant lying on its zero set. A small
//! block of cells around each crossing is cut out of the contouring, and the
//! loose arc ends are glued back pairwise through the crossing so that every
//! branch continues straight across it.

use std::f64::consts::PI;

use crate::geometry::{jacobian_det, jacobian_det_gradient, wrap_angle, ManipulatorGeometry};

use super::TorusCurve;

/// Cells within this many pitches of a crossing are excluded from contouring.
const JUNCTION_RADIUS: f64 = 2.5;
/// Largest image-space gap (unit characteristic length) between consecutive vertices.
pub(crate) const MAX_IMAGE_STEP: f64 = 2e-3;

const NONE: u32 = u32::MAX;

/// Torus difference `b − a`, each component wrapped into `[-π, π)`.
#[inline]
pub(crate) fn tdiff(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [wrap_angle(b[0] - a[0]), wrap_angle(b[1] - a[1])]
}

#[inline]
pub(crate) fn tdist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = tdiff(a, b);
    d[0].hypot(d[1])
}

#[inline]
fn wrap2(q: [f64; 2]) -> [f64; 2] {
    [wrap_angle(q[0]), wrap_angle(q[1])]
}

#[inline]
pub(crate) fn det(g: &ManipulatorGeometry, q: [f64; 2]) -> f64 {
    jacobian_det(g, q[0], q[1])
}

#[inline]
pub(crate) fn grad(g: &ManipulatorGeometry, q: [f64; 2]) -> [f64; 2] {
    jacobian_det_gradient(g, q[0], q[1])
}

pub(crate) fn hessian(g: &ManipulatorGeometry, q: [f64; 2]) -> [[f64; 2]; 2] {
    let h = 1e-6;
    let gx0 = grad(g, [q[0] - h, q[1]]);
    let gx1 = grad(g, [q[0] + h, q[1]]);
    let gy0 = grad(g, [q[0], q[1] - h]);
    let gy1 = grad(g, [q[0], q[1] + h]);
    let hxx = (gx1[0] - gx0[0]) / (2.0 * h);
    let hyy = (gy1[1] - gy0[1]) / (2.0 * h);
    let hxy = 0.5 * ((gx1[1] - gx0[1]) + (gy1[0] - gy0[0])) / (2.0 * h);
    [[hxx, hxy], [hxy, hyy]]
}

/// Moves `q` onto the zero set along the fixed direction `dir` (unit length).
pub(crate) fn project_along(g: &ManipulatorGeometry, q: [f64; 2], dir: [f64; 2], max_step: f64) -> [f64; 2] {
    let mut s = 0.0;
    for _ in 0..40 {
        let p = [q[0] + s * dir[0], q[1] + s * dir[1]];
        let f = det(g, p);
        if f == 0.0 {
            break;
        }
        let gr = grad(g, p);
        let df = gr[0] * dir[0] + gr[1] * dir[1];
        if df == 0.0 {
            break;
        }
        let next = (s - f / df).clamp(-max_step, max_step);
        if (next - s).abs() < 1e-16 {
            s = next;
            break;
        }
        s = next;
    }
    wrap2([q[0] + s * dir[0], q[1] + s * dir[1]])
}

/// Newton projection along the local gradient.
fn project_gradient(g: &ManipulatorGeometry, q: [f64; 2], max_step: f64) -> [f64; 2] {
    let mut p = q;
    for _ in 0..20 {
        let f = det(g, p);
        if f.abs() < 1e-15 {
            break;
        }
        let gr = grad(g, p);
        let n2 = gr[0] * gr[0] + gr[1] * gr[1];
        if n2 < 1e-24 {
            break;
        }
        let mut dx = [-f * gr[0] / n2, -f * gr[1] / n2];
        let len = dx[0].hypot(dx[1]);
        if len > max_step {
            dx = [dx[0] * max_step / len, dx[1] * max_step / len];
        }
        p = [p[0] + dx[0], p[1] + dx[1]];
        if len < 1e-16 {
            break;
        }
    }
    wrap2(p)
}

/// Projects the point between `a` and `b` at fraction `s` onto the zero set,
/// moving perpendicular to the chord.
pub(crate) fn project_between(g: &ManipulatorGeometry, a: [f64; 2], b: [f64; 2], s: f64, max_step: f64) -> [f64; 2] {
    let d = tdiff(a, b);
    let len = d[0].hypot(d[1]);
    let p = [a[0] + s * d[0], a[1] + s * d[1]];
    if len == 0.0 {
        return wrap2(p);
    }
    project_along(g, p, [-d[1] / len, d[0] / len], max_step)
}

struct Grid {
    n: usize,
    h: f64,
    vals: Vec<f64>,
}

impl Grid {
    fn new(g: &ManipulatorGeometry, n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        let trig: Vec<(f64, f64)> = (0..n).map(|k| (-PI + (k as f64 + 0.5) * h).sin_cos()).collect();
        let mut vals = Vec::with_capacity(n * n);
        for &(s3, c3) in &trig {
            for &(s2, c2) in &trig {
                vals.push(crate::geometry::jacobian_det_sc(g, s2, c2, s3, c3));
            }
        }
        Self { n, h, vals }
    }

    fn angle(&self, k: usize) -> f64 {
        -PI + (k as f64 + 0.5) * self.h
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.vals[(j % self.n) * self.n + (i % self.n)]
    }

    fn cell_changes_sign(&self, i: usize, j: usize) -> bool {
        let v = [self.at(i, j), self.at(i + 1, j), self.at(i + 1, j + 1), self.at(i, j + 1)];
        let pos = v.iter().filter(|x| **x >= 0.0).count();
        pos != 0 && pos != 4
    }
}

/// Crossing points of zero-set branches: critical points of the determinant
/// where it also vanishes.
fn find_junctions(g: &ManipulatorGeometry, grid: &Grid, eps: f64) -> Vec<[f64; 2]> {
    let n = grid.n;
    let h = grid.h;
    let mut found: Vec<[f64; 2]> = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if !grid.cell_changes_sign(i, j) {
                continue;
            }
            let corners = [
                [grid.angle(i), grid.angle(j)],
                [grid.angle(i) + h, grid.angle(j)],
                [grid.angle(i), grid.angle(j) + h],
                [grid.angle(i) + h, grid.angle(j) + h],
            ];
            let grads: Vec<[f64; 2]> = corners.iter().map(|&c| grad(g, c)).collect();
            let brackets = (0..2).all(|k| {
                let lo = grads.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
                let hi = grads.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max);
                let pad = 0.25 * (hi - lo);
                lo - pad <= 0.0 && 0.0 <= hi + pad
            });
            if !brackets {
                continue;
            }
            let start = [grid.angle(i) + 0.5 * h, grid.angle(j) + 0.5 * h];
            if let Some(q) = critical_point(g, start, 2.0 * h) {
                if det(g, q).abs() < eps && !found.iter().any(|f| tdist(*f, q) < 0.5 * h) {
                    found.push(q);
                }
            }
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());
    found
}

/// Newton on `∇E = 0` from `start`, constrained to a ball of radius `reach`.
fn critical_point(g: &ManipulatorGeometry, start: [f64; 2], reach: f64) -> Option<[f64; 2]> {
    let mut q = start;
    for _ in 0..40 {
        let gr = grad(g, q);
        if gr[0].hypot(gr[1]) < 1e-13 {
            break;
        }
        let hs = hessian(g, q);
        let d = hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0];
        if d.abs() < 1e-300 {
            return None;
        }
        let dx = [
            (hs[1][1] * gr[0] - hs[0][1] * gr[1]) / d,
            (-hs[1][0] * gr[0] + hs[0][0] * gr[1]) / d,
        ];
        q = [q[0] - dx[0], q[1] - dx[1]];
        if tdist(q, start) > reach {
            return None;
        }
        if dx[0].hypot(dx[1]) < 1e-15 {
            break;
        }
    }
    let gr = grad(g, q);
    (gr[0].hypot(gr[1]) < 1e-9).then(|| wrap2(q))
}

struct Contours {
    /// Crossing position per edge id (`NONE`-free only where a crossing exists).
    pos: Vec<[f64; 2]>,
    adj: Vec<[u32; 2]>,
    ambiguous: usize,
}

fn edge_h(n: usize, i: usize, j: usize) -> u32 {
    (2 * ((j % n) * n + (i % n))) as u32
}

fn edge_v(n: usize, i: usize, j: usize) -> u32 {
    (2 * ((j % n) * n + (i % n)) + 1) as u32
}

fn march(grid: &Grid, blocked: &[bool]) -> Contours {
    let n = grid.n;
    let h = grid.h;
    let mut pos = vec![[f64::NAN; 2]; 2 * n * n];
    let mut adj = vec![[NONE; 2]; 2 * n * n];
    let mut ambiguous = 0;
    let interp = |va: f64, vb: f64| va / (va - vb);
    for j in 0..n {
        for i in 0..n {
            if blocked[j * n + i] {
                continue;
            }
            let fa = grid.at(i, j);
            let fb = grid.at(i + 1, j);
            let fc = grid.at(i + 1, j + 1);
            let fd = grid.at(i, j + 1);
            let (pa, pb, pc, pd) = (fa >= 0.0, fb >= 0.0, fc >= 0.0, fd >= 0.0);
            let x0 = grid.angle(i);
            let y0 = grid.angle(j);
            let bottom = (pa != pb).then(|| {
                let id = edge_h(n, i, j);
                pos[id as usize] = wrap2([x0 + interp(fa, fb) * h, y0]);
                id
            });
            let right = (pb != pc).then(|| {
                let id = edge_v(n, i + 1, j);
                pos[id as usize] = wrap2([x0 + h, y0 + interp(fb, fc) * h]);
                id
            });
            let top = (pd != pc).then(|| {
                let id = edge_h(n, i, j + 1);
                pos[id as usize] = wrap2([x0 + interp(fd, fc) * h, y0 + h]);
                id
            });
            let left = (pa != pd).then(|| {
                let id = edge_v(n, i, j);
                pos[id as usize] = wrap2([x0, y0 + interp(fa, fd) * h]);
                id
            });
            let mut link = |a: u32, b: u32| {
                for (x, y) in [(a, b), (b, a)] {
                    let slot = &mut adj[x as usize];
                    if slot[0] == NONE {
                        slot[0] = y;
                    } else {
                        slot[1] = y;
                    }
                }
            };
            match (bottom, right, top, left) {
                (Some(b), Some(r), Some(t), Some(l)) => {
                    ambiguous += 1;
                    let den = fa + fc - fb - fd;
                    let centre = if den != 0.0 {
                        (fa * fc - fb * fd) / den
                    } else {
                        0.25 * (fa + fb + fc + fd)
                    };
                    if (centre >= 0.0) == pa {
                        link(b, r);
                        link(t, l);
                    } else {
                        link(b, l);
                        link(r, t);
                    }
                }
                _ => {
                    let ends: Vec<u32> = [bottom, right, top, left].into_iter().flatten().collect();
                    if ends.len() == 2 {
                        link(ends[0], ends[1]);
                    }
                }
            }
        }
    }
    Contours { pos, adj, ambiguous }
}

/// Open or closed chains of edge crossings.
fn chain(c: &Contours) -> Vec<(Vec<[f64; 2]>, bool)> {
    let mut seen = vec![false; c.adj.len()];
    let mut out = Vec::new();
    let degree = |k: usize| c.adj[k].iter().filter(|x| **x != NONE).count();
    let walk = |start: usize, seen: &mut Vec<bool>| -> (Vec<[f64; 2]>, bool) {
        let mut pts = vec![c.pos[start]];
        seen[start] = true;
        let mut prev = NONE;
        let mut cur = start as u32;
        loop {
            let nb = c.adj[cur as usize];
            let next = if nb[0] != prev && nb[0] != NONE && !seen[nb[0] as usize] {
                nb[0]
            } else if nb[1] != prev && nb[1] != NONE && !seen[nb[1] as usize] {
                nb[1]
            } else {
                let closes = nb.contains(&(start as u32)) && pts.len() > 2;
                return (pts, closes);
            };
            seen[next as usize] = true;
            pts.push(c.pos[next as usize]);
            prev = cur;
            cur = next;
        }
    };
    for k in 0..c.adj.len() {
        if !seen[k] && degree(k) == 1 {
            out.push(walk(k, &mut seen));
        }
    }
    for k in 0..c.adj.len() {
        if !seen[k] && degree(k) == 2 {
            out.push(walk(k, &mut seen));
        }
    }
    out
}

/// A traced curve plus the junctions it passes through, as `(vertex, junction)` pairs.
pub(crate) struct TracedCurve {
    pub curve: TorusCurve,
    pub junctions: Vec<(usize, usize)>,
}

pub(crate) struct Trace {
    pub curves: Vec<TracedCurve>,
    pub junctions: Vec<[f64; 2]>,
    pub ambiguous_cells: usize,
    pub grid_n: usize,
}

/// Traces the zero set at resolution `n` on the unit-length geometry `g`.
pub(crate) fn trace(g: &ManipulatorGeometry, n: usize, eps: f64) -> Trace {
    let grid = Grid::new(g, n);
    let h = grid.h;
    let junctions = find_junctions(g, &grid, eps);

    let mut blocked = vec![false; n * n];
    let r = JUNCTION_RADIUS * h;
    for jq in &junctions {
        let ci = ((jq[0] + PI) / h).floor() as i64;
        let cj = ((jq[1] + PI) / h).floor() as i64;
        for dj in -4..=4i64 {
            for di in -4..=4i64 {
                let i = (ci + di).rem_euclid(n as i64) as usize;
                let j = (cj + dj).rem_euclid(n as i64) as usize;
                let centre = [grid.angle(i) + 0.5 * h, grid.angle(j) + 0.5 * h];
                let d = tdiff(*jq, centre);
                if d[0].abs().max(d[1].abs()) <= r {
                    blocked[j * n + i] = true;
                }
            }
        }
    }

    let contours = march(&grid, &blocked);
    let ambiguous_cells = contours.ambiguous;
    let mut chains = chain(&contours);
    for (pts, _) in chains.iter_mut() {
        for p in pts.iter_mut() {
            *p = project_gradient(g, *p, h);
        }
    }

    // Attach loose chain ends to their junctions and pair them up.
    let open: Vec<usize> = (0..chains.len()).filter(|&k| !chains[k].1).collect();
    let mut ends_at: Vec<Vec<(usize, bool, [f64; 2])>> = vec![Vec::new(); junctions.len()];
    for &k in &open {
        let pts = &chains[k].0;
        for (is_end, p) in [(false, pts[0]), (true, *pts.last().unwrap())] {
            let best = junctions
                .iter()
                .enumerate()
                .map(|(idx, jq)| (idx, tdist(*jq, p)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            if let Some((idx, d)) = best {
                if d <= (JUNCTION_RADIUS + 2.5) * h * 1.5 && d > 0.0 {
                    let v = tdiff(junctions[idx], p);
                    ends_at[idx].push((k, is_end, [v[0] / d, v[1] / d]));
                }
            }
        }
    }
    // link[(chain, is_end)] = (junction, other chain, other is_end)
    let mut link: std::collections::HashMap<(usize, bool), (usize, usize, bool)> = Default::default();
    for (jid, ends) in ends_at.iter().enumerate() {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..ends.len() {
            for b in a + 1..ends.len() {
                let da = ends[a].2;
                let db = ends[b].2;
                pairs.push((da[0] * db[0] + da[1] * db[1], a, b));
            }
        }
        pairs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut used = vec![false; ends.len()];
        for (_, a, b) in pairs {
            if used[a] || used[b] {
                continue;
            }
            used[a] = true;
            used[b] = true;
            let (ca, ea, _) = ends[a];
            let (cb, eb, _) = ends[b];
            link.insert((ca, ea), (jid, cb, eb));
            link.insert((cb, eb), (jid, ca, ea));
        }
    }

    let mut curves = Vec::new();
    let mut used = vec![false; chains.len()];
    for (k, (pts, closed)) in chains.iter().enumerate() {
        if *closed {
            used[k] = true;
            curves.push(finish(g, pts.clone(), Vec::new(), true, h));
        }
    }
    // Start from chains with a dangling end so open curves come out whole.
    let mut order: Vec<usize> = open
        .iter()
        .copied()
        .filter(|&k| !link.contains_key(&(k, false)) || !link.contains_key(&(k, true)))
        .collect();
    order.extend(open.iter().copied());
    for start in order {
        if used[start] {
            continue;
        }
        let forward = link.contains_key(&(start, true)) || !link.contains_key(&(start, false));
        let entry = (start, !forward);
        let mut pts: Vec<[f64; 2]> = Vec::new();
        let mut marks: Vec<(usize, usize)> = Vec::new();
        let mut cur = start;
        let mut fwd = forward;
        let mut closed = false;
        loop {
            used[cur] = true;
            let src = &chains[cur].0;
            if fwd {
                pts.extend(src.iter().copied());
            } else {
                pts.extend(src.iter().rev().copied());
            }
            let Some(&(jid, next, next_end)) = link.get(&(cur, fwd)) else {
                break;
            };
            let jq = junctions[jid];
            let last = *pts.last().unwrap();
            pts.extend(fill(g, last, jq, h));
            marks.push((pts.len(), jid));
            pts.push(jq);
            let first_next = if next_end { *chains[next].0.last().unwrap() } else { chains[next].0[0] };
            let mut tail = fill(g, first_next, jq, h);
            tail.reverse();
            pts.extend(tail);
            if (next, next_end) == entry {
                closed = true;
                break;
            }
            if used[next] {
                break;
            }
            cur = next;
            fwd = !next_end;
        }
        curves.push(finish(g, pts, marks, closed, h));
    }

    // Crossings whose branches were never reached by the contouring (e.g. all
    // branches shorter than the cut-out) are dropped from the junction list.
    Trace {
        curves,
        junctions,
        ambiguous_cells,
        grid_n: n,
    }
}

/// Refined points strictly between `from` and `to` (a junction), spaced ≤ h/2.
fn fill(g: &ManipulatorGeometry, from: [f64; 2], to: [f64; 2], h: f64) -> Vec<[f64; 2]> {
    let d = tdist(from, to);
    let k = (d / (0.5 * h)).ceil().max(1.0) as usize;
    (1..k)
        .map(|m| project_between(g, from, to, m as f64 / k as f64, 0.5 * h))
        .collect()
}

fn subdivide(
    g: &ManipulatorGeometry,
    a: [f64; 2],
    b: [f64; 2],
    depth: u32,
    too_far: &dyn Fn([f64; 2], [f64; 2]) -> bool,
    emit: &mut dyn FnMut([f64; 2]),
) {
    if depth >= 14 || !too_far(a, b) {
        return;
    }
    let mid = project_between(g, a, b, 0.5, 0.5 * tdist(a, b));
    subdivide(g, a, mid, depth + 1, too_far, emit);
    emit(mid);
    subdivide(g, mid, b, depth + 1, too_far, emit);
}

/// Subdivides until joint and image steps are small, then builds the curve.
fn finish(
    g: &ManipulatorGeometry,
    pts: Vec<[f64; 2]>,
    marks: Vec<(usize, usize)>,
    closed: bool,
    h: f64,
) -> TracedCurve {
    let image = |q: [f64; 2]| {
        let p = g.frame1_position(q[0], q[1]);
        [p[0].hypot(p[1]), p[2]]
    };
    let too_far = |a: [f64; 2], b: [f64; 2]| {
        if tdist(a, b) >= 0.9 * h {
            return true;
        }
        let (ia, ib) = (image(a), image(b));
        (ia[0] - ib[0]).hypot(ia[1] - ib[1]) > MAX_IMAGE_STEP
    };
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(pts.len() * 2);
    let mut junction_at: Vec<Option<usize>> = Vec::with_capacity(pts.len() * 2);
    let mut mark_iter = marks.into_iter().peekable();
    let m = pts.len();
    let segs = if closed { m } else { m.saturating_sub(1) };
    for k in 0..m {
        out.push(pts[k]);
        let jid = match mark_iter.peek() {
            Some(&(idx, jid)) if idx == k => {
                mark_iter.next();
                Some(jid)
            }
            _ => None,
        };
        junction_at.push(jid);
        if k >= segs {
            continue;
        }
        subdivide(g, pts[k], pts[(k + 1) % m], 0, &too_far, &mut |mid| {
            out.push(mid);
            junction_at.push(None);
        });
    }
    let mut unwrapped = 0.0f64;
    let mut unwrapped3 = 0.0f64;
    let total = if closed { out.len() } else { out.len().saturating_sub(1) };
    for k in 0..total {
        let d = tdiff(out[k], out[(k + 1) % out.len()]);
        unwrapped += d[0];
        unwrapped3 += d[1];
    }
    let wrap_count = if closed {
        [(unwrapped / (2.0 * PI)).round() as i32, (unwrapped3 / (2.0 * PI)).round() as i32]
    } else {
        [0, 0]
    };
    let junctions = junction_at
        .iter()
        .enumerate()
        .filter_map(|(k, j)| j.map(|jid| (k, jid)))
        .collect();
    TracedCurve {
        curve: TorusCurve {
            vertices: out,
            closed,
            wrap_count,
        },
        junctions,
    }
}
