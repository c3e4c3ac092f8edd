//! Regions of the half cross-section cut out by the singular curves, their
//! inverse kinematic counts, voids, and the resulting topology signature.
//!
//! The half-plane is rasterized with every non-degenerate curve image burnt
//! in as a barrier. Connected cells form components whose solution count is
//! sampled at points far from any barrier. Components that meet across a
//! curve without a count change (a curve covered twice by opposite folds)
//! are merged, so each region is a maximal set with constant count.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CrossSectionPoint, ManipulatorGeometry};
use crate::ik::count_ik;
use crate::singularity::{analyze_singularities, PlanarCurve, SingularityAnalysis, SingularityConfig};

/// Half-width of the raster frame relative to the characteristic length.
pub const FRAME: f64 = 1.05;
/// Samples drawn per component.
const SAMPLES: usize = 5;
/// Adjacency probes needed before two components count as neighbours.
const MIN_SUPPORT: usize = 3;
/// Resolution doublings tried when a component's samples disagree.
const MAX_REFINE: usize = 2;
/// Distance (unit length) under which two curve passes coincide.
const SAME_PASS: f64 = 1e-5;
/// End-to-start gap (unit length) under which a curve image is a loop.
const CLOSE_GAP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    /// Raster cells across `ρ ∈ [0, 1.05·L]`; z uses twice as many.
    pub raster_n: usize,
    pub singularity: SingularityConfig,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            raster_n: 800,
            singularity: SingularityConfig::default(),
        }
    }
}

impl TopologyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.raster_n < 200 {
            return Err(Error::InvalidArgument(format!(
                "raster_n must be at least 200 (got {})",
                self.raster_n
            )));
        }
        self.singularity.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    pub sample_points: Vec<CrossSectionPoint>,
    pub ik_count: usize,
    /// Touches the border of the raster frame (the z-axis side included).
    pub touches_frame: bool,
    pub area_estimate: f64,
    /// All samples agreed on `ik_count`.
    pub resolved: bool,
}

/// Two regions separated by a stretch of singular curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionAdjacency {
    pub a: usize,
    pub b: usize,
    /// Number of probes that crossed from one to the other.
    pub support: usize,
    /// Largest number of coincident curve passes seen at a crossing.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WellShaped {
    /// Every reachable point has four solutions. Regions that only touch at a
    /// node still count as one 4-solution region here.
    pub single_4region_covers_workspace: bool,
    pub binary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceTopology {
    pub n_cusps: usize,
    pub n_nodes_offaxis: usize,
    pub n_nodes_onaxis: usize,
    pub n_isolated_points: usize,
    pub n_voids: usize,
    pub regions: Vec<Region>,
    pub adjacency: Vec<RegionAdjacency>,
    pub max_ik: usize,
    pub well_shaped: WellShaped,
    /// Raster resolution the regions were finally resolved at.
    pub raster_n: usize,
    pub warnings: Vec<String>,
}

/// The integer part of a topology, used to compare workspaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TopologySignature {
    pub n_cusps: usize,
    pub n_nodes_offaxis: usize,
    pub n_voids: usize,
    /// Sorted solution counts of the reachable regions.
    pub region_counts: Vec<usize>,
}

impl WorkspaceTopology {
    /// Regions reachable with at least one solution.
    pub fn workspace_regions(&self) -> impl Iterator<Item = &Region> {
        self.regions.iter().filter(|r| r.ik_count > 0)
    }

    /// Adjacencies whose counts break [`adjacent_counts_ok`].
    pub fn adjacency_violations(&self) -> Vec<&RegionAdjacency> {
        self.adjacency
            .iter()
            .filter(|a| !adjacent_counts_ok(self.regions[a.a].ik_count, self.regions[a.b].ik_count, a.multiplicity))
            .collect()
    }

    pub fn region_counts(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.workspace_regions().map(|r| r.ik_count).collect();
        v.sort_unstable();
        v
    }

    pub fn signature(&self) -> TopologySignature {
        TopologySignature {
            n_cusps: self.n_cusps,
            n_nodes_offaxis: self.n_nodes_offaxis,
            n_voids: self.n_voids,
            region_counts: self.region_counts(),
        }
    }
}

struct Raster {
    nx: usize,
    nz: usize,
    cell: f64,
    barrier: Vec<bool>,
}

impl Raster {
    fn new(n: usize) -> Self {
        Self {
            nx: n,
            nz: 2 * n,
            cell: FRAME / n as f64,
            barrier: vec![false; 2 * n * n],
        }
    }

    fn grid(&self, p: [f64; 2]) -> [f64; 2] {
        [p[0] / self.cell, (p[1] + FRAME) / self.cell]
    }

    fn index_of(&self, p: [f64; 2]) -> Option<usize> {
        let g = self.grid(p);
        let (i, j) = (g[0].floor(), g[1].floor());
        (i >= 0.0 && j >= 0.0 && (i as usize) < self.nx && (j as usize) < self.nz)
            .then(|| j as usize * self.nx + i as usize)
    }

    fn center(&self, idx: usize) -> [f64; 2] {
        let (i, j) = (idx % self.nx, idx / self.nx);
        [(i as f64 + 0.5) * self.cell, (j as f64 + 0.5) * self.cell - FRAME]
    }

    fn mark(&mut self, i: i64, j: i64) {
        if i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.nz {
            self.barrier[j as usize * self.nx + i as usize] = true;
        }
    }

    /// Marks every cell the segment passes through, keeping the trail
    /// 4-connected when it crosses a cell corner.
    fn burn(&mut self, p: [f64; 2], q: [f64; 2]) {
        let a = self.grid(p);
        let b = self.grid(q);
        let (mut i, mut j) = (a[0].floor() as i64, a[1].floor() as i64);
        let d = [b[0] - a[0], b[1] - a[1]];
        let setup = |x: f64, dx: f64, k: i64| -> (i64, f64, f64) {
            if dx > 0.0 {
                (1, ((k + 1) as f64 - x) / dx, 1.0 / dx)
            } else if dx < 0.0 {
                (-1, (x - k as f64) / -dx, -1.0 / dx)
            } else {
                (0, f64::INFINITY, f64::INFINITY)
            }
        };
        let (si, mut ti, di) = setup(a[0], d[0], i);
        let (sj, mut tj, dj) = setup(a[1], d[1], j);
        self.mark(i, j);
        let limit = 4 + (d[0].abs() + d[1].abs()) as usize * 2;
        for _ in 0..limit {
            if ti > 1.0 && tj > 1.0 {
                break;
            }
            if (ti - tj).abs() <= 1e-12 {
                self.mark(i + si, j);
                self.mark(i, j + sj);
                i += si;
                j += sj;
                ti += di;
                tj += dj;
            } else if ti < tj {
                i += si;
                ti += di;
            } else {
                j += sj;
                tj += dj;
            }
            self.mark(i, j);
        }
    }

    fn neighbors4(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = (idx % self.nx, idx / self.nx);
        let nx = self.nx;
        [
            (i > 0).then(|| idx - 1),
            (i + 1 < nx).then(|| idx + 1),
            (j > 0).then(|| idx - nx),
            (j + 1 < self.nz).then(|| idx + nx),
        ]
        .into_iter()
        .flatten()
    }

    fn on_frame(&self, idx: usize) -> bool {
        let (i, j) = (idx % self.nx, idx / self.nx);
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.nz
    }
}

/// Segments of the non-degenerate curve images in unit length.
struct Segments {
    segs: Vec<([f64; 2], [f64; 2])>,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

const BUCKET: f64 = 1e-2;

impl Segments {
    fn new(curves: &[Vec<[f64; 2]>]) -> Self {
        let mut segs = Vec::new();
        for c in curves {
            for w in c.windows(2) {
                segs.push((w[0], w[1]));
            }
        }
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (k, (a, b)) in segs.iter().enumerate() {
            let (x0, y0) = key([a[0].min(b[0]), a[1].min(b[1])]);
            let (x1, y1) = key([a[0].max(b[0]), a[1].max(b[1])]);
            for x in x0..=x1 {
                for y in y0..=y1 {
                    buckets.entry((x, y)).or_default().push(k);
                }
            }
        }
        Self { segs, buckets }
    }

    fn near(&self, p: [f64; 2], r: f64) -> Vec<usize> {
        let (x0, y0) = key([p[0] - r, p[1] - r]);
        let (x1, y1) = key([p[0] + r, p[1] + r]);
        let mut out = Vec::new();
        for x in x0..=x1 {
            for y in y0..=y1 {
                if let Some(v) = self.buckets.get(&(x, y)) {
                    out.extend_from_slice(v);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn key(p: [f64; 2]) -> (i64, i64) {
    ((p[0] / BUCKET).floor() as i64, (p[1] / BUCKET).floor() as i64)
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    let t = if l2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

/// Parameter along `p0→p1` where it crosses `q0→q1`, if it does.
fn crossing(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> Option<f64> {
    let r = [p1[0] - p0[0], p1[1] - p0[1]];
    let s = [q1[0] - q0[0], q1[1] - q0[1]];
    let den = r[0] * s[1] - r[1] * s[0];
    if den.abs() < 1e-300 {
        return None;
    }
    let w = [q0[0] - p0[0], q0[1] - p0[1]];
    let t = (w[0] * s[1] - w[1] * s[0]) / den;
    let u = (w[0] * r[1] - w[1] * r[0]) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then_some(t)
}

struct Component {
    cells: Vec<usize>,
    touches_frame: bool,
    max_dist: u32,
}

struct Pass {
    regions: Vec<Region>,
    adjacency: Vec<RegionAdjacency>,
    warnings: Vec<String>,
    unresolved: usize,
}

fn decompose_at(geom: &ManipulatorGeometry, images: &[Vec<[f64; 2]>], n: usize) -> Pass {
    let l = geom.char_length();
    let mut raster = Raster::new(n);
    for c in images {
        for w in c.windows(2) {
            raster.burn(w[0], w[1]);
        }
    }
    let ncell = raster.barrier.len();

    // chessboard distance to the nearest barrier cell
    let mut dist = vec![u32::MAX; ncell];
    let mut queue = VecDeque::new();
    for (k, &b) in raster.barrier.iter().enumerate() {
        if b {
            dist[k] = 0;
            queue.push_back(k);
        }
    }
    let (nx, nz) = (raster.nx as i64, raster.nz as i64);
    while let Some(k) = queue.pop_front() {
        let (i, j) = ((k % raster.nx) as i64, (k / raster.nx) as i64);
        for di in -1..=1 {
            for dj in -1..=1 {
                let (a, b) = (i + di, j + dj);
                if a < 0 || b < 0 || a >= nx || b >= nz {
                    continue;
                }
                let m = (b * nx + a) as usize;
                if dist[m] == u32::MAX {
                    dist[m] = dist[k] + 1;
                    queue.push_back(m);
                }
            }
        }
    }

    // connected components of free cells, labelled in scan order
    let mut label = vec![u32::MAX; ncell];
    let mut comps: Vec<Component> = Vec::new();
    for start in 0..ncell {
        if raster.barrier[start] || label[start] != u32::MAX {
            continue;
        }
        let id = comps.len() as u32;
        let mut comp = Component {
            cells: Vec::new(),
            touches_frame: false,
            max_dist: 0,
        };
        label[start] = id;
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            comp.cells.push(k);
            comp.touches_frame |= raster.on_frame(k);
            // free cells on the frame border count as far from barriers
            comp.max_dist = comp.max_dist.max(dist[k]);
            for m in raster.neighbors4(k) {
                if !raster.barrier[m] && label[m] == u32::MAX {
                    label[m] = id;
                    queue.push_back(m);
                }
            }
        }
        comps.push(comp);
    }

    let mut warnings = Vec::new();
    let mut unresolved = 0;
    let (mut slivers, mut sliver_cells) = (0, 0);
    // (count, samples, resolved) per component; slivers get None
    let mut info: Vec<Option<(usize, Vec<[f64; 2]>, bool)>> = Vec::with_capacity(comps.len());
    for (ci, comp) in comps.iter().enumerate() {
        if comp.max_dist <= 1 {
            slivers += 1;
            sliver_cells += comp.cells.len();
            info.push(None);
            continue;
        }
        let samples = pick_samples(&raster, &dist, comp);
        let counts: Vec<usize> = samples
            .iter()
            .map(|p| count_ik(geom, p[0] * l, p[1] * l))
            .collect();
        let mut tally: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in &counts {
            *tally.entry(c).or_default() += 1;
        }
        let (&count, _) = tally.iter().max_by_key(|(c, k)| (**k, std::cmp::Reverse(**c))).unwrap();
        let resolved = tally.len() == 1;
        if !resolved {
            unresolved += 1;
            warnings.push(format!("component {ci}: samples disagree on the solution count {counts:?}"));
        }
        info.push(Some((count, samples, resolved)));
    }

    if slivers > 0 {
        warnings.push(format!(
            "{slivers} sliver(s) between curves ({sliver_cells} cells) ignored at raster {n}"
        ));
    }

    // adjacency probes across every curve segment
    let segments = Segments::new(images);
    let mut support: BTreeMap<(u32, u32), (usize, usize)> = BTreeMap::new();
    let reach = 6.0 * raster.cell;
    // passes closer than this share a barrier cell, so they cannot hide a region
    let same_pass = 0.25 * raster.cell;
    for (a, b) in &segments.segs {
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = d[0].hypot(d[1]);
        if len == 0.0 {
            continue;
        }
        let m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let nrm = [-d[1] / len, d[0] / len];
        let nearby = segments.near(m, reach + BUCKET);
        let multiplicity = nearby
            .iter()
            .filter(|&&k| point_segment_distance(m, segments.segs[k].0, segments.segs[k].1) < SAME_PASS)
            .count()
            .max(1);
        let side = |sign: f64| -> Option<u32> {
            let mut t = 0.5 * raster.cell;
            while t <= reach {
                let p = [m[0] + sign * t * nrm[0], m[1] + sign * t * nrm[1]];
                let idx = raster.index_of(p)?;
                if !raster.barrier[idx] {
                    // a second curve between the segment and the free cell spoils the probe
                    let blocked = nearby.iter().any(|&k| {
                        let (q0, q1) = segments.segs[k];
                        crossing(m, p, q0, q1).is_some_and(|s| s * t > same_pass)
                    });
                    return (!blocked).then_some(label[idx]);
                }
                t += 0.5 * raster.cell;
            }
            None
        };
        let (Some(p), Some(q)) = (side(1.0), side(-1.0)) else {
            continue;
        };
        if p == q || info[p as usize].is_none() || info[q as usize].is_none() {
            continue;
        }
        let e = support.entry((p.min(q), p.max(q))).or_insert((0, 0));
        e.0 += 1;
        e.1 = e.1.max(multiplicity);
    }

    // merge neighbours with equal counts: the curve between them changes nothing
    let mut parent: Vec<usize> = (0..comps.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (&(p, q), &(s, _)) in &support {
        let (p, q) = (p as usize, q as usize);
        if s >= MIN_SUPPORT && info[p].as_ref().unwrap().0 == info[q].as_ref().unwrap().0 {
            let (rp, rq) = (find(&mut parent, p), find(&mut parent, q));
            if rp != rq {
                parent[rp.max(rq)] = rp.min(rq);
            }
        }
    }

    // regions in order of their first cell
    let mut region_of: Vec<Option<usize>> = vec![None; comps.len()];
    let mut regions: Vec<Region> = Vec::new();
    for ci in 0..comps.len() {
        let Some((count, samples, resolved)) = info[ci].clone() else {
            continue;
        };
        let root = find(&mut parent, ci);
        let rid = match region_of[root] {
            Some(r) => r,
            None => {
                let r = regions.len();
                region_of[root] = Some(r);
                regions.push(Region {
                    id: r,
                    sample_points: Vec::new(),
                    ik_count: count,
                    touches_frame: false,
                    area_estimate: 0.0,
                    resolved: true,
                });
                r
            }
        };
        region_of[ci] = Some(rid);
        let reg = &mut regions[rid];
        reg.sample_points
            .extend(samples.iter().map(|p| CrossSectionPoint::new(p[0] * l, p[1] * l)));
        reg.touches_frame |= comps[ci].touches_frame;
        reg.resolved &= resolved;
    }

    // every cell (barriers and slivers included) goes to its nearest region
    let mut owner: Vec<u32> = vec![u32::MAX; ncell];
    for (ci, comp) in comps.iter().enumerate() {
        if let Some(r) = region_of[ci] {
            for &k in &comp.cells {
                owner[k] = r as u32;
                queue.push_back(k);
            }
        }
    }
    while let Some(k) = queue.pop_front() {
        let o = owner[k];
        let next: Vec<usize> = raster.neighbors4(k).filter(|&m| owner[m] == u32::MAX).collect();
        for m in next {
            owner[m] = o;
            queue.push_back(m);
        }
    }
    let cell_area = (raster.cell * l).powi(2);
    for &o in &owner {
        if o != u32::MAX {
            regions[o as usize].area_estimate += cell_area;
        }
    }

    let mut merged: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for (&(p, q), &(s, mult)) in &support {
        let (rp, rq) = (region_of[p as usize].unwrap(), region_of[q as usize].unwrap());
        if rp == rq {
            continue;
        }
        let e = merged.entry((rp.min(rq), rp.max(rq))).or_insert((0, 0));
        e.0 += s;
        e.1 = e.1.max(mult);
    }
    let adjacency = merged
        .into_iter()
        .filter(|(_, (s, _))| *s >= MIN_SUPPORT)
        .map(|((a, b), (support, multiplicity))| RegionAdjacency {
            a,
            b,
            support,
            multiplicity,
        })
        .collect();

    Pass {
        regions,
        adjacency,
        warnings,
        unresolved,
    }
}

/// Up to [`SAMPLES`] well-spread cells far from every barrier.
fn pick_samples(raster: &Raster, dist: &[u32], comp: &Component) -> Vec<[f64; 2]> {
    let floor = (comp.max_dist / 2).max(2);
    let mut pool: Vec<usize> = comp.cells.iter().copied().filter(|&k| dist[k] >= floor).collect();
    if pool.len() > 4096 {
        let stride = pool.len() / 4096 + 1;
        pool = pool.into_iter().step_by(stride).collect();
    }
    let Some(&first) = pool.iter().max_by_key(|&&k| (dist[k], std::cmp::Reverse(k))) else {
        return Vec::new();
    };
    let cheb = |a: usize, b: usize| {
        let (ai, aj) = ((a % raster.nx) as i64, (a / raster.nx) as i64);
        let (bi, bj) = ((b % raster.nx) as i64, (b / raster.nx) as i64);
        (ai - bi).abs().max((aj - bj).abs())
    };
    let mut chosen = vec![first];
    let mut gap: Vec<i64> = pool.iter().map(|&k| cheb(k, first)).collect();
    while chosen.len() < SAMPLES {
        let Some((pos, &g)) = gap.iter().enumerate().max_by_key(|(i, g)| (**g, std::cmp::Reverse(*i))) else {
            break;
        };
        if g == 0 {
            break;
        }
        let k = pool[pos];
        chosen.push(k);
        for (i, &c) in pool.iter().enumerate() {
            gap[i] = gap[i].min(cheb(c, k));
        }
    }
    chosen.into_iter().map(|k| raster.center(k)).collect()
}

fn unit_images(geom: &ManipulatorGeometry, curves: &[PlanarCurve]) -> Vec<Vec<[f64; 2]>> {
    let l = geom.char_length();
    curves
        .iter()
        .filter(|c| !c.degenerate_to_point)
        .map(|c| {
            let mut pts: Vec<[f64; 2]> = c.vertices.iter().map(|p| [p.rho / l, p.z / l]).collect();
            // close loops whose ends meet; open traces end on their own
            if let (Some(&first), Some(&last)) = (pts.first(), pts.last()) {
                if pts.len() > 2 && (first[0] - last[0]).hypot(first[1] - last[1]) < CLOSE_GAP {
                    pts.push(first);
                }
            }
            pts
        })
        .collect()
}

struct Decomposition {
    regions: Vec<Region>,
    adjacency: Vec<RegionAdjacency>,
    raster_n: usize,
    warnings: Vec<String>,
}

fn decompose(geom: &ManipulatorGeometry, curves: &[PlanarCurve], raster_n: usize) -> Decomposition {
    let images = unit_images(geom, curves);
    let mut n = raster_n;
    let mut pass = decompose_at(geom, &images, n);
    for _ in 0..MAX_REFINE {
        if pass.unresolved == 0 {
            break;
        }
        n *= 2;
        pass = decompose_at(geom, &images, n);
    }
    let mut warnings = pass.warnings;
    for r in pass.regions.iter().filter(|r| !r.resolved) {
        warnings.push(format!(
            "unresolved region {}: samples still disagree at raster {n}; count {} by majority",
            r.id, r.ik_count
        ));
    }
    Decomposition {
        regions: pass.regions,
        adjacency: pass.adjacency,
        raster_n: n,
        warnings,
    }
}

/// Regions of the frame cut out by the curve images. Fails if some region's
/// samples still disagree after refinement.
pub fn decompose_regions(geom: &ManipulatorGeometry, curves: &[PlanarCurve], raster_n: usize) -> Result<Vec<Region>> {
    if raster_n < 200 {
        return Err(Error::InvalidArgument(format!(
            "raster_n must be at least 200 (got {raster_n})"
        )));
    }
    let d = decompose(geom, curves, raster_n);
    if let Some(r) = d.regions.iter().find(|r| !r.resolved) {
        return Err(Error::UnresolvedRegion(format!(
            "region {} at raster {}",
            r.id, d.raster_n
        )));
    }
    Ok(d.regions)
}

/// Solution counts across a barrier of `multiplicity` coincident curve
/// passes: each pass changes the count by exactly 2.
pub fn adjacent_counts_ok(a: usize, b: usize, multiplicity: usize) -> bool {
    let diff = a.abs_diff(b);
    diff.is_multiple_of(2) && diff > 0 && diff <= 2 * multiplicity && (multiplicity > 1 || diff == 2)
}

/// Unreachable regions enclosed by the workspace.
pub fn detect_voids(regions: &[Region]) -> Vec<Region> {
    regions
        .iter()
        .filter(|r| r.ik_count == 0 && !r.touches_frame)
        .cloned()
        .collect()
}

/// Regions and counts for an existing singularity analysis.
pub fn topology_from_analysis(
    geom: &ManipulatorGeometry,
    sing: &SingularityAnalysis,
    raster_n: usize,
) -> WorkspaceTopology {
    let d = decompose(geom, &sing.images, raster_n);
    let mut warnings = d.warnings;
    for adj in &d.adjacency {
        let (ca, cb) = (d.regions[adj.a].ik_count, d.regions[adj.b].ik_count);
        if !adjacent_counts_ok(ca, cb, adj.multiplicity) {
            warnings.push(format!(
                "regions {} ({ca}) and {} ({cb}) meet across {} curve pass(es)",
                adj.a, adj.b, adj.multiplicity
            ));
        }
    }
    let n_voids = detect_voids(&d.regions).len();
    let max_ik = d.regions.iter().map(|r| r.ik_count).max().unwrap_or(0);
    let reachable: Vec<&Region> = d.regions.iter().filter(|r| r.ik_count > 0).collect();
    WorkspaceTopology {
        n_cusps: sing.cusps.len(),
        n_nodes_offaxis: sing.offaxis_nodes(),
        n_nodes_onaxis: sing.onaxis_nodes(),
        n_isolated_points: sing.isolated.len(),
        n_voids,
        well_shaped: WellShaped {
            single_4region_covers_workspace: !reachable.is_empty() && reachable.iter().all(|r| r.ik_count == 4),
            binary: max_ik == 2,
        },
        max_ik,
        regions: d.regions,
        adjacency: d.adjacency,
        raster_n: d.raster_n,
        warnings,
    }
}

/// Singular set and regions together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceAnalysis {
    pub singularities: SingularityAnalysis,
    pub topology: WorkspaceTopology,
}

pub fn analyze_workspace(geom: &ManipulatorGeometry, cfg: &TopologyConfig) -> Result<WorkspaceAnalysis> {
    cfg.validate()?;
    let singularities = analyze_singularities(geom, &cfg.singularity)?;
    let mut topology = topology_from_analysis(geom, &singularities, cfg.raster_n);
    let mut warnings = singularities.warnings.clone();
    warnings.append(&mut topology.warnings);
    topology.warnings = warnings;
    Ok(WorkspaceAnalysis {
        singularities,
        topology,
    })
}

/// Topology of the workspace at the default configuration.
pub fn topology_signature(geom: &ManipulatorGeometry) -> Result<WorkspaceTopology> {
    Ok(analyze_workspace(geom, &TopologyConfig::default())?.topology)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burnt_segments_leave_no_diagonal_gap() {
        let mut r = Raster::new(200);
        r.burn([0.1003, -0.3], [0.6, 0.2011]);
        let idx = |p: [f64; 2]| r.index_of(p).unwrap();
        let mut seen = vec![false; r.barrier.len()];
        let start = idx([0.1003, -0.3]);
        let end = idx([0.6, 0.2011]);
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(k) = queue.pop_front() {
            for m in r.neighbors4(k) {
                if r.barrier[m] && !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        assert!(seen[end]);
    }

    #[test]
    fn reference_arm_regions() {
        let g = ManipulatorGeometry::new(1.0, 3.0, 2.0, 0.0, 4.0).unwrap();
        let t = topology_signature(&g).unwrap();
        assert_eq!(t.region_counts(), vec![2, 2, 4, 4]);
        assert_eq!(t.n_voids, 0);
        assert_eq!(t.max_ik, 4);
    }

    #[test]
    fn voids_need_a_closed_boundary() {
        let region = |ik_count, touches_frame| Region {
            id: 0,
            sample_points: vec![],
            ik_count,
            touches_frame,
            area_estimate: 1.0,
            resolved: true,
        };
        let regions = vec![region(0, true), region(0, false), region(2, false)];
        assert_eq!(detect_voids(&regions).len(), 1);
    }
}
