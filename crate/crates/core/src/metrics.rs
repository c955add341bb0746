//! Ω-sets on the section line, orbit sampling of sections of H(f), box
//! counting and the consolidated theorem reports.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cantor::{
    self, gap_lemma, ifs_from_gamma, ifs_from_sigma, intersect, newhouse_dim_lower, refine, thickness,
    CantorApprox, GapVerdict,
};
use crate::error::{LabError, Result};
use crate::geometry::{dimension_reducible, rates, shape_constants, Interval, ShapeConstants, EQ_TOL};
use crate::map::{CoupledMap, Point};
use crate::surfaces::{graph_transform_cs, graph_transform_cu, section_line, GridFunction, SectionLine};

/// Iterates before which only `R₁ ∪ R₂` membership is demanded.
pub const DEFAULT_TRANSIENT: usize = 3;
pub const DEFAULT_TAU0: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceParams {
    pub resolution: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub line_samples: usize,
}

impl Default for SurfaceParams {
    fn default() -> Self {
        SurfaceParams {
            resolution: crate::surfaces::DEFAULT_RESOLUTION,
            tol: crate::surfaces::DEFAULT_TOL,
            max_iter: crate::surfaces::DEFAULT_MAX_ITER,
            line_samples: 2001,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmegaSets {
    pub omega1: CantorApprox,
    pub omega2: CantorApprox,
    pub line: SectionLine,
    pub method: String,
}

/// Global coordinate on the section line: component start `c` plus arclength.
fn line_coord(line: &SectionLine, comp: usize, c: f64) -> f64 {
    let pl = &line.components[comp];
    pl.c_range().0 + pl.arclength_at_c(c)
}

fn surfaces(m: &CoupledMap, sp: &SurfaceParams) -> Result<(GridFunction, GridFunction)> {
    let phi = graph_transform_cu(m, sp.resolution, sp.tol, sp.max_iter)?;
    let phis = graph_transform_cs(m, sp.resolution, sp.tol, sp.max_iter)?;
    Ok((phi, phis))
}

/// Ω₁ and Ω₂ on the section line at refinement `depth`.
///
/// Unperturbed maps use the IFS refinements directly (the line is parallel to
/// the c-axis and the coordinate equals c). Perturbed maps bisect cylinder
/// boundaries along the computed line, re-projecting each iterate onto the
/// invariant surface it belongs to.
pub fn omega_sets(m: &CoupledMap, depth: usize, sp: &SurfaceParams) -> Result<OmegaSets> {
    let signs = m.branches.map(|b| b.signs);
    let (phi, phis) = surfaces(m, sp)?;
    let line = section_line(m, &phi, &phis, sp.line_samples)?;
    if m.is_affine() {
        let mut o1 = refine(&ifs_from_gamma(&m.system, &signs)?, depth)?;
        let mut o2 = refine(&ifs_from_sigma(&m.system, &signs)?, depth)?;
        o1.provenance = format!("exact affine projection of the Gamma-side cylinders, depth {depth}");
        o2.provenance = format!("exact affine projection of the Sigma-side cylinders, depth {depth}");
        return Ok(OmegaSets { omega1: o1, omega2: o2, line, method: "affine-exact".into() });
    }
    if depth > cantor::DEPTH_CAP {
        return Err(LabError::DepthCap { depth, cap: cantor::DEPTH_CAP });
    }
    let s = &m.system;
    let back_ok = [s.a_star.c, s.d_star.c];
    let fwd_ok = [s.b.c, s.c.c];
    let mut v1 = Vec::new();
    let mut v2 = Vec::new();
    for (ci, comp) in line.components.iter().enumerate() {
        let (c0, c1) = comp.c_range();
        let step_back = |p: Point| -> Option<Point> {
            let p = snap(&s.images(), p);
            let q = m.apply_inverse(p).ok().flatten()?;
            Some([q[0], q[1], phi.eval([q[0], q[1]])])
        };
        let step_fwd = |p: Point| -> Option<Point> {
            let q = m.apply(snap(&s.domains(), p))?;
            Some([phis.eval([q[1], q[2]]), q[1], q[2]])
        };
        let start = |c: f64| comp.point_at_c(c);
        for (c_lo, c_hi) in cylinders(c0, c1, depth, &back_ok, &start, &step_back) {
            v1.push((line_coord(&line, ci, c_lo), line_coord(&line, ci, c_hi)));
        }
        for (c_lo, c_hi) in cylinders(c0, c1, depth, &fwd_ok, &start, &step_fwd) {
            v2.push((line_coord(&line, ci, c_lo), line_coord(&line, ci, c_hi)));
        }
    }
    let o1 = CantorApprox::from_intervals(v1, depth, format!("leafwise projection along the section line, depth {depth}"));
    let o2 = CantorApprox::from_intervals(v2, depth, format!("leafwise projection along the section line, depth {depth}"));
    Ok(OmegaSets { omega1: o1, omega2: o2, line, method: "cylinder-bisection".into() })
}

/// Pulls a point lying within 1e-9 of one of `blocks` onto it, so that cylinder
/// endpoints on block faces are not lost to rounding.
fn snap(blocks: &[crate::geometry::Block], p: Point) -> Point {
    if blocks.iter().any(|b| b.contains(p)) {
        return p;
    }
    for b in blocks {
        let q = [b.u.clamp(p[0]), b.c.clamp(p[1]), b.s.clamp(p[2])];
        if (0..3).all(|j| (q[j] - p[j]).abs() <= 1e-9) {
            return q;
        }
    }
    p
}

/// Sub-intervals of `[c0, c1]` on which the first `depth` iterates have their
/// c-coordinate inside one of `ok`.
fn cylinders<S, F>(c0: f64, c1: f64, depth: usize, ok: &[Interval], start: &S, step: &F) -> Vec<(f64, f64)>
where
    S: Fn(f64) -> Point,
    F: Fn(Point) -> Option<Point>,
{
    let iterate = |c: f64, k: usize| -> Option<f64> {
        let mut p = start(c);
        for _ in 0..k {
            p = step(p)?;
        }
        Some(p[1])
    };
    let mut cur = vec![(c0, c1)];
    for k in 0..depth {
        let mut next = Vec::new();
        for &(a, b) in &cur {
            let (Some(va), Some(vb)) = (iterate(a, k), iterate(b, k)) else { continue };
            for iv in ok {
                if let Some(sub) = monotone_preimage(a, b, va, vb, iv, |c| iterate(c, k)) {
                    next.push(sub);
                }
            }
        }
        next.sort_by(|x, y| x.0.total_cmp(&y.0));
        cur = next;
    }
    cur
}

/// Preimage of `iv` under a monotone function on `[a, b]` with end values `va`, `vb`.
fn monotone_preimage<G>(a: f64, b: f64, va: f64, vb: f64, iv: &Interval, g: G) -> Option<(f64, f64)>
where
    G: Fn(f64) -> Option<f64>,
{
    let inc = vb >= va;
    let (vmin, vmax) = if inc { (va, vb) } else { (vb, va) };
    if vmax < iv.lo || vmin > iv.hi {
        return None;
    }
    let solve = |target: f64| -> f64 {
        let (mut lo, mut hi) = (a, b);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = g(mid).unwrap_or(if inc { f64::INFINITY } else { f64::NEG_INFINITY });
            if (v < target) == inc {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let t_lo = if vmin >= iv.lo { None } else { Some(solve(iv.lo)) };
    let t_hi = if vmax <= iv.hi { None } else { Some(solve(iv.hi)) };
    let (x0, x1) = if inc {
        (t_lo.unwrap_or(a), t_hi.unwrap_or(b))
    } else {
        (t_hi.unwrap_or(a), t_lo.unwrap_or(b))
    };
    (x0 <= x1).then_some((x0, x1))
}

/// Axis-aligned plane `{x_axis = value}` with ranges on the other two axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub axis: usize,
    pub value: f64,
    pub range1: Interval,
    pub range2: Interval,
}

impl SectionSpec {
    pub fn new(axis: usize, value: f64) -> Self {
        let unit = Interval { lo: 0.0, hi: 1.0 };
        SectionSpec { axis, value, range1: unit, range2: unit }
    }

    pub fn free_axes(&self) -> [usize; 2] {
        match self.axis {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }

    pub fn grid_point(&self, grid: usize, i: usize, j: usize) -> Point {
        let t = |iv: &Interval, k: usize| {
            if grid <= 1 {
                iv.mid()
            } else {
                iv.lo + iv.length() * k as f64 / (grid - 1) as f64
            }
        };
        let [a, b] = self.free_axes();
        let mut p = [0.0; 3];
        p[self.axis] = self.value;
        p[a] = t(&self.range1, i);
        p[b] = t(&self.range2, j);
        p
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point>,
    pub section: SectionSpec,
    pub grid: usize,
    pub n_fwd: usize,
    pub n_back: usize,
    pub transient: usize,
    /// Grid indices `(i, j)` of accepted points, aligned with `points`.
    pub cells: Vec<(usize, usize)>,
}

fn in_r1(m: &CoupledMap, p: Point) -> bool {
    m.system.a.contains(p) || m.system.d.contains(p)
}

fn in_r2(m: &CoupledMap, p: Point) -> bool {
    m.system.b_star.contains(p) || m.system.c_star.contains(p)
}

/// Forward criterion: iterates `0..=n` stay where the map is defined and
/// those from the transient on lie in `R₂`. Early iterates may sit in the
/// coupling blocks outside `R₁ ∪ R₂`. Vacuous for `n = 0`.
pub fn forward_ok(m: &CoupledMap, p: Point, n: usize, transient: usize) -> bool {
    if n == 0 {
        return true;
    }
    let mut q = p;
    for k in 0..=n {
        if k >= transient && !in_r2(m, q) {
            return false;
        }
        if k == n {
            break;
        }
        match m.apply(q) {
            Some(next) => q = next,
            None => return false,
        }
    }
    true
}

/// Backward criterion, mirrored with `R₁` and the inverse map.
pub fn backward_ok(m: &CoupledMap, p: Point, n: usize, transient: usize) -> bool {
    if n == 0 {
        return true;
    }
    let mut q = p;
    for k in 0..=n {
        if k >= transient && !in_r1(m, q) {
            return false;
        }
        if k == n {
            break;
        }
        match m.apply_inverse(q) {
            Ok(Some(prev)) => q = prev,
            _ => return false,
        }
    }
    true
}

fn sample<F>(section: SectionSpec, grid: usize, accept: F) -> (Vec<Point>, Vec<(usize, usize)>)
where
    F: Fn(Point) -> bool + Sync,
{
    let rows: Vec<Vec<(Point, (usize, usize))>> = (0..grid)
        .into_par_iter()
        .map(|i| {
            (0..grid)
                .filter_map(|j| {
                    let p = section.grid_point(grid, i, j);
                    accept(p).then_some((p, (i, j)))
                })
                .collect()
        })
        .collect();
    rows.into_iter().flatten().unzip()
}

pub fn sample_h(
    m: &CoupledMap,
    section: SectionSpec,
    grid: usize,
    n_fwd: usize,
    n_back: usize,
    transient: usize,
) -> PointCloud {
    let (points, cells) = sample(section, grid, |p| {
        forward_ok(m, p, n_fwd, transient) && backward_ok(m, p, n_back, transient)
    });
    PointCloud { points, section, grid, n_fwd, n_back, transient, cells }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantSide {
    /// Section of `W^u(Γ)`: backward criterion only.
    Unstable,
    /// Section of `W^s(Σ)`: forward criterion only.
    Stable,
}

pub fn sample_invariant_set(
    m: &CoupledMap,
    which: InvariantSide,
    section: SectionSpec,
    grid: usize,
    n: usize,
    transient: usize,
) -> PointCloud {
    let (points, cells) = sample(section, grid, |p| match which {
        InvariantSide::Unstable => backward_ok(m, p, n, transient),
        InvariantSide::Stable => forward_ok(m, p, n, transient),
    });
    let (n_fwd, n_back) = match which {
        InvariantSide::Unstable => (0, n),
        InvariantSide::Stable => (n, 0),
    };
    PointCloud { points, section, grid, n_fwd, n_back, transient, cells }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxCountReport {
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub r2: f64,
    /// Index range `[lo, hi)` into `scales` used by the fit.
    pub fit_range: (usize, usize),
}

/// `2^-4 … 2^-12`.
pub fn default_scales() -> Vec<f64> {
    (4..=12).map(|k| 0.5f64.powi(k)).collect()
}

pub fn count_boxes_intervals(s: &CantorApprox, r: f64) -> u64 {
    let mut count = 0u64;
    let mut last: Option<i64> = None;
    for &(lo, hi) in &s.intervals {
        let first = (lo / r + 1e-9).floor() as i64;
        let end = ((hi / r - 1e-9).ceil() as i64 - 1).max(first);
        let from = match last {
            Some(l) if l >= first => l + 1,
            _ => first,
        };
        if end >= from {
            count += (end - from + 1) as u64;
        }
        last = Some(last.map_or(end, |l| l.max(end)));
    }
    count
}

/// Boxes tile the closed unit cube: a coordinate equal to 1 falls in the
/// last box rather than opening a new one.
pub fn count_boxes_points(points: &[Point], r: f64) -> u64 {
    let idx = |x: f64| {
        let k = (x / r).floor();
        if x == 1.0 && k * r >= 1.0 {
            k as i64 - 1
        } else {
            k as i64
        }
    };
    let set: HashSet<(i64, i64, i64)> = points.iter().map(|p| (idx(p[0]), idx(p[1]), idx(p[2]))).collect();
    set.len() as u64
}

pub enum BoxInput<'a> {
    Intervals(&'a CantorApprox),
    Points(&'a [Point]),
}

/// Least-squares slope of `ln N(r)` against `ln(1/r)` over `fit_range`
/// (all scales when `None`).
pub fn box_dimension(input: BoxInput<'_>, scales: &[f64], fit_range: Option<(usize, usize)>) -> Result<BoxCountReport> {
    let empty = match &input {
        BoxInput::Intervals(s) => s.is_empty(),
        BoxInput::Points(p) => p.is_empty(),
    };
    if empty {
        return Err(LabError::EmptyInput);
    }
    let mut sc: Vec<f64> = scales.iter().cloned().filter(|r| *r > 0.0 && r.is_finite()).collect();
    sc.sort_by(|a, b| b.total_cmp(a));
    sc.dedup();
    let (lo, hi) = fit_range.unwrap_or((0, sc.len()));
    let hi = hi.min(sc.len());
    if hi < lo + 2 {
        return Err(LabError::DegenerateScales);
    }
    let counts: Vec<u64> = sc
        .par_iter()
        .map(|&r| match &input {
            BoxInput::Intervals(s) => count_boxes_intervals(s, r),
            BoxInput::Points(p) => count_boxes_points(p, r),
        })
        .collect();
    let xs: Vec<f64> = sc[lo..hi].iter().map(|r| (1.0 / r).ln()).collect();
    let ys: Vec<f64> = counts[lo..hi].iter().map(|&c| (c as f64).ln()).collect();
    let (slope, r2) = least_squares(&xs, &ys);
    Ok(BoxCountReport { scales: sc, counts, slope, r2, fit_range: (lo, hi) })
}

/// Default scales with the two coarsest excluded from the fit.
pub fn box_dimension_default(input: BoxInput<'_>) -> Result<BoxCountReport> {
    let sc = default_scales();
    let n = sc.len();
    box_dimension(input, &sc, Some((2, n)))
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (slope, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    NotApplicable,
}

impl Verdict {
    fn of(applicable: bool, ok: bool) -> Verdict {
        match (applicable, ok) {
            (false, _) => Verdict::NotApplicable,
            (true, true) => Verdict::Holds,
            (true, false) => Verdict::Fails,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Claim {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Measurements {
    pub depth: usize,
    pub omega_method: String,
    pub tau_omega1: Option<f64>,
    pub tau_omega2: Option<f64>,
    pub tau_intersection: Option<f64>,
    pub gap_lemma: Option<GapVerdict>,
    pub interleaved: Option<bool>,
    /// Intersection non-empty at every depth `1..=depth`.
    pub intersection_nonempty: Option<bool>,
    pub intersection_max_piece: Option<f64>,
    pub dim_omega1: Option<f64>,
    pub dim_intersection: Option<f64>,
    pub dim_wu_section: Option<f64>,
    pub wu_section_points: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub hypotheses: Vec<Check>,
    pub applicable: bool,
    pub rates: crate::geometry::RateSet,
    pub shape: Option<ShapeConstants>,
    pub measured: Measurements,
    pub bounds: Vec<Check>,
    pub claims: Vec<Claim>,
    pub notes: Vec<String>,
}

impl TheoremReport {
    pub fn claim(&self, name: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    pub depth: usize,
    pub tau0: f64,
    /// Grid per side for the sampled `W^u(Γ)` section.
    pub grid: usize,
    pub horizon: usize,
    pub transient: usize,
    pub surface: SurfaceParams,
}

impl Default for TheoremParams {
    fn default() -> Self {
        TheoremParams {
            depth: 12,
            tau0: DEFAULT_TAU0,
            grid: 512,
            horizon: 12,
            transient: DEFAULT_TRANSIENT,
            surface: SurfaceParams::default(),
        }
    }
}

/// Scales `2^-3 … 2^-(log2(grid) − 2)` suited to a grid-sampled section.
pub fn cloud_scales(grid: usize) -> Vec<f64> {
    let top = ((grid.max(32) as f64).log2().floor() as i32 - 2).max(5);
    (3..=top).map(|k| 0.5f64.powi(k)).collect()
}

fn max_piece(s: &CantorApprox) -> f64 {
    s.intervals.iter().map(|(a, b)| b - a).fold(0.0, f64::max)
}

/// Shared measurements for both theorem reports.
fn measure(m: &CoupledMap, p: &TheoremParams, applicable: bool, want_wu: bool) -> (Measurements, Vec<String>) {
    let mut notes = Vec::new();
    let mut ms = Measurements {
        depth: p.depth,
        omega_method: String::new(),
        tau_omega1: None,
        tau_omega2: None,
        tau_intersection: None,
        gap_lemma: None,
        interleaved: None,
        intersection_nonempty: None,
        intersection_max_piece: None,
        dim_omega1: None,
        dim_intersection: None,
        dim_wu_section: None,
        wu_section_points: None,
    };
    if !applicable {
        notes.push("hypotheses fail: measurements are diagnostic only".into());
    }
    let om = match omega_sets(m, p.depth, &p.surface) {
        Ok(o) => o,
        Err(e) => {
            notes.push(format!("omega sets unavailable: {e}"));
            return (ms, notes);
        }
    };
    ms.omega_method = om.method.clone();
    ms.tau_omega1 = thickness(&om.omega1).ok().map(|t| t.tau);
    ms.tau_omega2 = thickness(&om.omega2).ok().map(|t| t.tau);
    if let Ok(g) = gap_lemma(&om.omega1, &om.omega2) {
        ms.gap_lemma = Some(g.verdict);
        ms.interleaved = Some(g.interleaved);
    }
    let inter = intersect(&om.omega1, &om.omega2);
    ms.tau_intersection = thickness(&inter).ok().map(|t| t.tau);
    ms.intersection_max_piece = Some(max_piece(&inter));
    let mut nonempty = !inter.is_empty();
    if nonempty && m.is_affine() {
        let signs = m.branches.map(|b| b.signs);
        if let (Ok(g1), Ok(g2)) = (ifs_from_gamma(&m.system, &signs), ifs_from_sigma(&m.system, &signs)) {
            for d in 1..p.depth {
                if let (Ok(a), Ok(b)) = (refine(&g1, d), refine(&g2, d)) {
                    nonempty &= !intersect(&a, &b).is_empty();
                }
            }
        }
    }
    ms.intersection_nonempty = Some(nonempty);
    let scales = interval_scales(p.depth, &om.omega1);
    ms.dim_omega1 = box_dimension(BoxInput::Intervals(&om.omega1), &scales, None).ok().map(|r| r.slope);
    if !inter.is_empty() {
        ms.dim_intersection = box_dimension(BoxInput::Intervals(&inter), &scales, None).ok().map(|r| r.slope);
    }
    if want_wu {
        if let Ok((pp, _)) = m.fixed_saddles() {
            let sec = SectionSpec::new(2, pp[2]);
            let horizon = p.horizon.min(resolved_horizon(m, p.grid));
            let cloud = sample_invariant_set(m, InvariantSide::Unstable, sec, p.grid, horizon, p.transient);
            ms.wu_section_points = Some(cloud.points.len());
            let sc = cloud_scales(p.grid);
            let n = sc.len();
            ms.dim_wu_section =
                box_dimension(BoxInput::Points(&cloud.points), &sc, Some((2, n))).ok().map(|r| r.slope);
            notes.push(format!(
                "W^u section sampled on {{x_s = P_s}} with a {}x{} grid, horizon {} (requested {}, capped where c-cylinders reach the grid spacing)",
                p.grid, p.grid, horizon, p.horizon
            ));
        }
    }
    (ms, notes)
}

/// Deepest backward horizon whose c-cylinders are still at least one grid
/// spacing wide. Deeper cylinders fall between grid lines and thin the
/// sampled set at the finest box scales.
fn resolved_horizon(m: &CoupledMap, grid: usize) -> usize {
    let lam = rates(&m.system).lam_c;
    let spacing = 1.0 / (grid.max(2) - 1) as f64;
    let width = m.system.a.c.length();
    if !(lam > 0.0 && lam < 1.0) {
        return usize::MAX;
    }
    ((spacing / width).ln() / lam.ln()).floor().max(1.0) as usize
}

/// Scales between the coarsest gap size and the depth-`depth` cylinder length.
fn interval_scales(depth: usize, s: &CantorApprox) -> Vec<f64> {
    let finest = s.intervals.iter().map(|(a, b)| b - a).fold(f64::INFINITY, f64::min).max(1e-12);
    let kmax = ((1.0 / finest).log2().floor() as i32 - 1).clamp(5, 30);
    let kmin = (kmax - depth as i32).max(3).min(kmax - 2);
    (kmin..=kmax).map(|k| 0.5f64.powi(k)).collect()
}

fn hypotheses(m: &CoupledMap) -> (Vec<Check>, Option<ShapeConstants>, bool) {
    let r = rates(&m.system);
    let k = shape_constants(&m.system).ok();
    let mut hs = vec![Check {
        name: "dimension_reducible".into(),
        value: (r.lam_c * r.lam_c - r.lam_s).min(r.mu_u - r.mu_c * r.mu_c),
        holds: dimension_reducible(&r),
    }];
    match &k {
        Some(k) => {
            hs.push(Check { name: "a1*a2 > 1".into(), value: k.a1 * k.a2, holds: k.a1 * k.a2 > 1.0 });
            let b = k.b1.max(k.b2);
            hs.push(Check { name: "max(b1,b2) <= 1".into(), value: b, holds: b <= 1.0 + EQ_TOL });
        }
        None => hs.push(Check { name: "shape_constants".into(), value: f64::NAN, holds: false }),
    }
    let ok = hs.iter().all(|h| h.holds);
    (hs, k, ok)
}

pub fn theorem_a_report(m: &CoupledMap, p: &TheoremParams) -> TheoremReport {
    let (hyp, k, applicable) = hypotheses(m);
    let (ms, mut notes) = measure(m, p, applicable, true);
    let mut bounds = Vec::new();
    let mut claims = Vec::new();
    let nonempty = ms.intersection_nonempty.unwrap_or(false);
    claims.push(Claim {
        name: "H non-empty".into(),
        verdict: Verdict::of(applicable, nonempty && ms.gap_lemma == Some(GapVerdict::Applies)),
        detail: format!("gap lemma {:?}; intersection non-empty at depths 1..={}: {}", ms.gap_lemma, p.depth, nonempty),
    });
    let piece = ms.intersection_max_piece.unwrap_or(f64::NAN);
    let lam = k.map(|_| rates(&m.system).lam_c.max(1.0 / rates(&m.system).mu_c)).unwrap_or(f64::NAN);
    let piece_bound = 2.0 * lam.powi(p.depth as i32);
    claims.push(Claim {
        name: "H totally disconnected".into(),
        verdict: Verdict::of(applicable, piece <= piece_bound),
        detail: format!("largest piece of the depth-{} intersection {piece:.3e} <= 2*lambda^depth = {piece_bound:.3e}", p.depth),
    });
    if let Some(k) = k {
        let lb = (2.0 * k.a1 + 1.0) / (k.a1 + 1.0);
        let dim = ms.dim_wu_section.unwrap_or(f64::NAN);
        bounds.push(Check { name: "(2a1+1)/(a1+1)".into(), value: lb, holds: dim > lb });
        let lb2 = (2.0 * k.a2 + 1.0) / (k.a2 + 1.0);
        bounds.push(Check { name: "(2a2+1)/(a2+1)".into(), value: lb2, holds: true });
        claims.push(Claim {
            name: "(2a1+1)/(a1+1) < dim W^u(Gamma) < 2".into(),
            verdict: Verdict::of(applicable, lb < dim && dim < 2.0),
            detail: format!("{lb:.4} < {dim:.4} < 2"),
        });
        notes.push(format!(
            "a1 = {:.6}, a1_eff = a1/(1+b1) = {:.6}, measured tau(Omega1) = {:?}",
            k.a1, k.a1_eff, ms.tau_omega1
        ));
        if let Some(t) = ms.tau_omega1 {
            if t < k.a1 - 1e-9 {
                notes.push(format!(
                    "measured thickness {t:.6} is below a1 = {:.6}; compare with a1_eff = {:.6}",
                    k.a1, k.a1_eff
                ));
            }
        }
    }
    let dim_h = ms.dim_intersection.unwrap_or(f64::NAN);
    claims.push(Claim {
        name: "dim H < 1".into(),
        verdict: Verdict::of(applicable, dim_h < 1.0),
        detail: format!("box dimension of Omega1 ∩ Omega2 = {dim_h:.4}"),
    });
    notes.push(crate::MU_CONVENTION.to_string());
    TheoremReport {
        theorem: "A".into(),
        hypotheses: hyp,
        applicable,
        rates: rates(&m.system),
        shape: k,
        measured: ms,
        bounds,
        claims,
        notes,
    }
}

pub fn theorem_b_report(m: &CoupledMap, p: &TheoremParams) -> TheoremReport {
    let (mut hyp, k, base_ok) = hypotheses(m);
    let amin = k.map(|k| k.a1.min(k.a2)).unwrap_or(f64::NAN);
    let tau_ok = amin > p.tau0;
    hyp.push(Check { name: "min(a1,a2) > tau0".into(), value: amin, holds: tau_ok });
    let applicable = base_ok && tau_ok;
    let (ms, mut notes) = measure(m, p, applicable, false);
    let lower = 1.0 / (1.0 + 1.0 / amin.sqrt());
    let dim_h = ms.dim_intersection.unwrap_or(f64::NAN);
    let tmin = match (ms.tau_omega1, ms.tau_omega2) {
        (Some(a), Some(b)) => a.min(b),
        _ => f64::NAN,
    };
    let tau_i = ms.tau_intersection.unwrap_or(f64::NAN);
    let hky = 6.0 / 7.0 * tmin.sqrt();
    let chain_a = 5.0 / 6.0 * amin.sqrt();
    let newhouse = newhouse_dim_lower(tau_i).unwrap_or(f64::NAN);
    let bounds = vec![
        Check { name: "(1+1/sqrt(min a))^-1".into(), value: lower, holds: dim_h > lower },
        Check { name: "(6/7) sqrt(min tau)".into(), value: hky, holds: tau_i >= hky },
        Check { name: "(5/6) sqrt(min a)".into(), value: chain_a, holds: tau_i >= chain_a },
        Check { name: "newhouse_dim_lower(tau_cap)".into(), value: newhouse, holds: newhouse <= dim_h + 0.02 },
    ];
    let claims = vec![
        Claim {
            name: "tau(Omega1 ∩ Omega2) >= (6/7) sqrt(min tau)".into(),
            verdict: Verdict::of(applicable, tau_i >= hky),
            detail: format!("{tau_i:.4} >= {hky:.4}"),
        },
        Claim {
            name: "tau(Omega1 ∩ Omega2) >= (5/6) sqrt(min a)".into(),
            verdict: Verdict::of(applicable, tau_i >= chain_a),
            detail: format!("{tau_i:.4} >= {chain_a:.4}"),
        },
        Claim {
            name: "newhouse bound > (1+1/sqrt(min a))^-1".into(),
            verdict: Verdict::of(applicable, newhouse > lower),
            detail: format!("{newhouse:.4} > {lower:.4}"),
        },
        Claim {
            name: "(1+1/sqrt(min a))^-1 < dim H".into(),
            verdict: Verdict::of(applicable, dim_h > lower),
            detail: format!("{lower:.4} < {dim_h:.4}"),
        },
        Claim {
            name: "dim H < 1".into(),
            verdict: Verdict::of(applicable, dim_h < 1.0),
            detail: format!("box dimension of Omega1 ∩ Omega2 = {dim_h:.4}"),
        },
    ];
    notes.push(format!(
        "tau0 = {} is a user parameter, any sufficiently large constant will do",
        p.tau0
    ));
    notes.push("the HKY link is diagnostic: its thickness threshold is not quantified".into());
    notes.push(crate::MU_CONVENTION.to_string());
    TheoremReport {
        theorem: "B".into(),
        hypotheses: hyp,
        applicable,
        rates: rates(&m.system),
        shape: k,
        measured: ms,
        bounds,
        claims,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::IfsPair;
    use crate::fixtures;
    use crate::map::build_map;

    #[test]
    fn box_dim_middle_third() {
        let s = refine(&IfsPair::middle_third(), 12).unwrap();
        let scales: Vec<f64> = (2..=8).map(|k| 3f64.powi(-k)).collect();
        let r = box_dimension(BoxInput::Intervals(&s), &scales, None).unwrap();
        assert!((r.slope - 3f64.ln().recip() * 2f64.ln()).abs() < 0.02, "{}", r.slope);
    }

    #[test]
    fn box_dim_interval() {
        let s = CantorApprox::from_intervals(vec![(0.0, 1.0)], 0, "unit");
        let r = box_dimension_default(BoxInput::Intervals(&s)).unwrap();
        assert!((r.slope - 1.0).abs() < 0.01);
        assert_eq!(r.counts[0], 16);
    }

    #[test]
    fn box_dim_errors() {
        let e = CantorApprox::from_intervals(vec![], 0, "e");
        assert!(matches!(box_dimension_default(BoxInput::Intervals(&e)), Err(LabError::EmptyInput)));
        let s = CantorApprox::from_intervals(vec![(0.0, 1.0)], 0, "unit");
        assert!(matches!(
            box_dimension(BoxInput::Intervals(&s), &[0.1], None),
            Err(LabError::DegenerateScales)
        ));
    }

    #[test]
    fn empty_grid_and_vacuous_horizon() {
        let m = build_map(&fixtures::ref0(), &fixtures::ALL_PLUS, None).unwrap();
        let c = sample_h(&m, SectionSpec::new(0, 1.0), 0, 12, 12, 3);
        assert!(c.points.is_empty());
        let c = sample_invariant_set(&m, InvariantSide::Unstable, SectionSpec::new(2, 0.5), 8, 0, 3);
        assert_eq!(c.points.len(), 64);
    }

    #[test]
    fn affine_omega_sets_match_ifs() {
        let m = build_map(&fixtures::ref0(), &fixtures::ALL_PLUS, None).unwrap();
        let sp = SurfaceParams { resolution: 9, tol: 1e-12, max_iter: 200, line_samples: 11 };
        let om = omega_sets(&m, 6, &sp).unwrap();
        let ifs = ifs_from_gamma(&m.system, &fixtures::ALL_PLUS).unwrap();
        assert_eq!(om.omega1.intervals, refine(&ifs, 6).unwrap().intervals);
    }

    #[test]
    fn perturbed_omega_close_to_affine() {
        let sys = fixtures::ref0();
        let sp = SurfaceParams { resolution: 33, tol: 1e-10, max_iter: 200, line_samples: 401 };
        let pert = crate::map::Perturbation::generated(&sys, 1e-3, 5);
        let m = build_map(&sys, &fixtures::ALL_PLUS, Some(pert)).unwrap();
        let m0 = build_map(&sys, &fixtures::ALL_PLUS, None).unwrap();
        let a = omega_sets(&m0, 8, &sp).unwrap();
        let b = omega_sets(&m, 8, &sp).unwrap();
        assert_eq!(b.omega1.len(), 256);
        assert_eq!(b.omega2.len(), 256);
        let d1 = cantor::hausdorff_distance(&a.omega1, &b.omega1);
        let d2 = cantor::hausdorff_distance(&a.omega2, &b.omega2);
        assert!(d1 < 5e-3 && d2 < 5e-3, "{d1} {d2}");
    }
}
