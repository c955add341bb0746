//! Graph transform for the invariant surfaces `V^cu` (graph `s = φ(u, c)`
//! over the shadows of A and D) and `V^cs` (graph `u = φ*(c, s)` over the
//! shadows of B* and C*), and the section line where their images meet.

use nalgebra::{Matrix2, Matrix3, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{dimension_reducible, rates, Block, Interval};
use crate::map::{CoupledMap, Point};

pub const DEFAULT_RESOLUTION: usize = 129;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

const NODE_TOL: f64 = 1e-13;
const NODE_MAX_ITER: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Cu,
    Cs,
}

impl SurfaceKind {
    /// Axes spanning the base plane, and the axis carrying the graph value.
    pub fn axes(self) -> ([usize; 2], usize) {
        match self {
            SurfaceKind::Cu => ([0, 1], 2),
            SurfaceKind::Cs => ([1, 2], 0),
        }
    }

    /// Branches used by the transform: A, D forward or B, C backward.
    fn branches(self) -> [usize; 2] {
        match self {
            SurfaceKind::Cu => [0, 3],
            SurfaceKind::Cs => [1, 2],
        }
    }

    pub fn embed(self, x: [f64; 2], v: f64) -> Point {
        let ([i, j], g) = self.axes();
        let mut p = [0.0; 3];
        p[i] = x[0];
        p[j] = x[1];
        p[g] = v;
        p
    }

    pub fn project(self, p: Point) -> [f64; 2] {
        let ([i, j], _) = self.axes();
        [p[i], p[j]]
    }

    pub fn value(self, p: Point) -> f64 {
        p[self.axes().1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRect {
    pub x: Interval,
    pub y: Interval,
}

impl GridRect {
    fn of(b: &Block, kind: SurfaceKind) -> Self {
        let ([i, j], _) = kind.axes();
        GridRect { x: b.axis(i), y: b.axis(j) }
    }

    fn dist2(&self, p: [f64; 2]) -> f64 {
        let dx = p[0] - self.x.clamp(p[0]);
        let dy = p[1] - self.y.clamp(p[1]);
        dx * dx + dy * dy
    }
}

/// Defining function of a graph surface sampled on an `n × n` grid per rectangle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFunction {
    pub kind: SurfaceKind,
    pub rects: Vec<GridRect>,
    pub n: usize,
    /// Row-major values per rectangle, index `i * n + j` for node `(x_i, y_j)`.
    pub values: Vec<Vec<f64>>,
    /// `sup |φ_{k+1} − φ_k|` per iteration.
    pub log: Vec<f64>,
    pub converged: bool,
    pub precondition_ok: bool,
}

impl GridFunction {
    pub fn constant(kind: SurfaceKind, rects: Vec<GridRect>, n: usize, v: f64) -> Self {
        let values = rects.iter().map(|_| vec![v; n * n]).collect();
        GridFunction { kind, rects, n, values, log: vec![], converged: false, precondition_ok: true }
    }

    pub fn node(&self, r: usize, i: usize, j: usize) -> [f64; 2] {
        let rc = &self.rects[r];
        let t = |iv: &Interval, k: usize| iv.lo + iv.length() * k as f64 / (self.n - 1) as f64;
        [t(&rc.x, i), t(&rc.y, j)]
    }

    /// Bilinear interpolation on the nearest rectangle (clamped).
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let r = (0..self.rects.len())
            .min_by(|&a, &b| self.rects[a].dist2(p).total_cmp(&self.rects[b].dist2(p)))
            .expect("non-empty grid");
        let rc = &self.rects[r];
        let n1 = (self.n - 1) as f64;
        let fx = (rc.x.clamp(p[0]) - rc.x.lo) / rc.x.length() * n1;
        let fy = (rc.y.clamp(p[1]) - rc.y.lo) / rc.y.length() * n1;
        let i = (fx.floor() as usize).min(self.n - 2);
        let j = (fy.floor() as usize).min(self.n - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v = &self.values[r];
        let n = self.n;
        let (a, b, c, d) = (v[i * n + j], v[(i + 1) * n + j], v[i * n + j + 1], v[(i + 1) * n + j + 1]);
        let v0 = a + tx * (b - a);
        let v1 = c + tx * (d - c);
        v0 + ty * (v1 - v0)
    }

    /// `Σ_{1≤|α|≤2} sup |∂^α φ|` by finite differences.
    pub fn derivative_budget(&self) -> f64 {
        let n = self.n;
        let mut sup = [0.0f64; 5];
        for (r, rc) in self.rects.iter().enumerate() {
            let v = &self.values[r];
            let hx = rc.x.length() / (n - 1) as f64;
            let hy = rc.y.length() / (n - 1) as f64;
            let at = |i: usize, j: usize| v[i * n + j];
            let d1 = |i: usize, j: usize, dx: bool| -> f64 {
                let (k, m, h) = if dx { (i, n, hx) } else { (j, n, hy) };
                let get = |kk: usize| if dx { at(kk, j) } else { at(i, kk) };
                if k == 0 {
                    (get(1) - get(0)) / h
                } else if k == m - 1 {
                    (get(m - 1) - get(m - 2)) / h
                } else {
                    (get(k + 1) - get(k - 1)) / (2.0 * h)
                }
            };
            for i in 0..n {
                for j in 0..n {
                    sup[0] = sup[0].max(d1(i, j, true).abs());
                    sup[1] = sup[1].max(d1(i, j, false).abs());
                    let ic = i.clamp(1, n - 2);
                    let jc = j.clamp(1, n - 2);
                    let dxx = (at(ic + 1, j) - 2.0 * at(ic, j) + at(ic - 1, j)) / (hx * hx);
                    let dyy = (at(i, jc + 1) - 2.0 * at(i, jc) + at(i, jc - 1)) / (hy * hy);
                    let dxy = (at(ic + 1, jc + 1) - at(ic + 1, jc - 1) - at(ic - 1, jc + 1) + at(ic - 1, jc - 1))
                        / (4.0 * hx * hy);
                    sup[2] = sup[2].max(dxx.abs());
                    sup[3] = sup[3].max(dxy.abs());
                    sup[4] = sup[4].max(dyy.abs());
                }
            }
        }
        sup.iter().sum()
    }

    pub fn sup_deviation(&self, c: f64) -> f64 {
        self.values.iter().flatten().map(|v| (v - c).abs()).fold(0.0, f64::max)
    }

    /// Observed per-iteration contraction ratios of the update sizes.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.log.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect()
    }
}

/// Branch map used by a transform: forward branch for `Cu`, inverse for `Cs`.
fn branch_eval(m: &CoupledMap, kind: SurfaceKind, k: usize, p: Point) -> Result<(Point, Matrix3<f64>)> {
    match kind {
        SurfaceKind::Cu => Ok((m.branch_apply(k, p), m.branch_jacobian(k, p))),
        SurfaceKind::Cs => Ok((m.branch_inverse(k, p)?, m.branch_inverse_jacobian(k, p)?)),
    }
}

/// The transform's image shadow of branch `k`, in base-plane coordinates.
fn branch_shadow(m: &CoupledMap, kind: SurfaceKind, k: usize) -> GridRect {
    let b = &m.branches[k];
    match kind {
        SurfaceKind::Cu => GridRect::of(&b.image, kind),
        SurfaceKind::Cs => GridRect::of(&b.domain, kind),
    }
}

/// Value of the transformed graph at base point `y`: solve
/// `π(g(x, φ(x))) = y` for `x`, return the graph coordinate of `g(x, φ(x))`.
pub fn transformed_value(m: &CoupledMap, phi: &GridFunction, y: [f64; 2]) -> Result<(f64, Point)> {
    let kind = phi.kind;
    let ([ia, ib], _) = kind.axes();
    let ks = kind.branches();
    let k = *ks
        .iter()
        .min_by(|&&a, &&b| {
            branch_shadow(m, kind, a).dist2(y).total_cmp(&branch_shadow(m, kind, b).dist2(y))
        })
        .expect("two branches");
    let br = &m.branches[k];
    let mut x = match kind {
        SurfaceKind::Cu => [br.inverse_axis(ia, y[0]), br.inverse_axis(ib, y[1])],
        SurfaceKind::Cs => [br.apply_axis(ia, y[0]), br.apply_axis(ib, y[1])],
    };
    let fail = || LabError::RootNotFound { x: y[0], y: y[1] };
    for _ in 0..NODE_MAX_ITER {
        let p = kind.embed(x, phi.eval(x));
        let (q, j) = branch_eval(m, kind, k, p).map_err(|_| fail())?;
        let qp = kind.project(q);
        let r = Vector2::new(qp[0] - y[0], qp[1] - y[1]);
        if r.amax() <= NODE_TOL {
            return Ok((kind.value(q), q));
        }
        let jm = Matrix2::new(j[(ia, ia)], j[(ia, ib)], j[(ib, ia)], j[(ib, ib)]);
        let step = jm.lu().solve(&r).ok_or_else(fail)?;
        x = [x[0] - step[0], x[1] - step[1]];
        if !x[0].is_finite() || !x[1].is_finite() {
            return Err(fail());
        }
    }
    let p = kind.embed(x, phi.eval(x));
    let (q, _) = branch_eval(m, kind, k, p).map_err(|_| fail())?;
    let qp = kind.project(q);
    if (qp[0] - y[0]).abs().max((qp[1] - y[1]).abs()) <= 1e-11 {
        Ok((kind.value(q), q))
    } else {
        Err(fail())
    }
}

fn rects_for(m: &CoupledMap, kind: SurfaceKind) -> Vec<GridRect> {
    let s = &m.system;
    match kind {
        SurfaceKind::Cu => vec![GridRect::of(&s.a, kind), GridRect::of(&s.d, kind)],
        SurfaceKind::Cs => vec![GridRect::of(&s.b_star, kind), GridRect::of(&s.c_star, kind)],
    }
}

fn default_start(m: &CoupledMap, kind: SurfaceKind) -> f64 {
    match kind {
        SurfaceKind::Cu => m.system.a.s.mid(),
        SurfaceKind::Cs => m.system.b_star.u.mid(),
    }
}

/// Runs the graph transform from `start` until the sup update is below `tol`.
pub fn graph_transform(
    m: &CoupledMap,
    kind: SurfaceKind,
    resolution: usize,
    tol: f64,
    max_iter: usize,
    start: Option<f64>,
) -> Result<GridFunction> {
    let n = resolution.max(2);
    let mut phi = GridFunction::constant(kind, rects_for(m, kind), n, start.unwrap_or_else(|| default_start(m, kind)));
    let r = rates(&m.system);
    phi.precondition_ok = dimension_reducible(&r);
    for _ in 0..max_iter {
        let nodes: Vec<(usize, usize, usize)> = (0..phi.rects.len())
            .flat_map(|r| (0..n).flat_map(move |i| (0..n).map(move |j| (r, i, j))))
            .collect();
        let new: Vec<f64> = nodes
            .par_iter()
            .map(|&(r, i, j)| transformed_value(m, &phi, phi.node(r, i, j)).map(|v| v.0))
            .collect::<Result<Vec<f64>>>()?;
        let mut delta: f64 = 0.0;
        for (idx, &(r, i, j)) in nodes.iter().enumerate() {
            let old = &mut phi.values[r][i * n + j];
            delta = delta.max((new[idx] - *old).abs());
            *old = new[idx];
        }
        phi.log.push(delta);
        if delta < tol {
            phi.converged = true;
            return Ok(phi);
        }
    }
    Err(LabError::NoConvergence { iterations: max_iter, last_change: *phi.log.last().unwrap_or(&f64::NAN) })
}

pub fn graph_transform_cu(m: &CoupledMap, resolution: usize, tol: f64, max_iter: usize) -> Result<GridFunction> {
    graph_transform(m, SurfaceKind::Cu, resolution, tol, max_iter, None)
}

pub fn graph_transform_cs(m: &CoupledMap, resolution: usize, tol: f64, max_iter: usize) -> Result<GridFunction> {
    graph_transform(m, SurfaceKind::Cs, resolution, tol, max_iter, None)
}

/// Largest distance between `g(V)` and `V` over grid nodes whose point lands
/// back in the region where `V` is defined.
pub fn invariance_defect(m: &CoupledMap, phi: &GridFunction) -> f64 {
    let kind = phi.kind;
    let mut worst: f64 = 0.0;
    for (r, _) in phi.rects.iter().enumerate() {
        for i in 0..phi.n {
            for j in 0..phi.n {
                let x = phi.node(r, i, j);
                let p = kind.embed(x, phi.values[r][i * phi.n + j]);
                let q = match kind {
                    SurfaceKind::Cu => m.apply(p),
                    SurfaceKind::Cs => m.apply_inverse(p).ok().flatten(),
                };
                let Some(q) = q else { continue };
                let home = match kind {
                    SurfaceKind::Cu => m.system.a.contains(q) || m.system.d.contains(q),
                    SurfaceKind::Cs => m.system.b_star.contains(q) || m.system.c_star.contains(q),
                };
                if home {
                    worst = worst.max((kind.value(q) - phi.eval(kind.project(q))).abs());
                }
            }
        }
    }
    worst
}

/// A connected piece of the section line, parametrised by arclength.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub arclength: Vec<f64>,
}

impl Polyline {
    fn new(points: Vec<Point>) -> Self {
        let mut arclength = vec![0.0];
        for w in points.windows(2) {
            let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2) + (w[1][2] - w[0][2]).powi(2)).sqrt();
            arclength.push(arclength.last().unwrap() + d);
        }
        Polyline { points, arclength }
    }

    pub fn length(&self) -> f64 {
        *self.arclength.last().unwrap_or(&0.0)
    }

    pub fn c_range(&self) -> (f64, f64) {
        (self.points[0][1], self.points[self.points.len() - 1][1])
    }

    /// Arclength at the c-coordinate `c` (the line is a graph over c).
    pub fn arclength_at_c(&self, c: f64) -> f64 {
        let k = self.points.partition_point(|p| p[1] < c).clamp(1, self.points.len() - 1);
        let (p0, p1) = (self.points[k - 1], self.points[k]);
        let t = if p1[1] > p0[1] { (c - p0[1]) / (p1[1] - p0[1]) } else { 0.0 };
        self.arclength[k - 1] + t * (self.arclength[k] - self.arclength[k - 1])
    }

    pub fn point_at_c(&self, c: f64) -> Point {
        let k = self.points.partition_point(|p| p[1] < c).clamp(1, self.points.len() - 1);
        let (p0, p1) = (self.points[k - 1], self.points[k]);
        let t = if p1[1] > p0[1] { (c - p0[1]) / (p1[1] - p0[1]) } else { 0.0 };
        [p0[0] + t * (p1[0] - p0[0]), c, p0[2] + t * (p1[2] - p0[2])]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionLine {
    pub components: Vec<Polyline>,
}

fn interval_intersections(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            let lo = x.lo.max(y.lo);
            let hi = x.hi.min(y.hi);
            if lo < hi {
                out.push(Interval { lo, hi });
            }
        }
    }
    out.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    out
}

/// `f(V^cu) ∩ f⁻¹(V^cs)`: for each sampled c solve `s = Φ(u, c)`,
/// `u = Φ*(c, s)` where Φ, Φ* are the transformed graphs.
pub fn section_line(
    m: &CoupledMap,
    phi: &GridFunction,
    phistar: &GridFunction,
    samples_per_component: usize,
) -> Result<SectionLine> {
    let s = &m.system;
    let c_ranges = interval_intersections(&[s.a_star.c, s.d_star.c], &[s.b.c, s.c.c]);
    if c_ranges.is_empty() {
        return Err(LabError::EmptyIntersection);
    }
    let (p, q) = m.fixed_saddles()?;
    let n = samples_per_component.max(2);
    let mut components = Vec::new();
    for cr in c_ranges {
        let mut pts = Vec::with_capacity(n);
        for k in 0..n {
            let c = cr.lo + cr.length() * k as f64 / (n - 1) as f64;
            let (mut u, mut sv) = (q[0], p[2]);
            let mut ok = false;
            for _ in 0..100 {
                let (s_new, _) = transformed_value(m, phi, [u, c])?;
                let (u_new, _) = transformed_value(m, phistar, [c, s_new])?;
                let d = (s_new - sv).abs().max((u_new - u).abs());
                sv = s_new;
                u = u_new;
                if d < 1e-13 {
                    ok = true;
                    break;
                }
            }
            let pt = [u, c, sv];
            let in_img = s.a_star.contains(pt) || s.d_star.contains(pt);
            let in_dom = s.b.contains(pt) || s.c.contains(pt);
            if !ok || !in_img || !in_dom {
                return Err(LabError::EmptyIntersection);
            }
            pts.push(pt);
        }
        components.push(Polyline::new(pts));
    }
    Ok(SectionLine { components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::map::build_map;

    #[test]
    fn affine_cu_is_flat() {
        let m = build_map(&fixtures::ref0(), &fixtures::ALL_PLUS, None).unwrap();
        let phi = graph_transform_cu(&m, 17, 1e-10, 200).unwrap();
        assert!(phi.sup_deviation(0.1 / 0.85) < 1e-10);
        assert!(phi.derivative_budget() < 1e-8);
        for r in phi.contraction_ratios() {
            assert!((r - 0.15).abs() < 0.15 * 0.05, "{r}");
        }
    }

    #[test]
    fn affine_cs_is_flat() {
        let m = build_map(&fixtures::ref0(), &fixtures::ALL_PLUS, None).unwrap();
        let phi = graph_transform_cs(&m, 17, 1e-10, 200).unwrap();
        assert!(phi.sup_deviation(0.8375) < 1e-10);
        for r in phi.contraction_ratios() {
            assert!((r - 1.0 / 6.0).abs() < (1.0 / 6.0) * 0.05, "{r}");
        }
    }

    #[test]
    fn affine_section_line() {
        let m = build_map(&fixtures::ref0(), &fixtures::ALL_PLUS, None).unwrap();
        let phi = graph_transform_cu(&m, 9, 1e-12, 200).unwrap();
        let phis = graph_transform_cs(&m, 9, 1e-12, 200).unwrap();
        let l = section_line(&m, &phi, &phis, 11).unwrap();
        assert_eq!(l.components.len(), 2);
        for c in &l.components {
            for p in &c.points {
                assert!((p[0] - 0.8375).abs() < 1e-10);
                assert!((p[2] - 0.1 / 0.85).abs() < 1e-10);
            }
        }
        assert!((l.components[0].length() - 0.45).abs() < 1e-9);
    }

    #[test]
    fn perturbed_surfaces() {
        let sys = fixtures::ref0();
        let pert = crate::map::Perturbation::generated(&sys, 1e-3, 11);
        let m = build_map(&sys, &fixtures::ALL_PLUS, Some(pert)).unwrap();
        let phi = graph_transform_cu(&m, 33, 1e-10, 200).unwrap();
        assert!(phi.derivative_budget() < 0.1, "{}", phi.derivative_budget());
        assert!(phi.sup_deviation(0.1 / 0.85) < 5e-3);
        assert!(invariance_defect(&m, &phi) < 1e-5, "{}", invariance_defect(&m, &phi));
        let phis = graph_transform_cs(&m, 33, 1e-10, 200).unwrap();
        assert!(phis.derivative_budget() < 0.1, "{}", phis.derivative_budget());
        let l = section_line(&m, &phi, &phis, 21).unwrap();
        assert_eq!(l.components.len(), 2);
    }
}
