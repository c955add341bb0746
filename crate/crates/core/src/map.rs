//! The coupled horseshoe map: four signed affine branches, optionally
//! post-composed with a near-identity bump diffeomorphism of the image blocks.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{Block, BlockSystem, DOMAIN_NAMES};

pub type Point = [f64; 3];

pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-12;

/// `max_t |d/dt (1 - t²)³|` on `[0, 1]`, attained at `t = 1/√5`.
pub const BUMP_MAX_D1: f64 = 6.0 / 2.236_067_977_499_79 * 0.64;
/// `max_t |d²/dt² (1 - t²)³|`, attained at `t = 0`.
pub const BUMP_MAX_D2: f64 = 6.0;

/// Signed affine bijection `domain → image` with diagonal Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineBranch {
    pub domain: Block,
    pub image: Block,
    pub signs: [i8; 3],
}

impl AffineBranch {
    pub fn rates(&self) -> [f64; 3] {
        let mut r = [0.0; 3];
        for (j, rj) in r.iter_mut().enumerate() {
            *rj = self.image.axis(j).length() / self.domain.axis(j).length();
        }
        r
    }

    /// Diagonal entries `σ_j r_j`.
    pub fn diag(&self) -> [f64; 3] {
        let r = self.rates();
        [
            f64::from(self.signs[0]) * r[0],
            f64::from(self.signs[1]) * r[1],
            f64::from(self.signs[2]) * r[2],
        ]
    }

    pub fn determinant(&self) -> f64 {
        self.diag().iter().product()
    }

    /// Affine formula, also used outside the domain block as an extension.
    pub fn apply(&self, p: Point) -> Point {
        let mut out = [0.0; 3];
        for j in 0..3 {
            out[j] = self.apply_axis(j, p[j]);
        }
        out
    }

    pub fn apply_axis(&self, j: usize, x: f64) -> f64 {
        let (d, i) = (self.domain.axis(j), self.image.axis(j));
        let r = i.length() / d.length();
        if self.signs[j] > 0 {
            i.lo + r * (x - d.lo)
        } else {
            i.hi - r * (x - d.lo)
        }
    }

    pub fn inverse(&self, q: Point) -> Point {
        let mut out = [0.0; 3];
        for j in 0..3 {
            out[j] = self.inverse_axis(j, q[j]);
        }
        out
    }

    pub fn inverse_axis(&self, j: usize, y: f64) -> f64 {
        let (d, i) = (self.domain.axis(j), self.image.axis(j));
        let r = i.length() / d.length();
        if self.signs[j] > 0 {
            d.lo + (y - i.lo) / r
        } else {
            d.lo + (i.hi - y) / r
        }
    }

    /// Fixed point of the one-dimensional map on axis `j`.
    pub fn fixed_axis(&self, j: usize) -> f64 {
        let (d, i) = (self.domain.axis(j), self.image.axis(j));
        let r = i.length() / d.length();
        if self.signs[j] > 0 {
            (i.lo - r * d.lo) / (1.0 - r)
        } else {
            (i.hi + r * d.lo) / (1.0 + r)
        }
    }

    pub fn fixed_point(&self) -> Point {
        [self.fixed_axis(0), self.fixed_axis(1), self.fixed_axis(2)]
    }
}

fn bump(t2: f64) -> f64 {
    if t2 >= 1.0 {
        0.0
    } else {
        let v = 1.0 - t2;
        v * v * v
    }
}

/// Sum of C² bumps `amplitude · w(‖(q − center)/widths‖) · e_axis`.
///
/// The displacement acts on image points: the perturbed map is
/// `q ↦ q + δ(q)` composed after the affine branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub amplitude: f64,
    pub centers: Vec<Point>,
    pub widths: Vec<[f64; 3]>,
    pub axes: Vec<usize>,
    pub seed: u64,
}

impl Perturbation {
    /// Three bumps per image block, one along each axis: centers jittered by
    /// up to 5% of the block extent, half-widths 44% of the extent.
    pub fn generated(sys: &BlockSystem, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut centers = Vec::new();
        let mut widths = Vec::new();
        let mut axes = Vec::new();
        for b in sys.images() {
            for axis in 0..3 {
                let mut c = [0.0; 3];
                let mut w = [0.0; 3];
                for j in 0..3 {
                    let iv = b.axis(j);
                    c[j] = iv.mid() + rng.random_range(-0.05..0.05) * iv.length();
                    w[j] = 0.44 * iv.length();
                }
                centers.push(c);
                widths.push(w);
                axes.push(axis);
            }
        }
        Perturbation { amplitude, centers, widths, axes, seed }
    }

    pub fn zero() -> Self {
        Perturbation { amplitude: 0.0, centers: vec![], widths: vec![], axes: vec![], seed: 0 }
    }

    pub fn check(&self, sys: &BlockSystem) -> Result<()> {
        let bad = |m: &str| Err(LabError::InvalidPerturbation(m.to_string()));
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return bad("amplitude must be finite and non-negative");
        }
        if self.centers.len() != self.widths.len() || self.centers.len() != self.axes.len() {
            return bad("centers, widths and axes must have equal length");
        }
        for k in 0..self.centers.len() {
            if self.axes[k] > 2 {
                return bad("axis selector must be 0, 1 or 2");
            }
            if self.widths[k].iter().any(|w| !(*w > 0.0 && w.is_finite())) {
                return bad("widths must be positive");
            }
            let inside = sys.images().iter().any(|b| {
                (0..3).all(|j| {
                    let iv = b.axis(j);
                    iv.lo < self.centers[k][j] - self.widths[k][j]
                        && self.centers[k][j] + self.widths[k][j] < iv.hi
                })
            });
            if !inside {
                return bad("bump support must lie strictly inside an image block");
            }
        }
        Ok(())
    }

    /// Upper bound on `sup ‖Dδ‖`.
    pub fn c1_norm_bound(&self) -> f64 {
        self.widths
            .iter()
            .map(|w| self.amplitude * BUMP_MAX_D1 / w.iter().cloned().fold(f64::INFINITY, f64::min))
            .sum()
    }

    /// Upper bound on the second derivatives of δ.
    pub fn c2_norm_bound(&self) -> f64 {
        self.widths
            .iter()
            .map(|w| {
                let m = w.iter().cloned().fold(f64::INFINITY, f64::min);
                self.amplitude * BUMP_MAX_D2 / (m * m)
            })
            .sum()
    }

    pub fn displacement(&self, q: Point) -> Point {
        let mut out = [0.0; 3];
        if self.amplitude == 0.0 {
            return out;
        }
        for k in 0..self.centers.len() {
            let t2: f64 = (0..3).map(|j| ((q[j] - self.centers[k][j]) / self.widths[k][j]).powi(2)).sum();
            out[self.axes[k]] += self.amplitude * bump(t2);
        }
        out
    }

    /// Jacobian of the displacement.
    pub fn jacobian(&self, q: Point) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        if self.amplitude == 0.0 {
            return m;
        }
        for k in 0..self.centers.len() {
            let (c, w) = (self.centers[k], self.widths[k]);
            let t2: f64 = (0..3).map(|j| ((q[j] - c[j]) / w[j]).powi(2)).sum();
            if t2 >= 1.0 {
                continue;
            }
            let g = -6.0 * (1.0 - t2).powi(2);
            for j in 0..3 {
                m[(self.axes[k], j)] += self.amplitude * g * (q[j] - c[j]) / (w[j] * w[j]);
            }
        }
        m
    }
}

/// Result of inverting the bump diffeomorphism or another Newton solve.
fn newton3<F>(mut x: Vector3<f64>, f: F) -> Result<Vector3<f64>>
where
    F: Fn(&Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>),
{
    let mut res = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let (r, j) = f(&x);
        res = r.amax();
        let step = j.lu().solve(&r).ok_or(LabError::NewtonDivergence { residual: res })?;
        if res <= NEWTON_TOL {
            // one polishing step: the inverse branch can magnify the residual
            // by the strongest expansion rate
            return Ok(x - step);
        }
        x -= step;
    }
    let (r, _) = f(&x);
    res = res.min(r.amax());
    if r.amax() <= NEWTON_TOL {
        Ok(x)
    } else {
        Err(LabError::NewtonDivergence { residual: res })
    }
}

/// Backward and forward block words of an orbit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Itinerary {
    pub backward: String,
    pub forward: String,
    pub backward_escaped: bool,
    pub forward_escaped: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoupledMap {
    pub system: BlockSystem,
    /// Branches A→A*, B→B*, C→C*, D→D*.
    pub branches: [AffineBranch; 4],
    pub perturbation: Option<Perturbation>,
}

pub fn check_signs(signs: &[[i8; 3]; 4]) -> Result<()> {
    for (k, s) in signs.iter().enumerate() {
        if s.iter().any(|v| *v != 1 && *v != -1) {
            return Err(LabError::InvalidSigns { block: DOMAIN_NAMES[k].to_string() });
        }
    }
    Ok(())
}

pub fn build_map(
    sys: &BlockSystem,
    signs: &[[i8; 3]; 4],
    pert: Option<Perturbation>,
) -> Result<CoupledMap> {
    check_signs(signs)?;
    let (doms, imgs) = (sys.domains(), sys.images());
    let branches = [0, 1, 2, 3].map(|k| AffineBranch { domain: doms[k], image: imgs[k], signs: signs[k] });
    if let Some(p) = &pert {
        p.check(sys)?;
        let bound = p.c1_norm_bound();
        if bound >= 0.5 {
            return Err(LabError::PerturbationTooLarge { bound });
        }
    }
    let perturbation = pert.filter(|p| p.amplitude > 0.0 && !p.centers.is_empty());
    Ok(CoupledMap { system: *sys, branches, perturbation })
}

impl CoupledMap {
    pub fn is_affine(&self) -> bool {
        self.perturbation.is_none()
    }

    /// Index of the first domain block (A, B, C, D order) containing `p`.
    pub fn domain_index(&self, p: Point) -> Option<usize> {
        self.branches.iter().position(|b| b.domain.contains(p))
    }

    /// Index of the first image block (A*, B*, C*, D* order) containing `q`.
    pub fn image_index(&self, q: Point) -> Option<usize> {
        self.branches.iter().position(|b| b.image.contains(q))
    }

    pub fn determinant_signs(&self) -> [i8; 4] {
        self.branches.map(|b| if b.determinant() > 0.0 { 1 } else { -1 })
    }

    fn h(&self, q: Point) -> Point {
        match &self.perturbation {
            None => q,
            Some(p) => {
                let d = p.displacement(q);
                [q[0] + d[0], q[1] + d[1], q[2] + d[2]]
            }
        }
    }

    fn dh(&self, q: Point) -> Matrix3<f64> {
        match &self.perturbation {
            None => Matrix3::identity(),
            Some(p) => Matrix3::identity() + p.jacobian(q),
        }
    }

    fn h_inverse(&self, q: Point) -> Result<Point> {
        if self.perturbation.is_none() {
            return Ok(q);
        }
        let target = Vector3::from(q);
        let y = newton3(target, |y| {
            let p = [y[0], y[1], y[2]];
            (Vector3::from(self.h(p)) - target, self.dh(p))
        })?;
        Ok([y[0], y[1], y[2]])
    }

    /// Branch `k` applied with its affine extension outside the block.
    pub fn branch_apply(&self, k: usize, p: Point) -> Point {
        self.h(self.branches[k].apply(p))
    }

    /// Jacobian of branch `k` (extended) at `p`.
    pub fn branch_jacobian(&self, k: usize, p: Point) -> Matrix3<f64> {
        let l = Matrix3::from_diagonal(&Vector3::from(self.branches[k].diag()));
        self.dh(self.branches[k].apply(p)) * l
    }

    /// Inverse of branch `k` (extended), without a block membership test.
    pub fn branch_inverse(&self, k: usize, q: Point) -> Result<Point> {
        Ok(self.branches[k].inverse(self.h_inverse(q)?))
    }

    pub fn branch_inverse_jacobian(&self, k: usize, q: Point) -> Result<Matrix3<f64>> {
        let linv = Matrix3::from_diagonal(&Vector3::from(self.branches[k].diag().map(|d| 1.0 / d)));
        if self.perturbation.is_none() {
            return Ok(linv);
        }
        let y = self.h_inverse(q)?;
        let dhinv = self.dh(y).try_inverse().ok_or(LabError::NewtonDivergence { residual: f64::NAN })?;
        Ok(linv * dhinv)
    }

    pub fn apply(&self, p: Point) -> Option<Point> {
        self.domain_index(p).map(|k| self.branch_apply(k, p))
    }

    pub fn jacobian(&self, p: Point) -> Option<Matrix3<f64>> {
        self.domain_index(p).map(|k| self.branch_jacobian(k, p))
    }

    /// Inverse on the image blocks; `Ok(None)` outside them.
    pub fn apply_inverse(&self, q: Point) -> Result<Option<Point>> {
        self.inverse_with_branch(q).map(|o| o.map(|(_, p)| p))
    }

    pub fn inverse_with_branch(&self, q: Point) -> Result<Option<(usize, Point)>> {
        let Some(k) = self.image_index(q) else {
            return Ok(None);
        };
        let y = self.h_inverse(q)?;
        Ok(Some((k, self.branches[k].inverse(y))))
    }

    pub fn itinerary(&self, p: Point, n_back: usize, n_fwd: usize) -> Itinerary {
        let mut forward = String::new();
        let mut forward_escaped = false;
        let mut q = p;
        for _ in 0..n_fwd {
            match self.domain_index(q) {
                Some(k) => {
                    forward.push(DOMAIN_NAMES[k]);
                    q = self.branch_apply(k, q);
                }
                None => {
                    forward_escaped = true;
                    break;
                }
            }
        }
        let mut backward = String::new();
        let mut backward_escaped = false;
        let mut q = p;
        for _ in 0..n_back {
            match self.inverse_with_branch(q) {
                Ok(Some((k, prev))) => {
                    backward.push(DOMAIN_NAMES[k]);
                    q = prev;
                }
                _ => {
                    backward_escaped = true;
                    break;
                }
            }
        }
        Itinerary { backward, forward, backward_escaped, forward_escaped }
    }

    /// Fixed saddles `P ∈ A` and `Q ∈ C`.
    pub fn fixed_saddles(&self) -> Result<(Point, Point)> {
        let p = self.branch_fixed_point(0)?;
        let q = self.branch_fixed_point(2)?;
        Ok((p, q))
    }

    pub fn branch_fixed_point(&self, k: usize) -> Result<Point> {
        let b = &self.branches[k];
        let x0 = b.fixed_point();
        let x = if self.perturbation.is_none() {
            x0
        } else {
            let v = newton3(Vector3::from(x0), |x| {
                let p = [x[0], x[1], x[2]];
                let fx = Vector3::from(self.branch_apply(k, p));
                (fx - x, self.branch_jacobian(k, p) - Matrix3::identity())
            })?;
            [v[0], v[1], v[2]]
        };
        let tol = 1e-12;
        let near = |blk: &Block| (0..3).all(|j| blk.axis(j).lo - tol <= x[j] && x[j] <= blk.axis(j).hi + tol);
        if !(near(&b.domain) && near(&b.image)) || x.iter().any(|v| !v.is_finite()) {
            return Err(LabError::NoFixedPoint { branch: DOMAIN_NAMES[k] });
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    fn ref0_map() -> CoupledMap {
        build_map(&fixtures::ref0(), &fixtures::ALL_PLUS, None).unwrap()
    }

    #[test]
    fn bump_derivative_constant() {
        let t = 1.0 / 5f64.sqrt();
        let d = 6.0 * t * (1.0 - t * t).powi(2);
        assert_abs_diff_eq!(BUMP_MAX_D1, d, epsilon = 1e-12);
    }

    #[test]
    fn determinant_signs_follow_flips() {
        let m = build_map(&fixtures::figure4(), &fixtures::FLIP_A_S, None).unwrap();
        assert_eq!(m.determinant_signs(), [-1, 1, 1, 1]);
        let m = build_map(&fixtures::figure4(), &fixtures::ALL_PLUS, None).unwrap();
        assert_eq!(m.determinant_signs(), [1, 1, 1, 1]);
    }

    #[test]
    fn rejects_bad_signs() {
        let mut s = fixtures::ALL_PLUS;
        s[1][2] = 0;
        assert!(matches!(
            build_map(&fixtures::ref0(), &s, None),
            Err(LabError::InvalidSigns { .. })
        ));
    }

    #[test]
    fn corner_maps_to_corner() {
        let m = ref0_map();
        let a = m.system.a;
        assert_eq!(m.apply(a.lo()).unwrap(), m.system.a_star.lo());
        assert_eq!(m.apply(a.hi()).unwrap(), m.system.a_star.hi());
    }

    #[test]
    fn saddles_ref0() {
        let (p, q) = ref0_map().fixed_saddles().unwrap();
        assert_abs_diff_eq!(p[0], 11.0 / 64.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p[2], 0.1 / 0.85, epsilon = 1e-14);
        assert_abs_diff_eq!(q[0], 0.8375, epsilon = 1e-14);
        assert_abs_diff_eq!(q[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q[2], 0.875, epsilon = 1e-14);
        let m = ref0_map();
        let fp = m.apply(p).unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(fp[j], p[j], epsilon = 1e-14);
        }
    }

    #[test]
    fn flipped_s_fixed_point() {
        let mut s = fixtures::ALL_PLUS;
        s[0] = [1, -1, -1];
        let m = build_map(&fixtures::ref0(), &s, None).unwrap();
        assert_abs_diff_eq!(m.branches[0].fixed_axis(2), 0.25 / 1.15, epsilon = 1e-14);
    }

    #[test]
    fn gap_point_escapes() {
        let m = ref0_map();
        let p = [0.42, 0.5, 0.5];
        assert!(m.apply(p).is_none());
        let it = m.itinerary(p, 3, 3);
        assert!(it.forward.is_empty() && it.forward_escaped);
    }

    #[test]
    fn saddle_itineraries() {
        let m = ref0_map();
        let (p, q) = m.fixed_saddles().unwrap();
        let it = m.itinerary(p, 6, 6);
        assert_eq!(it.forward, "AAAAAA");
        assert_eq!(it.backward, "AAAAAA");
        let it = m.itinerary(q, 6, 6);
        assert_eq!(it.forward, "CCCCCC");
        assert_eq!(it.backward, "CCCCCC");
    }

    #[test]
    fn perturbed_roundtrip_and_saddles() {
        let sys = fixtures::ref0();
        let pert = Perturbation::generated(&sys, 1e-3, 7);
        let m = build_map(&sys, &fixtures::ALL_PLUS, Some(pert)).unwrap();
        let p = [0.3, 0.5, 0.5];
        let q = m.apply(p).unwrap();
        let back = m.apply_inverse(q).unwrap().unwrap();
        for j in 0..3 {
            assert!((back[j] - p[j]).abs() < 1e-10);
        }
        let tiny = build_map(&sys, &fixtures::ALL_PLUS, Some(Perturbation::generated(&sys, 1e-6, 7))).unwrap();
        let (p0, q0) = ref0_map().fixed_saddles().unwrap();
        let (p1, q1) = tiny.fixed_saddles().unwrap();
        for j in 0..3 {
            assert!((p0[j] - p1[j]).abs() < 1e-5);
            assert!((q0[j] - q1[j]).abs() < 1e-5);
        }
    }

    #[test]
    fn perturbation_too_large() {
        let sys = fixtures::ref0();
        let pert = Perturbation::generated(&sys, 0.5, 1);
        assert!(matches!(
            build_map(&sys, &fixtures::ALL_PLUS, Some(pert)),
            Err(LabError::PerturbationTooLarge { .. })
        ));
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let sys = fixtures::ref0();
        let pert = Perturbation::generated(&sys, 1e-2, 3);
        let c = pert.centers[0];
        let q = [c[0] + 0.01, c[1] + 0.02, c[2] + 0.003];
        let j = pert.jacobian(q);
        let h = 1e-7;
        for col in 0..3 {
            let mut qp = q;
            let mut qm = q;
            qp[col] += h;
            qm[col] -= h;
            let (dp, dm) = (pert.displacement(qp), pert.displacement(qm));
            for row in 0..3 {
                let fd = (dp[row] - dm[row]) / (2.0 * h);
                assert!((fd - j[(row, col)]).abs() < 1e-6, "{row},{col}");
            }
        }
    }
}
