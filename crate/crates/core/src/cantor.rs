//! One-dimensional Cantor sets: two-branch IFS, refinement, thickness,
//! interleaving, the gap lemma and intersections.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{BlockSystem, Interval};

pub const DEPTH_CAP: usize = 24;
pub const MERGE_TOL: f64 = 1e-14;
/// Relative slack when comparing gap lengths and thickness products.
pub const CMP_TOL: f64 = 1e-9;

/// `x ↦ scale·x + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine1 {
    pub scale: f64,
    pub offset: f64,
}

impl Affine1 {
    /// Signed affine bijection of `dom` onto `img`.
    pub fn onto(dom: Interval, img: Interval, sign: i8) -> Self {
        let r = img.length() / dom.length();
        if sign > 0 {
            Affine1 { scale: r, offset: img.lo - r * dom.lo }
        } else {
            Affine1 { scale: -r, offset: img.hi + r * dom.lo }
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }

    pub fn apply_pair(&self, (lo, hi): (f64, f64)) -> (f64, f64) {
        let (a, b) = (self.apply(lo), self.apply(hi));
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn fixed_point(&self) -> f64 {
        self.offset / (1.0 - self.scale)
    }
}

/// Two contracting branches on a common domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfsPair {
    pub g0: Affine1,
    pub g1: Affine1,
    pub domain: Interval,
}

impl IfsPair {
    pub fn new(g0: Affine1, g1: Affine1, domain: Interval) -> Self {
        IfsPair { g0, g1, domain }
    }

    /// Branches `[lo, lo+λ(hi−lo)]` and `[hi−λ(hi−lo), hi]` on `domain`.
    pub fn symmetric(lambda: f64, domain: Interval) -> Self {
        let l = lambda * domain.length();
        let left = Interval { lo: domain.lo, hi: domain.lo + l };
        let right = Interval { lo: domain.hi - l, hi: domain.hi };
        IfsPair::new(Affine1::onto(domain, left, 1), Affine1::onto(domain, right, 1), domain)
    }

    pub fn middle_third() -> Self {
        IfsPair::symmetric(1.0 / 3.0, Interval { lo: 0.0, hi: 1.0 })
    }

    /// Images of the domain, ordered left to right.
    pub fn images(&self) -> [(f64, f64); 2] {
        let d = (self.domain.lo, self.domain.hi);
        let (a, b) = (self.g0.apply_pair(d), self.g1.apply_pair(d));
        if a.0 <= b.0 {
            [a, b]
        } else {
            [b, a]
        }
    }

    /// `(|domain| − |hull of images|) / gap`, the trimming ratio of the layout.
    pub fn trim_ratio(&self) -> f64 {
        let [l, r] = self.images();
        let gap = r.0 - l.1;
        (self.domain.length() - (r.1 - l.0)) / gap
    }

    pub fn scales(&self) -> [f64; 2] {
        [self.g0.scale.abs(), self.g1.scale.abs()]
    }
}

fn c_gap_check(outer: f64, inner: f64, which: &'static str) -> Result<()> {
    let den = outer - 2.0 * inner;
    if den <= 0.0 {
        return Err(LabError::DegenerateGap { which, denominator: den });
    }
    Ok(())
}

/// c-branches of `f` on A and D: `A_c → A*_c` and `A_c → D*_c`.
pub fn ifs_from_gamma(sys: &BlockSystem, signs: &[[i8; 3]; 4]) -> Result<IfsPair> {
    c_gap_check(sys.e_star().c.length(), sys.a_star.c.length(), "E*")?;
    let dom = sys.a.c;
    Ok(IfsPair::new(
        Affine1::onto(dom, sys.a_star.c, signs[0][1]),
        Affine1::onto(sys.d.c, sys.d_star.c, signs[3][1]),
        dom,
    ))
}

/// Inverse c-branches of `f` on B and C: `B*_c → B_c` and `C*_c → C_c`.
pub fn ifs_from_sigma(sys: &BlockSystem, signs: &[[i8; 3]; 4]) -> Result<IfsPair> {
    c_gap_check(sys.f_block().c.length(), sys.b.c.length(), "F")?;
    let dom = sys.b_star.c;
    Ok(IfsPair::new(
        Affine1::onto(dom, sys.b.c, signs[1][1]),
        Affine1::onto(sys.c_star.c, sys.c.c, signs[2][1]),
        dom,
    ))
}

/// Smallest interval `H` with `hull(g0(H) ∪ g1(H)) = H`.
pub fn attractor_hull(ifs: &IfsPair) -> Interval {
    let mut h = (ifs.domain.lo, ifs.domain.hi);
    for _ in 0..100_000 {
        let (a, b) = (ifs.g0.apply_pair(h), ifs.g1.apply_pair(h));
        let next = (a.0.min(b.0), a.1.max(b.1));
        let done = (next.0 - h.0).abs() <= MERGE_TOL && (next.1 - h.1).abs() <= MERGE_TOL;
        h = next;
        if done {
            break;
        }
    }
    Interval { lo: h.0, hi: h.1 }
}

/// Sorted disjoint closed intervals approximating a Cantor set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorApprox {
    pub intervals: Vec<(f64, f64)>,
    pub depth: usize,
    pub provenance: String,
}

impl CantorApprox {
    /// Sorts and merges intervals closer than [`MERGE_TOL`].
    pub fn from_intervals(mut v: Vec<(f64, f64)>, depth: usize, provenance: impl Into<String>) -> Self {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (lo, hi) in v {
            match out.last_mut() {
                Some(last) if lo <= last.1 + MERGE_TOL => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        CantorApprox { intervals: out, depth, provenance: provenance.into() }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.intervals.windows(2).map(|w| (w[0].1, w[1].0)).collect()
    }

    pub fn map_affine(&self, alpha: f64, beta: f64) -> CantorApprox {
        let v = self
            .intervals
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (alpha * a + beta, alpha * b + beta);
                (x.min(y), x.max(y))
            })
            .collect();
        CantorApprox::from_intervals(v, self.depth, format!("affine image of {}", self.provenance))
    }

    /// Distance from `x` to the union.
    pub fn distance_to(&self, x: f64) -> f64 {
        let iv = &self.intervals;
        if iv.is_empty() {
            return f64::INFINITY;
        }
        let k = iv.partition_point(|&(lo, _)| lo <= x);
        let mut d = f64::INFINITY;
        if k > 0 {
            let (lo, hi) = iv[k - 1];
            d = d.min(if x <= hi { 0.0f64.max(lo - x) } else { x - hi });
        }
        if k < iv.len() {
            d = d.min(iv[k].0 - x);
        }
        d
    }

    pub fn contains(&self, x: f64) -> bool {
        self.distance_to(x) == 0.0
    }
}

/// `g0(S) ∪ g1(S)` iterated `depth` times from the attractor hull.
pub fn refine(ifs: &IfsPair, depth: usize) -> Result<CantorApprox> {
    if depth > DEPTH_CAP {
        return Err(LabError::DepthCap { depth, cap: DEPTH_CAP });
    }
    let h = attractor_hull(ifs);
    let mut cur = vec![(h.lo, h.hi)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(2 * cur.len());
        next.extend(cur.iter().map(|&p| ifs.g0.apply_pair(p)));
        next.extend(cur.iter().map(|&p| ifs.g1.apply_pair(p)));
        next.sort_by(|a, b| a.0.total_cmp(&b.0));
        cur = next;
    }
    Ok(CantorApprox::from_intervals(cur, depth, format!("ifs refinement depth {depth}")))
}

/// Words of length `depth` applied to the whole domain, the way nested
/// images `fⁿ(R₁)` project. Unlike [`refine`], margins between the domain
/// and the attractor hull are carried into the gaps.
pub fn refine_domain(ifs: &IfsPair, depth: usize) -> Result<CantorApprox> {
    if depth > DEPTH_CAP {
        return Err(LabError::DepthCap { depth, cap: DEPTH_CAP });
    }
    let mut cur = vec![(ifs.domain.lo, ifs.domain.hi)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(2 * cur.len());
        next.extend(cur.iter().map(|&p| ifs.g0.apply_pair(p)));
        next.extend(cur.iter().map(|&p| ifs.g1.apply_pair(p)));
        cur = next;
    }
    Ok(CantorApprox::from_intervals(cur, depth, format!("domain refinement depth {depth}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessReport {
    pub tau: f64,
    pub min_gap: (f64, f64),
    pub min_bridge: (f64, f64),
    /// `(depth, τ_depth)` when computed from an IFS.
    pub per_depth: Vec<(usize, f64)>,
    pub stabilized: bool,
}

/// Finite-depth thickness: bridges stop at the first gap at least as long
/// as the current one, or at the hull.
pub fn thickness(s: &CantorApprox) -> Result<ThicknessReport> {
    let iv = &s.intervals;
    let m = iv.len();
    if m < 2 {
        return Err(LabError::InsufficientGaps { count: m });
    }
    let g: Vec<f64> = iv.windows(2).map(|w| w[1].0 - w[0].1).collect();
    let n = g.len();
    // previous / next gap index with length ≥ g[i](1 − tol)
    let mut prev = vec![usize::MAX; n];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..n {
        while let Some(&t) = stack.last() {
            if g[t] < g[i] * (1.0 - CMP_TOL) {
                stack.pop();
            } else {
                break;
            }
        }
        prev[i] = stack.last().copied().unwrap_or(usize::MAX);
        stack.push(i);
    }
    let mut next = vec![usize::MAX; n];
    stack.clear();
    for i in (0..n).rev() {
        while let Some(&t) = stack.last() {
            if g[t] < g[i] * (1.0 - CMP_TOL) {
                stack.pop();
            } else {
                break;
            }
        }
        next[i] = stack.last().copied().unwrap_or(usize::MAX);
        stack.push(i);
    }
    let (hlo, hhi) = (iv[0].0, iv[m - 1].1);
    let mut best = (f64::INFINITY, (0.0, 0.0), (0.0, 0.0));
    for i in 0..n {
        let gap = (iv[i].1, iv[i + 1].0);
        let left_lo = if prev[i] == usize::MAX { hlo } else { iv[prev[i] + 1].0 };
        let right_hi = if next[i] == usize::MAX { hhi } else { iv[next[i]].1 };
        for bridge in [(left_lo, gap.0), (gap.1, right_hi)] {
            let ratio = (bridge.1 - bridge.0) / g[i];
            if ratio < best.0 {
                best = (ratio, gap, bridge);
            }
        }
    }
    Ok(ThicknessReport { tau: best.0, min_gap: best.1, min_bridge: best.2, per_depth: vec![], stabilized: false })
}

/// Thickness of `refine(ifs, d)` for `d = 1..=depth`; stabilized when the
/// last three values agree to [`CMP_TOL`] relative.
pub fn thickness_ifs(ifs: &IfsPair, depth: usize) -> Result<ThicknessReport> {
    let mut seq = Vec::new();
    let mut last = None;
    for d in 1..=depth.max(1) {
        let r = thickness(&refine(ifs, d)?)?;
        seq.push((d, r.tau));
        last = Some(r);
    }
    let mut rep = last.expect("at least one depth");
    let k = seq.len();
    rep.stabilized = k >= 3
        && seq[k - 3..].iter().all(|&(_, t)| (t - rep.tau).abs() <= CMP_TOL * rep.tau.abs().max(1.0));
    rep.per_depth = seq;
    Ok(rep)
}

/// Closed form `λ/(1 − 2λ)` for equal-scale pairs with monotone gaps.
pub fn selfsimilar_thickness(ifs: &IfsPair) -> Result<f64> {
    let [s0, s1] = ifs.scales();
    if (s0 - s1).abs() > 1e-12 {
        return Err(LabError::PreconditionViolated(format!("unequal scales {s0} and {s1}")));
    }
    let lam = s0;
    if !(lam > 0.0 && lam < 0.5) {
        return Err(LabError::PreconditionViolated(format!("scale {lam} not in (0, 1/2)")));
    }
    let b = ifs.trim_ratio();
    if lam * (1.0 + b) >= 1.0 {
        return Err(LabError::PreconditionViolated(format!("lambda(1+b) = {} is not below 1", lam * (1.0 + b))));
    }
    Ok(lam / (1.0 - 2.0 * lam))
}

/// `inner`'s hull lies in the closure of a gap (bounded or not) of `outer`.
fn inside_gap_closure(outer: &CantorApprox, inner: &CantorApprox) -> bool {
    let (Some((olo, ohi)), Some((ilo, ihi))) = (outer.hull(), inner.hull()) else {
        return true;
    };
    if ihi <= olo || ilo >= ohi {
        return true;
    }
    let iv = &outer.intervals;
    let k = iv.partition_point(|&(_, hi)| hi <= ilo);
    // iv[k-1].hi <= ilo; the next interval must start at or after ihi
    k > 0 && k < iv.len() && iv[k].0 >= ihi
}

/// Neither set lies in the closure of a gap of the other.
pub fn interleaved(s1: &CantorApprox, s2: &CantorApprox) -> bool {
    !inside_gap_closure(s1, s2) && !inside_gap_closure(s2, s1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapVerdict {
    Applies,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapLemmaReport {
    pub tau1: f64,
    pub tau2: f64,
    pub product: f64,
    pub interleaved: bool,
    pub verdict: GapVerdict,
}

pub fn gap_lemma(s1: &CantorApprox, s2: &CantorApprox) -> Result<GapLemmaReport> {
    let tau1 = thickness(s1)?.tau;
    let tau2 = thickness(s2)?.tau;
    let product = tau1 * tau2;
    let inter = interleaved(s1, s2);
    let verdict = if inter && product > 1.0 + CMP_TOL { GapVerdict::Applies } else { GapVerdict::Inconclusive };
    Ok(GapLemmaReport { tau1, tau2, product, interleaved: inter, verdict })
}

/// Pairwise intersections by a sorted sweep; single points are kept.
pub fn intersect(s1: &CantorApprox, s2: &CantorApprox) -> CantorApprox {
    let (a, b) = (&s1.intervals, &s2.intervals);
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    CantorApprox::from_intervals(out, s1.depth.min(s2.depth), "intersection")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HkyReport {
    pub tau1: f64,
    pub tau2: f64,
    pub tau_intersection: f64,
    pub eps: f64,
    pub threshold: f64,
    pub pass: bool,
    pub caveat: String,
}

pub fn hky_check(s1: &CantorApprox, s2: &CantorApprox, eps: f64) -> Result<HkyReport> {
    let tau1 = thickness(s1)?.tau;
    let tau2 = thickness(s2)?.tau;
    let tau_intersection = thickness(&intersect(s1, s2))?.tau;
    let threshold = (1.0 - eps) * tau1.min(tau2).sqrt();
    Ok(HkyReport {
        tau1,
        tau2,
        tau_intersection,
        eps,
        threshold,
        pass: tau_intersection >= threshold,
        caveat: "diagnostic only: the thickness threshold below which the bound is guaranteed is not quantified"
            .into(),
    })
}

/// `ln 2 / ln(2 + 1/τ)`.
pub fn newhouse_dim_lower(tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(LabError::NonPositiveTau(tau));
    }
    Ok(std::f64::consts::LN_2 / (2.0 + 1.0 / tau).ln())
}

/// Hausdorff distance between two finite unions of closed intervals.
pub fn hausdorff_distance(s1: &CantorApprox, s2: &CantorApprox) -> f64 {
    fn one_sided(a: &CantorApprox, b: &CantorApprox) -> f64 {
        let mut d: f64 = 0.0;
        for &(lo, hi) in &a.intervals {
            d = d.max(b.distance_to(lo)).max(b.distance_to(hi));
        }
        for (glo, ghi) in b.gaps() {
            let mid = 0.5 * (glo + ghi);
            let k = a.intervals.partition_point(|&(lo, _)| lo <= mid);
            if k > 0 && a.intervals[k - 1].1 >= mid {
                d = d.max(b.distance_to(mid));
            }
        }
        d
    }
    if s1.is_empty() || s2.is_empty() {
        return if s1.is_empty() && s2.is_empty() { 0.0 } else { f64::INFINITY };
    }
    one_sided(s1, s2).max(one_sided(s2, s1))
}
