//! Blocks, penetration, validation and the scalar constants of a block system.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Absolute tolerance for the equality tests in the translate relations.
pub const EQ_TOL: f64 = 1e-12;

/// A closed bounded interval with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(LabError::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `self ⊆ other` as closed sets.
    pub fn within(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `self` lies in the open interior of `other`.
    pub fn strictly_within(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Interiors overlap (closed intervals may still touch).
    pub fn overlaps_open(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn map_affine(&self, alpha: f64, beta: f64) -> Interval {
        let (a, b) = (alpha * self.lo + beta, alpha * self.hi + beta);
        Interval { lo: a.min(b), hi: a.max(b) }
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = LabError;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Axis-aligned cuboid `u × c × s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 3]", into = "[[f64; 2]; 3]")]
pub struct Block {
    pub u: Interval,
    pub c: Interval,
    pub s: Interval,
}

impl Block {
    pub fn new(u: Interval, c: Interval, s: Interval) -> Self {
        Block { u, c, s }
    }

    pub fn from_bounds(b: [[f64; 2]; 3]) -> Result<Self> {
        Ok(Block {
            u: Interval::new(b[0][0], b[0][1])?,
            c: Interval::new(b[1][0], b[1][1])?,
            s: Interval::new(b[2][0], b[2][1])?,
        })
    }

    pub fn axes(&self) -> [Interval; 3] {
        [self.u, self.c, self.s]
    }

    pub fn axis(&self, i: usize) -> Interval {
        self.axes()[i]
    }

    pub fn volume(&self) -> f64 {
        self.u.length() * self.c.length() * self.s.length()
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        self.axes().iter().zip(p).all(|(i, x)| i.contains(x))
    }

    pub fn within(&self, other: &Block) -> bool {
        self.axes().iter().zip(other.axes()).all(|(a, b)| a.within(&b))
    }

    pub fn intersects(&self, other: &Block) -> bool {
        self.axes().iter().zip(other.axes()).all(|(a, b)| a.intersects(&b))
    }

    pub fn interiors_overlap(&self, other: &Block) -> bool {
        self.axes().iter().zip(other.axes()).all(|(a, b)| a.overlaps_open(&b))
    }

    pub fn hull(&self, other: &Block) -> Block {
        Block { u: self.u.hull(&other.u), c: self.c.hull(&other.c), s: self.s.hull(&other.s) }
    }

    pub fn center(&self) -> [f64; 3] {
        [self.u.mid(), self.c.mid(), self.s.mid()]
    }

    pub fn lo(&self) -> [f64; 3] {
        [self.u.lo, self.c.lo, self.s.lo]
    }

    pub fn hi(&self) -> [f64; 3] {
        [self.u.hi, self.c.hi, self.s.hi]
    }

    pub fn corners(&self) -> [[f64; 3]; 8] {
        let mut out = [[0.0; 3]; 8];
        for (k, o) in out.iter_mut().enumerate() {
            for j in 0..3 {
                let iv = self.axis(j);
                o[j] = if k >> j & 1 == 0 { iv.lo } else { iv.hi };
            }
        }
        out
    }
}

impl TryFrom<[[f64; 2]; 3]> for Block {
    type Error = LabError;
    fn try_from(b: [[f64; 2]; 3]) -> Result<Self> {
        Block::from_bounds(b)
    }
}

impl From<Block> for [[f64; 2]; 3] {
    fn from(b: Block) -> Self {
        [b.u.into(), b.c.into(), b.s.into()]
    }
}

/// `X` penetrates `Y`: on exactly one axis `X` strictly spans `Y`, on the
/// other two `X` lies strictly inside `Y`.
pub fn penetrates(x: &Block, y: &Block) -> bool {
    spanning_axis(x, y, true).is_some()
}

fn spanning_axis(x: &Block, y: &Block, strict_inside: bool) -> Option<usize> {
    let (xa, ya) = (x.axes(), y.axes());
    let mut span = None;
    for j in 0..3 {
        if xa[j].lo < ya[j].lo && xa[j].hi > ya[j].hi {
            if span.is_some() {
                return None;
            }
            span = Some(j);
        }
    }
    let j0 = span?;
    let inside_ok = (0..3).filter(|&j| j != j0).all(|j| {
        if strict_inside {
            xa[j].strictly_within(&ya[j])
        } else {
            xa[j].within(&ya[j])
        }
    });
    inside_ok.then_some(j0)
}

/// Outcome of a single validation clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClauseStatus {
    Pass,
    /// Holds only after admitting boundary contact between closed blocks.
    Contact,
    Fail,
}

impl ClauseStatus {
    fn and(self, other: ClauseStatus) -> ClauseStatus {
        use ClauseStatus::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Contact, _) | (_, Contact) => Contact,
            _ => Pass,
        }
    }
}

/// Penetration with contact classification.
///
/// `Pass`: one axis spans strictly, the other two are contained in the closed
/// sense (flush faces allowed). `Contact`: only closed containment holds on
/// the spanning axis as well. `Fail` otherwise.
pub fn penetration_status(x: &Block, y: &Block) -> ClauseStatus {
    if spanning_axis(x, y, false).is_some() {
        return ClauseStatus::Pass;
    }
    let (xa, ya) = (x.axes(), y.axes());
    for j0 in 0..3 {
        let spans = xa[j0].lo <= ya[j0].lo && xa[j0].hi >= ya[j0].hi;
        let rest = (0..3).filter(|&j| j != j0).all(|j| xa[j].within(&ya[j]));
        let proper = (0..3).filter(|&j| j != j0).any(|j| xa[j] != ya[j]);
        if spans && rest && proper {
            return ClauseStatus::Contact;
        }
    }
    ClauseStatus::Fail
}

fn disjoint_status(x: &Block, y: &Block) -> ClauseStatus {
    if !x.intersects(y) {
        ClauseStatus::Pass
    } else if !x.interiors_overlap(y) {
        ClauseStatus::Contact
    } else {
        ClauseStatus::Fail
    }
}

/// `to` is `from` translated in the positive direction along `axis`.
fn translate_status(from: &Block, to: &Block, axis: usize) -> ClauseStatus {
    let (fa, ta) = (from.axes(), to.axes());
    for j in 0..3 {
        if j == axis {
            if (fa[j].length() - ta[j].length()).abs() > EQ_TOL || ta[j].lo <= fa[j].lo {
                return ClauseStatus::Fail;
            }
        } else if (fa[j].lo - ta[j].lo).abs() > EQ_TOL || (fa[j].hi - ta[j].hi).abs() > EQ_TOL {
            return ClauseStatus::Fail;
        }
    }
    ClauseStatus::Pass
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub status: ClauseStatus,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub clauses: Vec<Clause>,
    /// Every clause passes without boundary contact.
    pub valid: bool,
    /// No clause fails outright; contact-only clauses are tolerated.
    pub valid_up_to_contact: bool,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn status(&self, name: &str) -> Option<ClauseStatus> {
        self.clauses.iter().find(|c| c.name == name).map(|c| c.status)
    }
}

/// The eight blocks of a coupled horseshoe configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSystem {
    #[serde(rename = "A")]
    pub a: Block,
    #[serde(rename = "B")]
    pub b: Block,
    #[serde(rename = "C")]
    pub c: Block,
    #[serde(rename = "D")]
    pub d: Block,
    #[serde(rename = "Astar")]
    pub a_star: Block,
    #[serde(rename = "Bstar")]
    pub b_star: Block,
    #[serde(rename = "Cstar")]
    pub c_star: Block,
    #[serde(rename = "Dstar")]
    pub d_star: Block,
}

pub const DOMAIN_NAMES: [char; 4] = ['A', 'B', 'C', 'D'];

impl BlockSystem {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    /// Minimal block containing `A*` and `D*`.
    pub fn e_star(&self) -> Block {
        self.a_star.hull(&self.d_star)
    }

    /// Minimal block containing `B` and `C`.
    pub fn f_block(&self) -> Block {
        self.b.hull(&self.c)
    }

    /// Domain blocks in the order A, B, C, D.
    pub fn domains(&self) -> [Block; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Image blocks in the order A*, B*, C*, D*.
    pub fn images(&self) -> [Block; 4] {
        [self.a_star, self.b_star, self.c_star, self.d_star]
    }

    /// Maps every interval on axis `axis` through `x ↦ alpha x + beta`.
    pub fn map_axis(&self, axis: usize, alpha: f64, beta: f64) -> BlockSystem {
        let f = |b: Block| {
            let mut ax = b.axes();
            ax[axis] = ax[axis].map_affine(alpha, beta);
            Block::new(ax[0], ax[1], ax[2])
        };
        BlockSystem {
            a: f(self.a),
            b: f(self.b),
            c: f(self.c),
            d: f(self.d),
            a_star: f(self.a_star),
            b_star: f(self.b_star),
            c_star: f(self.c_star),
            d_star: f(self.d_star),
        }
    }
}

pub fn validate_system(sys: &BlockSystem) -> ValidationReport {
    let mut clauses = Vec::new();
    let mut push = |name: &str, status: ClauseStatus, detail: String| {
        clauses.push(Clause { name: name.to_string(), status, detail });
    };

    let names = ["A", "B", "C", "D"];
    let mut st = ClauseStatus::Pass;
    let mut bad = Vec::new();
    for (group, blocks) in [("", sys.domains()), ("*", sys.images())] {
        for i in 0..4 {
            for j in i + 1..4 {
                let s = disjoint_status(&blocks[i], &blocks[j]);
                if s != ClauseStatus::Pass {
                    bad.push(format!("{}{}/{}{}: {:?}", names[i], group, names[j], group, s));
                }
                st = st.and(s);
            }
        }
    }
    push("disjointness", st, bad.join("; "));

    let translates = [
        ("translate_D_of_A_along_u", sys.a, sys.d, 0),
        ("translate_C_of_B_along_c", sys.b, sys.c, 1),
        ("translate_Dstar_of_Astar_along_c", sys.a_star, sys.d_star, 1),
        ("translate_Cstar_of_Bstar_along_s", sys.b_star, sys.c_star, 2),
    ];
    for (name, from, to, axis) in translates {
        push(name, translate_status(&from, &to, axis), String::new());
    }

    let pen = |x: &Block, y: &Block| penetration_status(x, y);
    let a = pen(&sys.a_star, &sys.a)
        .and(pen(&sys.a_star, &sys.d))
        .and(pen(&sys.d_star, &sys.a))
        .and(pen(&sys.d_star, &sys.d));
    push("a", a, "A* and D* penetrate A and D".into());

    let a_star = pen(&sys.b, &sys.b_star)
        .and(pen(&sys.b, &sys.c_star))
        .and(pen(&sys.c, &sys.b_star))
        .and(pen(&sys.c, &sys.c_star));
    push("a*", a_star, "B and C penetrate B* and C*".into());

    let cross = pen(&sys.a_star, &sys.c).and(pen(&sys.d_star, &sys.b));
    let straight = pen(&sys.a_star, &sys.b).and(pen(&sys.d_star, &sys.c));
    let (b, detail) = if rank(cross) <= rank(straight) {
        (cross, "A* penetrates C, D* penetrates B")
    } else {
        (straight, "A* penetrates B, D* penetrates C")
    };
    push("b", b, detail.into());

    let c = pen(&sys.a, &sys.b_star)
        .and(pen(&sys.a, &sys.c_star))
        .and(pen(&sys.d, &sys.b_star))
        .and(pen(&sys.d, &sys.c_star));
    push("c", c, "A and D penetrate B* and C*".into());

    let unit = Block::from_bounds([[0.0, 1.0]; 3]).expect("unit cube");
    let inside = sys.domains().iter().chain(sys.images().iter()).all(|b| b.within(&unit));
    push(
        "unit_cube_containment",
        if inside { ClauseStatus::Pass } else { ClauseStatus::Fail },
        String::new(),
    );

    let mut warnings = Vec::new();
    if let Ok(k) = shape_constants(sys) {
        if k.b1 < 0.0 {
            warnings.push(format!("b1 = {} is negative", k.b1));
        }
        if k.b2 < 0.0 {
            warnings.push(format!("b2 = {} is negative", k.b2));
        }
    }
    let valid = clauses.iter().all(|c| c.status == ClauseStatus::Pass);
    let valid_up_to_contact = clauses.iter().all(|c| c.status != ClauseStatus::Fail);
    ValidationReport { clauses, valid, valid_up_to_contact, warnings }
}

fn rank(s: ClauseStatus) -> u8 {
    match s {
        ClauseStatus::Pass => 0,
        ClauseStatus::Contact => 1,
        ClauseStatus::Fail => 2,
    }
}

/// Per-axis rates of the map on A/D (`lam_*`) and on B/C (`mu_*`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub lam_u: f64,
    pub lam_c: f64,
    pub lam_s: f64,
    pub mu_u: f64,
    pub mu_c: f64,
    pub mu_s: f64,
}

impl RateSet {
    pub fn lam(&self) -> [f64; 3] {
        [self.lam_u, self.lam_c, self.lam_s]
    }

    pub fn mu(&self) -> [f64; 3] {
        [self.mu_u, self.mu_c, self.mu_s]
    }

    /// `λu > 1 > 1/2 > λc > λs > 0` and `μu > μc > 2 > 1 > μs > 0`.
    pub fn is_horseshoe_shaped(&self) -> bool {
        self.lam_u > 1.0
            && 0.5 > self.lam_c
            && self.lam_c > self.lam_s
            && self.lam_s > 0.0
            && self.mu_u > self.mu_c
            && self.mu_c > 2.0
            && 1.0 > self.mu_s
            && self.mu_s > 0.0
    }
}

pub fn rates(sys: &BlockSystem) -> RateSet {
    let r = |img: Interval, dom: Interval| img.length() / dom.length();
    RateSet {
        lam_u: r(sys.a_star.u, sys.a.u),
        lam_c: r(sys.a_star.c, sys.a.c),
        lam_s: r(sys.a_star.s, sys.a.s),
        mu_u: r(sys.b_star.u, sys.b.u),
        mu_c: r(sys.b_star.c, sys.b.c),
        mu_s: r(sys.b_star.s, sys.b.s),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeConstants {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1_eff: f64,
    pub a2_eff: f64,
}

pub fn shape_constants(sys: &BlockSystem) -> Result<ShapeConstants> {
    let ac = sys.a.c.length();
    let asc = sys.a_star.c.length();
    let ec = sys.e_star().c.length();
    let bc = sys.b.c.length();
    let bsc = sys.b_star.c.length();
    let fc = sys.f_block().c.length();

    let den1 = ec - 2.0 * asc;
    if den1 <= 0.0 {
        return Err(LabError::DegenerateGap { which: "E*", denominator: den1 });
    }
    let den2 = fc - 2.0 * bc;
    if den2 <= 0.0 {
        return Err(LabError::DegenerateGap { which: "F", denominator: den2 });
    }
    let a1 = (3.0 * asc - ac) / den1;
    let a2 = (3.0 * bc - bsc) / den2;
    let b1 = (ac - ec) / den1;
    let b2 = (bsc - fc) / den2;
    Ok(ShapeConstants { a1, a2, b1, b2, a1_eff: a1 / (1.0 + b1), a2_eff: a2 / (1.0 + b2) })
}

/// `λc² > λs` and `μu > μc²`, both strict.
pub fn dimension_reducible(r: &RateSet) -> bool {
    r.lam_c * r.lam_c > r.lam_s && r.mu_u > r.mu_c * r.mu_c
}

/// Quadratic `c0 + c1 ε + c2 ε²` in the perturbation size.
#[derive(Debug, Clone, Copy)]
struct Poly2 {
    c0: f64,
    c1: f64,
    c2: f64,
}

impl Poly2 {
    fn new(c0: f64, c1: f64, c2: f64) -> Self {
        Poly2 { c0, c1, c2 }
    }

    /// Smallest positive root, or infinity if the polynomial stays positive.
    fn first_positive_root(&self) -> f64 {
        let Poly2 { c0, c1, c2 } = *self;
        let mut roots = Vec::with_capacity(2);
        if c2.abs() < 1e-300 {
            if c1 != 0.0 {
                roots.push(-c0 / c1);
            }
        } else {
            let disc = c1 * c1 - 4.0 * c2 * c0;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                // numerically stable pair
                let q = -0.5 * (c1 + c1.signum() * sq);
                if q != 0.0 {
                    roots.push(q / c2);
                    roots.push(c0 / q);
                } else {
                    roots.push(0.0);
                }
            }
        }
        roots.into_iter().filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min)
    }
}

/// Named constraint value at ε = 0 and its first root.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginTerm {
    pub name: String,
    pub value_at_zero: f64,
    pub root: Option<f64>,
}

fn margin_terms(r: &RateSet, k: &ShapeConstants) -> Vec<(String, Poly2)> {
    let (lu, lc, ls) = (r.lam_u, r.lam_c, r.lam_s);
    let (mu, mc, ms) = (r.mu_u, r.mu_c, r.mu_s);
    let (b1, b2) = (k.b1, k.b2);
    vec![
        ("lam_u - 1".into(), Poly2::new(lu - 1.0, -1.0, 0.0)),
        ("1/2 - lam_c".into(), Poly2::new(0.5 - lc, -1.0, 0.0)),
        ("lam_c - lam_s".into(), Poly2::new(lc - ls, 0.0, 0.0)),
        ("lam_s".into(), Poly2::new(ls, 1.0, 0.0)),
        ("mu_u - mu_c".into(), Poly2::new(mu - mc, 0.0, 0.0)),
        ("mu_c - 2".into(), Poly2::new(mc - 2.0, -1.0, 0.0)),
        ("1 - mu_s".into(), Poly2::new(1.0 - ms, -1.0, 0.0)),
        ("mu_s".into(), Poly2::new(ms, 1.0, 0.0)),
        ("lam_c^2 - lam_s".into(), Poly2::new(lc * lc - ls, 2.0 * lc - 1.0, 1.0)),
        ("mu_u - mu_c^2".into(), Poly2::new(mu - mc * mc, 2.0 * mc - 1.0, -1.0)),
        ("1 - lam_c(1+b1)".into(), Poly2::new(1.0 - lc * (1.0 + b1), -(1.0 + b1), 0.0)),
        ("mu_c - (1+b2)".into(), Poly2::new(mc - (1.0 + b2), -1.0, 0.0)),
        ("lam0_c - lam_c^2".into(), Poly2::new(lc - lc * lc, -2.0 * lc, -1.0)),
        ("mu_c^2 - mu0_c".into(), Poly2::new(mc * mc - mc, -2.0 * mc, 1.0)),
    ]
}

/// Each admissibility constraint with its value at ε = 0 and first positive root.
pub fn epsilon_terms(r: &RateSet, k: &ShapeConstants) -> Vec<MarginTerm> {
    margin_terms(r, k)
        .into_iter()
        .map(|(name, p)| {
            let root = p.first_positive_root();
            MarginTerm { name, value_at_zero: p.c0, root: root.is_finite().then_some(root) }
        })
        .collect()
}

/// Supremum of admissible perturbation sizes ε for the rates, or `None`
/// when some constraint already fails at ε = 0.
pub fn epsilon_margin(r: &RateSet, k: &ShapeConstants) -> Option<f64> {
    let terms = margin_terms(r, k);
    if terms.iter().any(|(_, p)| p.c0 <= 0.0) {
        return None;
    }
    let eps = terms.iter().map(|(_, p)| p.first_positive_root()).fold(f64::INFINITY, f64::min);
    Some(eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    fn unit() -> Block {
        Block::from_bounds([[0.0, 1.0]; 3]).unwrap()
    }

    #[test]
    fn penetration_examples() {
        let x = Block::from_bounds([[-0.1, 1.1], [0.4, 0.6], [0.4, 0.6]]).unwrap();
        assert!(penetrates(&x, &unit()));
        let x = Block::from_bounds([[0.2, 0.8]; 3]).unwrap();
        assert!(!penetrates(&x, &unit()));
        let x = Block::from_bounds([[0.5, 1.5], [0.4, 0.6], [0.4, 0.6]]).unwrap();
        assert!(!penetrates(&x, &unit()));
    }

    #[test]
    fn interval_rejects_bad_bounds() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn ref0_is_valid() {
        let rep = validate_system(&fixtures::ref0());
        assert!(rep.valid, "{rep:#?}");
    }

    #[test]
    fn figure4_rates_and_gap() {
        let sys = fixtures::figure4();
        let r = rates(&sys);
        let want = [3.0, 0.5, 2.0 / 3.0, 3.0, 2.0, 1.0 / 6.0];
        let got = [r.lam_u, r.lam_c, r.lam_s, r.mu_u, r.mu_c, r.mu_s];
        for (g, w) in got.iter().zip(want) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-12);
        }
        assert!(matches!(shape_constants(&sys), Err(LabError::DegenerateGap { .. })));
        assert!(!dimension_reducible(&r));
    }

    #[test]
    fn swapped_a_d_breaks_translate() {
        let mut sys = fixtures::figure4();
        std::mem::swap(&mut sys.a, &mut sys.d);
        let rep = validate_system(&sys);
        assert_eq!(rep.status("translate_D_of_A_along_u"), Some(ClauseStatus::Fail));
    }

    #[test]
    fn identity_block_rates() {
        let mut sys = fixtures::ref0();
        sys.a_star = sys.a;
        let r = rates(&sys);
        assert_eq!(r.lam(), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn ref0_constants() {
        let sys = fixtures::ref0();
        let r = rates(&sys);
        assert_abs_diff_eq!(r.lam_u, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.lam_c, 0.45, epsilon = 1e-12);
        assert_abs_diff_eq!(r.lam_s, 0.15, epsilon = 1e-12);
        assert_abs_diff_eq!(r.mu_u, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.mu_c, 1.0 / 0.45, epsilon = 1e-12);
        assert_abs_diff_eq!(r.mu_s, 0.2, epsilon = 1e-12);
        let k = shape_constants(&sys).unwrap();
        assert_abs_diff_eq!(k.a1, 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(k.b1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.a1_eff, 3.5, epsilon = 1e-12);
        assert!(dimension_reducible(&r));
        assert_abs_diff_eq!(epsilon_margin(&r, &k).unwrap(), 0.05, epsilon = 1e-12);
    }

    #[test]
    fn b1_one_variant() {
        let k = shape_constants(&fixtures::ref0_b1_one()).unwrap();
        assert_abs_diff_eq!(k.a1, 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.b1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.a1_eff, 3.5, epsilon = 1e-12);
    }

    #[test]
    fn strictness_of_reducibility() {
        let r = RateSet { lam_u: 3.0, lam_c: 0.3, lam_s: 0.3, mu_u: 9.0, mu_c: 2.5, mu_s: 0.1 };
        assert!(!dimension_reducible(&r));
    }

    #[test]
    fn margin_none_for_figure4() {
        let r = rates(&fixtures::figure4());
        let k = ShapeConstants { a1: 1.0, a2: 1.0, b1: 0.0, b2: 0.0, a1_eff: 1.0, a2_eff: 1.0 };
        assert!(epsilon_margin(&r, &k).is_none());
    }

    #[test]
    fn margin_positive_for_slack_rates() {
        let r = RateSet { lam_u: 2.0, lam_c: 0.4, lam_s: 0.1, mu_u: 9.0, mu_c: 2.5, mu_s: 0.1 };
        let k = ShapeConstants { a1: 1.0, a2: 1.0, b1: 0.0, b2: 0.0, a1_eff: 1.0, a2_eff: 1.0 };
        assert!(epsilon_margin(&r, &k).unwrap() > 0.0);
    }

    #[test]
    fn json_roundtrip() {
        let sys = fixtures::ref0();
        let text = serde_json::to_string(&sys).unwrap();
        assert_eq!(BlockSystem::from_json(&text).unwrap(), sys);
        let bad = text.replacen("[0.0,1.0]", "[1.0,0.0]", 1);
        assert!(BlockSystem::from_json(&bad).is_err());
    }
}
