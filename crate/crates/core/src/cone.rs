//! Sampled verification of the cone-field inclusion and growth clauses.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{epsilon_margin, rates, shape_constants, Block, RateSet};
use crate::map::{CoupledMap, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cone {
    U,
    Cu,
    S,
    Cs,
}

impl Cone {
    /// Ratio whose sublevel set `{ρ ≤ θ}` is the cone.
    pub fn ratio(self, v: &Vector3<f64>) -> f64 {
        let (x, y, z) = (v[0], v[1], v[2]);
        match self {
            Cone::U => (y * y + z * z).sqrt() / x.abs(),
            Cone::Cu => z.abs() / (x * x + y * y).sqrt(),
            Cone::S => (x * x + y * y).sqrt() / z.abs(),
            Cone::Cs => x.abs() / (y * y + z * z).sqrt(),
        }
    }

    /// Boundary vector at angle `phi` and the core (axis) vector at `phi`.
    fn vectors(self, theta: f64, phi: f64) -> [Vector3<f64>; 2] {
        let (c, s) = (phi.cos(), phi.sin());
        match self {
            Cone::U => [Vector3::new(1.0, theta * c, theta * s), Vector3::new(1.0, 0.0, 0.0)],
            Cone::Cu => [Vector3::new(c, s, theta), Vector3::new(c, s, 0.0)],
            Cone::S => [Vector3::new(theta * c, theta * s, 1.0), Vector3::new(0.0, 0.0, 1.0)],
            Cone::Cs => [Vector3::new(theta, c, s), Vector3::new(0.0, c, s)],
        }
    }
}

/// One inclusion-plus-growth clause.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeClause {
    pub name: String,
    pub cone: Cone,
    /// `"forward"` uses `Df`, `"backward"` uses `Df⁻¹`.
    pub direction: String,
    /// `1 − sup ρ(Jv)/θ`; positive means strict inclusion.
    pub inclusion_margin: f64,
    pub min_growth: f64,
    pub required_growth: f64,
    /// `min_growth / required_growth − 1`.
    pub growth_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeReport {
    pub theta: f64,
    pub epsilon: f64,
    pub n_points: usize,
    pub clauses: Vec<ConeClause>,
    /// Closed-form inclusion margins for the unperturbed map, same order.
    pub analytic_inclusion: Option<Vec<f64>>,
    pub pass: bool,
}

impl ConeReport {
    pub fn clause(&self, name: &str) -> Option<&ConeClause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

struct Spec {
    name: &'static str,
    cone: Cone,
    forward: bool,
    on_u: bool,
}

const SPECS: [Spec; 8] = [
    Spec { name: "a.u", cone: Cone::U, forward: true, on_u: true },
    Spec { name: "a.cu", cone: Cone::Cu, forward: true, on_u: true },
    Spec { name: "a.s", cone: Cone::S, forward: false, on_u: true },
    Spec { name: "a.cs", cone: Cone::Cs, forward: false, on_u: true },
    Spec { name: "a*.s", cone: Cone::S, forward: false, on_u: false },
    Spec { name: "a*.cs", cone: Cone::Cs, forward: false, on_u: false },
    Spec { name: "a*.u", cone: Cone::U, forward: true, on_u: false },
    Spec { name: "a*.cu", cone: Cone::Cu, forward: true, on_u: false },
];

fn required(r: &RateSet, eps: f64, spec: &Spec) -> f64 {
    match (spec.on_u, spec.cone) {
        (true, Cone::U) => (r.lam_u - eps).max(1.0),
        (true, Cone::Cu) => r.lam_c - eps,
        (true, Cone::S) => (1.0 / (r.lam_s + eps)).max(1.0),
        (true, Cone::Cs) => 1.0 / (r.lam_c + eps),
        (false, Cone::U) => (r.mu_u - eps).max(1.0),
        (false, Cone::Cu) => r.mu_c - eps,
        (false, Cone::S) => (1.0 / (r.mu_s + eps)).max(1.0),
        (false, Cone::Cs) => 1.0 / (r.mu_c + eps),
    }
}

/// Closed-form inclusion margin for a diagonal Jacobian `d`.
pub fn analytic_inclusion(d: [f64; 3], cone: Cone, forward: bool) -> f64 {
    let a = d.map(f64::abs);
    match (cone, forward) {
        (Cone::U, true) | (Cone::Cs, false) => 1.0 - a[1].max(a[2]) / a[0],
        (Cone::Cu, true) | (Cone::S, false) => 1.0 - a[2] / a[0].min(a[1]),
        _ => f64::NAN,
    }
}

fn uniform_in(blocks: &[Block], rng: &mut ChaCha8Rng) -> Point {
    let b = blocks[rng.random_range(0..blocks.len())];
    let mut p = [0.0; 3];
    for (j, pj) in p.iter_mut().enumerate() {
        let iv = b.axis(j);
        *pj = rng.random_range(iv.lo..=iv.hi);
    }
    p
}

#[derive(Clone, Copy)]
struct Acc {
    max_ratio: f64,
    min_growth: f64,
}

impl Acc {
    fn new() -> Self {
        Acc { max_ratio: 0.0, min_growth: f64::INFINITY }
    }
    fn merge(self, o: Acc) -> Acc {
        Acc { max_ratio: self.max_ratio.max(o.max_ratio), min_growth: self.min_growth.min(o.min_growth) }
    }
}

/// Samples `n_samples` points in `R₁ = A ∪ D` and as many in `R₂ = B* ∪ C*`
/// and checks every clause on cone-boundary and core vectors.
pub fn cone_check(m: &CoupledMap, theta: f64, n_samples: usize, seed: u64) -> ConeReport {
    let r = rates(&m.system);
    let eps = shape_constants(&m.system)
        .ok()
        .and_then(|k| epsilon_margin(&r, &k))
        .map(|e| 0.5 * e)
        .unwrap_or(0.0);

    let mut base_phi: Vec<f64> = (0..4).map(|k| k as f64 * std::f64::consts::FRAC_PI_2).collect();
    base_phi.push(std::f64::consts::FRAC_PI_4);

    let r1 = [m.system.a, m.system.d];
    let r2 = [m.system.b_star, m.system.c_star];
    let n = n_samples.max(1);

    let accs: Vec<[Acc; 8]> = (0..2 * n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let on_u = i < n;
            let jac: Option<Matrix3<f64>> = if on_u {
                let p = uniform_in(&r1, &mut rng);
                m.jacobian(p)
            } else {
                let q = uniform_in(&r2, &mut rng);
                m.apply_inverse(q).ok().flatten().and_then(|p| m.jacobian(p))
            };
            let mut out = [Acc::new(); 8];
            let Some(j) = jac else { return out };
            let Some(jinv) = j.try_inverse() else { return out };
            let mut phis = base_phi.clone();
            for _ in 0..4 {
                phis.push(rng.random_range(0.0..std::f64::consts::TAU));
            }
            for (ci, spec) in SPECS.iter().enumerate() {
                if spec.on_u != on_u {
                    continue;
                }
                let mat = if spec.forward { &j } else { &jinv };
                let mut acc = Acc::new();
                for &phi in &phis {
                    for (vi, v) in spec.cone.vectors(theta, phi).iter().enumerate() {
                        let w = mat * v;
                        if vi == 0 {
                            acc.max_ratio = acc.max_ratio.max(spec.cone.ratio(&w));
                        }
                        acc.min_growth = acc.min_growth.min(w.norm() / v.norm());
                    }
                }
                out[ci] = acc;
            }
            out
        })
        .collect();

    let mut total = [Acc::new(); 8];
    for a in &accs {
        for k in 0..8 {
            total[k] = total[k].merge(a[k]);
        }
    }

    let clauses: Vec<ConeClause> = SPECS
        .iter()
        .zip(total)
        .map(|(spec, acc)| {
            let req = required(&r, eps, spec);
            let inclusion_margin = 1.0 - acc.max_ratio / theta;
            let growth_margin = acc.min_growth / req - 1.0;
            ConeClause {
                name: spec.name.to_string(),
                cone: spec.cone,
                direction: if spec.forward { "forward" } else { "backward" }.to_string(),
                inclusion_margin,
                min_growth: acc.min_growth,
                required_growth: req,
                growth_margin,
                pass: inclusion_margin > 0.0 && growth_margin > 0.0,
            }
        })
        .collect();

    let analytic_inclusion = m.is_affine().then(|| {
        SPECS
            .iter()
            .map(|spec| {
                // R₁ carries branches A, D; R₂ is reached through B, C.
                let ks = if spec.on_u { [0, 3] } else { [1, 2] };
                ks.iter()
                    .map(|&k| analytic_inclusion(m.branches[k].diag(), spec.cone, spec.forward))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    });
    let pass = clauses.iter().all(|c| c.pass);
    ConeReport { theta, epsilon: eps, n_points: 2 * n, clauses, analytic_inclusion, pass }
}
