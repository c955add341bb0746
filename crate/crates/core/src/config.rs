//! JSON run configuration.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fixtures::Signs;
use crate::geometry::{Block, BlockSystem, Interval};
use crate::map::{build_map, check_signs, CoupledMap, Perturbation};
use crate::metrics::{SectionSpec, SurfaceParams, TheoremParams, DEFAULT_TAU0, DEFAULT_TRANSIENT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignsConfig {
    #[serde(rename = "A")]
    pub a: [i64; 3],
    #[serde(rename = "B")]
    pub b: [i64; 3],
    #[serde(rename = "C")]
    pub c: [i64; 3],
    #[serde(rename = "D")]
    pub d: [i64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub amplitude: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub centers: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub widths: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub axes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Horizons {
    #[serde(default = "d_horizon")]
    pub forward: usize,
    #[serde(default = "d_horizon")]
    pub backward: usize,
    #[serde(default = "d_transient")]
    pub transient: usize,
}

impl Default for Horizons {
    fn default() -> Self {
        Horizons { forward: 12, backward: 12, transient: DEFAULT_TRANSIENT }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionConfig {
    /// `"u"`, `"c"` or `"s"`.
    pub axis: String,
    pub value: f64,
    #[serde(default)]
    pub range1: Option<[f64; 2]>,
    #[serde(default)]
    pub range2: Option<[f64; 2]>,
}

impl Default for SectionConfig {
    fn default() -> Self {
        SectionConfig { axis: "u".into(), value: 1.0, range1: None, range2: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    #[serde(default = "d_resolution")]
    pub resolution: usize,
    #[serde(default = "d_tol")]
    pub tol: f64,
    #[serde(default = "d_max_iter")]
    pub max_iter: usize,
    #[serde(default = "d_line_samples")]
    pub line_samples: usize,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        let s = SurfaceParams::default();
        SurfaceConfig { resolution: s.resolution, tol: s.tol, max_iter: s.max_iter, line_samples: s.line_samples }
    }
}

fn d_horizon() -> usize {
    12
}
fn d_transient() -> usize {
    DEFAULT_TRANSIENT
}
fn d_depth() -> usize {
    12
}
fn d_grid() -> usize {
    1024
}
fn d_tau0() -> f64 {
    DEFAULT_TAU0
}
fn d_out() -> String {
    "out".into()
}
fn d_theta() -> f64 {
    0.05
}
fn d_cone_samples() -> usize {
    2000
}
fn d_resolution() -> usize {
    SurfaceParams::default().resolution
}
fn d_tol() -> f64 {
    SurfaceParams::default().tol
}
fn d_max_iter() -> usize {
    SurfaceParams::default().max_iter
}
fn d_line_samples() -> usize {
    SurfaceParams::default().line_samples
}

/// Everything a CLI run needs. Block keys sit at the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
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
    #[serde(default)]
    pub signs: Option<SignsConfig>,
    #[serde(default)]
    pub perturbation: Option<PerturbationConfig>,
    #[serde(default)]
    pub horizons: Horizons,
    #[serde(default = "d_depth")]
    pub depth: usize,
    #[serde(default = "d_grid")]
    pub grid: usize,
    /// Box-counting scales; defaults depend on the input kind.
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    #[serde(default = "d_tau0")]
    pub tau0: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_out")]
    pub output_dir: String,
    #[serde(default)]
    pub section: SectionConfig,
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default = "d_theta")]
    pub theta: f64,
    #[serde(default = "d_cone_samples")]
    pub cone_samples: usize,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn from_system(sys: &BlockSystem) -> Self {
        RunConfig {
            a: sys.a,
            b: sys.b,
            c: sys.c,
            d: sys.d,
            a_star: sys.a_star,
            b_star: sys.b_star,
            c_star: sys.c_star,
            d_star: sys.d_star,
            signs: None,
            perturbation: None,
            horizons: Horizons::default(),
            depth: d_depth(),
            grid: d_grid(),
            scales: None,
            tau0: d_tau0(),
            seed: 0,
            output_dir: d_out(),
            section: SectionConfig::default(),
            surface: SurfaceConfig::default(),
            theta: d_theta(),
            cone_samples: d_cone_samples(),
        }
    }

    pub fn with_signs(mut self, s: &Signs) -> Self {
        let t = |v: [i8; 3]| v.map(i64::from);
        self.signs = Some(SignsConfig { a: t(s[0]), b: t(s[1]), c: t(s[2]), d: t(s[3]) });
        self
    }

    pub fn system(&self) -> BlockSystem {
        BlockSystem {
            a: self.a,
            b: self.b,
            c: self.c,
            d: self.d,
            a_star: self.a_star,
            b_star: self.b_star,
            c_star: self.c_star,
            d_star: self.d_star,
        }
    }

    pub fn signs(&self) -> Result<Signs> {
        let Some(sc) = &self.signs else {
            return Ok(crate::fixtures::ALL_PLUS);
        };
        let mut out = [[1i8; 3]; 4];
        for (k, (name, v)) in [("A", sc.a), ("B", sc.b), ("C", sc.c), ("D", sc.d)].into_iter().enumerate() {
            for j in 0..3 {
                out[k][j] = match v[j] {
                    1 => 1,
                    -1 => -1,
                    _ => return Err(LabError::InvalidSigns { block: name.into() }),
                };
            }
        }
        check_signs(&out)?;
        Ok(out)
    }

    pub fn perturbation(&self) -> Option<Perturbation> {
        let pc = self.perturbation.as_ref()?;
        let seed = pc.seed.unwrap_or(self.seed);
        let mut p = Perturbation::generated(&self.system(), pc.amplitude, seed);
        if let Some(c) = &pc.centers {
            p.centers = c.clone();
        }
        if let Some(w) = &pc.widths {
            p.widths = w.clone();
        }
        if let Some(a) = &pc.axes {
            p.axes = a.clone();
        }
        Some(p)
    }

    pub fn build_map(&self) -> Result<CoupledMap> {
        build_map(&self.system(), &self.signs()?, self.perturbation())
    }

    pub fn section_spec(&self) -> Result<SectionSpec> {
        let axis = match self.section.axis.as_str() {
            "u" | "x_u" | "0" => 0,
            "c" | "x_c" | "1" => 1,
            "s" | "x_s" | "2" => 2,
            other => return Err(LabError::Config(format!("unknown section axis {other:?}"))),
        };
        let mut spec = SectionSpec::new(axis, self.section.value);
        if let Some(r) = self.section.range1 {
            spec.range1 = Interval::new(r[0], r[1])?;
        }
        if let Some(r) = self.section.range2 {
            spec.range2 = Interval::new(r[0], r[1])?;
        }
        Ok(spec)
    }

    pub fn surface_params(&self) -> SurfaceParams {
        SurfaceParams {
            resolution: self.surface.resolution,
            tol: self.surface.tol,
            max_iter: self.surface.max_iter,
            line_samples: self.surface.line_samples,
        }
    }

    pub fn theorem_params(&self) -> TheoremParams {
        TheoremParams {
            depth: self.depth,
            tau0: self.tau0,
            grid: self.grid,
            horizon: self.horizons.backward,
            transient: self.horizons.transient,
            surface: self.surface_params(),
        }
    }
}
