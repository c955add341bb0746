//! `chlab`: one JSON config in, JSON/CSV/PGM artifacts out.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use horseshoe_lab::cantor::{
    gap_lemma, hky_check, ifs_from_gamma, ifs_from_sigma, intersect, refine, selfsimilar_thickness, thickness,
    thickness_ifs, CantorApprox,
};
use horseshoe_lab::cone::cone_check;
use horseshoe_lab::config::RunConfig;
use horseshoe_lab::geometry::{dimension_reducible, epsilon_margin, epsilon_terms, rates, shape_constants, validate_system};
use horseshoe_lab::io::{cantor_csv, cloud_csv, cloud_pgm, grid_csv, Provenance};
use horseshoe_lab::map::CoupledMap;
use horseshoe_lab::metrics::{
    box_dimension, box_dimension_default, cloud_scales, omega_sets, sample_h, sample_invariant_set,
    theorem_a_report, theorem_b_report, BoxCountReport, BoxInput, InvariantSide, PointCloud,
};
use horseshoe_lab::surfaces::{graph_transform_cs, graph_transform_cu, invariance_defect, GridFunction};
use horseshoe_lab::{LabError, MU_CONVENTION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lab(LabError::Config(_)) | CliError::Io { .. } => 2,
            CliError::Lab(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Lab(e) => e.kind(),
            CliError::Io { .. } => "Io",
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "chlab", version, about = "Coupled horseshoe laboratory")]
pub struct Cli {
    /// Worker threads, 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    pub config: PathBuf,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, overrides `output_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RenderSet {
    /// Section of H(f): both orbit criteria.
    H,
    /// Unstable set of Γ: backward criterion only.
    Wu,
    /// Stable set of Σ: forward criterion only.
    Ws,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoxTarget {
    Gamma,
    Sigma,
    Intersection,
    H,
    Wu,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the block conditions and the cone clauses.
    Validate(Common),
    /// Rates, shape constants, ε-margin and reducibility.
    Constants(Common),
    /// Graph transforms for both invariant surfaces.
    Surface(Common),
    /// Γ- and Σ-side Cantor sets and their thickness.
    Cantor(Common),
    /// Gap lemma, thickness-of-intersection diagnostic and the intersection itself.
    Intersect {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Sample an invariant set on the configured section.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "h")]
        set: RenderSet,
    },
    /// Box-counting dimension of one of the computed sets.
    Boxdim {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "intersection")]
        target: BoxTarget,
    },
    TheoremA(Common),
    TheoremB(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Constants(_) => "constants",
            Command::Surface(_) => "surface",
            Command::Cantor(_) => "cantor",
            Command::Intersect { .. } => "intersect",
            Command::Render { .. } => "render",
            Command::Boxdim { .. } => "boxdim",
            Command::TheoremA(_) => "theorem-a",
            Command::TheoremB(_) => "theorem-b",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Validate(c)
            | Command::Constants(c)
            | Command::Surface(c)
            | Command::Cantor(c)
            | Command::TheoremA(c)
            | Command::TheoremB(c) => c,
            Command::Intersect { common, .. } | Command::Render { common, .. } | Command::Boxdim { common, .. } => {
                common
            }
        }
    }
}

/// Loaded config plus everything stamped into artifacts.
struct Ctx {
    cfg: RunConfig,
    prov: Provenance,
    out: PathBuf,
}

impl Ctx {
    fn load(cmd: &Command) -> CliResult<Ctx> {
        let c = cmd.common();
        let text = fs::read_to_string(&c.config).map_err(|e| CliError::Io { path: c.config.clone(), source: e })?;
        let mut cfg = RunConfig::from_json(&text)?;
        if let Some(d) = c.depth {
            cfg.depth = d;
        }
        if let Some(g) = c.grid {
            cfg.grid = g;
        }
        if let Some(s) = c.seed {
            cfg.seed = s;
        }
        if let Some(o) = &c.out {
            cfg.output_dir = o.display().to_string();
        }
        // hash the effective config so overrides change the stamp
        let canonical = serde_json::to_vec(&cfg).map_err(|e| LabError::Config(e.to_string()))?;
        let hash = hex::encode(Sha256::digest(&canonical));
        let out = PathBuf::from(&cfg.output_dir);
        Ok(Ctx { prov: Provenance::new(cmd.name(), &hash), cfg, out })
    }

    fn write(&self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::Io { path: self.out.clone(), source: e })?;
        let path = self.out.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
        Ok(path)
    }

    fn map(&self) -> CliResult<CoupledMap> {
        Ok(self.cfg.build_map()?)
    }

    fn stamp(&self, body: impl Serialize) -> Value {
        json!({
            "provenance": self.prov,
            "result": body,
        })
    }
}

fn rel(p: &Path) -> String {
    p.display().to_string()
}

fn validate(ctx: &Ctx) -> CliResult<Value> {
    let sys = ctx.cfg.system();
    let report = validate_system(&sys);
    let r = rates(&sys);
    let cones = cone_check(&ctx.map()?, ctx.cfg.theta, ctx.cfg.cone_samples, ctx.cfg.seed);
    Ok(json!({
        "report": report,
        "dimension_reducible": dimension_reducible(&r),
        "rates": r,
        "cones": cones,
        "mu_convention": MU_CONVENTION,
    }))
}

fn constants(ctx: &Ctx) -> CliResult<Value> {
    let sys = ctx.cfg.system();
    let r = rates(&sys);
    let k = shape_constants(&sys)?;
    Ok(json!({
        "rates": r,
        "horseshoe_shaped": r.is_horseshoe_shaped(),
        "shape": k,
        "epsilon_margin": epsilon_margin(&r, &k),
        "epsilon_terms": epsilon_terms(&r, &k),
        "dimension_reducible": dimension_reducible(&r),
        "mu_convention": MU_CONVENTION,
    }))
}

fn surface_summary(g: &GridFunction, m: &CoupledMap) -> Value {
    let mean = g.values.iter().flatten().sum::<f64>() / g.values.iter().map(Vec::len).sum::<usize>().max(1) as f64;
    json!({
        "kind": g.kind,
        "resolution": g.n,
        "iterations": g.log.len(),
        "converged": g.converged,
        "precondition_ok": g.precondition_ok,
        "derivative_budget": g.derivative_budget(),
        "mean_value": mean,
        "sup_deviation_from_mean": g.sup_deviation(mean),
        "invariance_defect": invariance_defect(m, g),
        "contraction_ratios": g.contraction_ratios(),
        "log": g.log,
    })
}

fn surface(ctx: &Ctx) -> CliResult<Value> {
    let m = ctx.map()?;
    let sp = ctx.cfg.surface_params();
    let cu = graph_transform_cu(&m, sp.resolution, sp.tol, sp.max_iter)?;
    let cs = graph_transform_cs(&m, sp.resolution, sp.tol, sp.max_iter)?;
    let f1 = ctx.write("surface_cu.csv", grid_csv(&cu, &ctx.prov).as_bytes())?;
    let f2 = ctx.write("surface_cs.csv", grid_csv(&cs, &ctx.prov).as_bytes())?;
    Ok(json!({
        "cu": surface_summary(&cu, &m),
        "cs": surface_summary(&cs, &m),
        "files": [rel(&f1), rel(&f2)],
    }))
}

fn cantor_side(ctx: &Ctx, name: &str, ifs: horseshoe_lab::cantor::IfsPair) -> CliResult<Value> {
    let depth = ctx.cfg.depth;
    let set = refine(&ifs, depth)?;
    let rep = thickness_ifs(&ifs, depth)?;
    let file = ctx.write(&format!("cantor_{name}.csv"), cantor_csv(&set, &ctx.prov).as_bytes())?;
    Ok(json!({
        "ifs": ifs,
        "trim_ratio": ifs.trim_ratio(),
        "intervals": set.len(),
        "thickness": rep,
        "selfsimilar_thickness": selfsimilar_thickness(&ifs).ok(),
        "file": rel(&file),
    }))
}

fn cantor(ctx: &Ctx) -> CliResult<Value> {
    let m = ctx.map()?;
    let signs = ctx.cfg.signs()?;
    let sys = ctx.cfg.system();
    let mut out = json!({
        "depth": ctx.cfg.depth,
        "gamma": cantor_side(ctx, "gamma", ifs_from_gamma(&sys, &signs)?)?,
        "sigma": cantor_side(ctx, "sigma", ifs_from_sigma(&sys, &signs)?)?,
        "shape": shape_constants(&sys)?,
    });
    if !m.is_affine() {
        let om = omega_sets(&m, ctx.cfg.depth, &ctx.cfg.surface_params())?;
        out["perturbed"] = json!({
            "method": om.method,
            "tau_omega1": thickness(&om.omega1)?.tau,
            "tau_omega2": thickness(&om.omega2)?.tau,
        });
    }
    Ok(out)
}

fn intersect_cmd(ctx: &Ctx, eps: f64) -> CliResult<Value> {
    let m = ctx.map()?;
    let om = omega_sets(&m, ctx.cfg.depth, &ctx.cfg.surface_params())?;
    let gl = gap_lemma(&om.omega1, &om.omega2)?;
    let inter = intersect(&om.omega1, &om.omega2);
    let hky = hky_check(&om.omega1, &om.omega2, eps).ok();
    let file = ctx.write("intersection.csv", cantor_csv(&inter, &ctx.prov).as_bytes())?;
    let f1 = ctx.write("omega1.csv", cantor_csv(&om.omega1, &ctx.prov).as_bytes())?;
    let f2 = ctx.write("omega2.csv", cantor_csv(&om.omega2, &ctx.prov).as_bytes())?;
    Ok(json!({
        "depth": ctx.cfg.depth,
        "method": om.method,
        "gap_lemma": gl,
        "hky": hky,
        "intersection_intervals": inter.len(),
        "intersection_hull": inter.hull(),
        "files": [rel(&file), rel(&f1), rel(&f2)],
    }))
}

fn cloud_dimension(c: &PointCloud) -> Option<BoxCountReport> {
    let sc = cloud_scales(c.grid);
    let n = sc.len();
    box_dimension(BoxInput::Points(&c.points), &sc, Some((2, n))).ok()
}

fn sample(ctx: &Ctx, m: &CoupledMap, set: RenderSet) -> CliResult<PointCloud> {
    let sec = ctx.cfg.section_spec()?;
    let h = ctx.cfg.horizons;
    Ok(match set {
        RenderSet::H => sample_h(m, sec, ctx.cfg.grid, h.forward, h.backward, h.transient),
        RenderSet::Wu => sample_invariant_set(m, InvariantSide::Unstable, sec, ctx.cfg.grid, h.backward, h.transient),
        RenderSet::Ws => sample_invariant_set(m, InvariantSide::Stable, sec, ctx.cfg.grid, h.forward, h.transient),
    })
}

fn render(ctx: &Ctx, set: RenderSet) -> CliResult<Value> {
    let m = ctx.map()?;
    let cloud = sample(ctx, &m, set)?;
    let csv = ctx.write("render.csv", cloud_csv(&cloud, &ctx.prov).as_bytes())?;
    let pgm = ctx.write("render.pgm", &cloud_pgm(&cloud, &ctx.prov))?;
    Ok(json!({
        "set": format!("{set:?}").to_lowercase(),
        "section": cloud.section,
        "grid": cloud.grid,
        "horizons": ctx.cfg.horizons,
        "points": cloud.points.len(),
        "box_dimension": cloud_dimension(&cloud),
        "files": [rel(&csv), rel(&pgm)],
    }))
}

fn interval_dimension(ctx: &Ctx, s: &CantorApprox) -> CliResult<BoxCountReport> {
    Ok(match &ctx.cfg.scales {
        Some(sc) => box_dimension(BoxInput::Intervals(s), sc, None)?,
        None => box_dimension_default(BoxInput::Intervals(s))?,
    })
}

fn boxdim(ctx: &Ctx, target: BoxTarget) -> CliResult<Value> {
    let m = ctx.map()?;
    let rep = match target {
        BoxTarget::Gamma | BoxTarget::Sigma | BoxTarget::Intersection => {
            let om = omega_sets(&m, ctx.cfg.depth, &ctx.cfg.surface_params())?;
            let s = match target {
                BoxTarget::Gamma => om.omega1,
                BoxTarget::Sigma => om.omega2,
                _ => intersect(&om.omega1, &om.omega2),
            };
            interval_dimension(ctx, &s)?
        }
        BoxTarget::H | BoxTarget::Wu => {
            let set = if matches!(target, BoxTarget::H) { RenderSet::H } else { RenderSet::Wu };
            let cloud = sample(ctx, &m, set)?;
            match &ctx.cfg.scales {
                Some(sc) => box_dimension(BoxInput::Points(&cloud.points), sc, None)?,
                None => {
                    let sc = cloud_scales(cloud.grid);
                    let n = sc.len();
                    box_dimension(BoxInput::Points(&cloud.points), &sc, Some((2, n)))?
                }
            }
        }
    };
    Ok(json!({ "target": format!("{target:?}").to_lowercase(), "report": rep }))
}

fn theorem(ctx: &Ctx, which: char) -> CliResult<Value> {
    let m = ctx.map()?;
    let p = ctx.cfg.theorem_params();
    let rep = if which == 'a' { theorem_a_report(&m, &p) } else { theorem_b_report(&m, &p) };
    Ok(serde_json::to_value(rep).map_err(|e| LabError::Config(e.to_string()))?)
}

fn execute(cmd: &Command) -> CliResult<Value> {
    let ctx = Ctx::load(cmd)?;
    let body = match cmd {
        Command::Validate(_) => validate(&ctx)?,
        Command::Constants(_) => constants(&ctx)?,
        Command::Surface(_) => surface(&ctx)?,
        Command::Cantor(_) => cantor(&ctx)?,
        Command::Intersect { eps, .. } => intersect_cmd(&ctx, *eps)?,
        Command::Render { set, .. } => render(&ctx, *set)?,
        Command::Boxdim { target, .. } => boxdim(&ctx, *target)?,
        Command::TheoremA(_) => theorem(&ctx, 'a')?,
        Command::TheoremB(_) => theorem(&ctx, 'b')?,
    };
    let doc = ctx.stamp(body);
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| LabError::Config(e.to_string()))?;
    text.push('\n');
    ctx.write(&format!("{}.json", cmd.name()), text.as_bytes())?;
    Ok(doc)
}

/// Runs one command; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    match execute(&cli.command) {
        Ok(doc) => {
            let text = serde_json::to_string_pretty(&doc).unwrap_or_default();
            let _ = writeln!(stdout, "{text}");
            0
        }
        Err(e) => {
            let code = e.exit_code();
            let err = json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code });
            let _ = writeln!(stderr, "{err}");
            code
        }
    }
}
