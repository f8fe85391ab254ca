//! Dispatch from a parsed config to the core runners, and rendering of the
//! CSV, JSON and SVG artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use molab_core::approx::{grad_bound_case1, grad_bound_case2, grad_bound_general, BoundCase, SqueezeMode};
use molab_core::experiments::{
    convergence_run, gap_probe, gap_smoothing, minimize, ConvergenceOptions, EpsilonRule, ExperimentReport,
    GapOptions, MinimizeOptions, Verdict,
};
use molab_core::fields::{sample, truncate, Centering, Grid, GridDomain, ScalarField};
use molab_core::geometry::{build_cover, build_partition, squeeze_locality_constant, Domain, Region, StarCover};
use molab_core::nfunctions::{
    check_continuity_assumption, check_delta2, check_pq_growth, continuity_budget, lemma_constants,
    sandwich_check, AssumptionReport, NFunction, NFunctionSpec, SampleDensity,
};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Kind, Mode};
use crate::svg::{loglog, Series};

/// Relative slack of the gradient sup bounds.
pub const BOUND_SLACK: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Config(Vec<crate::config::ConfigError>),
    #[error(transparent)]
    Core(#[from] molab_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Overall status of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Descriptive,
    Completed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Descriptive => "DESCRIPTIVE",
            Status::Completed => "COMPLETED",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Fail => 1,
            _ => 0,
        }
    }
}

impl From<Verdict> for Status {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Status::Pass,
            Verdict::Fail => Status::Fail,
            Verdict::Descriptive => Status::Descriptive,
        }
    }
}

/// Rendered artifacts of a run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub csv: String,
    pub json: String,
    pub svg: Option<String>,
}

impl Outcome {
    /// Writes the artifacts into `dir` under the configured names.
    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| RunError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        let mut files = vec![(&cfg.csv, &self.csv), (&cfg.json, &self.json)];
        if let Some(svg) = &self.svg {
            files.push((&cfg.svg, svg));
        }
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Grid, domain and cover shared by the field-based kinds.
struct Setup {
    domain: Domain,
    gd: Arc<GridDomain>,
    cover: Option<StarCover>,
    /// `R` of the cover, or 1 for the unit ball.
    r: f64,
    smoothing: Option<f64>,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup, RunError> {
    let domain = cfg.domain.build()?;
    let grid = Grid::covering(&domain.bbox(), cfg.n, 0.0, cfg.pad, Centering::Cell)?;
    let gd = GridDomain::new(grid, domain.clone())?;
    match cfg.mode {
        Mode::Ball => {
            if cfg.domain != crate::config::DomainLit::UnitBall(domain.dim()) {
                return Err(molab_core::Error::Precondition("ball mode needs domain = unit_ball".into()).into());
            }
            Ok(Setup { domain, gd, cover: None, r: 1.0, smoothing: None })
        }
        Mode::Composite => {
            let cover = build_cover(&domain)?;
            let s = cfg.smoothing.unwrap_or_else(|| gap_smoothing(&cover, gd.grid().h()));
            Ok(Setup { domain, gd, r: cover.r, cover: Some(cover), smoothing: Some(s) })
        }
    }
}

impl Setup {
    fn mode(&self) -> Result<SqueezeMode, RunError> {
        match (&self.cover, self.smoothing) {
            (Some(cover), Some(s)) => {
                let pou = build_partition(cover, self.gd.grid(), s)?;
                Ok(SqueezeMode::Composite { cover: cover.clone(), pou })
            }
            _ => Ok(SqueezeMode::Ball),
        }
    }

    fn kappa(&self, eps: f64) -> f64 {
        if self.cover.is_some() {
            1.0 - 4.0 * eps / self.r
        } else {
            1.0 - 2.0 * eps
        }
    }

    fn locality(&self) -> Option<f64> {
        squeeze_locality_constant(&self.domain, self.r).ok()
    }

    fn grid_json(&self, cfg: &ExperimentConfig) -> Value {
        json!({
            "shape": self.gd.grid().shape(),
            "h": self.gd.grid().h(),
            "centering": "cell",
            "pad": cfg.pad,
            "cover_r": self.r,
            "pieces": self.cover.as_ref().map(|c| c.len()),
            "smoothing": self.smoothing,
        })
    }
}

fn field(cfg: &ExperimentConfig, gd: &Arc<GridDomain>) -> Result<ScalarField, RunError> {
    let u = sample(&cfg.field_fixture(), gd);
    match cfg.truncate {
        Some(k) => Ok(truncate(&u, k)?),
        None => Ok(u),
    }
}

fn epsilons(cfg: &ExperimentConfig, r: f64) -> Vec<f64> {
    cfg.epsilon.iter().map(|e| e.resolve(r)).collect()
}

/// `(M, N, delta)` of the continuity budget, when defined for `spec`.
fn budget(spec: &NFunctionSpec, cfg: &ExperimentConfig) -> (Option<f64>, Option<f64>, Option<f64>) {
    let (m, n) = match continuity_budget(spec, cfg.budget_d, &cfg.gamma) {
        Ok((m, n)) => (Some(m), Some(n)),
        Err(_) => (None, None),
    };
    let delta = match spec {
        NFunctionSpec::DoublePhase(dp) => {
            let g = dp.growth();
            lemma_constants(g.c1, dp.holder(), g.c2, g.xi0, g.p, g.q, cfg.budget_d).ok().map(|l| l.delta)
        }
        _ => None,
    };
    (m, n, delta)
}

fn constants(spec: &NFunctionSpec, cfg: &ExperimentConfig, kappas: Vec<f64>, c: Option<f64>) -> Value {
    let (m, n, delta) = budget(spec, cfg);
    json!({
        "kappa_eps": kappas,
        "C_Omega_R": c,
        "D": cfg.budget_d,
        "M": m,
        "N": n,
        "delta": delta,
    })
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn finish(
    cfg: &ExperimentConfig,
    status: Status,
    csv: String,
    mut body: serde_json::Map<String, Value>,
    svg: Option<String>,
) -> Outcome {
    body.insert("config_hash".into(), json!(cfg.hash()));
    body.insert("verdict".into(), json!(status.as_str()));
    let json = serde_json::to_string_pretty(&Value::Object(body)).expect("JSON values serialize") + "\n";
    Outcome { status, csv, json, svg }
}

fn obj(v: Value) -> serde_json::Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("object literal"),
    }
}

/// Runs the experiment. `plot` requests the SVG.
pub fn run(cfg: &ExperimentConfig, plot: bool) -> Result<Outcome, RunError> {
    let spec = cfg.nfunction()?;
    match cfg.kind {
        Kind::Check => run_check(cfg, &spec),
        Kind::Approx => run_approx(cfg, &spec, plot),
        Kind::Converge => run_converge(cfg, &spec, plot),
        Kind::Minimize => run_minimize(cfg, &spec),
        Kind::Gap => run_gap(cfg, &spec, plot),
    }
}

/// Vertex lattice of `per_axis` nodes per axis, restricted to the domain.
fn domain_points(domain: &Domain, per_axis: usize) -> Result<Vec<Vec<f64>>, RunError> {
    let grid = Grid::covering(&domain.bbox(), per_axis - 1, 0.0, 0.0, Centering::Vertex)?;
    Ok((0..grid.len()).map(|i| grid.point(i)).filter(|x| domain.contains(x)).collect())
}

fn run_check(cfg: &ExperimentConfig, spec: &NFunctionSpec) -> Result<Outcome, RunError> {
    let domain = cfg.domain.build()?;
    let xs = domain_points(&domain, 9)?;
    let xis: Vec<f64> = (0..64).map(|k| 10f64.powf(-2.0 + 4.0 * k as f64 / 63.0)).collect();
    let density = SampleDensity::default();
    let mut reports = vec![check_delta2(spec, &xs, &xis)?, check_pq_growth(spec, &xs, &xis)?];
    reports.push(check_continuity_assumption(spec, &domain, cfg.budget_d, &cfg.gamma, density)?);
    let (m, n, delta) = budget(spec, cfg);
    if let (Some(m), Some(n)) = (m, n) {
        let center = domain.bbox().center();
        let x = if domain.contains(&center) { center } else { xs[0].clone() };
        for &gamma in &cfg.gamma {
            let mut rep = sandwich_check(spec, &x, gamma, cfg.budget_d, m, n, &domain, density)?;
            rep.assumption = format!("sandwich gamma={gamma}");
            reports.push(rep);
        }
    }
    let status = if reports.iter().all(|r| r.pass) { Status::Pass } else { Status::Fail };
    let mut csv = String::from("assumption,pass,fitted\n");
    for r in &reports {
        let _ = writeln!(csv, "{},{},{}", r.assumption, r.pass, fitted_text(r));
    }
    let rows: Vec<Value> = reports
        .iter()
        .map(|r| json!({"assumption": r.assumption, "pass": r.pass, "fitted": r.fitted, "witness": r.witness, "notes": r.notes}))
        .collect();
    let body = json!({
        "experiment": "check",
        "in_range": spec.growth().in_range(),
        "constants": {"kappa_eps": Value::Null, "C_Omega_R": Value::Null, "D": cfg.budget_d, "M": m, "N": n, "delta": delta},
        "rows": rows,
        "grid": {"sample_points": xs.len(), "xi_samples": xis.len(), "density": density},
        "notes": ["sampled checks; a pass is evidence on the lattice, not a proof"],
    });
    Ok(finish(cfg, status, csv, obj(body), None))
}

fn fitted_text(r: &AssumptionReport) -> String {
    r.fitted.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn run_approx(cfg: &ExperimentConfig, spec: &NFunctionSpec, plot: bool) -> Result<Outcome, RunError> {
    let st = setup(cfg)?;
    let u = field(cfg, &st.gd)?;
    let eps = epsilons(cfg, st.r);
    let d = st.gd.grid().dim() as f64;
    let p = spec.growth().p;
    let case = if p > d { BoundCase::Integrable } else { BoundCase::Bounded };
    let pou = match &st.cover {
        Some(cover) => Some(build_partition(cover, st.gd.grid(), st.smoothing.expect("composite smoothing"))?),
        None => None,
    };
    let mut csv = String::from("epsilon,kappa,bound,measured,constant,holds\n");
    let mut rows = Vec::new();
    let mut all = true;
    let (mut bound_pts, mut meas_pts) = (Vec::new(), Vec::new());
    for &e in &eps {
        let b = match (&st.cover, &pou) {
            (Some(cover), Some(pou)) => grad_bound_general(&u, cover, pou, e, case, p)?,
            _ => match case {
                BoundCase::Bounded => grad_bound_case1(&u, e)?,
                BoundCase::Integrable => grad_bound_case2(&u, e, p)?,
            },
        };
        let holds = b.holds(BOUND_SLACK);
        all &= holds;
        let k = st.kappa(e);
        let _ = writeln!(csv, "{},{},{},{},{},{}", num(e), num(k), num(b.bound), num(b.measured), num(b.constant), holds);
        rows.push(json!({"epsilon": e, "kappa": k, "bound": b.bound, "measured": b.measured, "constant": b.constant, "holds": holds}));
        bound_pts.push((e, b.bound));
        meas_pts.push((e, b.measured));
    }
    let status = if all { Status::Pass } else { Status::Fail };
    let kappas = eps.iter().map(|&e| st.kappa(e)).collect();
    let body = json!({
        "experiment": "approx",
        "in_range": spec.growth().in_range(),
        "case": match case { BoundCase::Bounded => "bounded", BoundCase::Integrable => "integrable" },
        "bound_slack": BOUND_SLACK,
        "constants": constants(spec, cfg, kappas, st.locality()),
        "rows": rows,
        "grid": st.grid_json(cfg),
        "notes": [],
    });
    let svg = plot.then(|| {
        loglog("gradient sup bound", "epsilon", &[Series::new("bound", bound_pts), Series::new("measured", meas_pts)])
    });
    Ok(finish(cfg, status, csv, obj(body), svg))
}

fn run_converge(cfg: &ExperimentConfig, spec: &NFunctionSpec, plot: bool) -> Result<Outcome, RunError> {
    let st = setup(cfg)?;
    let u = field(cfg, &st.gd)?;
    let eps = epsilons(cfg, st.r);
    let opts = ConvergenceOptions { rel_tol: cfg.rel_tol, lux_tol: cfg.lux_tol, ..ConvergenceOptions::default() };
    let rep = convergence_run(spec, &u, &st.mode()?, &eps, &opts)?;
    let mut csv = String::from("epsilon,value,abs_err,modular_dist,lux_dist,seconds\n");
    for r in &rep.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            num(r.epsilon),
            num(r.value),
            num(r.abs_err),
            num(r.modular_dist),
            num(r.lux_dist),
            num(r.seconds)
        );
    }
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|r| {
            json!({"epsilon": r.epsilon, "kappa": r.kappa, "value": r.value, "abs_err": r.abs_err,
                   "modular_dist": r.modular_dist, "lux_dist": r.lux_dist})
        })
        .collect();
    let kappas = rep.rows.iter().map(|r| r.kappa).collect();
    let body = json!({
        "experiment": "converge",
        "in_range": rep.in_range,
        "reference": rep.reference,
        "rel_tol": rep.rel_tol,
        "floor": rep.floor,
        "constants": constants(spec, cfg, kappas, st.locality()),
        "rows": rows,
        "grid": st.grid_json(cfg),
        "notes": rep.notes,
    });
    let svg = plot.then(|| convergence_svg(&rep));
    Ok(finish(cfg, rep.verdict.into(), csv, obj(body), svg))
}

fn convergence_svg(rep: &ExperimentReport) -> String {
    let col = |f: fn(&molab_core::experiments::Row) -> f64| rep.rows.iter().map(|r| (r.epsilon, f(r))).collect();
    loglog(
        "H(S^eps u) -> H(u)",
        "epsilon",
        &[
            Series::new("abs_err", col(|r| r.abs_err)),
            Series::new("modular_dist", col(|r| r.modular_dist)),
            Series::new("lux_dist", col(|r| r.lux_dist)),
        ],
    )
}

fn vertex_domain(cfg: &ExperimentConfig, n: usize) -> Result<Arc<GridDomain>, RunError> {
    let domain = cfg.domain.build()?;
    let grid = Grid::covering(&domain.bbox(), n, 0.0, 0.0, Centering::Vertex)?;
    Ok(GridDomain::new(grid, domain)?)
}

fn minimize_options(cfg: &ExperimentConfig) -> MinimizeOptions {
    MinimizeOptions { max_iter: cfg.max_iter, step_tol: cfg.step_tol, ..MinimizeOptions::default() }
}

fn run_minimize(cfg: &ExperimentConfig, spec: &NFunctionSpec) -> Result<Outcome, RunError> {
    let gd = vertex_domain(cfg, cfg.n)?;
    let ext = sample(&cfg.boundary_fixture(), &gd);
    let res = minimize(spec, &ext, &minimize_options(cfg))?;
    let mut csv = String::from("iteration,smoothed_objective\n");
    for (i, v) in res.history.iter().enumerate() {
        let _ = writeln!(csv, "{i},{}", num(*v));
    }
    let body = json!({
        "experiment": "minimize",
        "in_range": spec.growth().in_range(),
        "objective": res.objective,
        "iterations": res.iterations,
        "final_step_norm": res.final_step_norm,
        "stop": format!("{:?}", res.stop),
        "boundary_id": res.boundary_id,
        "constants": constants(spec, cfg, Vec::new(), None),
        "rows": res.history,
        "grid": {"shape": gd.grid().shape(), "h": gd.grid().h(), "centering": "vertex", "pad": 0.0},
        "notes": ["rows hold the smoothed descent objective; `objective` is the unsmoothed energy"],
    });
    Ok(finish(cfg, Status::Completed, csv, obj(body), None))
}

fn run_gap(cfg: &ExperimentConfig, spec: &NFunctionSpec, plot: bool) -> Result<Outcome, RunError> {
    let domain = cfg.domain.build()?;
    let cover = build_cover(&domain)?;
    let rule = match cfg.epsilon.as_slice() {
        [] => EpsilonRule::SqrtScaled,
        [e] => EpsilonRule::Constant(e.resolve(cover.r)),
        _ => {
            return Err(molab_core::Error::Precondition("gap takes at most one `epsilon` (a fixed radius)".into()).into())
        }
    };
    let opts = GapOptions { minimize: minimize_options(cfg), rel_tol: cfg.rel_tol, slack: cfg.slack };
    let rep = gap_probe(spec, &domain, &cfg.boundary_fixture(), &cfg.resolution, rule, &opts)?;
    let mut csv = String::from("n,h,epsilon,inf_rough,inf_smooth,gap,iterations,seconds\n");
    for r in &rep.gap_rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.n,
            num(r.h),
            num(r.epsilon),
            num(r.inf_rough),
            num(r.inf_smooth),
            num(r.gap),
            r.iterations,
            num(r.seconds)
        );
    }
    let rows: Vec<Value> = rep
        .gap_rows
        .iter()
        .map(|r| {
            json!({"n": r.n, "h": r.h, "epsilon": r.epsilon, "inf_rough": r.inf_rough, "inf_smooth": r.inf_smooth,
                   "gap": r.gap, "iterations": r.iterations, "slack": r.slack})
        })
        .collect();
    let kappas = rep.gap_rows.iter().map(|r| 1.0 - 4.0 * r.epsilon / cover.r).collect();
    let body = json!({
        "experiment": "gap",
        "in_range": rep.in_range,
        "epsilon_rule": match rule { EpsilonRule::SqrtScaled => "R/8 sqrt(h/h0)".to_string(), EpsilonRule::Constant(e) => format!("constant {e}") },
        "rel_tol": rep.rel_tol,
        "constants": constants(spec, cfg, kappas, squeeze_locality_constant(&domain, cover.r).ok()),
        "rows": rows,
        "grid": {"shape": rep.grid_shape, "h": rep.h, "centering": "vertex", "pad": 0.0, "cover_r": cover.r, "pieces": cover.len()},
        "notes": rep.notes,
    });
    let svg = plot.then(|| {
        let gaps = rep.gap_rows.iter().map(|r| (r.h, r.gap)).collect();
        loglog("discrete gap", "h", &[Series::new("gap", gaps)])
    });
    Ok(finish(cfg, rep.verdict.into(), csv, obj(body), svg))
}

/// Drops the trailing `seconds` column, for comparing CSVs across runs.
pub fn strip_seconds(csv: &str) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else { return String::new() };
    let cols: Vec<&str> = header.split(',').collect();
    let Some(idx) = cols.iter().position(|c| *c == "seconds") else { return csv.to_string() };
    std::iter::once(header)
        .chain(lines)
        .map(|l| l.split(',').enumerate().filter(|(i, _)| *i != idx).map(|(_, v)| v).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}
