//! Subcommand execution: each one writes `<name>.csv` and
//! `<name>.manifest.json` and reports every failed check.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use stochvolterra_core::operators::HilbertVec;
use stochvolterra_core::resolvent::{convergence_report, resolvent_equation_residual};
use stochvolterra_core::specfun::{mittag_leffler, wright_phi};
use stochvolterra_core::stochconv::{
    ito_isometry_check, residual_ladder, yosida_convolution_convergence, PathEnsemble, ResidualKind, Simulator,
};

use crate::config::SimConfig;

/// Environment variable holding the worker count. It never changes results.
pub const WORKERS_ENV: &str = "STOCHVOLTERRA_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    MlEval,
    WrightEval,
    ResolventCheck,
    Converge,
    Simulate,
    Isometry,
    StrongResidual,
    YosidaStoch,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Subcommand::MlEval,
        Subcommand::WrightEval,
        Subcommand::ResolventCheck,
        Subcommand::Converge,
        Subcommand::Simulate,
        Subcommand::Isometry,
        Subcommand::StrongResidual,
        Subcommand::YosidaStoch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::MlEval => "ml-eval",
            Subcommand::WrightEval => "wright-eval",
            Subcommand::ResolventCheck => "resolvent-check",
            Subcommand::Converge => "converge",
            Subcommand::Simulate => "simulate",
            Subcommand::Isometry => "isometry",
            Subcommand::StrongResidual => "strong-residual",
            Subcommand::YosidaStoch => "yosida-stoch",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] stochvolterra_core::Error),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub fingerprint: String,
    pub version: String,
    pub subcommand: String,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
}

impl RunOutcome {
    pub fn failures(&self) -> Vec<&Check> {
        self.manifest.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Header plus rows of floats rendered with 17 significant digits.
struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
        }
    }

    fn row(&mut self, cells: &[Cell]) {
        let rendered: Vec<String> = cells.iter().map(Cell::render).collect();
        writeln!(self.text, "{}", rendered.join(",")).expect("writing to a String");
    }
}

enum Cell {
    Int(u64),
    Num(f64),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_float(*x),
            Cell::Empty => String::new(),
        }
    }
}

/// Fixed 17-significant-digit scientific rendering.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        // no "-0" in the output
        return format!("{:.16e}", 0.0);
    }
    format!("{x:.16e}")
}

/// Run on a pool of `workers` threads (`None`: rayon's default size).
pub fn run_with_workers(
    cmd: Subcommand,
    cfg: &SimConfig,
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<RunOutcome, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| RunError::Pool(e.to_string()))?;
    pool.install(|| run(cmd, cfg, out_dir))
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|n| *n > 0)
}

pub fn run(cmd: Subcommand, cfg: &SimConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let (csv, checks) = match cmd {
        Subcommand::MlEval => ml_eval(cfg)?,
        Subcommand::WrightEval => wright_eval(cfg)?,
        Subcommand::ResolventCheck => resolvent_check(cfg)?,
        Subcommand::Converge => converge(cfg)?,
        Subcommand::Simulate => simulate(cfg)?,
        Subcommand::Isometry => isometry(cfg)?,
        Subcommand::StrongResidual => strong_residual(cfg)?,
        Subcommand::YosidaStoch => yosida_stoch(cfg)?,
    };
    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let csv_path = out_dir.join(format!("{}.csv", cmd.name()));
    write(&csv_path, &csv.text)?;
    let manifest = RunManifest {
        fingerprint: cfg.fingerprint(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: cmd.name().to_string(),
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        outputs: vec![csv_path.file_name().unwrap().to_string_lossy().into_owned()],
        pass: checks.iter().all(|c| c.pass),
        checks,
    };
    let manifest_path = out_dir.join(format!("{}.manifest.json", cmd.name()));
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&manifest_path, &(json + "\n"))?;
    Ok(RunOutcome {
        csv_path,
        manifest_path,
        manifest,
    })
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

type Output = Result<(Csv, Vec<Check>), RunError>;

fn finite_check(values: impl IntoIterator<Item = f64>) -> Check {
    let bad = values.into_iter().filter(|v| !v.is_finite()).count();
    Check::new("finite", bad == 0, format!("{bad} non-finite values"))
}

fn ml_eval(cfg: &SimConfig) -> Output {
    let alpha = cfg.eval.alpha;
    let mut csv = Csv::new(&["z", "value"]);
    let mut checks = Vec::new();
    let mut values = Vec::new();
    for &z in &cfg.eval.z {
        match mittag_leffler(alpha, z) {
            Ok(v) => {
                csv.row(&[Cell::Num(z), Cell::Num(v)]);
                values.push(v);
            }
            Err(e) => checks.push(Check::new("evaluate", false, format!("E_{alpha}({z}): {e}"))),
        }
    }
    checks.push(finite_check(values));
    Ok((csv, checks))
}

fn wright_eval(cfg: &SimConfig) -> Output {
    let gamma = cfg.eval.gamma;
    let mut csv = Csv::new(&["z", "value"]);
    let mut checks = Vec::new();
    let mut values = Vec::new();
    for &z in &cfg.eval.z {
        match wright_phi(gamma, z) {
            Ok(v) => {
                csv.row(&[Cell::Num(z), Cell::Num(v)]);
                values.push(v);
            }
            Err(e) => checks.push(Check::new("evaluate", false, format!("Phi_{gamma}({z}): {e}"))),
        }
    }
    let negative = values.iter().filter(|v| **v < -1e-14).count();
    checks.push(Check::new("nonnegative", negative == 0, format!("{negative} negative density values")));
    checks.push(finite_check(values));
    Ok((csv, checks))
}

/// Test vector for the deterministic checks: `x0` or all ones.
fn test_vector(cfg: &SimConfig, modes: usize) -> HilbertVec {
    cfg.x0().unwrap_or_else(|| vec![1.0; modes].into())
}

fn resolvent_check(cfg: &SimConfig) -> Output {
    let spec = cfg.spec()?;
    let grid = cfg.time_grid()?;
    let x = test_vector(cfg, spec.modes());
    let profile = resolvent_equation_residual(&spec, &grid, &x)?;
    let mut csv = Csv::new(&["t", "residual"]);
    for (t, r) in profile.times.iter().zip(&profile.residuals) {
        csv.row(&[Cell::Num(*t), Cell::Num(*r)]);
    }
    let mut checks = vec![
        Check::new("zero_at_origin", profile.residuals[0] == 0.0, format!("r(0) = {}", profile.residuals[0])),
        finite_check(profile.residuals.iter().copied()),
    ];
    if let Some(limit) = cfg.checks.max_residual {
        checks.push(Check::new(
            "max_residual",
            profile.max() <= limit,
            format!("max residual {:e} against limit {limit:e}", profile.max()),
        ));
    }
    Ok((csv, checks))
}

fn converge(cfg: &SimConfig) -> Output {
    let op = cfg.operator()?;
    let grid = cfg.time_grid()?;
    let x = test_vector(cfg, op.modes());
    let report = convergence_report(cfg.resolvent.alpha, &op, &cfg.resolvent.n_ladder, &grid, &[x])?;
    let mut csv = Csv::new(&["n", "sup_error"]);
    for (n, e) in report.n_ladder.iter().zip(&report.sup_errors) {
        csv.row(&[Cell::Num(*n), Cell::Num(*e)]);
    }
    let slack = cfg.checks.monotone_slack;
    let checks = vec![
        Check::new(
            "monotone",
            report.is_monotone(slack),
            format!("errors {:?} with slack {slack}", report.sup_errors),
        ),
        Check::new(
            "bounded",
            report.is_bounded(),
            format!("max |E_alpha(mu t^alpha)| = {}", report.max_yosida_factor),
        ),
    ];
    Ok((csv, checks))
}

fn simulate(cfg: &SimConfig) -> Output {
    let spec = cfg.spec()?;
    let model = cfg.noise_model()?;
    let grid = cfg.time_grid()?;
    let x0 = cfg.x0();
    let ensemble = PathEnsemble::simulate(&spec, &model, &grid, x0.as_ref(), cfg.ensemble.paths)?;
    let modes = spec.modes();
    let mut header = vec!["path".to_string(), "t".to_string()];
    header.extend((1..=modes).map(|k| format!("w_{k}")));
    if x0.is_some() {
        header.extend((1..=modes).map(|k| format!("x_{k}")));
    }
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    let mut all = Vec::new();
    let mut origin_ok = true;
    for (p, w) in ensemble.convolution.iter().enumerate() {
        let x = ensemble.solution.as_ref().map(|(_, xs)| &xs[p]);
        origin_ok &= w.node(0).iter().all(|v| *v == 0.0);
        for (i, t) in grid.nodes().enumerate() {
            let mut row = vec![Cell::Int(p as u64), Cell::Num(t)];
            row.extend(w.node(i).iter().map(|v| Cell::Num(*v)));
            all.extend_from_slice(w.node(i));
            if let Some(x) = x {
                row.extend(x.node(i).iter().map(|v| Cell::Num(*v)));
                all.extend_from_slice(x.node(i));
            }
            csv.row(&row);
        }
    }
    let checks = vec![
        Check::new("convolution_starts_at_zero", origin_ok, "W(0) = 0 on every path"),
        finite_check(all),
    ];
    Ok((csv, checks))
}

fn isometry(cfg: &SimConfig) -> Output {
    let spec = cfg.spec()?;
    let model = cfg.noise_model()?;
    let grid = cfg.time_grid()?;
    let c = ito_isometry_check(&spec, &model, &grid, grid.n_steps(), cfg.ensemble.paths)?;
    let mut csv = Csv::new(&["t", "mc_estimate", "quadrature_value", "std_error"]);
    csv.row(&[
        Cell::Num(c.t),
        Cell::Num(c.mc_estimate),
        Cell::Num(c.quadrature_value),
        Cell::Num(c.std_error),
    ]);
    let z = cfg.checks.isometry_z;
    let checks = vec![Check::new(
        "isometry",
        c.within(z),
        format!(
            "|{} - {}| against {z} x {}",
            c.mc_estimate, c.quadrature_value, c.std_error
        ),
    )];
    Ok((csv, checks))
}

fn strong_residual(cfg: &SimConfig) -> Output {
    let spec = cfg.spec()?;
    let model = cfg.noise_model()?;
    let ladder = &cfg.grid.ladder;
    let report = residual_ladder(ResidualKind::Strong, &spec, &model, cfg.grid.t_end, ladder, cfg.ensemble.paths)?;
    let mut csv = Csv::new(&["n_steps", "rms_residual", "ratio"]);
    let ratios = report.ratios();
    for (i, (n, r)) in report.n_steps.iter().zip(&report.rms_final).enumerate() {
        // the coarsest grid has nothing to compare against
        let ratio = if i == 0 { Cell::Empty } else { Cell::Num(ratios[i - 1]) };
        csv.row(&[Cell::Int(*n as u64), Cell::Num(*r), ratio]);
    }

    let mut checks = Vec::new();
    let zero_noise = report.rms_final.iter().all(|r| *r == 0.0);
    if !zero_noise {
        let min = cfg.checks.min_ratio;
        checks.push(Check::new(
            "refinement_ratio",
            ratios.iter().all(|q| *q >= min),
            format!("ratios {ratios:?} against {min}"),
        ));
    }
    checks.push(Check::new(
        "zero_at_origin",
        report.mean_square.iter().all(|ms| ms[0] == 0.0),
        "R(0) = 0 on every grid",
    ));

    // weak residual per mode against the strong components on path 0
    let sim = Simulator::new(&spec, &model, &cfg.time_grid()?)?;
    let dw = sim.increments(0)?;
    let strong = sim.strong_residual_components(&dw, &sim.convolution(&dw)?)?;
    let mut gap: f64 = 0.0;
    for xi in 0..spec.modes() {
        for (i, r) in sim.weak_residual(&dw, xi)?.iter().enumerate() {
            gap = gap.max((r.abs() - strong.get(i, xi).abs()).abs());
        }
    }
    checks.push(Check::new("weak_matches_strong", gap <= 1e-12, format!("max gap {gap:e}")));
    Ok((csv, checks))
}

fn yosida_stoch(cfg: &SimConfig) -> Output {
    let op = cfg.operator()?;
    let model = cfg.noise_model()?;
    let grid = cfg.time_grid()?;
    let report = yosida_convolution_convergence(
        cfg.resolvent.alpha,
        &op,
        &model,
        &grid,
        &cfg.resolvent.n_ladder,
        cfg.ensemble.paths,
    )?;
    let mut csv = Csv::new(&["n", "sup_mean_square_error"]);
    for (n, e) in report.n_ladder.iter().zip(&report.sup_errors) {
        csv.row(&[Cell::Num(*n), Cell::Num(*e)]);
    }
    let slack = cfg.checks.monotone_slack;
    let checks = vec![Check::new(
        "monotone",
        report.is_monotone(slack),
        format!("errors {:?} with slack {slack}", report.sup_errors),
    )];
    Ok((csv, checks))
}
