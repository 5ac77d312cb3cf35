//! Config file grammar and validation.
//!
//! The file is TOML restricted to flat sections of scalars and lists:
//!
//! ```toml
//! [operator]
//! eigenvalues = [-1.0]          # or: kind = "dirichlet_laplacian", modes = 4, length = 1.0
//!
//! [resolvent]
//! alpha = 1.0
//! method = "diagonal"           # "subordinated" (needs beta) or "yosida" (needs n)
//! n_ladder = [10.0, 100.0, 1000.0]
//!
//! [noise]
//! q = 1.0                       # number, list, or rule "k^-p"
//! psi = 1.0                     # number, list, rule, or psi_table = "file.csv"
//! seed = 42
//!
//! [grid]
//! t_end = 1.0
//! n_steps = 128
//!
//! [ensemble]
//! paths = 100
//! ```
//!
//! Every problem found is reported, not only the first.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use stochvolterra_core::fracquad::TimeGrid;
use stochvolterra_core::noise::{NoiseModel, Psi};
use stochvolterra_core::operators::{HilbertVec, SpectralOperator};
use stochvolterra_core::resolvent::{Method, ResolventSpec};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

/// All problems found in one config file.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", lines.join("\n"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorConfig {
    DirichletLaplacian { modes: usize, length: f64 },
    Eigenvalues { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MethodConfig {
    Diagonal,
    Subordinated { beta: f64 },
    Yosida { n: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventConfig {
    pub alpha: f64,
    pub method: MethodConfig,
    pub n_ladder: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PsiConfig {
    Constant { values: Vec<f64> },
    Table { times: Vec<f64>, values: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseConfig {
    pub q: Vec<f64>,
    pub psi: PsiConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    pub t_end: f64,
    pub n_steps: usize,
    /// Refinement ladder for residual studies; each entry divides the largest.
    pub ladder: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub paths: u64,
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub z: Vec<f64>,
}

/// Thresholds of the internal assertions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChecksConfig {
    pub max_residual: Option<f64>,
    pub min_ratio: f64,
    pub isometry_z: f64,
    pub monotone_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub operator: OperatorConfig,
    pub resolvent: ResolventConfig,
    pub noise: NoiseConfig,
    pub grid: GridConfig,
    pub ensemble: EnsembleConfig,
    pub eval: EvalConfig,
    pub checks: ChecksConfig,
    /// Not part of the fingerprint: it does not affect any number.
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("operator", &["kind", "modes", "length", "eigenvalues"]),
    ("resolvent", &["alpha", "method", "beta", "n", "n_ladder"]),
    ("noise", &["q", "psi", "psi_table", "seed"]),
    ("grid", &["t_end", "n_steps", "ladder"]),
    ("ensemble", &["paths", "x0"]),
    ("eval", &["alpha", "gamma", "z"]),
    ("checks", &["max_residual", "min_ratio", "isometry_z", "monotone_slack"]),
    ("output", &["dir"]),
];

struct Ctx<'a> {
    text: &'a str,
    base_dir: Option<&'a Path>,
    errors: Vec<ConfigError>,
}

impl<'a> Ctx<'a> {
    /// Line of `key = ...` inside `[section]`, 1-based.
    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        let mut current = String::new();
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.split(']').next()) {
                current = name.trim().to_string();
                if key.is_empty() && current == section {
                    return Some(i + 1);
                }
                continue;
            }
            if current == section {
                if let Some((k, _)) = line.split_once('=') {
                    if k.trim().trim_matches('"') == key {
                        return Some(i + 1);
                    }
                }
            }
        }
        None
    }

    fn error(&mut self, section: &str, key: &str, message: impl Into<String>) {
        let full = if key.is_empty() { section.to_string() } else { format!("{section}.{key}") };
        self.errors.push(ConfigError {
            // missing keys point at their section header
            line: self.line_of(section, key).or_else(|| self.line_of(section, "")),
            key: full,
            message: message.into(),
        });
    }
}

struct Section<'t> {
    name: &'static str,
    table: Option<&'t Table>,
}

impl<'t> Section<'t> {
    fn get(&self, key: &str) -> Option<&'t Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn number(&self, ctx: &mut Ctx, key: &str) -> Option<f64> {
        match self.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            other => {
                ctx.error(self.name, key, format!("expected a number, found {}", other.type_str()));
                None
            }
        }
    }

    fn required_number(&self, ctx: &mut Ctx, key: &str) -> Option<f64> {
        if self.get(key).is_none() {
            ctx.error(self.name, key, "missing required key");
            return None;
        }
        self.number(ctx, key)
    }

    fn integer(&self, ctx: &mut Ctx, key: &str) -> Option<i64> {
        match self.get(key)? {
            Value::Integer(i) => Some(*i),
            other => {
                ctx.error(self.name, key, format!("expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn required_integer(&self, ctx: &mut Ctx, key: &str) -> Option<i64> {
        if self.get(key).is_none() {
            ctx.error(self.name, key, "missing required key");
            return None;
        }
        self.integer(ctx, key)
    }

    fn string(&self, ctx: &mut Ctx, key: &str) -> Option<&'t str> {
        match self.get(key)? {
            Value::String(s) => Some(s),
            other => {
                ctx.error(self.name, key, format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn number_list(&self, ctx: &mut Ctx, key: &str) -> Option<Vec<f64>> {
        match self.get(key)? {
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        Value::Float(x) => out.push(*x),
                        Value::Integer(i) => out.push(*i as f64),
                        other => {
                            ctx.error(self.name, key, format!("list entries must be numbers, found {}", other.type_str()));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            other => {
                ctx.error(self.name, key, format!("expected a list of numbers, found {}", other.type_str()));
                None
            }
        }
    }

    /// A number (broadcast), a list, or a rule `k^p` over `k = 1..=modes`.
    fn per_mode(&self, ctx: &mut Ctx, key: &str, modes: Option<usize>) -> Option<Vec<f64>> {
        match self.get(key)? {
            Value::Float(_) | Value::Integer(_) => {
                let v = self.number(ctx, key)?;
                Some(vec![v; modes?])
            }
            Value::Array(_) => self.number_list(ctx, key),
            Value::String(rule) => match parse_rule(rule) {
                Some(p) => Some((1..=modes?).map(|k| (k as f64).powf(p)).collect()),
                None => {
                    ctx.error(self.name, key, format!("rule {rule:?} is not of the form \"k^p\""));
                    None
                }
            },
            other => {
                ctx.error(self.name, key, format!("expected a number, list or rule, found {}", other.type_str()));
                None
            }
        }
    }
}

fn parse_rule(rule: &str) -> Option<f64> {
    let p = rule.trim().strip_prefix('k')?.trim_start().strip_prefix('^')?;
    p.trim().parse::<f64>().ok().filter(|p| p.is_finite())
}

/// Parse and validate a config file. `base_dir` resolves `noise.psi_table`.
pub fn parse_config_with_base(text: &str, base_dir: Option<&Path>) -> Result<SimConfig, ConfigErrors> {
    let mut ctx = Ctx {
        text,
        base_dir,
        errors: Vec::new(),
    };
    let root: Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            let e: toml::de::Error = e;
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            return Err(ConfigErrors(vec![ConfigError {
                line,
                key: "<syntax>".into(),
                message: e.message().trim().to_string(),
            }]));
        }
    };

    for (name, value) in &root {
        let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| s == name) else {
            ctx.error(name, "", "unknown section");
            continue;
        };
        match value {
            Value::Table(t) => {
                for (key, v) in t {
                    if !keys.contains(&key.as_str()) {
                        ctx.error(name, key, "unknown key");
                    } else if matches!(v, Value::Table(_)) {
                        ctx.error(name, key, "nested tables are not allowed");
                    }
                }
            }
            _ => ctx.error(name, "", "top-level keys must live in a [section]"),
        }
    }
    let section = |name: &'static str| Section {
        name,
        table: root.get(name).and_then(Value::as_table),
    };

    let operator = parse_operator(&mut ctx, &section("operator"));
    let modes = operator.as_ref().map(|o| match o {
        OperatorConfig::DirichletLaplacian { modes, .. } => *modes,
        OperatorConfig::Eigenvalues { values } => values.len(),
    });
    let resolvent = parse_resolvent(&mut ctx, &section("resolvent"));
    let noise = parse_noise(&mut ctx, &section("noise"), modes);
    let grid = parse_grid(&mut ctx, &section("grid"));
    let ensemble = parse_ensemble(&mut ctx, &section("ensemble"), modes);
    let eval = parse_eval(&mut ctx, &section("eval"), resolvent.as_ref().map(|r| r.alpha));
    let checks = parse_checks(&mut ctx, &section("checks"));
    let output_dir = section("output").string(&mut ctx, "dir").map(PathBuf::from);

    if !ctx.errors.is_empty() {
        return Err(ConfigErrors(ctx.errors));
    }
    let (Some(operator), Some(resolvent), Some(noise), Some(grid), Some(ensemble), Some(eval), Some(checks)) =
        (operator, resolvent, noise, grid, ensemble, eval, checks)
    else {
        unreachable!("every missing part records an error");
    };
    let cfg = SimConfig {
        operator,
        resolvent,
        noise,
        grid,
        ensemble,
        eval,
        checks,
        output_dir,
    };
    // the constructors re-check everything the core cares about
    let mut late = Vec::new();
    if let Err(e) = cfg.spec() {
        late.push(ConfigError {
            line: ctx.line_of("resolvent", ""),
            key: "resolvent".into(),
            message: e.to_string(),
        });
    }
    if let Err(e) = cfg.noise_model() {
        late.push(ConfigError {
            line: ctx.line_of("noise", ""),
            key: "noise".into(),
            message: e.to_string(),
        });
    }
    if late.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(late))
    }
}

pub fn parse_config(text: &str) -> Result<SimConfig, ConfigErrors> {
    parse_config_with_base(text, None)
}

pub fn load_config(path: &Path) -> Result<SimConfig, ConfigErrors> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigErrors(vec![ConfigError {
            line: None,
            key: "<file>".into(),
            message: format!("cannot read {}: {e}", path.display()),
        }])
    })?;
    parse_config_with_base(&text, path.parent())
}

fn parse_operator(ctx: &mut Ctx, s: &Section) -> Option<OperatorConfig> {
    if s.table.is_none() {
        ctx.error(s.name, "", "missing required section");
        return None;
    }
    let kind = s.string(ctx, "kind");
    if let Some(values) = s.number_list(ctx, "eigenvalues") {
        if kind.is_some_and(|k| k != "eigenvalues") {
            ctx.error(s.name, "kind", "an explicit eigenvalue list needs kind = \"eigenvalues\" or no kind");
            return None;
        }
        if values.is_empty() {
            ctx.error(s.name, "eigenvalues", "needs at least one eigenvalue");
            return None;
        }
        if let Some(bad) = values.iter().find(|l| !(**l <= 0.0) || !l.is_finite()) {
            ctx.error(s.name, "eigenvalues", format!("eigenvalue {bad} must be finite and <= 0"));
            return None;
        }
        return Some(OperatorConfig::Eigenvalues { values });
    }
    match kind {
        Some("dirichlet_laplacian") => {
            let modes = s.required_integer(ctx, "modes");
            let length = s.number(ctx, "length").unwrap_or(1.0);
            let length_ok = length > 0.0 && length.is_finite();
            if !length_ok {
                ctx.error(s.name, "length", format!("interval length {length} must be positive"));
            }
            match modes {
                Some(m) if m >= 1 => length_ok.then_some(OperatorConfig::DirichletLaplacian {
                    modes: m as usize,
                    length,
                }),
                Some(m) => {
                    ctx.error(s.name, "modes", format!("mode count {m} must be >= 1"));
                    None
                }
                None => None,
            }
        }
        Some(other) => {
            ctx.error(s.name, "kind", format!("unknown operator kind {other:?}"));
            None
        }
        None => {
            ctx.error(s.name, "eigenvalues", "give either eigenvalues or kind = \"dirichlet_laplacian\"");
            None
        }
    }
}

fn parse_resolvent(ctx: &mut Ctx, s: &Section) -> Option<ResolventConfig> {
    let alpha = s.required_number(ctx, "alpha");
    if let Some(a) = alpha {
        if !(a > 0.0 && a <= 2.0) {
            let why = if a > 2.0 { "; for alpha > 2 only bounded generators admit a resolvent family" } else { "" };
            ctx.error(s.name, "alpha", format!("alpha = {a} is outside (0, 2]{why}"));
        }
    }
    let method = match s.string(ctx, "method").unwrap_or("diagonal") {
        "diagonal" => Some(MethodConfig::Diagonal),
        "subordinated" => match s.required_number(ctx, "beta") {
            Some(beta) if alpha.is_some_and(|a| a < beta) && beta <= 2.0 => Some(MethodConfig::Subordinated { beta }),
            Some(beta) => {
                ctx.error(s.name, "beta", format!("subordination needs alpha < beta <= 2, got beta = {beta}"));
                None
            }
            None => None,
        },
        "yosida" => match s.required_number(ctx, "n") {
            Some(n) if n > 0.0 && n.is_finite() => Some(MethodConfig::Yosida { n }),
            Some(n) => {
                ctx.error(s.name, "n", format!("Yosida parameter n = {n} must be positive"));
                None
            }
            None => None,
        },
        other => {
            ctx.error(s.name, "method", format!("unknown method {other:?}; use diagonal, subordinated or yosida"));
            None
        }
    };
    let n_ladder = s.number_list(ctx, "n_ladder").unwrap_or_else(|| vec![10.0, 100.0, 1000.0]);
    if n_ladder.is_empty() || n_ladder.iter().any(|n| !(*n > 0.0 && n.is_finite())) {
        ctx.error(s.name, "n_ladder", "needs one or more positive Yosida parameters");
    }
    Some(ResolventConfig {
        alpha: alpha?,
        method: method?,
        n_ladder,
    })
}

fn parse_noise(ctx: &mut Ctx, s: &Section, modes: Option<usize>) -> Option<NoiseConfig> {
    if s.table.is_none() {
        ctx.error(s.name, "", "missing required section");
        return None;
    }
    let check_len = |ctx: &mut Ctx, key: &str, v: &Vec<f64>| {
        if let Some(k) = modes {
            if v.len() != k {
                ctx.error(
                    s.name,
                    key,
                    format!("has {} entries but the operator has K = {k} modes", v.len()),
                );
            }
        }
    };

    let q = if s.get("q").is_none() {
        ctx.error(s.name, "q", "missing required key");
        None
    } else {
        s.per_mode(ctx, "q", modes)
    };
    if let Some(q) = &q {
        check_len(ctx, "q", q);
        if let Some(bad) = q.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            ctx.error(s.name, "q", format!("covariance eigenvalue {bad} must be finite and >= 0"));
        }
    }

    let psi = match (s.get("psi").is_some(), s.string(ctx, "psi_table")) {
        (true, Some(_)) => {
            ctx.error(s.name, "psi_table", "give either psi or psi_table, not both");
            None
        }
        (true, None) => s.per_mode(ctx, "psi", modes).map(|values| {
            check_len(ctx, "psi", &values);
            if values.iter().any(|x| !x.is_finite()) {
                ctx.error(s.name, "psi", "multipliers must be finite");
            }
            PsiConfig::Constant { values }
        }),
        (false, Some(file)) => match read_psi_table(ctx.base_dir, file) {
            Ok((times, values)) => {
                if let Some(row) = values.first() {
                    check_len(ctx, "psi_table", row);
                }
                Some(PsiConfig::Table { times, values })
            }
            Err(msg) => {
                ctx.error(s.name, "psi_table", msg);
                None
            }
        },
        (false, None) => {
            ctx.error(s.name, "psi", "missing required key (or psi_table)");
            None
        }
    };

    let seed = match s.required_integer(ctx, "seed") {
        Some(v) if v >= 0 => Some(v as u64),
        Some(v) => {
            ctx.error(s.name, "seed", format!("seed {v} must be >= 0"));
            None
        }
        None => None,
    };
    Some(NoiseConfig {
        q: q?,
        psi: psi?,
        seed: seed?,
    })
}

/// CSV with header and columns `t, ψ_1, ..., ψ_K`.
fn read_psi_table(base: Option<&Path>, file: &str) -> Result<(Vec<f64>, Vec<Vec<f64>>), String> {
    let path = match base {
        Some(b) if Path::new(file).is_relative() => b.join(file),
        _ => PathBuf::from(file),
    };
    let mut reader = csv::Reader::from_path(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format!("{}: {e}", path.display()))?;
        let nums = record
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| format!("{} row {}: {e}", path.display(), i + 2))?;
        if nums.len() < 2 {
            return Err(format!("{} row {}: need t and at least one psi column", path.display(), i + 2));
        }
        times.push(nums[0]);
        values.push(nums[1..].to_vec());
    }
    Ok((times, values))
}

fn parse_grid(ctx: &mut Ctx, s: &Section) -> Option<GridConfig> {
    let t_end = s.required_number(ctx, "t_end");
    if let Some(t) = t_end {
        if !(t > 0.0 && t.is_finite()) {
            ctx.error(s.name, "t_end", format!("final time {t} must be positive"));
        }
    }
    let n_steps = match s.required_integer(ctx, "n_steps") {
        Some(n) if n >= 1 => Some(n as usize),
        Some(n) => {
            ctx.error(s.name, "n_steps", format!("n_steps = {n} must be >= 1"));
            None
        }
        None => None,
    };
    let ladder = match s.get("ladder") {
        Some(_) => s.number_list(ctx, "ladder").and_then(|l| {
            let ints: Vec<usize> = l.iter().filter(|x| x.fract() == 0.0 && **x >= 1.0).map(|x| *x as usize).collect();
            let finest = ints.iter().copied().max().unwrap_or(0);
            if ints.len() != l.len() || ints.is_empty() || ints.iter().any(|n| finest % n != 0) {
                ctx.error(s.name, "ladder", "needs positive integers that all divide the largest entry");
                None
            } else {
                Some(ints)
            }
        }),
        None => n_steps.map(|n| {
            if n % 4 == 0 {
                vec![n / 4, n / 2, n]
            } else {
                vec![n]
            }
        }),
    };
    let t_end = t_end.filter(|t| *t > 0.0 && t.is_finite())?;
    Some(GridConfig {
        t_end,
        n_steps: n_steps?,
        ladder: ladder?,
    })
}

fn parse_ensemble(ctx: &mut Ctx, s: &Section, modes: Option<usize>) -> Option<EnsembleConfig> {
    let paths = match s.required_integer(ctx, "paths") {
        Some(m) if m >= 1 => Some(m as u64),
        Some(m) => {
            ctx.error(s.name, "paths", format!("ensemble size M = {m} must be >= 1"));
            None
        }
        None => None,
    };
    let x0 = s.number_list(ctx, "x0");
    if let (Some(x0), Some(k)) = (&x0, modes) {
        if x0.len() != k {
            ctx.error(s.name, "x0", format!("has {} entries but the operator has K = {k} modes", x0.len()));
        }
    }
    Some(EnsembleConfig { paths: paths?, x0 })
}

fn parse_eval(ctx: &mut Ctx, s: &Section, default_alpha: Option<f64>) -> Option<EvalConfig> {
    let alpha = s.number(ctx, "alpha").or(default_alpha);
    let gamma = s.number(ctx, "gamma").unwrap_or(0.5);
    if !(gamma > 0.0 && gamma < 1.0) {
        ctx.error(s.name, "gamma", format!("Wright order gamma = {gamma} must lie in (0, 1)"));
    }
    let z = s
        .number_list(ctx, "z")
        .unwrap_or_else(|| (0..=10).map(|i| f64::from(i) * 0.5).collect());
    Some(EvalConfig { alpha: alpha?, gamma, z })
}

fn parse_checks(ctx: &mut Ctx, s: &Section) -> Option<ChecksConfig> {
    let positive = |ctx: &mut Ctx, key: &str, default: f64| {
        let v = s.number(ctx, key).unwrap_or(default);
        if !(v > 0.0 && v.is_finite()) {
            ctx.error(s.name, key, format!("threshold {v} must be positive"));
        }
        v
    };
    let max_residual = s.number(ctx, "max_residual");
    Some(ChecksConfig {
        max_residual,
        min_ratio: positive(ctx, "min_ratio", 1.3),
        isometry_z: positive(ctx, "isometry_z", 4.0),
        monotone_slack: positive(ctx, "monotone_slack", 1.05),
    })
}

impl SimConfig {
    pub fn operator(&self) -> stochvolterra_core::Result<SpectralOperator> {
        match &self.operator {
            OperatorConfig::DirichletLaplacian { modes, length } => SpectralOperator::dirichlet_laplacian(*modes, *length),
            OperatorConfig::Eigenvalues { values } => SpectralOperator::new(values.clone(), "eigenvalues"),
        }
    }

    pub fn spec(&self) -> stochvolterra_core::Result<ResolventSpec> {
        let method = match self.resolvent.method {
            MethodConfig::Diagonal => Method::Diagonal,
            MethodConfig::Subordinated { beta } => Method::Subordinated { beta },
            MethodConfig::Yosida { n } => Method::Yosida { n },
        };
        ResolventSpec::new(self.resolvent.alpha, method, self.operator()?)
    }

    pub fn noise_model(&self) -> stochvolterra_core::Result<NoiseModel> {
        let psi = match &self.noise.psi {
            PsiConfig::Constant { values } => Psi::Constant(values.clone()),
            PsiConfig::Table { times, values } => Psi::Table {
                times: times.clone(),
                values: values.clone(),
            },
        };
        NoiseModel::new(self.noise.q.clone(), psi, self.noise.seed)
    }

    pub fn time_grid(&self) -> stochvolterra_core::Result<TimeGrid> {
        TimeGrid::new(self.grid.t_end, self.grid.n_steps)
    }

    pub fn x0(&self) -> Option<HilbertVec> {
        self.ensemble.x0.clone().map(HilbertVec::from)
    }

    /// Canonical JSON: keys sorted, no whitespace.
    pub fn canonical_json(&self) -> String {
        // serde_json's map keeps keys sorted, which makes the text canonical
        serde_json::to_value(self).expect("config serializes").to_string()
    }

    /// SHA-256 of [`Self::canonical_json`], hex encoded.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        Sha256::digest(self.canonical_json().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
