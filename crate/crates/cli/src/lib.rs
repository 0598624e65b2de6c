//! Batch front end: one subcommand per run, a `key = value` config file in,
//! CSV and JSON artifacts out.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value as Json};

use cavsqueeze::config::{read_params, Config, ConfigError, Reader, Value, PARAM_KEYS};
use cavsqueeze::moments::{evolve_squeezing, evolve_squeezing_auto, DEFAULT_STEPS};
use cavsqueeze::optimize::{
    delta_zero_check, optimize, scaling_sweep, sweep_template, Bounds, OptimizationProblem, SweepReport,
};
use cavsqueeze::oracle::{pair_transfer_time, validate_elimination, Frame, HilbertSpec, ValidationOptions};
use cavsqueeze::params::{check_validity, decoherence_budget, match_raman, Verdict};
use cavsqueeze::{PhysicalParams, VERSION};

pub const ARTIFACT: &str = "cavsqueeze";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evolve,
    Optimize,
    Sweep,
    Oracle,
    Budget,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
            Command::Oracle => "oracle",
            Command::Budget => "budget",
            Command::Validate => "validate",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            Command::Evolve,
            Command::Optimize,
            Command::Sweep,
            Command::Oracle,
            Command::Budget,
            Command::Validate,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable or malformed config, unknown keys, empty grids.
    Config(String),
    /// Refusals, numerical breakdown, infeasible or unconverged optimizations.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failure(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Failure(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn fail(e: impl fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub ref_rate_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Human-readable lines for stdout.
    pub report: Vec<String>,
}

/// Read, override and dispatch. Output files are written before a
/// convergence failure is reported so partial results survive.
pub fn run(cmd: Command, opts: &RunOptions) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(&opts.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", opts.config.display())))?;
    let cfg = load(&text, opts)?;
    run_config(cmd, &cfg, &opts.out)
}

/// Parse config text and fold in the command-line overrides.
pub fn load(text: &str, opts: &RunOptions) -> Result<Config, CliError> {
    let mut cfg = Config::parse(text)?;
    if let Some(seed) = opts.seed {
        cfg.set("seed", Value::Number(seed as f64));
    }
    if let Some(f) = opts.ref_rate_hz {
        cfg.set("ref_rate_hz", Value::Number(f));
    }
    Ok(cfg)
}

pub fn run_config(cmd: Command, cfg: &Config, out: &Path) -> Result<Outcome, CliError> {
    match cmd {
        Command::Evolve => cmd_evolve(&EvolveConfig::read(cfg)?, cfg, out),
        Command::Optimize => cmd_optimize(&OptimizeConfig::read(cfg)?, cfg, out),
        Command::Sweep => cmd_sweep(&SweepConfig::read(cfg)?, cfg, out),
        Command::Oracle => cmd_oracle(&OracleConfig::read(cfg)?, cfg, out),
        Command::Budget => cmd_budget(&BudgetConfig::read(cfg)?, cfg, out),
        Command::Validate => cmd_validate(cfg),
    }
}

fn check_command(r: &Reader<'_>, cmd: Command) -> Result<(), CliError> {
    match r.opt_str("command")? {
        Some(c) if c != cmd.name() => Err(CliError::Config(format!(
            "line {}: config is for '{c}', not '{cmd}'",
            r.line_of("command")
        ))),
        _ => Ok(()),
    }
}

/// Parameter block; `match_raman = true` derives Ω₂ from Ω₁ and leaves the
/// Ω₂ keys optional.
fn read_param_block(cfg: &Config, r: &Reader<'_>) -> Result<PhysicalParams, CliError> {
    if !r.bool_or("match_raman", false)? {
        return Ok(read_params(r)?);
    }
    for k in ["omega2_re", "omega2_im"] {
        if r.has(k) {
            return Err(CliError::Config(format!(
                "line {}: '{k}' conflicts with match_raman = true",
                r.line_of(k)
            )));
        }
    }
    let mut filled = cfg.clone();
    filled.set("omega2_re", Value::Number(0.0));
    let mut p = read_params(&filled.reader())?;
    for k in PARAM_KEYS {
        r.opt_f64(k)?;
    }
    p.omega_2 = match_raman(&p).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(p)
}

fn positive_opt(r: &Reader<'_>, key: &str) -> Result<Option<f64>, CliError> {
    match r.opt_f64(key)? {
        Some(x) if x <= 0.0 => Err(CliError::Config(format!(
            "line {}: key '{key}' must be positive, got {x}",
            r.line_of(key)
        ))),
        v => Ok(v),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub params: PhysicalParams,
    /// None picks the horizon automatically and extends it while the
    /// minimum sits on the last point.
    pub t_max: Option<f64>,
    pub n_steps: usize,
    pub ref_rate_hz: Option<f64>,
}

impl EvolveConfig {
    pub fn read(cfg: &Config) -> Result<Self, CliError> {
        let r = cfg.reader();
        check_command(&r, Command::Evolve)?;
        let params = read_param_block(cfg, &r)?;
        let t_max = positive_opt(&r, "t_max")?;
        let n_steps = r.u64_or("n_steps", DEFAULT_STEPS as u64)? as usize;
        if n_steps < 2 {
            return Err(CliError::Config(format!(
                "line {}: empty time grid (n_steps = {n_steps}, need at least 2)",
                r.line_of("n_steps")
            )));
        }
        let ref_rate_hz = positive_opt(&r, "ref_rate_hz")?;
        r.finish()?;
        Ok(Self { params, t_max, n_steps, ref_rate_hz })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeConfig {
    pub problem: OptimizationProblem,
    pub delta_check: bool,
}

/// Template from either the full parameter block or the cooperativity
/// shorthand (n_atoms, kappa, gamma_total, omega_ab, cooperativity).
fn read_problem(cfg: &Config, r: &Reader<'_>, cooperativity: Option<f64>) -> Result<OptimizationProblem, CliError> {
    let template = match cooperativity {
        Some(c) => {
            let n = r.opt_u64("n_atoms")?.ok_or_else(|| ConfigError::Missing("n_atoms".into()))?;
            let kappa = r.f64("kappa")?;
            let gamma = r.f64("gamma_total")?;
            let omega_ab = r.f64("omega_ab")?;
            if n == 0 || kappa <= 0.0 || gamma <= 0.0 {
                return Err(CliError::Config(
                    "cooperativity templates need n_atoms, kappa and gamma_total positive".into(),
                ));
            }
            let p = sweep_template(n, kappa, gamma, omega_ab, c);
            p.validate().map_err(|e| CliError::Config(e.to_string()))?;
            p
        }
        None => read_param_block(cfg, r)?,
    };
    let mut prob = OptimizationProblem::new(template);
    let bounds = |name: &str, default: Bounds| -> Result<Bounds, CliError> {
        Ok(Bounds::new(
            r.f64_or(&format!("{name}_min"), default.lo)?,
            r.f64_or(&format!("{name}_max"), default.hi)?,
        ))
    };
    prob.ratio = bounds("ratio", prob.ratio)?;
    prob.delta = bounds("delta", prob.delta)?;
    prob.delta_1 = bounds("delta1", prob.delta_1)?;
    prob.cavity_ratio_target = r.f64_or("cavity_ratio_target", prob.cavity_ratio_target)?;
    prob.omega1_scale = r.f64_or("omega1_scale", prob.omega1_scale)?;
    let s = &mut prob.settings;
    s.restarts = r.u64_or("restarts", s.restarts as u64)? as usize;
    s.max_iters = r.u64_or("max_iters", s.max_iters)?;
    s.sd_tolerance = r.f64_or("sd_tolerance", s.sd_tolerance)?;
    s.seed = r.u64_or("seed", s.seed)?;
    s.n_steps = r.u64_or("n_steps", s.n_steps as u64)? as usize;
    s.optimize_phase = r.bool_or("optimize_phase", s.optimize_phase)?;
    if s.n_steps < 2 {
        return Err(CliError::Config(format!("empty time grid (n_steps = {})", s.n_steps)));
    }
    Ok(prob)
}

impl OptimizeConfig {
    pub fn read(cfg: &Config) -> Result<Self, CliError> {
        let r = cfg.reader();
        check_command(&r, Command::Optimize)?;
        let c = r.opt_f64("cooperativity")?;
        let problem = read_problem(cfg, &r, c)?;
        let delta_check = r.bool_or("delta_check", false)?;
        r.finish()?;
        Ok(Self { problem, delta_check })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub cooperativities: Vec<f64>,
    pub problem: OptimizationProblem,
}

impl SweepConfig {
    pub fn read(cfg: &Config) -> Result<Self, CliError> {
        let r = cfg.reader();
        check_command(&r, Command::Sweep)?;
        let cooperativities =
            r.opt_list_f64("cooperativities")?.ok_or_else(|| ConfigError::Missing("cooperativities".into()))?;
        if cooperativities.is_empty() {
            return Err(CliError::Config(format!(
                "line {}: empty cooperativity grid",
                r.line_of("cooperativities")
            )));
        }
        let first = cooperativities[0];
        let problem = read_problem(cfg, &r, Some(if first > 0.0 { first } else { 1.0 }))?;
        r.finish()?;
        Ok(Self { cooperativities, problem })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub params: PhysicalParams,
    /// Grid as given, before any unit conversion.
    pub t_grid_input: Vec<f64>,
    /// "absolute" or "transfer" (fractions of π/χ).
    pub t_unit: String,
    pub options: ValidationOptions,
}

impl OracleConfig {
    pub fn read(cfg: &Config) -> Result<Self, CliError> {
        let r = cfg.reader();
        check_command(&r, Command::Oracle)?;
        let params = read_param_block(cfg, &r)?;
        let levels = r.u64_or("atom_levels", 3)? as usize;
        let cutoff = r.u64_or("cavity_cutoff", 2)? as usize;
        let t_grid_input = r.opt_list_f64("t_grid")?.ok_or_else(|| ConfigError::Missing("t_grid".into()))?;
        if t_grid_input.is_empty() {
            return Err(CliError::Config(format!("line {}: empty time grid", r.line_of("t_grid"))));
        }
        if t_grid_input.iter().any(|&t| t < 0.0) || t_grid_input.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::Config("t_grid must be nonnegative and nondecreasing".into()));
        }
        let t_unit = r.opt_str("t_unit")?.unwrap_or_else(|| "absolute".into());
        if t_unit != "absolute" && t_unit != "transfer" {
            return Err(CliError::Config(format!(
                "line {}: t_unit must be 'absolute' or 'transfer', got '{t_unit}'",
                r.line_of("t_unit")
            )));
        }
        let hilbert = HilbertSpec::new(params.n_atoms as usize, levels, cutoff);
        let mut options = ValidationOptions::new(hilbert, t_grid_input.clone());
        options.dt = positive_opt(&r, "dt")?;
        if let Some(name) = r.opt_str("integrator")? {
            options.integrator = name;
        }
        if let Some(frame) = r.opt_str("frame")? {
            options.frame = match frame.as_str() {
                "drive" => Frame::Drive,
                "ground" => Frame::Ground,
                other => {
                    return Err(CliError::Config(format!(
                        "line {}: frame must be 'drive' or 'ground', got '{other}'",
                        r.line_of("frame")
                    )))
                }
            };
        }
        options.stark_compensation = r.bool_or("stark_compensation", options.stark_compensation)?;
        r.finish()?;
        Ok(Self { params, t_grid_input, t_unit, options })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetConfig {
    pub params: PhysicalParams,
}

impl BudgetConfig {
    pub fn read(cfg: &Config) -> Result<Self, CliError> {
        let r = cfg.reader();
        check_command(&r, Command::Budget)?;
        let params = read_param_block(cfg, &r)?;
        r.finish()?;
        Ok(Self { params })
    }
}

/// Metadata block shared by every artifact.
pub fn meta(cmd: Command, cfg: &Config) -> Json {
    let config: serde_json::Map<String, Json> = cfg
        .resolved()
        .into_iter()
        .map(|(k, v)| (k, serde_json::to_value(v).expect("config values serialize")))
        .collect();
    json!({
        "artifact": ARTIFACT,
        "version": VERSION,
        "command": cmd.name(),
        "config": config,
    })
}

/// `#` comment lines carrying the same metadata for CSV files.
pub fn csv_preamble(cmd: Command, cfg: &Config) -> String {
    let mut s = format!("# {ARTIFACT} {VERSION} {cmd}\n");
    for (k, v) in cfg.resolved() {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    s
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| fail(format!("{}: {e}", dir.display())))?;
    let name = path.file_name().ok_or_else(|| fail(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(fail(format!("{}: {e}", path.display())));
    }
    Ok(())
}

/// Pretty JSON with every float fixed to 17 significant digits.
pub fn to_json_text(v: &Json) -> String {
    let mut s = String::new();
    write_json(v, 0, &mut s);
    s.push('\n');
    s
}

fn write_json(v: &Json, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Json::Null => out.push_str("null"),
        Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Json::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => out.push_str(&u.to_string()),
            (None, Some(i), _) => out.push_str(&i.to_string()),
            (_, _, Some(x)) => out.push_str(&format!("{x:.16e}")),
            _ => out.push_str("null"),
        },
        Json::String(s) => out.push_str(&Json::String(s.clone()).to_string()),
        Json::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            if items.iter().all(|x| x.is_number()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_json(x, 0, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(x, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Json::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Json::String(k.clone()).to_string());
                out.push_str(": ");
                write_json(x, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("report types serialize")
}

fn warn_validity(p: &PhysicalParams, report: &mut Vec<String>) -> Option<Json> {
    match check_validity(p) {
        Ok(v) => {
            for (name, ratio) in v.ratios() {
                if ratio.verdict != Verdict::Pass {
                    report.push(format!(
                        "warning: validity ratio {name} = {:.3e} ({:?})",
                        ratio.value, ratio.verdict
                    ));
                }
            }
            Some(to_json(&v))
        }
        Err(e) => {
            report.push(format!("warning: validity check unavailable: {e}"));
            None
        }
    }
}

pub fn cmd_evolve(c: &EvolveConfig, cfg: &Config, out: &Path) -> Result<Outcome, CliError> {
    let mut report = Vec::new();
    let validity = warn_validity(&c.params, &mut report);
    let trace = match c.t_max {
        Some(t) => evolve_squeezing(&c.params, t, c.n_steps),
        None => evolve_squeezing_auto(&c.params, c.n_steps),
    }
    .map_err(fail)?;
    let t_min_seconds = c.ref_rate_hz.map(|f| trace.t_min / (2.0 * std::f64::consts::PI * f));
    let summary = json!({
        "meta": meta(Command::Evolve, cfg),
        "min_xi2": trace.min_xi2,
        "t_min": trace.t_min,
        "t_max": trace.t_max,
        "t_min_seconds": t_min_seconds,
        "points": trace.times.len(),
        "truncated": to_json(&trace.truncated),
        "clamped_points": trace.clamped_points,
        "population_growth": trace.population_growth,
        "validity": validity,
    });
    let csv_path = out.join("trace.csv");
    let json_path = out.join("summary.json");
    write_atomic(&csv_path, (csv_preamble(Command::Evolve, cfg) + &trace.to_csv()).as_bytes())?;
    write_atomic(&json_path, to_json_text(&summary).as_bytes())?;
    report.push(format!("min xi2 = {:.6e} at t = {:.6e}", trace.min_xi2, trace.t_min));
    if let Some(s) = t_min_seconds {
        report.push(format!("t_min = {s:.6e} s"));
    }
    Ok(Outcome { files: vec![csv_path, json_path], report })
}

pub fn cmd_optimize(c: &OptimizeConfig, cfg: &Config, out: &Path) -> Result<Outcome, CliError> {
    let rep = optimize(&c.problem).map_err(fail)?;
    let check = if c.delta_check { Some(delta_zero_check(&c.problem).map_err(fail)?) } else { None };
    let doc = json!({
        "meta": meta(Command::Optimize, cfg),
        "optimum": to_json(&rep),
        "delta_check": check.as_ref().map(to_json),
    });
    let path = out.join("optimum.json");
    write_atomic(&path, to_json_text(&doc).as_bytes())?;
    let mut report = vec![format!(
        "xi2_min = {:.6e} at r = {:.6e}, delta = {:.6e}, delta1 = {:.6e}, t_min = {:.6e}",
        rep.xi2_min, rep.r, rep.delta, rep.delta_1, rep.t_min
    )];
    if let Some(d) = &check {
        report.push(match d.passed {
            Some(ok) => format!("delta = 0 check: gap {:.3e}, passed = {ok}", d.relative_gap),
            None => format!("delta = 0 check skipped: {}", d.side.explanation.clone().unwrap_or_default()),
        });
    }
    if !rep.feasible {
        return Err(fail(format!("no feasible point found; results in {}", path.display())));
    }
    if !rep.converged {
        return Err(fail(format!("optimizer did not converge; results in {}", path.display())));
    }
    Ok(Outcome { files: vec![path], report })
}

fn sweep_converged(rep: &SweepReport) -> bool {
    rep.points.iter().all(|p| p.report.as_ref().is_some_and(|r| r.feasible && r.converged))
}

pub fn cmd_sweep(c: &SweepConfig, cfg: &Config, out: &Path) -> Result<Outcome, CliError> {
    let rep = scaling_sweep(&c.cooperativities, &c.problem);
    let csv_path = out.join("sweep.csv");
    let json_path = out.join("fit.json");
    write_atomic(&csv_path, (csv_preamble(Command::Sweep, cfg) + &rep.to_csv()).as_bytes())?;
    let doc = json!({
        "meta": meta(Command::Sweep, cfg),
        "fit": to_json(&rep.fit),
        "points": to_json(&rep.points),
    });
    write_atomic(&json_path, to_json_text(&doc).as_bytes())?;
    let mut report: Vec<String> = rep
        .points
        .iter()
        .map(|p| match (p.xi2_min(), &p.error) {
            (Some(x), _) => format!("C = {:.3e}: xi2_min = {x:.6e}", p.cooperativity),
            (None, Some(e)) => format!("C = {:.3e}: {e}", p.cooperativity),
            (None, None) => format!("C = {:.3e}: infeasible", p.cooperativity),
        })
        .collect();
    if let Some(cf) = rep.fit.c_fixed_slope {
        report.push(format!("fitted constant (slope -1/2) = {cf:.6e}"));
    }
    if !sweep_converged(&rep) {
        return Err(fail(format!("not every sweep point converged; results in {}", out.display())));
    }
    Ok(Outcome { files: vec![csv_path, json_path], report })
}

pub fn cmd_oracle(c: &OracleConfig, cfg: &Config, out: &Path) -> Result<Outcome, CliError> {
    let mut opts = c.options.clone();
    if c.t_unit == "transfer" {
        let t = pair_transfer_time(&c.params).map_err(fail)?;
        opts.t_grid = c.t_grid_input.iter().map(|x| x * t).collect();
    }
    let rep = validate_elimination(&c.params, &opts).map_err(fail)?;
    let mut doc = to_json(&rep);
    doc.as_object_mut().expect("report is an object").insert("run".into(), meta(Command::Oracle, cfg));
    let path = out.join("validation.json");
    write_atomic(&path, to_json_text(&doc).as_bytes())?;
    let mut report = Vec::new();
    if !rep.meta.in_validity_regime {
        report.push(format!(
            "warning: outside the elimination regime (max ratio {:.3e})",
            rep.meta.validity.max_ratio()
        ));
    }
    for m in ["jz", "jpp"] {
        report.push(format!(
            "{m}: full/intermediate {:.3e}, intermediate/moments {:.3e}",
            rep.max_rel_dev_fi(m),
            rep.max_rel_dev_il(m)
        ));
    }
    Ok(Outcome { files: vec![path], report })
}

pub fn cmd_budget(c: &BudgetConfig, cfg: &Config, out: &Path) -> Result<Outcome, CliError> {
    let b = decoherence_budget(&c.params).map_err(fail)?;
    let doc = json!({
        "meta": meta(Command::Budget, cfg),
        "n_gamma": b.n_gamma,
        "n_kappa": b.n_kappa,
        "n_kappa_unbounded": b.n_kappa.is_none(),
    });
    let path = out.join("budget.json");
    write_atomic(&path, to_json_text(&doc).as_bytes())?;
    let kappa = b.n_kappa.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "unbounded".into());
    Ok(Outcome {
        files: vec![path],
        report: vec![format!("n_gamma = {:.6e}", b.n_gamma), format!("n_kappa = {kappa}")],
    })
}

/// Parse the config for the command it names and report without running.
pub fn cmd_validate(cfg: &Config) -> Result<Outcome, CliError> {
    let name = match cfg.raw("command") {
        Some(Value::Text(s)) => s.clone(),
        _ => return Err(CliError::Config("validate needs a 'command' key naming the target".into())),
    };
    let cmd = Command::from_name(&name)
        .filter(|c| *c != Command::Validate)
        .ok_or_else(|| CliError::Config(format!("unknown command '{name}'")))?;
    let mut report = vec![format!("config ok for '{cmd}'")];
    let params = match cmd {
        Command::Evolve => Some(EvolveConfig::read(cfg)?.params),
        Command::Optimize => Some(OptimizeConfig::read(cfg)?.problem.template),
        Command::Sweep => Some(SweepConfig::read(cfg)?.problem.template),
        Command::Oracle => {
            let c = OracleConfig::read(cfg)?;
            c.options.hilbert.validate().map_err(fail)?;
            Some(c.params)
        }
        Command::Budget => Some(BudgetConfig::read(cfg)?.params),
        Command::Validate => None,
    };
    if let Some(p) = params {
        warn_validity(&p, &mut report);
    }
    for (k, v) in cfg.resolved() {
        report.push(format!("  {k} = {v}"));
    }
    Ok(Outcome { files: Vec::new(), report })
}
