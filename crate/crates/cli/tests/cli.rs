use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use cavsqueeze_cli::{load, run_config, CliError, Command, RunOptions};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn bundled(name: &str) -> String {
    fs::read_to_string(configs().join(name)).unwrap()
}

fn without(text: &str, keys: &[&str]) -> String {
    text.lines()
        .filter(|l| !keys.iter().any(|k| l.trim_start().starts_with(&format!("{k} "))))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn with(text: &str, key: &str, value: &str) -> String {
    let mut s = without(text, &[key]);
    s.push_str(&format!("{key} = {value}\n"));
    s
}

fn run_text(cmd: Command, text: &str, out: &Path) -> Result<cavsqueeze_cli::Outcome, CliError> {
    let cfg = load(text, &RunOptions::default())?;
    run_config(cmd, &cfg, out)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn binary(args: &[&str]) -> (i32, String, String) {
    let out = Proc::new(env!("CARGO_BIN_EXE_cavsqueeze")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn budget_text(base: &str) -> String {
    with(&without(base, &["t_max", "n_steps", "ref_rate_hz"]), "command", "\"budget\"")
}

#[test]
fn bundled_evolution_and_physical_time() {
    let dir = tempfile::tempdir().unwrap();
    run_text(Command::Evolve, &bundled("fig2.cfg"), dir.path()).unwrap();
    let s = json(&dir.path().join("summary.json"));
    let min = s["min_xi2"].as_f64().unwrap();
    assert!((0.05..=0.15).contains(&min), "{min}");
    assert!(s["t_min_seconds"].as_f64().unwrap() < 1e-6);
    assert_eq!(s["meta"]["config"]["ref_rate_hz"].as_f64(), Some(1e5));
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("# cavsqueeze "));
    assert!(csv.lines().any(|l| l == "# delta = 500.0"));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("t,xi2,"));
}

#[test]
fn dissipation_free_run_squeezes_more() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_text(Command::Evolve, &bundled("fig2.cfg"), a.path()).unwrap();
    run_text(Command::Evolve, &bundled("fig2_nodissipation.cfg"), b.path()).unwrap();
    let full = json(&a.path().join("summary.json"))["min_xi2"].as_f64().unwrap();
    let free = json(&b.path().join("summary.json"))["min_xi2"].as_f64().unwrap();
    assert!(free < full, "{free} vs {full}");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let base = bundled("fig2.cfg");
    let cases = [
        write("empty_grid.cfg", &with(&base, "n_steps", "0")),
        write("unknown.cfg", &with(&base, "colour", "3")),
        write("mismatch.cfg", &with(&base, "command", "\"oracle\"")),
        write("broken.cfg", "n_atoms 5\n"),
        dir.path().join("missing.cfg").to_str().unwrap().to_string(),
    ];
    for cfg in &cases {
        let (code, _, err) = binary(&["evolve", "--config", cfg, "--out", out]);
        assert_eq!(code, 2, "{cfg}: {err}");
        assert!(err.contains("config error"), "{err}");
    }
    let (code, _, _) = binary(&["evolve", "--out", out]);
    assert_eq!(code, 2);
    assert!(!dir.path().join("trace.csv").exists());
}

#[test]
fn binary_success_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig2.cfg");
    let (code, stdout, err) = binary(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--ref-rate-hz",
        "2e5",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("min xi2"));
    let s = json(&dir.path().join("summary.json"));
    assert_eq!(s["meta"]["config"]["ref_rate_hz"].as_f64(), Some(2e5));
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

fn optimize_text(c: f64) -> String {
    format!(
        "command = \"optimize\"\ncooperativity = {c}\nn_atoms = 1000000\nkappa = 100\ngamma_total = 100\nomega_ab = 1e5\n"
    )
}

#[test]
fn single_point_optimization() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = optimize_text(100.0);
    text.push_str("seed = 3\n");
    run_text(Command::Optimize, &text, dir.path()).unwrap();
    let o = json(&dir.path().join("optimum.json"));
    let x = o["optimum"]["xi2_min"].as_f64().unwrap();
    assert!((x - 0.07).abs() <= 0.3 * 0.07, "{x}");
    assert_eq!(o["meta"]["config"]["seed"].as_f64(), Some(3.0));
    assert!(o["delta_check"].is_null());
}

#[test]
fn infeasible_bounds_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = optimize_text(100.0);
    text.push_str("ratio_min = 5\nratio_max = 1\n");
    let p = dir.path().join("bad.cfg");
    fs::write(&p, text).unwrap();
    let (code, _, err) = binary(&["optimize", "--config", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("ratio"), "{err}");
}

#[test]
fn bundled_oracle_run() {
    let dir = tempfile::tempdir().unwrap();
    run_text(Command::Oracle, &bundled("oracle_n2.cfg"), dir.path()).unwrap();
    let v = json(&dir.path().join("validation.json"));
    assert_eq!(v["meta"]["in_validity_regime"], Value::Bool(true));
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 4 * 6);
    for r in recs.iter().filter(|r| r["moment"] == "jz" || r["moment"] == "jpp") {
        assert!(r["rel_dev_fi"].as_f64().unwrap() < 0.1, "{r}");
    }
    assert_eq!(v["run"]["command"], "oracle");
}

#[test]
fn oracle_refusals_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let base = bundled("oracle_n2.cfg");
    for text in [with(&base, "gamma_o", "1"), with(&base, "omega_ab", "0"), with(&base, "cavity_cutoff", "200")] {
        let err = run_text(Command::Oracle, &text, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
    }
}

#[test]
fn oracle_without_drive_has_zero_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let text = without(&bundled("oracle_n2.cfg"), &["omega1_re", "match_raman", "t_unit"]);
    let text = with(&with(&with(&text, "omega1_re", "0"), "omega2_re", "0"), "t_grid", "[1, 5, 20]");
    run_text(Command::Oracle, &text, dir.path()).unwrap();
    let v = json(&dir.path().join("validation.json"));
    for r in v["records"].as_array().unwrap() {
        assert_eq!(r["rel_dev_fi"].as_f64(), Some(0.0), "{r}");
        assert_eq!(r["rel_dev_il"].as_f64(), Some(0.0), "{r}");
    }
}

#[test]
fn budget_table() {
    let dir = tempfile::tempdir().unwrap();
    let base = budget_text(&bundled("fig2.cfg"));
    run_text(Command::Budget, &base, dir.path()).unwrap();
    let b = json(&dir.path().join("budget.json"));
    assert!((b["n_gamma"].as_f64().unwrap() - 5e4).abs() < 1e-8);
    assert!((b["n_kappa"].as_f64().unwrap() - 0.2).abs() < 1e-15);

    run_text(Command::Budget, &with(&base, "kappa", "0"), dir.path()).unwrap();
    let b = json(&dir.path().join("budget.json"));
    assert!((b["n_gamma"].as_f64().unwrap() - 5e4).abs() < 1e-8);
    assert_eq!(b["n_kappa"].as_f64(), Some(0.0));

    run_text(Command::Budget, &with(&base, "delta", "0"), dir.path()).unwrap();
    let b = json(&dir.path().join("budget.json"));
    assert!(b["n_kappa"].is_null());
    assert_eq!(b["n_kappa_unbounded"], Value::Bool(true));
}

#[test]
fn validate_is_a_dry_run() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["fig2.cfg", "fig2_nodissipation.cfg", "fig3.cfg", "oracle_n2.cfg"] {
        let out = run_text(Command::Validate, &bundled(name), dir.path()).unwrap();
        assert!(out.files.is_empty());
        assert!(out.report[0].starts_with("config ok"), "{name}");
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    let err = run_text(Command::Validate, &without(&bundled("fig2.cfg"), &["command"]), dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let err = run_text(Command::Validate, &with(&bundled("fig3.cfg"), "restarts", "many"), dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn match_raman_conflicts_with_explicit_drive() {
    let text = with(&bundled("oracle_n2.cfg"), "omega2_re", "3");
    let err = run_text(Command::Oracle, &text, Path::new("unused")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
