//! Bundled configs against stored outputs. `CAVSQUEEZE_BLESS=1` rewrites them.

use std::fs;
use std::path::{Path, PathBuf};

use cavsqueeze_cli::{load, run_config, Command, RunOptions};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn check(cmd: Command, config: &str) {
    let text = fs::read_to_string(root().join("../../configs").join(config)).unwrap();
    let cfg = load(&text, &RunOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_config(cmd, &cfg, dir.path()).unwrap();
    let golden = root().join("tests/golden").join(config.trim_end_matches(".cfg"));
    let bless = std::env::var_os("CAVSQUEEZE_BLESS").is_some();
    for file in &outcome.files {
        let name = file.file_name().unwrap();
        let got = fs::read(file).unwrap();
        let path = golden.join(name);
        if bless {
            fs::create_dir_all(&golden).unwrap();
            fs::write(&path, &got).unwrap();
            continue;
        }
        let want = fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(got == want, "{} differs from {}", file.display(), path.display());
    }
}

#[test]
fn evolve_dissipative() {
    check(Command::Evolve, "fig2.cfg");
}

#[test]
fn evolve_dissipation_free() {
    check(Command::Evolve, "fig2_nodissipation.cfg");
}

#[test]
fn cooperativity_sweep() {
    check(Command::Sweep, "fig3.cfg");
}

#[test]
fn two_atom_oracle() {
    check(Command::Oracle, "oracle_n2.cfg");
}
