use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;

use cavsqueeze_cli::{run, Command, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cavsqueeze", version, about = "Cavity-mediated spin squeezing: evolution, optimization and checks")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// g/2π in Hz, used to annotate times in seconds.
    #[arg(long = "ref-rate-hz", global = true)]
    ref_rate_hz: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Squeezing trace from the moment equations.
    Evolve,
    /// Optimize the drive and detunings for one template.
    Optimize,
    /// Optimize across cooperativities and fit the power law.
    Sweep,
    /// Compare full model, intermediate model and moment equations.
    Oracle,
    /// Expected numbers of scattered atoms and lost photons.
    Budget,
    /// Parse and check a config without running it.
    Validate,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Evolve => Command::Evolve,
            Sub::Optimize => Command::Optimize,
            Sub::Sweep => Command::Sweep,
            Sub::Oracle => Command::Oracle,
            Sub::Budget => Command::Budget,
            Sub::Validate => Command::Validate,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Some(config) = cli.config else {
        eprintln!("config error: --config <path> is required");
        return ExitCode::from(2);
    };
    let opts = RunOptions { config, out: cli.out, seed: cli.seed, ref_rate_hz: cli.ref_rate_hz };
    let cmd = Command::from(cli.command);
    match panic::catch_unwind(|| run(cmd, &opts)) {
        Ok(Ok(outcome)) => {
            for line in &outcome.report {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Ok(Err(e)) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            eprintln!("internal error: numerical routine panicked");
            ExitCode::from(3)
        }
    }
}
