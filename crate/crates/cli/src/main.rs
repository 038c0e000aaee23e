use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entsearch_cli::{
    exit_code, render, run_scenario, scenario, CliError, Kind, RunOptions, EXIT_ERROR,
};
use entsearch_core::AmplitudeBudget;

#[derive(Parser)]
#[command(
    name = "entsearch",
    version,
    about = "Grover search and counting on entangled states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Success probability law against simulation.
    Find(Common),
    /// Counting circuit, window prediction and sampled estimate.
    Count(Common),
    /// Acceptance criteria.
    Verify(Common),
    /// Parameter grid, one CSV row per cell.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweep and verify.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Adds wall-clock times to the report (makes it non-reproducible).
    #[arg(long)]
    timings: bool,
}

fn execute(kind: Kind, args: &Common) -> Result<(String, i32, Vec<String>), CliError> {
    let scenario = scenario::load(&args.config)?;
    if scenario.kind != kind {
        return Err(CliError::Usage(format!(
            "scenario kind is `{}` but the `{}` command was given",
            scenario.kind.as_str(),
            kind.as_str()
        )));
    }
    if args.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let opts = RunOptions {
        workers: args.workers,
        seed: args.seed,
        timings: args.timings,
        budget: AmplitudeBudget::from_env(),
    };
    let base = args.config.parent().unwrap_or(Path::new("."));
    let report = run_scenario(scenario, &opts, base)?;
    Ok((
        render(&report)?,
        exit_code(&report),
        report.warnings.clone(),
    ))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    let (kind, args) = match &cli.command {
        Command::Find(a) => (Kind::Find, a),
        Command::Count(a) => (Kind::Count, a),
        Command::Verify(a) => (Kind::Verify, a),
        Command::Sweep(a) => (Kind::Sweep, a),
    };
    let (text, code, warnings) = match execute(kind, args) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let written = match &args.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_ERROR as u8);
    }
    ExitCode::from(code as u8)
}
