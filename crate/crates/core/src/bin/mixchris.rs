use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mixed_christoffel::runner::{self, Command};

/// Mixed Christoffel experiments on S².
///
/// Set MIXCHRIS_THREADS to fix the worker thread count.
#[derive(Parser)]
#[command(name = "mixchris", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Density, moments and pairing symmetry of two bodies.
    Measure(RunArgs),
    /// Solve for the unknown body with the selected condition checks.
    Solve(RunArgs),
    /// Run the condition checkers only.
    Check(RunArgs),
    /// Generate a density from `target`, solve, and compare.
    Roundtrip(RunArgs),
    /// Summarize a report JSON.
    Report {
        report: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    config: PathBuf,
    /// Override a config key, e.g. --set grid.n_theta=24. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write report.json and CSV fields into this directory instead of
    /// printing the report.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn execute(command: Command, args: &RunArgs) -> u8 {
    let config = match runner::load_config(&args.config, &args.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mixchris: {e}");
            return runner::exit_code_for(&e) as u8;
        }
    };
    let output = runner::run(command, &config);
    if let Some(err) = &output.report.error {
        eprintln!("mixchris: {}", err.message);
    }
    let written = match &args.out {
        Some(dir) => output.write_to(dir),
        None => output.to_json().map(|json| println!("{json}")),
    };
    if let Err(e) = written {
        eprintln!("mixchris: {e}");
        return 1;
    }
    output.exit_code() as u8
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("MIXCHRIS_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("mixchris: MIXCHRIS_THREADS must be a positive integer, got `{n}`");
                return ExitCode::from(1);
            }
        }
    }
    let code = match &cli.command {
        Cmd::Measure(a) => execute(Command::Measure, a),
        Cmd::Solve(a) => execute(Command::Solve, a),
        Cmd::Check(a) => execute(Command::Check, a),
        Cmd::Roundtrip(a) => execute(Command::Roundtrip, a),
        Cmd::Report { report } => match std::fs::read_to_string(report)
            .map_err(mixed_christoffel::Error::from)
            .and_then(|text| runner::cmd_report(&text))
        {
            Ok(summary) => {
                print!("{summary}");
                0
            }
            Err(e) => {
                eprintln!("mixchris: {e}");
                1
            }
        },
    };
    ExitCode::from(code)
}
