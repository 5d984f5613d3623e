use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use perturbex_cli::selfcheck::selfcheck;
use perturbex_cli::{run_scenario, CliError, RunOptions, Tolerances};

#[derive(Parser)]
#[command(name = "perturbex", version, about = "Perturbation expansions for transfer operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its reports.
    Run {
        config: PathBuf,
        /// Exit with status 1 when a verdict fails.
        #[arg(long)]
        strict: bool,
        /// Print the verdict report on stdout.
        #[arg(long)]
        json: bool,
        /// Seed for randomized norm brackets.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, by default the scenario's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the embedded fixture suite.
    Selfcheck {
        #[arg(long)]
        json: bool,
    },
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("perturbex: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = match Tolerances::from_env() {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    match cli.command {
        Command::Run { config, strict, json, seed, out } => {
            let opts = RunOptions { strict, seed, out };
            let (outcome, written) = match run_scenario(&config, &opts, &tol) {
                Ok(x) => x,
                Err(e) => return fail(&e),
            };
            if json {
                emit(&serde_json::to_string_pretty(&outcome.verdict).expect("verdict serializes"));
            } else {
                for c in outcome.verdict["checks"].as_array().into_iter().flatten() {
                    let status = if c["pass"] == true { "pass" } else { "FAIL" };
                    emit(&format!("{:<20} {status}", c["name"].as_str().unwrap_or("?")));
                }
                emit(&format!("coefficients: {}", written.coefficients.display()));
                emit(&format!("remainders:   {}", written.remainders.display()));
                emit(&format!("verdict:      {}", written.verdict.display()));
            }
            if strict && !outcome.pass {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Selfcheck { json } => {
            let results = selfcheck(&tol);
            if json {
                emit(&serde_json::to_string_pretty(&results).expect("results serialize"));
            } else {
                for r in &results {
                    let status = if r.pass { "PASS" } else { "FAIL" };
                    emit(&format!("criterion {} ({}): {status} {}", r.criterion, r.name, r.detail));
                }
            }
            if results.iter().all(|r| r.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
