//! Command-line front end for the inference engine: run model files,
//! reproduce the bundled worked examples, and verify engine invariants
//! against a model.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 on
//! parse or validation errors.

mod examples;
mod model;
mod report;
mod util;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::util::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "kernelcat", version, about = "exact Bayesian kernel calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Report format; csv applies to curve queries.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for the randomized verification probes.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the queries of a model file.
    Run { path: PathBuf },
    /// Run a bundled example: urn | cards | monty | gp-demo | kalman-demo.
    Example { name: String },
    /// Run the invariant suite against a model file or example name.
    Verify { target: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(CliError::Validation(msg)) => {
            eprintln!("kernelcat: validation error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("kernelcat: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<ExitCode> {
    match &cli.command {
        Command::Run { path } => {
            let source = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let file = model::parse_model(&source)?;
            let execution = model::execute(&file)?;
            let digest = report::digest_of(source.as_bytes());
            emit(cli, &digest, &execution)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Example { name } => {
            let (digest, execution) = examples::run_example(name)?;
            emit(cli, &digest, &execution)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { target } => {
            let (label, source) = if examples::EXAMPLE_NAMES.contains(&target.as_str()) {
                (target.clone(), examples::example_source(target)?.to_owned())
            } else {
                let text = std::fs::read_to_string(target)
                    .map_err(|e| CliError::Io(format!("{target}: {e}")))?;
                (target.clone(), text)
            };
            let file = model::parse_model(&source)?;
            let checks = verify::verify_model(&file, cli.seed)?;
            let color = std::env::var_os("KERNELCAT_NO_COLOR").is_none();
            let mut failures = 0;
            for check in &checks {
                let (tag, code) = if check.passed {
                    ("ok", "\x1b[32m")
                } else {
                    failures += 1;
                    ("FAIL", "\x1b[31m")
                };
                if color {
                    println!("{code}{tag:>4}\x1b[0m  {} — {}", check.name, check.detail);
                } else {
                    println!("{tag:>4}  {} — {}", check.name, check.detail);
                }
            }
            println!(
                "{label}: {} checks, {} failed (seed {})",
                checks.len(),
                failures,
                cli.seed
            );
            Ok(if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn emit(cli: &Cli, digest: &str, execution: &model::Execution) -> CliResult<()> {
    let text = match cli.format {
        Format::Json => report::render_json(&report::build_report(digest, cli.seed, execution)),
        Format::Csv => report::render_csv(execution)?,
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
