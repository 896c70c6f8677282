//! `vortex`: scenario-driven front end for the alpha-vortex library.
//!
//! `vortex run <scenario.json> --out <dir>` executes one scenario and writes
//! `trajectory.csv` and `summary.json`; `vortex sweep --alphas ... --template
//! <file> --out <dir>` runs a plane-field template across a list of kernel
//! exponents and aggregates the fitted Hölder exponents against `1/(alpha+1)`.
//!
//! Exit codes: 0 success, 2 scenario/schema error, 3 integration failure,
//! 4 analysis precondition failure, 1 sweep with failed rows.

use alpha_vortex::scenario::{run_scenario_file, sweep, Overrides, Scenario};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "vortex",
    version,
    about = "Point-vortex collapse simulator and verifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one scenario file and write trajectory.csv + summary.json.
    Run {
        /// Scenario JSON (schema-versioned).
        scenario: PathBuf,
        /// Output directory for the artifacts.
        #[arg(long)]
        out: PathBuf,
        /// Override the relative tolerance (abs_tol becomes rel/100).
        #[arg(long)]
        tol: Option<f64>,
        /// Override the collapse radius.
        #[arg(long)]
        collapse_radius: Option<f64>,
        /// Override the seed of random initial data.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a plane-field template once per exponent and tabulate the fits.
    Sweep {
        /// Comma-separated kernel exponents.
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        /// Template scenario JSON.
        #[arg(long)]
        template: PathBuf,
        /// Output directory (per-run subdirectories plus sweep.csv and
        /// sweep_summary.json).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        collapse_radius: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            out,
            tol,
            collapse_radius,
            seed,
        } => {
            let overrides = Overrides {
                rel_tol: tol,
                collapse_radius,
                seed,
            };
            match run_scenario_file(&scenario, &out, &overrides) {
                Ok(output) => {
                    let summary = &output.summary;
                    println!(
                        "{}: {} vortices, termination {}{}",
                        summary.field,
                        summary.vortex_count,
                        summary.termination,
                        summary
                            .t_c
                            .map(|t| format!(" at t_c = {t:.12e}"))
                            .unwrap_or_default()
                    );
                    println!("artifacts in {}", out.display());
                    ExitCode::SUCCESS
                }
                Err(failure) => {
                    eprintln!("{failure}");
                    ExitCode::from(failure.exit_code() as u8)
                }
            }
        }
        Command::Sweep {
            alphas,
            template,
            out,
            tol,
            collapse_radius,
            seed,
        } => {
            if alphas.is_empty() {
                eprintln!("usage error: --alphas needs at least one exponent");
                return ExitCode::from(2);
            }
            let overrides = Overrides {
                rel_tol: tol,
                collapse_radius,
                seed,
            };
            let template = match Scenario::from_path(&template) {
                Ok(t) => t,
                Err(failure) => {
                    eprintln!("{failure}");
                    return ExitCode::from(failure.exit_code() as u8);
                }
            };
            match sweep(&alphas, &template, &out, &overrides) {
                Ok((summary, any_failed)) => {
                    for row in &summary.rows {
                        match (row.exponent, row.expected_exponent) {
                            (Some(e), Some(x)) => println!(
                                "alpha = {}: beta = {e:.6} (expected {x:.6}), {}",
                                row.alpha, row.status
                            ),
                            _ => println!("alpha = {}: {}", row.alpha, row.status),
                        }
                    }
                    println!("table in {}", out.join("sweep.csv").display());
                    if any_failed {
                        ExitCode::from(1)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(failure) => {
                    eprintln!("{failure}");
                    ExitCode::from(failure.exit_code() as u8)
                }
            }
        }
    }
}
