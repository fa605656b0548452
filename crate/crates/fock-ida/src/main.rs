//! Command-line driver: `run <config>` executes one experiment from a JSON
//! configuration and writes CSV + JSON artifacts, `catalog` lists the
//! built-in symbol families, and `check` runs the acceptance suite.
//!
//! Exit codes: 0 on success, 1 on a numerical failure (an acceptance
//! threshold breached, or a computation error), 2 on an invalid
//! configuration or usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fock_ida::config::RunConfig;
use fock_ida::{checks, experiments, symbols, Error};

#[derive(Parser)]
#[command(
    name = "fock-ida",
    version,
    about = "Numerical toolkit for Hankel and Toeplitz operators on weighted Fock spaces",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON configuration file.
    Run {
        /// Path to the JSON configuration file.
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the configured random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured truncation order.
        #[arg(long)]
        order: Option<usize>,
    },
    /// List the built-in symbol families.
    Catalog,
    /// Run the acceptance suite and print one verdict line per criterion.
    Check,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            out_dir,
            seed,
            order,
        } => run_command(&config, out_dir, seed, order),
        Command::Catalog => catalog_command(),
        Command::Check => check_command(),
    }
}

fn run_command(
    path: &std::path::Path,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    order: Option<usize>,
) -> ExitCode {
    let loaded = RunConfig::load(path).and_then(|mut config| {
        if let Some(dir) = out_dir {
            config.out_dir = dir;
        }
        if let Some(seed) = seed {
            config.seed = seed;
        }
        if let Some(order) = order {
            config.order = order;
        }
        // Flag overrides bypass the load-time validation, so re-check.
        config.validate()?;
        Ok(config)
    });
    let config = match loaded {
        Ok(config) => config,
        Err(e) => return fail(e),
    };
    match experiments::run(&config) {
        Ok(artifacts) => {
            println!("wrote {}", artifacts.csv_path.display());
            println!("wrote {}", artifacts.summary_path.display());
            for check in &artifacts.summary.checks {
                println!(
                    "  {}: {} — {}",
                    check.name,
                    if check.pass { "pass" } else { "FAIL" },
                    check.detail
                );
            }
            if !artifacts.summary.rows_exceeding_delta.is_empty() {
                println!(
                    "  convergence deltas above {}: {}",
                    artifacts.summary.delta_tolerance,
                    artifacts.summary.rows_exceeding_delta.join("; ")
                );
            }
            if artifacts.summary.all_pass {
                println!("result: pass");
                ExitCode::SUCCESS
            } else {
                println!("result: FAIL");
                ExitCode::from(1)
            }
        }
        Err(e) => fail(e),
    }
}

fn catalog_command() -> ExitCode {
    let entries = symbols::catalog();
    let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
    for entry in &entries {
        println!(
            "{:width$}  {:20}  {}",
            entry.name,
            format!("{:?}", entry.growth),
            entry.description
        );
    }
    println!();
    println!(
        "Every family also accepts \"conjugate\": true in a run configuration, \
         which conjugates the symbol pointwise."
    );
    ExitCode::SUCCESS
}

fn check_command() -> ExitCode {
    let results = checks::run_all();
    let mut all_pass = true;
    for r in &results {
        println!("{}", r.line());
        all_pass &= r.pass;
    }
    println!(
        "acceptance: {}/{} criteria pass",
        results.iter().filter(|r| r.pass).count(),
        results.len()
    );
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}
