use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod run;

use config::Flags;
use run::Failure;

/// Exit codes: 0 pass, 1 verification failure, 2 configuration error,
/// 3 numerical-environment error.
#[derive(Parser)]
#[command(name = "shapiro", version, about = "Verification suites and horospherical transform tools for free quantum motion on hyperbolic 3-space")]
struct Cli {
    /// Seed for every sampled point cloud
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override one row tolerance (repeatable)
    #[arg(long, global = true, value_name = "RELATION=VALUE")]
    tolerance: Vec<String>,

    /// Override one quadrature knob (repeatable): spherical-degree,
    /// radial-order, radial-cutoff, rho-max, rho-count
    #[arg(long, global = true, value_name = "KEY=VALUE")]
    quad: Vec<String>,

    /// Directory for reports and plot data
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Report format: json, csv or both
    #[arg(long, global = true)]
    format: Option<String>,

    /// Treat quadrature warnings as fatal
    #[arg(long, global = true)]
    strict: bool,

    /// Comma-separated spectral values restricting spectral sweeps
    #[arg(long, global = true, value_name = "LIST", allow_hyphen_values = true)]
    rho_grid: Option<String>,

    /// Line-oriented key=value config file; flags win on conflict
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the classical bracket relations on random phase-space clouds
    VerifyClassical,
    /// Check operator symmetry, ladder actions and coefficient identities
    VerifyQuantum,
    /// Run one transform operation and write its artifacts
    Transform {
        /// Operation to run
        #[arg(value_parser = ["forward", "inverse", "roundtrip", "plancherel", "ggpath"])]
        direction: String,
        /// Test function name; a spectrum CSV path for inverse; "suite" runs
        /// the norm-identity battery under plancherel
        target: String,
        /// Numeric parameters for the named test function
        #[arg(allow_hyphen_values = true)]
        params: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = Flags {
        seed: cli.seed,
        tolerance: &cli.tolerance,
        quad: &cli.quad,
        out: cli.out.as_deref(),
        format: cli.format.as_deref(),
        strict: cli.strict,
        rho_grid: cli.rho_grid.as_deref(),
    };
    let cfg = match config::resolve(cli.config.as_deref(), &flags) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            return ExitCode::from(2);
        }
    };
    let outcome = match &cli.command {
        Command::VerifyClassical => run::verify_classical(&cfg),
        Command::VerifyQuantum => run::verify_quantum(&cfg),
        Command::Transform {
            direction,
            target,
            params,
        } => run::transform(&cfg, direction, target, params),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical environment error: {msg}");
            ExitCode::from(3)
        }
    }
}
