//! Command-line front end.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{ConstantsChoice, RunConfig};
use crate::error::{Error, Result};
use crate::report::{run_empirical, run_sweep, run_validate, write_domain, Written};
use crate::selftest;

#[derive(Debug, Parser)]
#[command(
    name = "lmnpt",
    version,
    about = "Travel-time percentile estimation from L-moments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo comparison on theoretical distributions.
    Validate(RunArgs),
    /// Sample-size series for the configured scenarios.
    Sweep(RunArgs),
    /// Windowed comparison on a travel-record CSV.
    Empirical(RunArgs),
    /// Boundary of the LMNPT validity domain.
    Domain {
        #[arg(long, default_value = "domain.csv")]
        out: PathBuf,
        /// τ4 spacing of boundary rows.
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        #[arg(long, value_enum, default_value_t = ConstantsArg::Published)]
        constants: ConstantsArg,
    },
    /// Constant recovery and brute-force oracle checks.
    Selftest,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConstantsArg {
    Published,
    Precise,
}

impl From<ConstantsArg> for ConstantsChoice {
    fn from(c: ConstantsArg) -> Self {
        match c {
            ConstantsArg::Published => ConstantsChoice::Published,
            ConstantsArg::Precise => ConstantsChoice::Precise,
        }
    }
}

fn load(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn announce(written: &Written) {
    for p in &written.0 {
        println!("wrote {}", p.display());
    }
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Validate(args) => {
            let (summary, written) = run_validate(&load(&args)?)?;
            for r in &summary.reports {
                println!(
                    "{:<44} VR {:>7.2}%  MAPE {:>6.2}%  R² {:.3}",
                    r.label,
                    100.0 * r.vr,
                    100.0 * r.mape.mean,
                    r.r2.mean
                );
            }
            announce(&written);
        }
        Command::Sweep(args) => {
            let (summary, written) = run_sweep(&load(&args)?)?;
            println!("{} sweep entries", summary.sweeps.len());
            announce(&written);
        }
        Command::Empirical(args) => {
            let (summary, written) = run_empirical(&load(&args)?)?;
            if let Some(i) = &summary.ingest {
                println!(
                    "{} rows: {} records, {} rejected; {} windows, {} windows dropped",
                    i.rows, i.records, i.rejected_rows, i.windows, i.dropped_windows
                );
            }
            for r in &summary.reports {
                println!(
                    "{:<36} VR {:>7.2}%  MAPE {:>6.2}%",
                    r.label,
                    100.0 * r.vr,
                    100.0 * r.mape.mean
                );
            }
            announce(&written);
        }
        Command::Domain {
            out,
            step,
            constants,
        } => {
            let k = ConstantsChoice::from(constants).constants();
            let points = write_domain(&out, step, &k)?;
            println!(
                "{} boundary rows for tau4 in [{:.6}, {:.6}]; wrote {}",
                points.len(),
                k.tau4_lower(),
                k.tau4_upper(),
                out.display()
            );
        }
        Command::Selftest => {
            let checks = selftest::run_all();
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 on a
/// runtime failure, 2 on a usage error.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage(&e) {
                2
            } else {
                1
            }
        }
    }
}

fn is_usage(e: &Error) -> bool {
    e.is_usage() || matches!(e, Error::Infeasible { .. } | Error::Domain { .. })
}
