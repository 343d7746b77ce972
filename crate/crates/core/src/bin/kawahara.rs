use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kawahara_core::harness::{run, write_outputs, ExperimentConfig, Params, Subcommand};
use kawahara_core::Error;

const EXIT_NOT_ACCEPTED: u8 = 2;
const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 64;

/// Numerical experiments for the linear Kawahara operator.
#[derive(Debug, Parser)]
#[command(name = "kawahara", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// Flat JSON file of parameters (overridden by flags).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Print the run record to stdout.
    #[arg(long)]
    json: bool,
    /// Write CSV tables and plot data.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    params: Params,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match ExperimentConfig::resolve(cli.subcommand, cli.config.as_deref(), &cli.params, cli.out, cli.json, cli.csv) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let output = match run(&cfg) {
        Ok(o) => o,
        Err(e @ (Error::Config(_) | Error::Domain(_) | Error::Precondition(_))) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    if let Err(e) = write_outputs(&cfg, &output) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_FAILURE);
    }
    let rec = &output.record;
    if cfg.json {
        match serde_json::to_string_pretty(rec) {
            Ok(s) => println!("{s}"),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_FAILURE);
            }
        }
    }
    eprintln!(
        "{}: {} in {:.2}s",
        rec.subcommand.name(),
        if rec.accepted { "accepted" } else { "not accepted" },
        rec.wall_time.as_secs_f64()
    );
    for (k, v) in &rec.flags {
        if !v {
            eprintln!("  flag {k} = false");
        }
    }
    if rec.accepted {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_ACCEPTED)
    }
}
