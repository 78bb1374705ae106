use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use contraq::cli_io::{execute, Invocation, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Rates,
    Modulus,
    Lemmas,
    Contract,
    Spline,
    Deconv,
    Report,
}

/// Posterior contraction laboratory for linear inverse problems.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Cmd,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the manifest, report, CSV and plot script.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// `key=value` override, applied after the file; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let subcommand = match cli.subcommand {
        Cmd::Rates => Subcommand::Rates,
        Cmd::Modulus => Subcommand::Modulus,
        Cmd::Lemmas => Subcommand::Lemmas,
        Cmd::Contract => Subcommand::Contract,
        Cmd::Spline => Subcommand::Spline,
        Cmd::Deconv => Subcommand::Deconv,
        Cmd::Report => Subcommand::Report,
    };
    let inv = Invocation { subcommand, config: cli.config, out: cli.out, overrides: cli.overrides, seed: cli.seed };
    match execute(&inv) {
        Ok(o) => {
            print!("{}", o.report);
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            if o.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("{} check(s) failed:", o.failures.len());
                for f in &o.failures {
                    eprintln!("  {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
