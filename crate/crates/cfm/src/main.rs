use std::path::PathBuf;
use std::process::ExitCode;

use cfm::{execute, write_files, ExperimentConfig, RunError};
use cfm_core::domain::CATALOG_DOMAINS;
use cfm_core::surface::CATALOG_SURFACES;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cfm", version, about = "Conformal moduli and maps on parameterized surfaces")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Run only this polynomial degree.
    #[arg(long)]
    p: Option<u32>,
}

#[derive(Subcommand)]
enum Verb {
    /// Modulus of the quadrilateral and its conjugate at the final degree.
    Modulus(RunArgs),
    /// Conformal map and isoline export.
    Map(RunArgs),
    /// One report line per degree of the schedule.
    Convergence(RunArgs),
    /// Capped globe against the Mercator projection.
    Mercator(RunArgs),
    /// Optimized hole potentials for multiply connected domains.
    Multiholes(RunArgs),
    /// Lists the built-in surfaces and domains.
    Catalog,
}

fn run(verb: &str, args: &RunArgs) -> Result<String, RunError> {
    let cfg = ExperimentConfig::from_path(&args.config)?;
    if cfg.mode.to_string() != verb {
        return Err(cfm::ConfigError(format!("config mode is `{}`, but the `{verb}` command was given", cfg.mode)).into());
    }
    let exp = cfg.prepare(args.p)?;
    let outcome = execute(&exp)?;
    write_files(&outcome.files)?;
    Ok(outcome.report_text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (verb, args) = match &cli.verb {
        Verb::Catalog => {
            println!("surfaces: {}", CATALOG_SURFACES.join(" "));
            println!("domains: {}", CATALOG_DOMAINS.join(" "));
            return ExitCode::SUCCESS;
        }
        Verb::Modulus(a) => ("modulus", a),
        Verb::Map(a) => ("map", a),
        Verb::Convergence(a) => ("convergence", a),
        Verb::Mercator(a) => ("mercator", a),
        Verb::Multiholes(a) => ("multiholes", a),
    };
    match run(verb, args) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cfm: {e}");
            ExitCode::from(match e {
                RunError::Config(_) => 2,
                _ => 1,
            })
        }
    }
}
