//! `sectorlab`: sector analysis, thermal estimation, localization checks and
//! Cuntz normal forms from JSON model files.
//!
//! ```bash
//! sectorlab examples init --dir ex
//! sectorlab sectors analyze --model ex/z2_chain_n2/model.json
//! sectorlab thermal estimate --model ex/gibbs_two_level/model.json --data ex/gibbs_two_level/data.json
//! sectorlab dhr check --model ex/z2_chain_n3/model.json --state ex/z2_chain_n3/states/flip1.json
//! sectorlab cuntz nf --d 2 --expr "s1* s2 s2* s1"
//! ```
//!
//! Exit status: 0 on success, 1 when a selection criterion rejects the
//! input, 2 on invalid input.

mod commands;
mod config;
mod io;
mod schema;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{channels, cuntz, dhr, examples, sectors, thermal};
use config::{Format, RunConfig, ToleranceOverrides};
use io::{write_file, CliResult, Report};

#[derive(Debug, Parser)]
#[command(name = "sectorlab", version, about = "Superselection sectors, thermal estimation and Cuntz normal forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON file with default seed, tolerances, format and dimension cap
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every randomized check
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Relative threshold for rank decisions
    #[arg(long = "tol.rank", global = true, value_name = "TOL")]
    tol_rank: Option<f64>,

    /// Eigenvalue gap below which eigenvalues are merged
    #[arg(long = "tol.gap", global = true, value_name = "TOL")]
    tol_gap: Option<f64>,

    /// Tolerance for validating density matrices
    #[arg(long = "tol.state", global = true, value_name = "TOL")]
    tol_state: Option<f64>,

    /// Report format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sector decomposition of lattice models
    #[command(subcommand)]
    Sectors(sectors::SectorsCommand),

    /// Thermal parameter estimation
    #[command(subcommand)]
    Thermal(thermal::ThermalCommand),

    /// Localization criterion and morphism identification
    #[command(subcommand)]
    Dhr(dhr::DhrCommand),

    /// Cuntz algebra normal forms
    #[command(subcommand)]
    Cuntz(cuntz::CuntzCommand),

    /// Inversion of classical-to-quantum channels
    #[command(subcommand)]
    Channels(channels::ChannelsCommand),

    /// Bundled worked models
    #[command(subcommand)]
    Examples(examples::ExamplesCommand),
}

impl Cli {
    fn run_config(&self) -> CliResult<RunConfig> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(file.merge(RunConfig {
            seed: self.seed,
            tol: ToleranceOverrides {
                rank: self.tol_rank,
                gap: self.tol_gap,
                state: self.tol_state,
            },
            format: self.format,
            dim_cap: None,
        }))
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    let config = cli.run_config()?;
    let settings = config.settings()?;
    let report: Report = match &cli.command {
        Command::Sectors(c) => sectors::run(c, &settings)?,
        Command::Thermal(c) => thermal::run(c, &settings)?,
        Command::Dhr(c) => dhr::run(c, &settings)?,
        Command::Cuntz(c) => cuntz::run(c)?,
        Command::Channels(c) => channels::run(c, &settings)?,
        Command::Examples(c) => examples::run(c, &settings)?,
    };
    let rendered = report.render(config.format())?;
    match &cli.output {
        Some(path) => write_file(path, rendered.as_bytes())?,
        None => {
            let mut out = std::io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = out.write_all(rendered.as_bytes());
        }
    }
    Ok(report.accepted)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
