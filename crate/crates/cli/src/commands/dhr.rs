use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;

use sectorlab::dhrnet::{self, DhrOptions, DhrReport, InversionMatch, LocalizedMorphism};
use sectorlab::linalg::Settings;

use crate::io::{num, CliResult, Report, Table};
use crate::schema::{load_state, LatticeModel};

#[derive(Debug, Subcommand)]
pub enum DhrCommand {
    /// Test whether a state differs from the vacuum only inside a bounded region
    Check(CheckArgs),
    /// Find the bundled morphisms whose selected state matches a given state
    Invert(InvertArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Lattice model file
    #[arg(long)]
    pub model: PathBuf,

    /// State to test
    #[arg(long)]
    pub state: PathBuf,

    /// Largest distance from the vacuum counted as agreement
    #[arg(long, default_value_t = 1e-8)]
    pub threshold: f64,

    /// Try every subset of sites rather than intervals only
    #[arg(long)]
    pub all_subsets: bool,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// Lattice model file
    #[arg(long)]
    pub model: PathBuf,

    /// State to explain
    #[arg(long)]
    pub state: PathBuf,

    /// Largest distance counted as a match
    #[arg(long, default_value_t = 1e-8)]
    pub threshold: f64,
}

pub fn run(cmd: &DhrCommand, settings: &Settings) -> CliResult<Report> {
    match cmd {
        DhrCommand::Check(args) => check(args, settings),
        DhrCommand::Invert(args) => invert(args, settings),
    }
}

#[derive(Serialize)]
struct CheckReport {
    model: String,
    state: String,
    threshold: f64,
    #[serde(flatten)]
    result: DhrReport,
}

fn check(args: &CheckArgs, settings: &Settings) -> CliResult<Report> {
    let model = LatticeModel::load(&args.model, settings)?;
    let omega = load_state(&args.state, settings)?;
    let options = DhrOptions {
        tol: args.threshold,
        all_subsets: args.all_subsets,
    };
    let result = dhrnet::dhr_check(&omega, &model.vacuum, &model.net, &options, settings)?;
    let report = CheckReport {
        model: model.name,
        state: omega.label().to_owned(),
        threshold: args.threshold,
        result,
    };

    let mut text = String::new();
    let verdict = if report.result.passes { "localized" } else { "not localized" };
    writeln!(text, "state {} on {}: {verdict}", report.state, report.model).unwrap();
    let mut table = Table::new(&["region", "distance", "witness"]);
    for d in &report.result.distances {
        let witness = report.result.witness_regions.contains(&d.region);
        writeln!(text, "  {:<12} {}{}", d.region.to_string(), num(d.distance), if witness { "  *" } else { "" }).unwrap();
        table.push(vec![d.region.to_string(), num(d.distance), witness.to_string()]);
    }
    let accepted = report.result.passes;
    Ok(Report::new(&report, text, table, accepted))
}

#[derive(Serialize)]
struct InvertReport {
    model: String,
    state: String,
    threshold: f64,
    candidates: Vec<String>,
    matches: Vec<InversionMatch>,
}

fn invert(args: &InvertArgs, settings: &Settings) -> CliResult<Report> {
    let model = LatticeModel::load(&args.model, settings)?;
    let omega = load_state(&args.state, settings)?;
    let mut candidates = vec![LocalizedMorphism::identity(&model.net)];
    candidates.extend(model.morphisms.iter().cloned());
    let matches = dhrnet::invert_selected_state(&omega, &model.vacuum, &candidates, &model.net, args.threshold, settings)?;
    let report = InvertReport {
        model: model.name,
        state: omega.label().to_owned(),
        threshold: args.threshold,
        candidates: candidates.iter().map(|c| c.label().to_owned()).collect(),
        matches,
    };

    let mut text = String::new();
    if report.matches.is_empty() {
        writeln!(text, "state {}: no candidate morphism reproduces it", report.state).unwrap();
    } else {
        writeln!(text, "state {}: {} matching morphism(s)", report.state, report.matches.len()).unwrap();
    }
    let mut table = Table::new(&["index", "label", "distance"]);
    for m in &report.matches {
        writeln!(text, "  {}  distance {}", m.label, num(m.distance)).unwrap();
        table.push(vec![m.index.to_string(), m.label.clone(), num(m.distance)]);
    }
    let accepted = !report.matches.is_empty();
    Ok(Report::new(&report, text, table, accepted))
}
