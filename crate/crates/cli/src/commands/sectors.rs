use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;

use sectorlab::algebra::OperatorAlgebra;
use sectorlab::linalg::Settings;
use sectorlab::sectors::{self, DecompositionResiduals, ExpectationReport};

use crate::io::{num, CliResult, Report, Table};
use crate::schema::{load_state, LatticeModel};

const EXPECTATION_TOL: f64 = 1e-9;

#[derive(Debug, Subcommand)]
pub enum SectorsCommand {
    /// Decompose a lattice model into superselection sectors
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Lattice model file
    #[arg(long)]
    pub model: PathBuf,

    /// State whose charge distribution is estimated
    #[arg(long)]
    pub state: Option<PathBuf>,

    /// Random samples for the conditional-expectation check
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Serialize)]
struct SectorRow {
    label: String,
    dim_h: usize,
    dim_v: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

#[derive(Serialize)]
struct AnalyzeReport {
    model: String,
    sites: usize,
    dim: usize,
    group_order: usize,
    center_dim: usize,
    sectors: Vec<SectorRow>,
    vacuum_sector: String,
    residuals: DecompositionResiduals,
    conditional_expectation: ExpectationReport,
    conditional_expectation_passes: bool,
}

pub fn run(cmd: &SectorsCommand, settings: &Settings) -> CliResult<Report> {
    match cmd {
        SectorsCommand::Analyze(args) => analyze(args, settings),
    }
}

fn analyze(args: &AnalyzeArgs, settings: &Settings) -> CliResult<Report> {
    let model = LatticeModel::load(&args.model, settings)?;
    let net = &model.net;
    let decomp = sectors::decompose_sectors(&OperatorAlgebra::full(net.dim()), net.global(), settings)?;
    let center_dim = sectors::center_dim(&decomp, settings)?;
    let vacuum = sectors::vacuum_sector(&decomp, &model.vacuum, settings.tol.state)?;
    let expectation = sectors::check_conditional_expectation(&decomp, args.samples, settings)?;
    let weights = match &args.state {
        Some(path) => Some(sectors::estimate_charge(&load_state(path, settings)?, &decomp)?),
        None => None,
    };
    let rows: Vec<SectorRow> = decomp
        .sectors()
        .iter()
        .enumerate()
        .map(|(k, s)| SectorRow {
            label: s.label.clone(),
            dim_h: s.dim_h,
            dim_v: s.dim_v,
            weight: weights.as_ref().map(|w| w.weights()[k]),
        })
        .collect();
    let report = AnalyzeReport {
        model: model.name.clone(),
        sites: net.sites(),
        dim: net.dim(),
        group_order: net.global().group().order(),
        center_dim,
        vacuum_sector: decomp.sectors()[vacuum].label.clone(),
        residuals: *decomp.residuals(),
        conditional_expectation: expectation,
        conditional_expectation_passes: expectation.passes(EXPECTATION_TOL),
        sectors: rows,
    };

    let mut text = String::new();
    writeln!(text, "model {}: {} sites, dimension {}", report.model, report.sites, report.dim).unwrap();
    writeln!(text, "sectors: {}, centre dimension {}", report.sectors.len(), report.center_dim).unwrap();
    let mut header = vec!["label", "dim_h", "dim_v"];
    if weights.is_some() {
        header.push("weight");
    }
    let mut table = Table::new(&header);
    for r in &report.sectors {
        write!(text, "  {}  dim_h {}  dim_v {}", r.label, r.dim_h, r.dim_v).unwrap();
        let mut row = vec![r.label.clone(), r.dim_h.to_string(), r.dim_v.to_string()];
        if let Some(w) = r.weight {
            write!(text, "  weight {}", num(w)).unwrap();
            row.push(num(w));
        }
        text.push('\n');
        table.push(row);
    }
    writeln!(text, "vacuum sector: {}", report.vacuum_sector).unwrap();
    writeln!(text, "decomposition residual: {}", num(report.residuals.max())).unwrap();
    writeln!(
        text,
        "conditional expectation: {} ({} samples)",
        if report.conditional_expectation_passes { "passes" } else { "fails" },
        args.samples
    )
    .unwrap();
    let accepted = report.conditional_expectation_passes;
    Ok(Report::new(&report, text, table, accepted))
}
