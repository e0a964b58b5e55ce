use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;

use sectorlab::linalg::Settings;
use sectorlab::thermal::{self, HierarchyReport, MeasuredData};

use crate::io::{num, read_json, write_file, CliResult, Report, Table};
use crate::schema::ThermalModel;

#[derive(Debug, Subcommand)]
pub enum ThermalCommand {
    /// Fit measured expectation values by mixtures of Gibbs states, level by level
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Thermal model file
    #[arg(long)]
    pub model: PathBuf,

    /// Measured expectation values, keyed by probe name
    #[arg(long)]
    pub data: PathBuf,

    /// Largest fit residual accepted as thermal
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,

    /// Also write the thermal functions of every probe to this CSV file
    #[arg(long)]
    pub functions_csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct GridValues {
    beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    values: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct EstimateReport {
    model: String,
    threshold: f64,
    accepted: bool,
    #[serde(flatten)]
    hierarchy: HierarchyReport,
    thermal_functions: Vec<GridValues>,
}

pub fn run(cmd: &ThermalCommand, settings: &Settings) -> CliResult<Report> {
    match cmd {
        ThermalCommand::Estimate(args) => estimate(args, settings),
    }
}

fn estimate(args: &EstimateArgs, settings: &Settings) -> CliResult<Report> {
    let model = ThermalModel::load(&args.model)?;
    let measured: MeasuredData = read_json(&args.data)?;
    let channel = thermal::build_thermal_channel(&model.system, &model.grid)?;
    let hierarchy = thermal::hierarchy_report(&measured, &model.hierarchy, &channel, args.threshold, settings)?;

    let probes = model.hierarchy.cumulative(model.hierarchy.levels().len() - 1);
    let columns = probes
        .iter()
        .map(|p| Ok(thermal::thermal_function(&model.system, &model.grid, &p.matrix)?))
        .collect::<CliResult<Vec<_>>>()?;
    let mut header = vec!["beta".to_owned(), "mu".to_owned()];
    header.extend(probes.iter().map(|p| p.name.clone()));
    let mut functions = Table::new(&header);
    let mut grid_values = Vec::new();
    for (k, point) in model.grid.points().iter().enumerate() {
        let values: BTreeMap<String, f64> = probes.iter().zip(&columns).map(|(p, c)| (p.name.clone(), c[k].re)).collect();
        let mut row = vec![num(point.beta), point.mu.map(num).unwrap_or_default()];
        row.extend(columns.iter().map(|c| num(c[k].re)));
        functions.push(row);
        grid_values.push(GridValues {
            beta: point.beta,
            mu: point.mu,
            values,
        });
    }
    if let Some(path) = &args.functions_csv {
        write_file(path, functions.to_csv()?.as_bytes())?;
    }

    let accepted = hierarchy.levels.last().is_some_and(|l| l.verdict.accepted);
    let report = EstimateReport {
        model: model.name,
        threshold: args.threshold,
        accepted,
        hierarchy,
        thermal_functions: grid_values,
    };

    let mut text = String::new();
    writeln!(text, "model {}: {} grid points, threshold {}", report.model, model.grid.len(), num(args.threshold)).unwrap();
    for l in &report.hierarchy.levels {
        let v = &l.verdict;
        write!(
            text,
            "  level {:<12} {} probes  residual {}  {}",
            l.level,
            l.probes,
            num(v.residual),
            if v.accepted { "accepted" } else { "rejected" }
        )
        .unwrap();
        if let Some(b) = v.beta_mean {
            write!(text, "  mean beta {}", num(b)).unwrap();
        }
        text.push('\n');
    }
    match &report.hierarchy.maximal_accepted {
        Some(name) => writeln!(text, "largest accepted level: {name}").unwrap(),
        None => writeln!(text, "no level accepted").unwrap(),
    }
    Ok(Report::new(&report, text, functions, accepted))
}
