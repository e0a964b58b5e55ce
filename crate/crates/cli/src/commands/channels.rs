use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;

use sectorlab::channels::{self, Inversion, SeparationReport};
use sectorlab::linalg::{CMat, Settings};
use sectorlab::thermal::MeasuredData;

use crate::io::{num, read_json, write_file, CliError, CliResult, Report, Table};
use crate::schema::ChannelModel;

#[derive(Debug, Subcommand)]
pub enum ChannelsCommand {
    /// Recover a probability weight from measured expectation values
    Invert(InvertArgs),
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// Channel file with fibre states and probes
    #[arg(long)]
    pub channel: PathBuf,

    /// Measured expectation values, keyed by probe name
    #[arg(long)]
    pub data: PathBuf,

    /// Largest fit residual accepted
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,

    /// Write the design matrix (probe by label) to this CSV file
    #[arg(long)]
    pub design: Option<PathBuf>,
}

#[derive(Serialize)]
struct InvertReport {
    channel: String,
    threshold: f64,
    accepted: bool,
    separation: SeparationReport,
    #[serde(flatten)]
    inversion: Inversion,
}

pub fn run(cmd: &ChannelsCommand, settings: &Settings) -> CliResult<Report> {
    match cmd {
        ChannelsCommand::Invert(args) => invert(args, settings),
    }
}

fn invert(args: &InvertArgs, settings: &Settings) -> CliResult<Report> {
    let model = ChannelModel::load(&args.channel, settings)?;
    let measured: MeasuredData = read_json(&args.data)?;
    let data = model
        .probes
        .iter()
        .map(|p| {
            measured
                .get(&p.name)
                .copied()
                .ok_or_else(|| CliError::Usage(format!("{}: no value for probe `{}`", args.data.display(), p.name)))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let mats: Vec<CMat> = model.probes.iter().map(|p| p.matrix.clone()).collect();
    let labels: Vec<String> = model.channel.space().labels().iter().map(|l| l.to_string()).collect();

    if let Some(path) = &args.design {
        let m = channels::design_matrix(&model.channel, &mats)?;
        let mut header = vec!["probe".to_owned()];
        header.extend(labels.iter().cloned());
        let mut t = Table::new(&header);
        for (i, p) in model.probes.iter().enumerate() {
            let mut row = vec![p.name.clone()];
            row.extend((0..m.ncols()).map(|j| num(m[(i, j)])));
            t.push(row);
        }
        write_file(path, t.to_csv()?.as_bytes())?;
    }

    let separation = channels::separation_check(&model.channel, &mats, settings)?;
    let inversion = channels::invert_cq(&model.channel, &mats, &data, settings)?;
    let accepted = inversion.residual <= args.threshold;
    let report = InvertReport {
        channel: model.name,
        threshold: args.threshold,
        accepted,
        separation,
        inversion,
    };

    let mut text = String::new();
    writeln!(
        text,
        "channel {}: residual {}  {}{}",
        report.channel,
        num(report.inversion.residual),
        if accepted { "accepted" } else { "rejected" },
        if report.inversion.unique { "" } else { "  (weights not unique)" }
    )
    .unwrap();
    let mut table = Table::new(&["label", "weight"]);
    for (label, w) in labels.iter().zip(report.inversion.weights.weights()) {
        writeln!(text, "  {label:<16} {}", num(*w)).unwrap();
        table.push(vec![label.clone(), num(*w)]);
    }
    Ok(Report::new(&report, text, table, accepted))
}
