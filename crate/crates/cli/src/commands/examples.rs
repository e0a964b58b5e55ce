use std::fmt::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::Serialize;

use sectorlab::algebra::State;
use sectorlab::channels::{self, ProbabilityWeight};
use sectorlab::dhrnet::{self, LatticeNet, MorphismJson, Region};
use sectorlab::linalg::{self, CMat, MatrixJson, Settings};
use sectorlab::models::{ChainModel, GibbsModel, CUNTZ_D2_EXPRESSIONS};
use sectorlab::thermal::{self, HamiltonianSystem, HierarchyJson, LevelJson, MeasuredData};

use crate::io::{to_json, write_file, CliResult, Report, Table};
use crate::schema::{ChannelFile, CuntzFile, LatticeModelFile, ThermalModelFile};

/// Coupling and inverse temperature of the transverse-field Ising state
/// bundled as a non-localized example.
const ISING_FIELD: f64 = 0.7;
const ISING_BETA: f64 = 1.0;
const DATA_BETA: f64 = 1.0;
const PERTURBATION: f64 = 0.1;

#[derive(Debug, Subcommand)]
pub enum ExamplesCommand {
    /// Write the bundled worked models to a directory
    Init(InitArgs),
}

#[derive(Debug, Args)]
pub struct InitArgs {
    /// Target directory
    #[arg(long, default_value = "sectorlab-examples")]
    pub dir: PathBuf,
}

#[derive(Serialize)]
struct InitReport {
    dir: String,
    files: Vec<String>,
}

pub fn run(cmd: &ExamplesCommand, settings: &Settings) -> CliResult<Report> {
    match cmd {
        ExamplesCommand::Init(args) => init(&args.dir, settings),
    }
}

/// Relative path and contents of every bundled file, in a fixed order.
pub fn bundle(settings: &Settings) -> CliResult<Vec<(String, String)>> {
    let mut files = Vec::new();
    for n in [2, 3] {
        files.extend(chain_files(n, settings)?);
    }
    files.extend(gibbs_files()?);
    files.push((
        "cuntz_d2/expressions.json".into(),
        to_json(&CuntzFile {
            d: 2,
            expressions: CUNTZ_D2_EXPRESSIONS.iter().map(|s| s.to_string()).collect(),
        }),
    ));
    Ok(files)
}

fn init(dir: &Path, settings: &Settings) -> CliResult<Report> {
    let files = bundle(settings)?;
    let mut report = InitReport {
        dir: dir.display().to_string(),
        files: Vec::new(),
    };
    let mut table = Table::new(&["file"]);
    let mut text = String::new();
    for (rel, contents) in &files {
        write_file(&dir.join(rel), contents.as_bytes())?;
        writeln!(text, "wrote {}", dir.join(rel).display()).unwrap();
        table.push(vec![rel.clone()]);
        report.files.push(rel.clone());
    }
    Ok(Report::new(&report, text, table, true))
}

fn state_file(state: &State, label: &str) -> String {
    let mut json = state.to_json();
    json.label = label.to_owned();
    to_json(&json)
}

fn ising_gibbs(net: &LatticeNet) -> CliResult<State> {
    let n = net.sites();
    let zz = linalg::kron(&linalg::pauli_z(), &linalg::pauli_z());
    let mut h = CMat::zeros(net.dim(), net.dim());
    for i in 0..n.saturating_sub(1) {
        h -= net.embed(&Region::interval(i, 2), &zz)?;
    }
    for i in 0..n {
        h -= net.embed(&Region::new(vec![i]), &linalg::pauli_x())?.scale(ISING_FIELD);
    }
    Ok(thermal::gibbs_state(&HamiltonianSystem::new(h, None)?, ISING_BETA, None)?)
}

fn chain_files(n: usize, settings: &Settings) -> CliResult<Vec<(String, String)>> {
    let m = ChainModel::z2(n, settings)?;
    let dir = m.name.clone();
    let model = LatticeModelFile {
        name: m.name.clone(),
        net: m.net.to_json(),
        vacuum: {
            let mut v = m.vacuum.to_json();
            v.label = "vacuum".into();
            v
        },
        morphisms: m
            .flips
            .iter()
            .map(|f| MorphismJson {
                label: f.label().to_owned(),
                region: f.region().clone(),
                psis: vec![MatrixJson::from(&linalg::pauli_x())],
            })
            .collect(),
    };
    let mut files = vec![(format!("{dir}/model.json"), to_json(&model))];
    files.push((format!("{dir}/states/vacuum.json"), state_file(&m.vacuum, "vacuum")));
    for f in &m.flips {
        let s = dhrnet::selected_state(f, &m.vacuum)?;
        files.push((format!("{dir}/states/{}.json", f.label()), state_file(&s, f.label())));
    }
    let channel = m.charging_channel()?;
    let half = ProbabilityWeight::uniform(channel.space().clone())?;
    files.push((
        format!("{dir}/states/charge_mixture.json"),
        state_file(&channels::apply_cq(&channel, &half)?, "charge_mixture"),
    ));
    files.push((format!("{dir}/states/ising_gibbs.json"), state_file(&ising_gibbs(&m.net)?, "ising_gibbs")));
    Ok(files)
}

fn gibbs_files() -> CliResult<Vec<(String, String)>> {
    let g = GibbsModel::two_level()?;
    let dir = g.name.clone();
    let hierarchy = HierarchyJson {
        levels: g
            .hierarchy
            .levels()
            .iter()
            .map(|l| LevelJson {
                name: l.name.clone(),
                probes: l.probes.iter().map(|p| p.to_json()).collect(),
            })
            .collect(),
    };
    let model = ThermalModelFile {
        name: g.name.clone(),
        system: g.system.to_json(),
        grid: g.grid.clone(),
        hierarchy,
    };
    let probes = g.hierarchy.cumulative(g.hierarchy.levels().len() - 1);
    let state = thermal::gibbs_state(&g.system, DATA_BETA, None)?;
    let data: MeasuredData = thermal::measure(&state, &probes);
    let mut perturbed = data.clone();
    let last = probes.last().expect("hierarchy has probes");
    *perturbed.get_mut(&last.name).expect("measured") += PERTURBATION;
    let channel = g.channel()?;
    let channel_file = ChannelFile {
        name: format!("{}_grid", g.name),
        space: channel.space().clone(),
        fibres: channel.fibres().iter().map(State::to_json).collect(),
        probes: probes.iter().map(|p| p.to_json()).collect(),
    };
    Ok(vec![
        (format!("{dir}/model.json"), to_json(&model)),
        (format!("{dir}/data.json"), to_json(&data)),
        (format!("{dir}/data_perturbed.json"), to_json(&perturbed)),
        (format!("{dir}/channel.json"), to_json(&channel_file)),
    ])
}
