//! Input file formats.

use std::path::Path;

use serde::{Deserialize, Serialize};

use sectorlab::algebra::{State, StateJson};
use sectorlab::channels::{ClassicalQuantumChannel, ClassifyingSpace};
use sectorlab::dhrnet::{LatticeNet, LocalizedMorphism, MorphismJson, NetJson};
use sectorlab::linalg::Settings;
use sectorlab::thermal::{HamiltonianSystem, HierarchyJson, ObservableHierarchy, Probe, ProbeJson, SystemJson, ThermalGrid};

use crate::io::{read_json, CliResult};

/// A spin chain with its vacuum and localized morphisms.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeModelFile {
    pub name: String,
    pub net: NetJson,
    pub vacuum: StateJson,
    #[serde(default)]
    pub morphisms: Vec<MorphismJson>,
}

pub struct LatticeModel {
    pub name: String,
    pub net: LatticeNet,
    pub vacuum: State,
    pub morphisms: Vec<LocalizedMorphism>,
}

impl LatticeModel {
    pub fn load(path: &Path, settings: &Settings) -> CliResult<Self> {
        let file: LatticeModelFile = read_json(path)?;
        let net = LatticeNet::from_json(&file.net, settings)?;
        let vacuum = State::from_json(&file.vacuum, settings.tol.state)?;
        let morphisms = file
            .morphisms
            .iter()
            .map(|m| LocalizedMorphism::from_json(&net, m, settings))
            .collect::<sectorlab::Result<Vec<_>>>()?;
        Ok(Self {
            name: file.name,
            net,
            vacuum,
            morphisms,
        })
    }
}

pub fn load_state(path: &Path, settings: &Settings) -> CliResult<State> {
    let json: StateJson = read_json(path)?;
    Ok(State::from_json(&json, settings.tol.state)?)
}

/// A Hamiltonian, a `(β, μ)` grid and nested probe levels.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalModelFile {
    pub name: String,
    pub system: SystemJson,
    pub grid: ThermalGrid,
    pub hierarchy: HierarchyJson,
}

pub struct ThermalModel {
    pub name: String,
    pub system: HamiltonianSystem,
    pub grid: ThermalGrid,
    pub hierarchy: ObservableHierarchy,
}

impl ThermalModel {
    pub fn load(path: &Path) -> CliResult<Self> {
        let file: ThermalModelFile = read_json(path)?;
        Ok(Self {
            name: file.name,
            system: HamiltonianSystem::from_json(&file.system)?,
            grid: file.grid,
            hierarchy: ObservableHierarchy::from_json(&file.hierarchy)?,
        })
    }
}

/// Fibre states over a labelled classifying space, plus the probes measured.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub name: String,
    pub space: ClassifyingSpace,
    pub fibres: Vec<StateJson>,
    pub probes: Vec<ProbeJson>,
}

pub struct ChannelModel {
    pub name: String,
    pub channel: ClassicalQuantumChannel,
    pub probes: Vec<Probe>,
}

impl ChannelModel {
    pub fn load(path: &Path, settings: &Settings) -> CliResult<Self> {
        let file: ChannelFile = read_json(path)?;
        let fibres = file
            .fibres
            .iter()
            .map(|f| State::from_json(f, settings.tol.state))
            .collect::<sectorlab::Result<Vec<_>>>()?;
        Ok(Self {
            name: file.name,
            channel: ClassicalQuantumChannel::new(file.space, fibres)?,
            probes: file.probes.iter().map(Probe::from_json).collect::<sectorlab::Result<_>>()?,
        })
    }
}

/// Expressions over `O_d`, one normal form per entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuntzFile {
    pub d: usize,
    pub expressions: Vec<String>,
}
