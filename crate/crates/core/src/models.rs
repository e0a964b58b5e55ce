//! Small worked models used by the acceptance suite and written out by the
//! command-line tool.

use crate::algebra::{OperatorAlgebra, State};
use crate::channels::ClassicalQuantumChannel;
use crate::dhrnet::{LatticeNet, LocalizedMorphism, Region};
use crate::error::Result;
use crate::linalg::{self, CVec, Settings};
use crate::sectors::{self, ChargedMultiplet, SectorDecomposition};
use crate::thermal::{self, HamiltonianSystem, ObservableHierarchy, Probe, ProbeLevel, ThermalGrid};

/// Qubit chain with `Z₂` acting by `σ_z` on every site, vacuum `|0…0⟩`.
pub struct ChainModel {
    pub name: String,
    pub net: LatticeNet,
    pub decomposition: SectorDecomposition,
    pub vacuum_vector: CVec,
    pub vacuum: State,
    /// `σ_x` on one site, one morphism per site.
    pub flips: Vec<LocalizedMorphism>,
    /// One multiplet per sector label: the identity and the flip of site 0.
    pub charges: Vec<ChargedMultiplet>,
}

impl ChainModel {
    pub fn z2(sites: usize, settings: &Settings) -> Result<Self> {
        let net = LatticeNet::z2_chain(sites, settings)?;
        let decomposition = sectors::decompose_sectors(&OperatorAlgebra::full(net.dim()), net.global(), settings)?;
        let vacuum_vector = linalg::basis_vector(net.dim(), 0);
        let vacuum = State::pure(&vacuum_vector, "vacuum")?;
        let flips = (0..sites)
            .map(|k| LocalizedMorphism::from_local(&net, format!("flip{k}"), Region::new(vec![k]), &[linalg::pauli_x()], settings))
            .collect::<Result<Vec<_>>>()?;
        let charges = vec![
            ChargedMultiplet::unitary("s0", linalg::identity(net.dim()))?,
            ChargedMultiplet::new("s1", flips[0].multiplet().psis().to_vec(), Some(vec![0]))?,
        ];
        Ok(Self {
            name: format!("z2_chain_n{sites}"),
            net,
            decomposition,
            vacuum_vector,
            vacuum,
            flips,
            charges,
        })
    }

    pub fn charging_channel(&self) -> Result<ClassicalQuantumChannel> {
        sectors::charging_channel(&self.decomposition, &self.vacuum, &self.charges)
    }
}

/// `H = σ_z` on a three-point β-grid with probes `σ_z` then `σ_x`.
pub struct GibbsModel {
    pub name: String,
    pub system: HamiltonianSystem,
    pub grid: ThermalGrid,
    pub hierarchy: ObservableHierarchy,
}

impl GibbsModel {
    pub fn two_level() -> Result<Self> {
        let system = HamiltonianSystem::new(linalg::pauli_z(), None)?;
        let grid = ThermalGrid::betas(&[0.5, 1.0, 2.0])?;
        let hierarchy = ObservableHierarchy::new(vec![
            ProbeLevel {
                name: "energy".into(),
                probes: vec![Probe::new("sz", linalg::pauli_z())?],
            },
            ProbeLevel {
                name: "coherence".into(),
                probes: vec![Probe::new("sz", linalg::pauli_z())?, Probe::new("sx", linalg::pauli_x())?],
            },
        ])?;
        Ok(Self {
            name: "gibbs_two_level".into(),
            system,
            grid,
            hierarchy,
        })
    }

    pub fn channel(&self) -> Result<ClassicalQuantumChannel> {
        thermal::build_thermal_channel(&self.system, &self.grid)
    }
}

/// Sample expressions over `O_2`.
pub const CUNTZ_D2_EXPRESSIONS: &[&str] = &[
    "s1* s1",
    "s1* s2",
    "s1 s2* s2 s1*",
    "s1 s1* + s2 s2*",
    "s1* s2 s2* s1",
    "(s1 + s2)(s1 + s2)*",
    "1 - s1 s1*",
    "s1 s2 s2* s1* + s1 s1* s1 s1*",
];
