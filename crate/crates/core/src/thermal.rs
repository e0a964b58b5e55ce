//! Gibbs reference states, thermal functions over a parameter grid and the
//! thermality criterion with its hierarchy of probe sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{OperatorAlgebra, State};
use crate::channels::{
    self, ClassicalQuantumChannel, ClassifyingSpace, Label, ProbabilityWeight, evaluation_map,
};
use crate::error::{Error, Result};
use crate::linalg::{self, C64, CMat, MatrixJson, Settings};

/// Default acceptance threshold on the fit residual.
pub const DEFAULT_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-10;
const NESTING_TOL: f64 = 1e-9;

/// Energy `H` and an optional conserved number `N`.
#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    hamiltonian: CMat,
    number: Option<CMat>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemJson {
    pub hamiltonian: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub number: Option<MatrixJson>,
}

fn check_hermitian(m: &CMat, what: &str) -> Result<usize> {
    let d = linalg::is_square(m)?;
    let defect = linalg::max_abs(&(m - m.adjoint()));
    if defect > HERMITIAN_TOL * linalg::max_abs(m).max(1.0) {
        return Err(Error::InvalidInput(format!("{what} is not Hermitian (defect {defect:.3e})")));
    }
    Ok(d)
}

impl HamiltonianSystem {
    pub fn new(hamiltonian: CMat, number: Option<CMat>) -> Result<Self> {
        let d = check_hermitian(&hamiltonian, "hamiltonian")?;
        if let Some(n) = &number {
            if check_hermitian(n, "number operator")? != d {
                return Err(Error::DimensionMismatch("number operator and hamiltonian differ in size".into()));
            }
            let c = linalg::max_abs(&linalg::commutator(&hamiltonian, n));
            if c > HERMITIAN_TOL * linalg::max_abs(&hamiltonian).max(1.0) * linalg::max_abs(n).max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "number operator does not commute with the hamiltonian (defect {c:.3e})"
                )));
            }
        }
        Ok(Self {
            hamiltonian: linalg::hermitian_part(&hamiltonian),
            number: number.map(|n| linalg::hermitian_part(&n)),
        })
    }

    pub fn from_json(json: &SystemJson) -> Result<Self> {
        Self::new(
            json.hamiltonian.to_matrix()?,
            json.number.as_ref().map(MatrixJson::to_matrix).transpose()?,
        )
    }

    pub fn to_json(&self) -> SystemJson {
        SystemJson {
            hamiltonian: MatrixJson::from(&self.hamiltonian),
            number: self.number.as_ref().map(MatrixJson::from),
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.hamiltonian
    }

    pub fn number(&self) -> Option<&CMat> {
        self.number.as_ref()
    }

    /// `H - μN`.
    fn shifted(&self, mu: Option<f64>) -> Result<CMat> {
        match (mu, &self.number) {
            (None, _) => Ok(self.hamiltonian.clone()),
            (Some(mu), Some(n)) => Ok(&self.hamiltonian - n.scale(mu)),
            (Some(_), None) => Err(Error::InvalidInput(
                "chemical potential given but the system has no number operator".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

/// Finite set of `(β, μ)` points, in the order given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridJson", into = "GridJson")]
pub struct ThermalGrid {
    points: Vec<GridPoint>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridJson {
    pub points: Vec<GridPoint>,
}

impl ThermalGrid {
    pub fn new(points: Vec<GridPoint>) -> Result<Self> {
        for (k, p) in points.iter().enumerate() {
            if !(p.beta > 0.0 && p.beta.is_finite()) {
                return Err(Error::InvalidInput(format!("grid point {k}: beta must be positive, got {}", p.beta)));
            }
            if p.mu.is_some_and(|m| !m.is_finite()) {
                return Err(Error::InvalidInput(format!("grid point {k}: mu is not finite")));
            }
            if points[..k].contains(p) {
                return Err(Error::InvalidInput(format!("grid point {k} repeats an earlier point")));
            }
        }
        Ok(Self { points })
    }

    pub fn betas(betas: &[f64]) -> Result<Self> {
        Self::new(betas.iter().map(|&beta| GridPoint { beta, mu: None }).collect())
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn space(&self) -> ClassifyingSpace {
        let labels = self
            .points
            .iter()
            .map(|p| match p.mu {
                None => Label::point(&[("beta", p.beta)]),
                Some(mu) => Label::point(&[("beta", p.beta), ("mu", mu)]),
            })
            .collect();
        ClassifyingSpace::new(labels).expect("grid points are distinct")
    }
}

impl TryFrom<GridJson> for ThermalGrid {
    type Error = Error;
    fn try_from(json: GridJson) -> Result<Self> {
        Self::new(json.points)
    }
}

impl From<ThermalGrid> for GridJson {
    fn from(grid: ThermalGrid) -> Self {
        GridJson { points: grid.points }
    }
}

/// Gibbs state with its thermodynamic data.
#[derive(Clone, Debug)]
pub struct Gibbs {
    pub state: State,
    pub log_partition: f64,
    /// `⟨H - μN⟩`.
    pub energy: f64,
    pub free_energy: f64,
    /// `β(u - f)`, a derived report quantity rather than a thermal function.
    pub entropy: f64,
}

pub fn gibbs(sys: &HamiltonianSystem, beta: f64, mu: Option<f64>) -> Result<Gibbs> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    let h = sys.shifted(mu)?;
    let eig = linalg::eigh(&h);
    let e0 = eig.values[0];
    let boltzmann: Vec<f64> = eig.values.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = boltzmann.iter().sum();
    let probs: Vec<f64> = boltzmann.iter().map(|w| w / z).collect();
    let d = sys.dim();
    let mut density = CMat::zeros(d, d);
    for (k, p) in probs.iter().enumerate() {
        let v = eig.vectors.column(k);
        density += (v * v.adjoint()).scale(*p);
    }
    let density = linalg::hermitian_part(&density);
    let log_partition = z.ln() - beta * e0;
    let energy: f64 = probs.iter().zip(&eig.values).map(|(p, e)| p * e).sum();
    let free_energy = -log_partition / beta;
    let label = match mu {
        None => format!("gibbs(beta={beta})"),
        Some(mu) => format!("gibbs(beta={beta},mu={mu})"),
    };
    Ok(Gibbs {
        state: State::new(density, label, 1e-9)?,
        log_partition,
        energy,
        free_energy,
        entropy: beta * (energy - free_energy),
    })
}

/// `exp(-β(H - μN)) / Z`.
pub fn gibbs_state(sys: &HamiltonianSystem, beta: f64, mu: Option<f64>) -> Result<State> {
    Ok(gibbs(sys, beta, mu)?.state)
}

/// `|tr(ρAB) - tr(ρ B α(A))| / (|A| |B|)` with `α(A) = e^{-βH'} A e^{βH'}`,
/// `H' = H - μN`, and `ρ` the Gibbs state.
pub fn kms_residual(sys: &HamiltonianSystem, beta: f64, mu: Option<f64>, a: &CMat, b: &CMat) -> Result<f64> {
    let rho = gibbs_state(sys, beta, mu)?;
    let eig = linalg::eigh(&sys.shifted(mu)?);
    let exp_diag = |sign: f64| {
        let v = &eig.vectors;
        let d = linalg::diag(&eig.values.iter().map(|e| (sign * beta * e).exp()).collect::<Vec<_>>());
        v * d * v.adjoint()
    };
    let alpha_a = exp_diag(-1.0) * a * exp_diag(1.0);
    let lhs = linalg::expectation(rho.density(), &(a * b));
    let rhs = linalg::expectation(rho.density(), &(b * alpha_a));
    let scale = (linalg::fro_norm(a) * linalg::fro_norm(b)).max(f64::MIN_POSITIVE);
    Ok((lhs - rhs).norm() / scale)
}

/// `(tr(ρ_p A))_p` over the grid.
pub fn thermal_function(sys: &HamiltonianSystem, grid: &ThermalGrid, a: &CMat) -> Result<Vec<C64>> {
    if a.shape() != (sys.dim(), sys.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "observable is {}x{}, system dimension is {}",
            a.nrows(),
            a.ncols(),
            sys.dim()
        )));
    }
    grid.points()
        .iter()
        .map(|p| Ok(gibbs_state(sys, p.beta, p.mu)?.expect(a)))
        .collect()
}

/// Channel whose fibres are the grid's Gibbs states.
pub fn build_thermal_channel(sys: &HamiltonianSystem, grid: &ThermalGrid) -> Result<ClassicalQuantumChannel> {
    let fibres = grid
        .points()
        .iter()
        .map(|p| gibbs_state(sys, p.beta, p.mu))
        .collect::<Result<Vec<_>>>()?;
    ClassicalQuantumChannel::new(grid.space(), fibres)
}

/// Positivity and unitality of the thermal-function map on the full matrix algebra.
pub fn verify_thermal_map(
    sys: &HamiltonianSystem,
    grid: &ThermalGrid,
    settings: &Settings,
) -> Result<channels::PositivityReport> {
    let channel = build_thermal_channel(sys, grid)?;
    let alg = OperatorAlgebra::full(sys.dim());
    Ok(channels::verify_positive_unital(&evaluation_map(channel.fibres(), &alg), &alg, settings))
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyPoint {
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub energy: f64,
    pub free_energy: f64,
    pub entropy: f64,
}

pub fn entropy_report(sys: &HamiltonianSystem, grid: &ThermalGrid) -> Result<Vec<EntropyPoint>> {
    grid.points()
        .iter()
        .map(|p| {
            let g = gibbs(sys, p.beta, p.mu)?;
            Ok(EntropyPoint {
                beta: p.beta,
                mu: p.mu,
                energy: g.energy,
                free_energy: g.free_energy,
                entropy: g.entropy,
            })
        })
        .collect()
}

/// A named Hermitian observable.
#[derive(Clone, Debug)]
pub struct Probe {
    pub name: String,
    pub matrix: CMat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeJson {
    pub name: String,
    pub matrix: MatrixJson,
}

impl Probe {
    pub fn new(name: impl Into<String>, matrix: CMat) -> Result<Self> {
        let name = name.into();
        check_hermitian(&matrix, &format!("probe `{name}`"))?;
        Ok(Self { name, matrix })
    }

    pub fn from_json(json: &ProbeJson) -> Result<Self> {
        Self::new(json.name.clone(), json.matrix.to_matrix()?)
    }

    pub fn to_json(&self) -> ProbeJson {
        ProbeJson {
            name: self.name.clone(),
            matrix: MatrixJson::from(&self.matrix),
        }
    }
}

/// Measured expectation value per probe name.
pub type MeasuredData = BTreeMap<String, f64>;

#[derive(Clone, Debug)]
pub struct ProbeLevel {
    pub name: String,
    pub probes: Vec<Probe>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelJson {
    pub name: String,
    pub probes: Vec<ProbeJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HierarchyJson {
    pub levels: Vec<LevelJson>,
}

/// Probe sets whose spans increase from one level to the next.
#[derive(Clone, Debug)]
pub struct ObservableHierarchy {
    levels: Vec<ProbeLevel>,
}

impl ObservableHierarchy {
    pub fn new(levels: Vec<ProbeLevel>) -> Result<Self> {
        for pair in levels.windows(2) {
            let (lower, upper) = (&pair[0], &pair[1]);
            let span = linalg::orthonormalize(upper.probes.iter().map(|p| &p.matrix), NESTING_TOL);
            for p in &lower.probes {
                if let Some(q) = upper.probes.first() {
                    if q.matrix.shape() != p.matrix.shape() {
                        return Err(Error::DimensionMismatch(format!(
                            "levels `{}` and `{}` use different dimensions",
                            lower.name, upper.name
                        )));
                    }
                }
                let r = linalg::projection_residual(&span, &p.matrix);
                if r > NESTING_TOL * linalg::fro_norm(&p.matrix).max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "probe `{}` of level `{}` is not in the span of level `{}` (residual {r:.3e})",
                        p.name, lower.name, upper.name
                    )));
                }
            }
        }
        Ok(Self { levels })
    }

    pub fn from_json(json: &HierarchyJson) -> Result<Self> {
        let levels = json
            .levels
            .iter()
            .map(|l| {
                Ok(ProbeLevel {
                    name: l.name.clone(),
                    probes: l.probes.iter().map(Probe::from_json).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(levels)
    }

    pub fn levels(&self) -> &[ProbeLevel] {
        &self.levels
    }

    /// Probes of levels `0..=k`, deduplicated by name. This set spans the
    /// same space as level `k` and contains the probes of every lower level,
    /// so fit residuals cannot decrease along the hierarchy.
    pub fn cumulative(&self, k: usize) -> Vec<Probe> {
        let mut out: Vec<Probe> = Vec::new();
        for level in &self.levels[..=k] {
            for p in &level.probes {
                if !out.iter().any(|q| q.name == p.name) {
                    out.push(p.clone());
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThermalVerdict {
    pub accepted: bool,
    pub weights: ProbabilityWeight,
    pub residual: f64,
    pub unique: bool,
    pub rank: usize,
    pub nullspace_dim: usize,
    pub sigma_min: f64,
    pub kkt_residual: f64,
    /// Mean and variance of β under the fitted weights.
    pub beta_mean: Option<f64>,
    pub beta_variance: Option<f64>,
}

/// Fits the measured values of `level` by a mixture of the channel's fibres
/// and accepts when the residual is at most `tol`.
pub fn s_thermal_check(
    measured: &MeasuredData,
    level: &[Probe],
    channel: &ClassicalQuantumChannel,
    tol: f64,
    settings: &Settings,
) -> Result<ThermalVerdict> {
    let data = level
        .iter()
        .map(|p| measured.get(&p.name).copied().ok_or_else(|| Error::MissingProbe(p.name.clone())))
        .collect::<Result<Vec<f64>>>()?;
    let probes: Vec<CMat> = level.iter().map(|p| p.matrix.clone()).collect();
    let inv = channels::invert_cq(channel, &probes, &data, settings)?;
    let moments = inv.weights.moments("beta");
    Ok(ThermalVerdict {
        accepted: inv.residual <= tol,
        residual: inv.residual,
        unique: inv.unique,
        rank: inv.rank,
        nullspace_dim: inv.nullspace_dim,
        sigma_min: inv.sigma_min,
        kkt_residual: inv.kkt_residual,
        beta_mean: moments.map(|m| m.0),
        beta_variance: moments.map(|m| m.1),
        weights: inv.weights,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelVerdict {
    pub level: String,
    pub probes: usize,
    pub verdict: ThermalVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyReport {
    pub levels: Vec<LevelVerdict>,
    /// Name of the largest accepted level.
    pub maximal_accepted: Option<String>,
    pub monotone: bool,
}

pub fn hierarchy_report(
    measured: &MeasuredData,
    hierarchy: &ObservableHierarchy,
    channel: &ClassicalQuantumChannel,
    tol: f64,
    settings: &Settings,
) -> Result<HierarchyReport> {
    let mut levels = Vec::new();
    for (k, level) in hierarchy.levels().iter().enumerate() {
        let probes = hierarchy.cumulative(k);
        let verdict = s_thermal_check(measured, &probes, channel, tol, settings)?;
        levels.push(LevelVerdict {
            level: level.name.clone(),
            probes: probes.len(),
            verdict,
        });
    }
    let maximal_accepted = levels.iter().rev().find(|l| l.verdict.accepted).map(|l| l.level.clone());
    let monotone = levels
        .windows(2)
        .all(|w| w[0].verdict.residual <= w[1].verdict.residual + 1e-12);
    Ok(HierarchyReport {
        levels,
        maximal_accepted,
        monotone,
    })
}

/// Expectation values of `probes` in `state`, keyed by probe name.
pub fn measure(state: &State, probes: &[Probe]) -> MeasuredData {
    probes.iter().map(|p| (p.name.clone(), state.expect(&p.matrix).re)).collect()
}
