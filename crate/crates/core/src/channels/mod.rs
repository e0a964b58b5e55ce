//! Classical-quantum channels over a finite classifying space and their
//! inversion as a constrained moment problem.

pub mod simplex;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{OperatorAlgebra, State};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Settings, C64};
use simplex::{SolverOptions, min_norm_feasible, simplex_least_squares};

/// Weights below this are clipped to zero before renormalization.
pub const CLIP: f64 = -1e-12;
const SUM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    pub name: String,
    pub value: f64,
}

/// A point of a classifying space: named real coordinates or a sector name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Symbol(String),
    Point(Vec<Coordinate>),
}

impl Label {
    pub fn point(coords: &[(&str, f64)]) -> Self {
        Label::Point(
            coords
                .iter()
                .map(|&(name, value)| Coordinate {
                    name: name.to_owned(),
                    value,
                })
                .collect(),
        )
    }

    pub fn coordinate(&self, name: &str) -> Option<f64> {
        match self {
            Label::Symbol(_) => None,
            Label::Point(cs) => cs.iter().find(|c| c.name == name).map(|c| c.value),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Symbol(s) => f.write_str(s),
            Label::Point(cs) => {
                for (k, c) in cs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}={}", c.name, c.value)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Label>", into = "Vec<Label>")]
pub struct ClassifyingSpace {
    labels: Vec<Label>,
}

impl ClassifyingSpace {
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InvalidInput(format!("duplicate label `{a}`")));
            }
        }
        Ok(Self { labels })
    }

    pub fn symbols<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        Self::new(names.iter().map(|s| Label::Symbol(s.as_ref().to_owned())).collect())
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl TryFrom<Vec<Label>> for ClassifyingSpace {
    type Error = Error;
    fn try_from(labels: Vec<Label>) -> Result<Self> {
        Self::new(labels)
    }
}

impl From<ClassifyingSpace> for Vec<Label> {
    fn from(space: ClassifyingSpace) -> Self {
        space.labels
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityWeight {
    space: ClassifyingSpace,
    weights: Vec<f64>,
}

impl ProbabilityWeight {
    pub fn new(space: ClassifyingSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} labels",
                weights.len(),
                space.len()
            )));
        }
        if let Some(w) = weights.iter().find(|&&w| w.is_nan() || w < CLIP) {
            return Err(Error::InvalidInput(format!("negative weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {sum}")));
        }
        Ok(Self { space, weights })
    }

    /// Clips entries below `CLIP` to zero and rescales to unit sum.
    pub fn from_raw(space: ClassifyingSpace, raw: &[f64]) -> Result<Self> {
        let clipped: Vec<f64> = raw.iter().map(|&w| if w < CLIP { 0.0 } else { w }).collect();
        let sum: f64 = clipped.iter().sum();
        if sum.is_nan() || sum <= 0.0 {
            return Err(Error::Numerical("weight vector has no positive mass".into()));
        }
        Self::new(space, clipped.iter().map(|w| w / sum).collect())
    }

    pub fn point_mass(space: ClassifyingSpace, index: usize) -> Result<Self> {
        let mut w = vec![0.0; space.len()];
        *w.get_mut(index)
            .ok_or_else(|| Error::InvalidInput(format!("label index {index} out of range")))? = 1.0;
        Self::new(space, w)
    }

    pub fn uniform(space: ClassifyingSpace) -> Result<Self> {
        let n = space.len();
        Self::new(space, vec![1.0 / n as f64; n])
    }

    pub fn space(&self) -> &ClassifyingSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn l1_distance(&self, other: &ProbabilityWeight) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Mean and variance of a named coordinate, when every label carries it.
    pub fn moments(&self, coordinate: &str) -> Option<(f64, f64)> {
        let values: Option<Vec<f64>> = self
            .space
            .labels()
            .iter()
            .map(|l| l.coordinate(coordinate))
            .collect();
        let values = values?;
        let mean: f64 = values.iter().zip(&self.weights).map(|(v, w)| v * w).sum();
        let var = values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * (v - mean) * (v - mean))
            .sum();
        Some((mean, var))
    }
}

/// Assigns one state to every label of a classifying space.
#[derive(Clone, Debug)]
pub struct ClassicalQuantumChannel {
    space: ClassifyingSpace,
    fibres: Vec<State>,
}

impl ClassicalQuantumChannel {
    pub fn new(space: ClassifyingSpace, fibres: Vec<State>) -> Result<Self> {
        if fibres.len() != space.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} fibre states for {} labels",
                fibres.len(),
                space.len()
            )));
        }
        if fibres.is_empty() {
            return Err(Error::InvalidInput("channel needs at least one label".into()));
        }
        let d = fibres[0].dim();
        if let Some(s) = fibres.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch(format!(
                "fibre `{}` has dimension {}, expected {d}",
                s.label(),
                s.dim()
            )));
        }
        Ok(Self { space, fibres })
    }

    pub fn space(&self) -> &ClassifyingSpace {
        &self.space
    }

    pub fn fibres(&self) -> &[State] {
        &self.fibres
    }

    pub fn dim(&self) -> usize {
        self.fibres[0].dim()
    }
}

/// A linear map from an algebra into functions on `points` points, given
/// by its values on the algebra basis: `values[j][i]` is the image of basis
/// element `j` at point `i`.
#[derive(Clone, Debug)]
pub struct FunctionMap {
    pub points: usize,
    pub values: Vec<Vec<C64>>,
}

impl FunctionMap {
    pub fn apply(&self, coords: &[C64]) -> Vec<C64> {
        let mut out = vec![linalg::ZERO; self.points];
        for (c, row) in coords.iter().zip(&self.values) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += c * v;
            }
        }
        out
    }
}

/// `A ↦ (tr(ρ_i A))_i` restricted to `alg`.
pub fn evaluation_map(states: &[State], alg: &OperatorAlgebra) -> FunctionMap {
    FunctionMap {
        points: states.len(),
        values: alg
            .basis()
            .iter()
            .map(|b| states.iter().map(|s| s.expect(b)).collect())
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub unitality_residual: f64,
    /// Smallest real value of `map(A*A) / |A|_F^2` over the samples.
    pub positivity_margin: f64,
    /// Largest imaginary part of `map(A*A) / |A|_F^2` over the samples.
    pub reality_residual: f64,
    pub samples: usize,
    pub passes: bool,
}

const POSITIVITY_TOL: f64 = 1e-9;
const RANDOM_SAMPLES: usize = 32;

/// Checks unitality and positivity of `map` on `alg`. Positivity is sampled
/// on the basis elements and on seeded random elements.
pub fn verify_positive_unital(map: &FunctionMap, alg: &OperatorAlgebra, settings: &Settings) -> PositivityReport {
    let d = alg.ambient_dim();
    let unit = map.apply(&alg.coordinates(&linalg::identity(d)));
    let unitality_residual = if alg.contains(&linalg::identity(d), 1e-10) {
        unit.iter().map(|v| (v - linalg::ONE).norm()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let mut rng = linalg::rng(settings.seed);
    let mut samples: Vec<CMat> = alg.basis().to_vec();
    for _ in 0..RANDOM_SAMPLES {
        samples.push(linalg::random_combination(&mut rng, alg.basis(), d));
    }
    let mut margin = f64::INFINITY;
    let mut imag: f64 = 0.0;
    for a in &samples {
        let aa = a.adjoint() * a;
        let scale = linalg::inner(a, a).re;
        if scale <= 0.0 {
            continue;
        }
        for v in map.apply(&alg.coordinates(&aa)) {
            margin = margin.min(v.re / scale);
            imag = imag.max(v.im.abs() / scale);
        }
    }
    PositivityReport {
        unitality_residual,
        positivity_margin: margin,
        reality_residual: imag,
        samples: samples.len(),
        passes: unitality_residual <= POSITIVITY_TOL && margin >= -POSITIVITY_TOL && imag <= POSITIVITY_TOL,
    }
}

/// `Σ_i ρ_i · density_i`.
pub fn apply_cq(channel: &ClassicalQuantumChannel, rho: &ProbabilityWeight) -> Result<State> {
    if rho.space() != channel.space() {
        return Err(Error::InvalidInput(
            "weight space does not match the channel's classifying space".into(),
        ));
    }
    let d = channel.dim();
    let mut density = CMat::zeros(d, d);
    for (w, s) in rho.weights().iter().zip(channel.fibres()) {
        if *w != 0.0 {
            density += s.density().scale(*w);
        }
    }
    State::new(density, "mixture", 1e-9)
}

fn check_probes(channel: &ClassicalQuantumChannel, probes: &[CMat]) -> Result<()> {
    if probes.is_empty() {
        return Err(Error::InvalidInput("no probes given".into()));
    }
    let d = channel.dim();
    for (k, p) in probes.iter().enumerate() {
        if p.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "probe {k} is {}x{}, channel dimension is {d}",
                p.nrows(),
                p.ncols()
            )));
        }
        let defect = linalg::max_abs(&(p - p.adjoint()));
        if defect > 1e-9 * linalg::max_abs(p).max(1.0) {
            return Err(Error::InvalidInput(format!("probe {k} is not Hermitian")));
        }
    }
    Ok(())
}

/// `M[j][i] = tr(probe_j · density_i)` for Hermitian probes.
pub fn design_matrix(channel: &ClassicalQuantumChannel, probes: &[CMat]) -> Result<DMatrix<f64>> {
    check_probes(channel, probes)?;
    Ok(DMatrix::from_fn(probes.len(), channel.space().len(), |j, i| {
        channel.fibres()[i].expect(&probes[j]).re
    }))
}

/// `Σ_i ρ_i M[j][i]`, the data a mixture would produce.
pub fn forward_data(channel: &ClassicalQuantumChannel, probes: &[CMat], rho: &ProbabilityWeight) -> Result<Vec<f64>> {
    let m = design_matrix(channel, probes)?;
    Ok((m * DVector::from_column_slice(rho.weights())).iter().copied().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub rank: usize,
    pub labels: usize,
    pub sigma_max: f64,
    /// Smallest of the first `labels` singular values (zero if there are fewer rows).
    pub sigma_min: f64,
    pub nullspace_dim: usize,
    pub passes: bool,
}

fn separation_from_design(m: &DMatrix<f64>, rank_tol: f64) -> SeparationReport {
    let (rows, n) = m.shape();
    let mut aug = DMatrix::from_element(rows + 1, n, 1.0);
    aug.view_mut((0, 0), (rows, n)).copy_from(m);
    let sv = aug.singular_values();
    let sigma_max = sv.max();
    let rank = sv.iter().filter(|&&s| s > rank_tol * sigma_max).count();
    let sigma_min = if rows + 1 >= n { sv.iter().copied().fold(f64::INFINITY, f64::min) } else { 0.0 };
    SeparationReport {
        rank,
        labels: n,
        sigma_max,
        sigma_min,
        nullspace_dim: n - rank,
        passes: rank == n,
    }
}

/// Rank analysis of the design matrix stacked on the all-ones row.
pub fn separation_check(channel: &ClassicalQuantumChannel, probes: &[CMat], settings: &Settings) -> Result<SeparationReport> {
    let m = design_matrix(channel, probes)?;
    Ok(separation_from_design(&m, settings.tol.rank))
}

#[derive(Clone, Debug, Serialize)]
pub struct Inversion {
    pub weights: ProbabilityWeight,
    /// `|M ρ - data|_2` at the returned weights.
    pub residual: f64,
    pub unique: bool,
    pub rank: usize,
    pub sigma_min: f64,
    pub nullspace_dim: usize,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Best simplex-constrained fit of `data` by mixtures of fibre states.
///
/// When the fit is not unique the minimum-norm minimizer is returned and
/// `unique` is false.
pub fn invert_cq(channel: &ClassicalQuantumChannel, probes: &[CMat], data: &[f64], settings: &Settings) -> Result<Inversion> {
    if data.len() != probes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} data values for {} probes",
            data.len(),
            probes.len()
        )));
    }
    let m = design_matrix(channel, probes)?;
    invert_design(channel.space().clone(), &m, data, settings)
}

/// `invert_cq` on a precomputed design matrix.
pub fn invert_design(space: ClassifyingSpace, m: &DMatrix<f64>, data: &[f64], settings: &Settings) -> Result<Inversion> {
    let n = space.len();
    if m.ncols() != n || m.nrows() != data.len() {
        return Err(Error::DimensionMismatch("design matrix shape".into()));
    }
    let b = DVector::from_column_slice(data);
    let options = SolverOptions::default();
    let sep = separation_from_design(m, settings.tol.rank);
    let stage1 = simplex_least_squares(m, &b, &options);
    let mut sol = stage1.clone();
    if !sep.passes {
        let rows = m.nrows();
        let mut e = DMatrix::from_element(rows + 1, n, 1.0);
        e.view_mut((0, 0), (rows, n)).copy_from(m);
        let fitted = m * DVector::from_column_slice(&stage1.x);
        let mut f = DVector::from_element(rows + 1, 1.0);
        f.rows_mut(0, rows).copy_from(&fitted);
        let stage2 = min_norm_feasible(&e, &f, &stage1.x, &options);
        sol = simplex::Solution {
            kkt_residual: stage1.kkt_residual.max(stage2.kkt_residual),
            iterations: stage1.iterations + stage2.iterations,
            converged: stage1.converged && stage2.converged,
            x: stage2.x,
        };
    }
    let weights = ProbabilityWeight::from_raw(space, &sol.x)?;
    let fit = m * DVector::from_column_slice(weights.weights());
    Ok(Inversion {
        residual: (fit - b).norm(),
        weights,
        unique: sep.passes,
        rank: sep.rank,
        sigma_min: sep.sigma_min,
        nullspace_dim: sep.nullspace_dim,
        kkt_residual: sol.kkt_residual,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}
