//! Sector decomposition of a field algebra under a finite symmetry, the
//! charging channel built from charged multiplets, and charge estimation.

use serde::Serialize;

use crate::algebra::{self, OperatorAlgebra, State};
use crate::channels::{ClassicalQuantumChannel, ClassifyingSpace, ProbabilityWeight};
use crate::error::{Error, Result};
use crate::groups::{self, UnitaryRep, isotypic_decomposition};
use crate::linalg::{self, C64, CMat, CVec, Settings};

const MULTIPLET_TOL: f64 = 1e-10;
const PRESERVATION_TOL: f64 = 1e-9;
const RANDOM_SAMPLES: usize = 3;

/// One sector `H_γ ⊗ V_γ`.
#[derive(Clone, Debug, Serialize)]
pub struct Sector {
    pub label: String,
    pub dim_h: usize,
    pub dim_v: usize,
    pub character: Vec<C64>,
    #[serde(skip)]
    pub projection: CMat,
    /// First column of the sector inside `W`.
    pub offset: usize,
}

impl Sector {
    pub fn block_size(&self) -> usize {
        self.dim_h * self.dim_v
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct DecompositionResiduals {
    /// `|W*W - 1|_F`.
    pub unitarity: f64,
    /// `max_γ |P_γ - W (block indicator) W*|_F`.
    pub projections: f64,
    /// `max_g |W* U(g) W - ⊕ 1 ⊗ γ(g)|_F`.
    pub group_blocks: f64,
    /// Largest deviation of `W* A W` from `⊕ a_γ ⊗ 1` over sampled observables, relative to `|A|_F`.
    pub observable_blocks: f64,
}

impl DecompositionResiduals {
    pub fn max(&self) -> f64 {
        self.unitarity
            .max(self.projections)
            .max(self.group_blocks)
            .max(self.observable_blocks)
    }
}

#[derive(Clone, Debug)]
pub struct SectorDecomposition {
    sectors: Vec<Sector>,
    w: CMat,
    observables: OperatorAlgebra,
    rep: UnitaryRep,
    /// False when the field algebra was not all of `B(C^d)`; the sectors then
    /// describe the commutant of the group rather than the observables.
    full_field: bool,
    residuals: DecompositionResiduals,
}

impl SectorDecomposition {
    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn labels(&self) -> Vec<String> {
        self.sectors.iter().map(|s| s.label.clone()).collect()
    }

    pub fn space(&self) -> ClassifyingSpace {
        ClassifyingSpace::symbols(&self.labels()).expect("sector labels are distinct")
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.sectors.iter().position(|s| s.label == label)
    }

    pub fn w(&self) -> &CMat {
        &self.w
    }

    pub fn observables(&self) -> &OperatorAlgebra {
        &self.observables
    }

    pub fn rep(&self) -> &UnitaryRep {
        &self.rep
    }

    pub fn full_field(&self) -> bool {
        self.full_field
    }

    pub fn residuals(&self) -> &DecompositionResiduals {
        &self.residuals
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    /// `m(F)`, the group average.
    pub fn conditional_expectation(&self, f: &CMat) -> Result<CMat> {
        groups::average(f, &self.rep)
    }
}

/// Blocks `W* A W` and measures the distance from `⊕ a_γ ⊗ 1_{V_γ}`.
fn observable_block_residual(sectors: &[Sector], w: &CMat, a: &CMat) -> f64 {
    let x = w.adjoint() * a * w;
    let mut target = CMat::zeros(x.nrows(), x.ncols());
    for s in sectors {
        let (o, dv) = (s.offset, s.dim_v);
        let mut small = CMat::zeros(s.dim_h, s.dim_h);
        for p in 0..s.dim_h {
            for q in 0..s.dim_h {
                let mut acc = linalg::ZERO;
                for k in 0..dv {
                    acc += x[(o + p * dv + k, o + q * dv + k)];
                }
                small[(p, q)] = acc.unscale(dv as f64);
            }
        }
        let blk = small.kronecker(&linalg::identity(dv));
        target.view_mut((o, o), (s.block_size(), s.block_size())).copy_from(&blk);
    }
    linalg::fro_norm(&(x - target)) / linalg::fro_norm(a).max(f64::MIN_POSITIVE)
}

/// Splits `C^d` under `rep` into sectors and computes the observable algebra.
///
/// Sector labels are `s0, s1, ...` in canonical order; `s0` carries the
/// trivial representation when it occurs.
pub fn decompose_sectors(f_alg: &OperatorAlgebra, rep: &UnitaryRep, settings: &Settings) -> Result<SectorDecomposition> {
    let iso = isotypic_decomposition(rep, settings)?;
    let observables = groups::fixed_point_algebra(f_alg, rep, settings)?;
    let sectors: Vec<Sector> = iso
        .isotypes
        .iter()
        .enumerate()
        .map(|(k, t)| Sector {
            label: format!("s{k}"),
            dim_h: t.dim_h,
            dim_v: t.dim_v,
            character: t.character.clone(),
            projection: t.projection.clone(),
            offset: t.offset,
        })
        .collect();
    let d = rep.dim();
    let w = iso.w.clone();
    let unitarity = linalg::fro_norm(&(w.adjoint() * &w - linalg::identity(d)));
    let projections = sectors
        .iter()
        .map(|s| {
            let cols = w.columns(s.offset, s.block_size());
            linalg::fro_norm(&(&s.projection - cols * cols.adjoint()))
        })
        .fold(0.0, f64::max);
    let group_blocks = (0..rep.group().order())
        .map(|g| linalg::fro_norm(&(w.adjoint() * rep.matrix(g) * &w - iso.block_form(g))))
        .fold(0.0, f64::max);
    let mut rng = linalg::rng(settings.seed);
    let observable_blocks = (0..RANDOM_SAMPLES)
        .map(|_| {
            let a = linalg::random_combination(&mut rng, observables.basis(), d);
            observable_block_residual(&sectors, &w, &a)
        })
        .fold(0.0, f64::max);
    Ok(SectorDecomposition {
        sectors,
        w,
        observables,
        rep: rep.clone(),
        full_field: f_alg.is_full(),
        residuals: DecompositionResiduals {
            unitarity,
            projections,
            group_blocks,
            observable_blocks,
        },
    })
}

/// Dimension of the centre of the observable algebra, computed directly.
pub fn center_dim(decomp: &SectorDecomposition, settings: &Settings) -> Result<usize> {
    Ok(algebra::center(decomp.observables(), settings)?.dimension())
}

/// Whether a multiplet satisfies the Cuntz relations or only implements a morphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MultipletKind {
    Isometric,
    Partial,
}

/// Field operators `ψ_1..ψ_m` implementing `ρ(A) = Σ ψ_i A ψ_i*`.
#[derive(Clone, Debug)]
pub struct ChargedMultiplet {
    label: String,
    psis: Vec<CMat>,
    region: Option<Vec<usize>>,
    kind: MultipletKind,
}

impl ChargedMultiplet {
    pub fn new(label: impl Into<String>, psis: Vec<CMat>, region: Option<Vec<usize>>) -> Result<Self> {
        let label = label.into();
        let Some(first) = psis.first() else {
            return Err(Error::InvalidInput(format!("multiplet `{label}` is empty")));
        };
        let d = linalg::is_square(first)?;
        if psis.iter().any(|p| p.shape() != (d, d)) {
            return Err(Error::DimensionMismatch(format!("multiplet `{label}` mixes dimensions")));
        }
        let one = linalg::identity(d);
        let mut defect = {
            let sum: CMat = psis.iter().map(|p| p * p.adjoint()).sum();
            linalg::max_abs(&(sum - &one))
        };
        for (i, pi) in psis.iter().enumerate() {
            for (j, pj) in psis.iter().enumerate() {
                let target = if i == j { one.clone() } else { CMat::zeros(d, d) };
                defect = defect.max(linalg::max_abs(&(pi.adjoint() * pj - target)));
            }
        }
        let kind = if defect <= MULTIPLET_TOL {
            MultipletKind::Isometric
        } else {
            MultipletKind::Partial
        };
        Ok(Self {
            label,
            psis,
            region,
            kind,
        })
    }

    /// The single-element multiplet `{u}`.
    pub fn unitary(label: impl Into<String>, u: CMat) -> Result<Self> {
        Self::new(label, vec![u], None)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn psis(&self) -> &[CMat] {
        &self.psis
    }

    pub fn region(&self) -> Option<&[usize]> {
        self.region.as_deref()
    }

    pub fn kind(&self) -> MultipletKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.psis[0].nrows()
    }

    /// `ρ(A) = Σ ψ_i A ψ_i*`.
    pub fn apply(&self, a: &CMat) -> CMat {
        self.psis.iter().map(|p| p * a * p.adjoint()).sum()
    }

    /// Density of `ω ∘ ρ`, namely `Σ ψ_i* ω ψ_i`.
    pub fn pull_back(&self, omega: &CMat) -> CMat {
        self.psis.iter().map(|p| p.adjoint() * omega * p).sum()
    }

    /// Largest relative residual of `ρ(B) ∈ alg` over the basis, with its index.
    pub fn preservation_defect(&self, alg: &OperatorAlgebra) -> (usize, f64) {
        alg.basis()
            .iter()
            .enumerate()
            .map(|(k, b)| (k, alg.residual(&self.apply(b))))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
    }

    /// Largest residual of `ψ_i B - ρ(B) ψ_i` over the basis, with its index.
    pub fn implementing_defect(&self, alg: &OperatorAlgebra) -> (usize, f64) {
        let mut worst = (0, 0.0);
        for (k, b) in alg.basis().iter().enumerate() {
            let rb = self.apply(b);
            for p in &self.psis {
                let r = linalg::fro_norm(&(p * b - &rb * p));
                if r > worst.1 {
                    worst = (k, r);
                }
            }
        }
        worst
    }
}

fn check_morphisms(morphisms: &[ChargedMultiplet], observables: &OperatorAlgebra) -> Result<()> {
    for m in morphisms {
        if m.dim() != observables.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "multiplet `{}` acts in dimension {}, observables in {}",
                m.label,
                m.dim(),
                observables.ambient_dim()
            )));
        }
        let (index, residual) = m.preservation_defect(observables);
        if residual > PRESERVATION_TOL {
            return Err(Error::MorphismNotAlgebraic { index, residual });
        }
    }
    Ok(())
}

/// `γ ↦ tr(ω₀ ρ_γ(A))`, one value per morphism.
pub fn k_map(a: &CMat, vacuum: &State, morphisms: &[ChargedMultiplet], observables: &OperatorAlgebra) -> Result<Vec<C64>> {
    check_morphisms(morphisms, observables)?;
    Ok(morphisms.iter().map(|m| vacuum.expect(&m.apply(a))).collect())
}

/// Index of the sector carrying `vacuum`, which must lie entirely in one sector.
pub fn vacuum_sector(decomp: &SectorDecomposition, vacuum: &State, tol: f64) -> Result<usize> {
    decomp
        .sectors()
        .iter()
        .position(|s| (vacuum.expect(&s.projection).re - 1.0).abs() <= tol)
        .ok_or_else(|| Error::InvalidState("vacuum is not supported in a single sector".into()))
}

/// Channel over the sector labels with fibre `ω₀ ∘ ρ_γ` at label `γ`.
/// Every sector needs a morphism with the same label.
pub fn charging_channel(
    decomp: &SectorDecomposition,
    vacuum: &State,
    morphisms: &[ChargedMultiplet],
) -> Result<ClassicalQuantumChannel> {
    check_morphisms(morphisms, decomp.observables())?;
    vacuum_sector(decomp, vacuum, 1e-9)?;
    let fibres = decomp
        .sectors()
        .iter()
        .map(|s| {
            let m = morphisms
                .iter()
                .find(|m| m.label == s.label)
                .ok_or_else(|| Error::InvalidInput(format!("no morphism for sector `{}`", s.label)))?;
            State::new(m.pull_back(vacuum.density()), format!("{}∘{}", vacuum.label(), s.label), 1e-9)
        })
        .collect::<Result<Vec<_>>>()?;
    ClassicalQuantumChannel::new(decomp.space(), fibres)
}

/// `ν_γ = tr(ω P_γ)`.
pub fn estimate_charge(omega: &State, decomp: &SectorDecomposition) -> Result<ProbabilityWeight> {
    if omega.dim() != decomp.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs decomposition dimension {}",
            omega.dim(),
            decomp.dim()
        )));
    }
    let raw: Vec<f64> = decomp.sectors().iter().map(|s| omega.expect(&s.projection).re).collect();
    ProbabilityWeight::from_raw(decomp.space(), &raw)
}

/// `support[γ][γ']` = `tr(ω_γ P_γ')` for the fibres of a charging channel.
pub fn fibre_support(channel: &ClassicalQuantumChannel, decomp: &SectorDecomposition) -> Vec<Vec<f64>> {
    channel
        .fibres()
        .iter()
        .map(|f| decomp.sectors().iter().map(|s| f.expect(&s.projection).re).collect())
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ChargedStateReport {
    /// `max_F |k*(ν)(m(F)) - ⟨Ψ, m(F) Ψ⟩|` over a basis of the field algebra.
    pub max_deviation: f64,
    pub norm_deviation: f64,
    pub checked: usize,
    pub passes: bool,
}

const CHARGED_TOL: f64 = 1e-8;

/// `Ψ = Σ_γ √ν_γ Σ_i ψ_i^γ* Ω₀`, checked against `k*(ν) ∘ m` on `f_alg`.
pub fn induce_charged_state(
    nu: &ProbabilityWeight,
    multiplets: &[ChargedMultiplet],
    vacuum_vector: &CVec,
    decomp: &SectorDecomposition,
    f_alg: &OperatorAlgebra,
) -> Result<(CVec, ChargedStateReport)> {
    let d = decomp.dim();
    if vacuum_vector.len() != d {
        return Err(Error::DimensionMismatch("vacuum vector length".into()));
    }
    if (vacuum_vector.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState("vacuum vector is not normalized".into()));
    }
    let omega0 = linalg::projector(vacuum_vector);
    let mut psi = CVec::zeros(d);
    let mut density = CMat::zeros(d, d);
    for (label, &w) in nu.space().labels().iter().zip(nu.weights()) {
        if w <= 0.0 {
            continue;
        }
        let name = label.to_string();
        let m = multiplets
            .iter()
            .find(|m| m.label == name)
            .ok_or_else(|| Error::InvalidInput(format!("no multiplet for label `{name}`")))?;
        let (index, residual) = m.implementing_defect(decomp.observables());
        if residual > PRESERVATION_TOL {
            return Err(Error::ImplementingRelation {
                label: name,
                index,
                residual,
            });
        }
        for p in m.psis() {
            psi += (p.adjoint() * vacuum_vector).scale(w.sqrt());
        }
        density += m.pull_back(&omega0).scale(w);
    }
    let mut max_deviation: f64 = 0.0;
    for f in f_alg.basis() {
        let mf = decomp.conditional_expectation(f)?;
        let lhs = linalg::expectation(&density, &mf);
        let rhs = (psi.adjoint() * &mf * &psi)[(0, 0)];
        max_deviation = max_deviation.max((lhs - rhs).norm());
    }
    let norm_deviation = (psi.norm() - 1.0).abs();
    let report = ChargedStateReport {
        max_deviation,
        norm_deviation,
        checked: f_alg.dimension(),
        passes: max_deviation <= CHARGED_TOL,
    };
    Ok((psi, report))
}

/// For each sector, the first candidate unitary `u` normalizing the
/// observables whose conjugate vacuum `u* ω₀ u` lies in that sector. The
/// vacuum sector is assigned the identity.
pub fn find_abelian_morphisms(
    decomp: &SectorDecomposition,
    vacuum: &State,
    candidates: &[CMat],
) -> Result<Vec<Option<ChargedMultiplet>>> {
    let d = decomp.dim();
    let iota = vacuum_sector(decomp, vacuum, 1e-9)?;
    let mut found: Vec<Option<ChargedMultiplet>> = vec![None; decomp.sectors().len()];
    found[iota] = Some(ChargedMultiplet::unitary(&decomp.sectors()[iota].label, linalg::identity(d))?);
    for u in candidates {
        if u.shape() != (d, d) || linalg::max_abs(&(u.adjoint() * u - linalg::identity(d))) > MULTIPLET_TOL {
            continue;
        }
        let trial = ChargedMultiplet::unitary("", u.clone())?;
        if trial.preservation_defect(decomp.observables()).1 > PRESERVATION_TOL {
            continue;
        }
        let pulled = trial.pull_back(vacuum.density());
        for (k, s) in decomp.sectors().iter().enumerate() {
            if found[k].is_none() && (linalg::expectation(&pulled, &s.projection).re - 1.0).abs() <= 1e-9 {
                found[k] = Some(ChargedMultiplet::unitary(&s.label, u.clone())?);
            }
        }
    }
    Ok(found)
}

/// Lowest eigenvalue of `H` compressed to each sector.
pub fn sector_energies(decomp: &SectorDecomposition, h: &CMat) -> Result<Vec<f64>> {
    if h.shape() != (decomp.dim(), decomp.dim()) {
        return Err(Error::DimensionMismatch("hamiltonian dimension".into()));
    }
    Ok(decomp
        .sectors()
        .iter()
        .map(|s| {
            let cols = decomp.w().columns(s.offset, s.block_size()).into_owned();
            linalg::eigh(&(cols.adjoint() * h * &cols)).values[0]
        })
        .collect())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpectationReport {
    pub idempotence: f64,
    pub unitality: f64,
    /// Smallest eigenvalue of `m(F*F)` relative to `|F|_F^2`.
    pub positivity: f64,
    pub bimodule: f64,
    pub samples: usize,
}

impl ExpectationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.idempotence <= tol && self.unitality <= tol && self.positivity >= -tol && self.bimodule <= tol
    }
}

/// Samples the defining properties of the group average `m` on random field elements.
pub fn check_conditional_expectation(decomp: &SectorDecomposition, samples: usize, settings: &Settings) -> Result<ExpectationReport> {
    let d = decomp.dim();
    let mut rng = linalg::rng(settings.seed);
    let one = linalg::identity(d);
    let mut report = ExpectationReport {
        idempotence: 0.0,
        unitality: linalg::fro_norm(&(decomp.conditional_expectation(&one)? - &one)),
        positivity: f64::INFINITY,
        bimodule: 0.0,
        samples,
    };
    for _ in 0..samples {
        let f = linalg::random_complex(&mut rng, d, d);
        let scale = linalg::fro_norm(&f);
        let mf = decomp.conditional_expectation(&f)?;
        report.idempotence = report
            .idempotence
            .max(linalg::fro_norm(&(decomp.conditional_expectation(&mf)? - &mf)) / scale);
        let pos = decomp.conditional_expectation(&(f.adjoint() * &f))?;
        report.positivity = report.positivity.min(linalg::eigh(&pos).values[0] / (scale * scale));
        let a1 = linalg::random_combination(&mut rng, decomp.observables().basis(), d);
        let a2 = linalg::random_combination(&mut rng, decomp.observables().basis(), d);
        let lhs = decomp.conditional_expectation(&(&a1 * &f * &a2))?;
        let rhs = &a1 * &mf * &a2;
        let norm = linalg::fro_norm(&a1) * scale * linalg::fro_norm(&a2);
        report.bimodule = report.bimodule.max(linalg::fro_norm(&(lhs - rhs)) / norm);
    }
    Ok(report)
}
