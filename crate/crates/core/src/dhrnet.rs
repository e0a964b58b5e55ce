//! Tensor-product lattice nets with an on-site symmetry, localized
//! morphisms of the observable net and the localization criterion.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{self, OperatorAlgebra, State};
use crate::error::{Error, Result};
use crate::groups::{self, FiniteGroup, GroupJson, IsotypicDecomposition, RepJson, UnitaryRep};
use crate::linalg::{self, CMat, MatrixJson, Settings};
use crate::sectors::ChargedMultiplet;

const MORPHISM_TOL: f64 = 1e-9;
const MAX_ALL_SUBSETS_SITES: usize = 8;

/// A set of sites, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Region(Vec<usize>);

impl Region {
    pub fn new(mut sites: Vec<usize>) -> Self {
        sites.sort_unstable();
        sites.dedup();
        Region(sites)
    }

    pub fn empty() -> Self {
        Region(Vec::new())
    }

    pub fn interval(start: usize, len: usize) -> Self {
        Region((start..start + len).collect())
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.0.binary_search(&site).is_ok()
    }

    pub fn complement(&self, n: usize) -> Region {
        Region((0..n).filter(|s| !self.contains(*s)).collect())
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::new(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.0.iter().all(|s| other.contains(*s))
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

/// Group given either by a built-in name such as `"cyclic:2"` or by its table.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Builtin(String),
    Table(GroupJson),
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroup> {
        match self {
            GroupSpec::Builtin(name) => FiniteGroup::builtin(name),
            GroupSpec::Table(t) => FiniteGroup::from_json(t),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetJson {
    pub sites: usize,
    pub onsite_dim: usize,
    pub group: GroupSpec,
    pub onsite_rep: RepJson,
}

/// `n` sites, each `C^{d₀}` carrying the same representation of `G`.
#[derive(Clone, Debug)]
pub struct LatticeNet {
    sites: usize,
    onsite_dim: usize,
    onsite: UnitaryRep,
    global: UnitaryRep,
}

impl LatticeNet {
    pub fn new(sites: usize, onsite: UnitaryRep, settings: &Settings) -> Result<Self> {
        let onsite_dim = onsite.dim();
        if sites == 0 || onsite_dim < 2 {
            return Err(Error::InvalidInput("a net needs at least one site of dimension >= 2".into()));
        }
        let total = onsite_dim
            .checked_pow(sites as u32)
            .ok_or(Error::DimensionCap { dim: usize::MAX, cap: settings.dim_cap })?;
        settings.check_dim(total)?;
        let global = onsite.tensor_power(sites);
        Ok(Self {
            sites,
            onsite_dim,
            onsite,
            global,
        })
    }

    pub fn from_json(json: &NetJson, settings: &Settings) -> Result<Self> {
        let group = json.group.build()?;
        let onsite = UnitaryRep::from_json(group, &json.onsite_rep, 1e-10)?;
        if onsite.dim() != json.onsite_dim {
            return Err(Error::DimensionMismatch(format!(
                "onsite_dim is {} but the representation acts in dimension {}",
                json.onsite_dim,
                onsite.dim()
            )));
        }
        Self::new(json.sites, onsite, settings)
    }

    pub fn to_json(&self) -> NetJson {
        let group = self.onsite.group();
        let spec = match FiniteGroup::builtin(group.name()) {
            Ok(g) if g.table() == group.table() => GroupSpec::Builtin(group.name().to_owned()),
            _ => GroupSpec::Table(group.to_json()),
        };
        NetJson {
            sites: self.sites,
            onsite_dim: self.onsite_dim,
            group: spec,
            onsite_rep: self.onsite.to_json(),
        }
    }

    /// The chain of qubits with `Z₂` acting by `σ_z` on every site.
    pub fn z2_chain(sites: usize, settings: &Settings) -> Result<Self> {
        Self::new(sites, UnitaryRep::cyclic(2, &linalg::pauli_z(), 1e-10)?, settings)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn onsite_dim(&self) -> usize {
        self.onsite_dim
    }

    pub fn dim(&self) -> usize {
        self.global.dim()
    }

    pub fn onsite(&self) -> &UnitaryRep {
        &self.onsite
    }

    pub fn global(&self) -> &UnitaryRep {
        &self.global
    }

    pub fn full_region(&self) -> Region {
        Region::interval(0, self.sites)
    }

    fn check_region(&self, region: &Region) -> Result<()> {
        match region.sites().iter().find(|&&s| s >= self.sites) {
            Some(s) => Err(Error::InvalidInput(format!("site {s} outside a {}-site net", self.sites))),
            None => Ok(()),
        }
    }

    fn factor_dim(&self, region: &Region) -> usize {
        self.onsite_dim.pow(region.len() as u32)
    }

    /// `table[a][r]` is the global index whose digits on `region` spell `a`
    /// and whose digits elsewhere spell `r`. Site 0 is the leading tensor factor.
    fn index_table(&self, region: &Region) -> Vec<Vec<usize>> {
        let rest = region.complement(self.sites);
        let (da, dr) = (self.factor_dim(region), self.factor_dim(&rest));
        let n = self.sites;
        let d0 = self.onsite_dim;
        let spread = |value: usize, sites: &[usize]| {
            let mut idx = 0;
            let mut v = value;
            for &s in sites.iter().rev() {
                idx += (v % d0) * d0.pow((n - 1 - s) as u32);
                v /= d0;
            }
            idx
        };
        (0..da)
            .map(|a| {
                let base = spread(a, region.sites());
                (0..dr).map(|r| base + spread(r, rest.sites())).collect()
            })
            .collect()
    }

    /// `x ⊗ 1` with `x` acting on the factor of `region`.
    pub fn embed(&self, region: &Region, x: &CMat) -> Result<CMat> {
        self.check_region(region)?;
        let da = self.factor_dim(region);
        if x.shape() != (da, da) {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, region factor has dimension {da}",
                x.nrows(),
                x.ncols()
            )));
        }
        let table = self.index_table(region);
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for a in 0..da {
            for b in 0..da {
                let v = x[(a, b)];
                if v != linalg::ZERO {
                    for (&i, &j) in table[a].iter().zip(&table[b]) {
                        out[(i, j)] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Partial trace over the complement of `keep`.
    pub fn reduce(&self, keep: &Region, x: &CMat) -> Result<CMat> {
        self.check_region(keep)?;
        let table = self.index_table(keep);
        let da = table.len();
        Ok(CMat::from_fn(da, da, |a, b| {
            table[a].iter().zip(&table[b]).map(|(&i, &j)| x[(i, j)]).sum()
        }))
    }

    /// The representation of `G` on the factor of `region`.
    pub fn factor_rep(&self, region: &Region) -> UnitaryRep {
        if region.is_empty() {
            UnitaryRep::trivial(self.onsite.group().clone(), 1)
        } else {
            self.onsite.tensor_power(region.len())
        }
    }
}

/// The field algebra `B(H_O) ⊗ 1` or its fixed points `B(H_O)^G ⊗ 1`.
pub fn region_algebra(net: &LatticeNet, region: &Region, observable: bool, settings: &Settings) -> Result<OperatorAlgebra> {
    net.check_region(region)?;
    let da = net.factor_dim(region);
    let factor = OperatorAlgebra::full(da);
    let local = if observable {
        groups::fixed_point_algebra(&factor, &net.factor_rep(region), settings)?
    } else {
        factor
    };
    let norm = ((net.dim() / da) as f64).sqrt();
    let basis = local
        .basis()
        .iter()
        .map(|b| Ok(net.embed(region, b)?.unscale(norm)))
        .collect::<Result<Vec<_>>>()?;
    OperatorAlgebra::from_spanning_set(net.dim(), &basis, settings.tol.rank)
}

/// `max_i |⟨B_i, x⟩|` over the basis `W (E_ab ⊗ 1) W* / √dim V` of `U(G)'`,
/// read off `W* x W` without forming the basis.
fn fixed_point_max_coordinate(iso: &IsotypicDecomposition, x: &CMat) -> f64 {
    let y = iso.w.adjoint() * x * &iso.w;
    let mut best: f64 = 0.0;
    for t in &iso.isotypes {
        let dv = t.dim_v;
        let norm = (dv as f64).sqrt();
        for a in 0..t.dim_h {
            for b in 0..t.dim_h {
                let mut acc = linalg::ZERO;
                for k in 0..dv {
                    acc += y[(t.offset + a * dv + k, t.offset + b * dv + k)];
                }
                best = best.max(acc.norm() / norm);
            }
        }
    }
    best
}

/// Caches isotypic decompositions of region factors, keyed by region size.
struct FactorCache<'a> {
    net: &'a LatticeNet,
    settings: &'a Settings,
    cache: HashMap<usize, IsotypicDecomposition>,
}

impl<'a> FactorCache<'a> {
    fn new(net: &'a LatticeNet, settings: &'a Settings) -> Self {
        Self {
            net,
            settings,
            cache: HashMap::new(),
        }
    }

    /// `state_distance_mod(ω, ω₀, A(region))` for the observable algebra of
    /// `region`. The embedded basis is `(B_i ⊗ 1)/√d_rest`, so coordinates are
    /// those of the reduced difference scaled by `1/√d_rest`.
    fn distance(&mut self, region: &Region, diff: &CMat) -> Result<f64> {
        let reduced = self.net.reduce(region, diff)?;
        let rest = (self.net.dim() / reduced.nrows()) as f64;
        let iso = match self.cache.entry(region.len()) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(groups::isotypic_decomposition(&self.net.factor_rep(region), self.settings)?)
            }
        };
        Ok(fixed_point_max_coordinate(iso, &reduced) / rest.sqrt())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DhrOptions {
    pub tol: f64,
    /// Every proper subset of sites instead of intervals; allowed up to 8 sites.
    pub all_subsets: bool,
}

impl Default for DhrOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            all_subsets: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionDistance {
    pub region: Region,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DhrReport {
    pub passes: bool,
    pub witness_regions: Vec<Region>,
    pub distances: Vec<RegionDistance>,
}

/// Candidate localization regions: the empty region and every interval
/// (or every subset) other than the whole chain, whose complement algebra
/// is trivial.
pub fn candidate_regions(net: &LatticeNet, all_subsets: bool) -> Result<Vec<Region>> {
    let n = net.sites();
    if all_subsets {
        if n > MAX_ALL_SUBSETS_SITES {
            return Err(Error::InvalidInput(format!(
                "subset enumeration is limited to {MAX_ALL_SUBSETS_SITES} sites"
            )));
        }
        let mut regions: Vec<Region> = (0..(1usize << n) - 1)
            .map(|mask| Region((0..n).filter(|s| mask >> s & 1 == 1).collect()))
            .collect();
        regions.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        return Ok(regions);
    }
    let mut regions = vec![Region::empty()];
    for len in 1..n {
        for start in 0..=n - len {
            regions.push(Region::interval(start, len));
        }
    }
    Ok(regions)
}

/// Regions `O` such that `ω` and `ω₀` agree on the observables of the complement of `O`.
pub fn dhr_check(omega: &State, vacuum: &State, net: &LatticeNet, options: &DhrOptions, settings: &Settings) -> Result<DhrReport> {
    if omega.dim() != net.dim() || vacuum.dim() != net.dim() {
        return Err(Error::DimensionMismatch("states do not live on the net".into()));
    }
    let diff = omega.density() - vacuum.density();
    let mut cache = FactorCache::new(net, settings);
    let mut distances = Vec::new();
    for region in candidate_regions(net, options.all_subsets)? {
        let distance = cache.distance(&region.complement(net.sites()), &diff)?;
        distances.push(RegionDistance { region, distance });
    }
    let witness_regions: Vec<Region> = distances
        .iter()
        .filter(|r| r.distance <= options.tol)
        .map(|r| r.region.clone())
        .collect();
    Ok(DhrReport {
        passes: !witness_regions.is_empty(),
        witness_regions,
        distances,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorphismJson {
    pub label: String,
    pub region: Region,
    /// Operators on the region's factor.
    pub psis: Vec<MatrixJson>,
}

/// A multiplet supported on `region`, acting as `A ↦ Σ ψ_i A ψ_i*`.
#[derive(Clone, Debug)]
pub struct LocalizedMorphism {
    region: Region,
    multiplet: ChargedMultiplet,
}

impl LocalizedMorphism {
    /// Builds the morphism from operators on the region factor and validates
    /// it against the observable algebra of `net`.
    pub fn from_local(
        net: &LatticeNet,
        label: impl Into<String>,
        region: Region,
        local: &[CMat],
        settings: &Settings,
    ) -> Result<Self> {
        let psis = local.iter().map(|x| net.embed(&region, x)).collect::<Result<Vec<_>>>()?;
        let multiplet = ChargedMultiplet::new(label, psis, Some(region.sites().to_vec()))?;
        let m = Self { region, multiplet };
        m.validate(net, settings)?;
        Ok(m)
    }

    pub fn from_json(net: &LatticeNet, json: &MorphismJson, settings: &Settings) -> Result<Self> {
        let local = json.psis.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
        Self::from_local(net, json.label.clone(), json.region.clone(), &local, settings)
    }

    pub fn identity(net: &LatticeNet) -> Self {
        Self {
            region: Region::empty(),
            multiplet: ChargedMultiplet::unitary("id", linalg::identity(net.dim())).expect("identity is a valid multiplet"),
        }
    }

    /// Unital, algebra-preserving and multiplicative on the observables.
    fn validate(&self, net: &LatticeNet, settings: &Settings) -> Result<()> {
        let obs = observable_algebra(net, settings)?;
        let d = net.dim();
        let unit = linalg::fro_norm(&(self.apply_unchecked(&linalg::identity(d)) - linalg::identity(d)));
        if unit > MORPHISM_TOL * (d as f64).sqrt() {
            return Err(Error::InvalidInput(format!(
                "morphism `{}` is not unital (defect {unit:.3e})",
                self.label()
            )));
        }
        let (index, residual) = self.multiplet.preservation_defect(&obs);
        if residual > MORPHISM_TOL {
            return Err(Error::MorphismNotAlgebraic { index, residual });
        }
        let mut rng = linalg::rng(settings.seed);
        for _ in 0..4 {
            let a = linalg::random_combination(&mut rng, obs.basis(), d);
            let b = linalg::random_combination(&mut rng, obs.basis(), d);
            let lhs = self.apply_unchecked(&(&a * &b));
            let rhs = self.apply_unchecked(&a) * self.apply_unchecked(&b);
            let defect = linalg::fro_norm(&(lhs - rhs)) / (linalg::fro_norm(&a) * linalg::fro_norm(&b));
            if defect > MORPHISM_TOL {
                return Err(Error::InvalidInput(format!(
                    "morphism `{}` is not multiplicative (defect {defect:.3e})",
                    self.label()
                )));
            }
        }
        Ok(())
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn label(&self) -> &str {
        self.multiplet.label()
    }

    pub fn multiplet(&self) -> &ChargedMultiplet {
        &self.multiplet
    }

    fn apply_unchecked(&self, a: &CMat) -> CMat {
        self.multiplet.apply(a)
    }

    /// `ρ ∘ σ`, localized in the union of the regions.
    pub fn compose(&self, other: &LocalizedMorphism) -> Result<LocalizedMorphism> {
        let psis = self
            .multiplet
            .psis()
            .iter()
            .flat_map(|p| other.multiplet.psis().iter().map(move |q| p * q))
            .collect();
        let region = self.region.union(&other.region);
        let label = format!("{}*{}", self.label(), other.label());
        Ok(LocalizedMorphism {
            multiplet: ChargedMultiplet::new(label, psis, Some(region.sites().to_vec()))?,
            region,
        })
    }
}

/// Observables of the whole net.
pub fn observable_algebra(net: &LatticeNet, settings: &Settings) -> Result<OperatorAlgebra> {
    groups::fixed_point_algebra(&OperatorAlgebra::full(net.dim()), net.global(), settings)
}

/// `Σ ψ_i A ψ_i*` for an observable `A`.
pub fn apply_morphism(rho: &LocalizedMorphism, a: &CMat, observables: &OperatorAlgebra) -> Result<CMat> {
    let r = observables.residual(a);
    if r > MORPHISM_TOL * linalg::fro_norm(a).max(1.0) {
        return Err(Error::NotObservable(r));
    }
    Ok(rho.apply_unchecked(a))
}

/// The state `A ↦ ω₀(ρ(A))`.
pub fn selected_state(rho: &LocalizedMorphism, vacuum: &State) -> Result<State> {
    State::new(
        rho.multiplet.pull_back(vacuum.density()),
        format!("{}∘{}", vacuum.label(), rho.label()),
        1e-9,
    )
}

/// `max_j |T ρ(B_j) - σ(B_j) T|_F` over the observable basis.
pub fn intertwiner_residual(t: &CMat, rho: &LocalizedMorphism, sigma: &LocalizedMorphism, observables: &OperatorAlgebra) -> f64 {
    observables
        .basis()
        .iter()
        .map(|b| linalg::fro_norm(&(t * rho.apply_unchecked(b) - sigma.apply_unchecked(b) * t)))
        .fold(0.0, f64::max)
}

/// Orthonormal basis of `{T ∈ A : T ρ(A) = σ(A) T}`.
pub fn solve_intertwiners(
    rho: &LocalizedMorphism,
    sigma: &LocalizedMorphism,
    observables: &OperatorAlgebra,
    settings: &Settings,
) -> Result<Vec<CMat>> {
    let d = observables.ambient_dim();
    let basis = observables.basis();
    let k = basis.len();
    let images: Vec<(CMat, CMat)> = basis
        .iter()
        .map(|b| (rho.apply_unchecked(b), sigma.apply_unchecked(b)))
        .collect();
    let block = d * d;
    let mut l = CMat::zeros(k * block, k);
    for (col, t) in basis.iter().enumerate() {
        for (row, (rb, sb)) in images.iter().enumerate() {
            let eq = t * rb - sb * t;
            for (idx, v) in eq.iter().enumerate() {
                l[(row * block + idx, col)] = *v;
            }
        }
    }
    Ok(linalg::nullspace(&l, settings.tol.rank)
        .into_iter()
        .map(|c| {
            let mut t = CMat::zeros(d, d);
            for (j, b) in basis.iter().enumerate() {
                t.zip_apply(b, |x, y| *x += c[j] * y);
            }
            t
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct HaagReport {
    pub region: Region,
    pub observable: bool,
    /// Dimension of the commutant of the complement algebra.
    pub lhs_dim: usize,
    pub rhs_dim: usize,
    pub defect: i64,
    /// Residual of the region algebra inside the commutant of its complement.
    pub inclusion_residual: f64,
    pub passes: bool,
}

/// Compares `A(O')'` with `A(O)`.
pub fn haag_duality_check(net: &LatticeNet, region: &Region, observable: bool, settings: &Settings) -> Result<HaagReport> {
    let complement = region.complement(net.sites());
    let outer = region_algebra(net, &complement, observable, settings)?;
    let lhs = algebra::commutant(&outer, settings)?;
    let rhs = region_algebra(net, region, observable, settings)?;
    let inclusion_residual = lhs.span_residual(&rhs);
    let defect = lhs.dimension() as i64 - rhs.dimension() as i64;
    Ok(HaagReport {
        region: region.clone(),
        observable,
        lhs_dim: lhs.dimension(),
        rhs_dim: rhs.dimension(),
        defect,
        inclusion_residual,
        passes: defect == 0 && inclusion_residual <= 1e-8,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InversionMatch {
    pub index: usize,
    pub label: String,
    pub distance: f64,
}

/// Candidates whose selected state agrees with `ω` on all observables.
pub fn invert_selected_state(
    omega: &State,
    vacuum: &State,
    candidates: &[LocalizedMorphism],
    net: &LatticeNet,
    tol: f64,
    settings: &Settings,
) -> Result<Vec<InversionMatch>> {
    let mut cache = FactorCache::new(net, settings);
    let all = net.full_region();
    let mut out = Vec::new();
    for (index, c) in candidates.iter().enumerate() {
        let selected = selected_state(c, vacuum)?;
        let distance = cache.distance(&all, &(omega.density() - selected.density()))?;
        if distance <= tol {
            out.push(InversionMatch {
                index,
                label: c.label().to_owned(),
                distance,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, kron, pauli_x, pauli_y, pauli_z};
    use crate::thermal::{HamiltonianSystem, gibbs_state};

    fn settings() -> Settings {
        Settings::default()
    }

    fn vacuum(net: &LatticeNet) -> State {
        State::pure(&basis_vector(net.dim(), 0), "vacuum").unwrap()
    }

    fn flip(net: &LatticeNet, site: usize) -> LocalizedMorphism {
        LocalizedMorphism::from_local(net, format!("flip{site}"), Region::new(vec![site]), &[pauli_x()], &settings()).unwrap()
    }

    #[test]
    fn embedding_follows_kron_order() {
        let net = LatticeNet::z2_chain(3, &settings()).unwrap();
        let one = linalg::identity(2);
        let e = net.embed(&Region::new(vec![1]), &pauli_x()).unwrap();
        assert_eq!(e, linalg::kron_all(&[one.clone(), pauli_x(), one.clone()]));
        let zx = kron(&pauli_z(), &pauli_x());
        let e = net.embed(&Region::new(vec![0, 2]), &zx).unwrap();
        assert_eq!(e, linalg::kron_all(&[pauli_z(), one, pauli_x()]));
        let back = net.reduce(&Region::new(vec![0, 2]), &e).unwrap();
        assert_eq!(back, zx.scale(2.0));
    }

    #[test]
    fn region_algebra_examples() {
        let s = settings();
        let net = LatticeNet::z2_chain(3, &s).unwrap();
        assert!(region_algebra(&net, &net.full_region(), false, &s).unwrap().is_full());
        let site = region_algebra(&net, &Region::new(vec![1]), true, &s).unwrap();
        assert_eq!(site.dimension(), 2);
        assert!(site.contains(&net.embed(&Region::new(vec![1]), &pauli_z()).unwrap(), 1e-10));
        let empty = region_algebra(&net, &Region::empty(), true, &s).unwrap();
        assert_eq!(empty.dimension(), 1);
        assert!(empty.contains(&linalg::identity(8), 1e-12));
    }

    #[test]
    fn isotony_and_locality() {
        let s = settings();
        let net = LatticeNet::z2_chain(3, &s).unwrap();
        let small = region_algebra(&net, &Region::new(vec![0]), true, &s).unwrap();
        let big = region_algebra(&net, &Region::new(vec![0, 1]), true, &s).unwrap();
        assert!(big.span_residual(&small) < 1e-12);
        let other = region_algebra(&net, &Region::new(vec![2]), false, &s).unwrap();
        for a in big.basis() {
            for b in other.basis() {
                assert!(linalg::max_abs(&linalg::commutator(a, b)) <= 1e-12);
            }
        }
    }

    #[test]
    fn fast_distance_matches_materialized_algebra() {
        let s = settings();
        let net = LatticeNet::z2_chain(3, &s).unwrap();
        let mut r = linalg::rng(4);
        let a = State::new(
            {
                let x = linalg::random_complex(&mut r, 8, 8);
                let p = &x * x.adjoint();
                p.unscale(linalg::trace(&p).re)
            },
            "a",
            1e-10,
        )
        .unwrap();
        let b = vacuum(&net);
        let mut cache = FactorCache::new(&net, &s);
        for region in [Region::empty(), Region::new(vec![1]), Region::new(vec![0, 2]), net.full_region()] {
            let alg = region_algebra(&net, &region, true, &s).unwrap();
            let slow = algebra::state_distance_mod(&a, &b, &alg).unwrap();
            let fast = cache.distance(&region, &(a.density() - b.density())).unwrap();
            assert!((slow - fast).abs() < 1e-12, "{region:?}: {slow} vs {fast}");
        }
    }

    #[test]
    fn vacuum_passes_everywhere() {
        let s = settings();
        let net = LatticeNet::z2_chain(3, &s).unwrap();
        let v = vacuum(&net);
        let r = dhr_check(&v, &v, &net, &DhrOptions::default(), &s).unwrap();
        assert!(r.passes);
        assert_eq!(r.witness_regions.len(), r.distances.len());
        assert_eq!(r.witness_regions[0], Region::empty());
    }

    #[test]
    fn flipped_vacuum_is_localized_at_the_flip() {
        let s = settings();
        let net = LatticeNet::z2_chain(3, &s).unwrap();
        let v = vacuum(&net);
        for k in 0..3 {
            let w = selected_state(&flip(&net, k), &v).unwrap();
            let r = dhr_check(&w, &v, &net, &DhrOptions::default(), &s).unwrap();
            let d = r.distances.iter().find(|x| x.region == Region::new(vec![k])).unwrap();
            assert!(d.distance <= 1e-12);
            assert!(r.witness_regions.iter().all(|reg| reg.contains(k)));
        }
    }

    #[test]
    fn coupled_gibbs_state_fails() {
        let s = settings();
        let net = LatticeNet::z2_chain(3, &s).unwrap();
        let zz = |i: usize| net.embed(&Region::new(vec![i, i + 1]), &kron(&pauli_z(), &pauli_z())).unwrap();
        let x = |i: usize| net.embed(&Region::new(vec![i]), &pauli_x()).unwrap();
        let h = -(zz(0) + zz(1)) - (x(0) + x(1) + x(2)).scale(0.7);
        let g = gibbs_state(&HamiltonianSystem::new(h, None).unwrap(), 1.0, None).unwrap();
        let opts = DhrOptions { tol: 1e-6, all_subsets: true };
        let r = dhr_check(&g, &vacuum(&net), &net, &opts, &s).unwrap();
        assert!(!r.passes);
    }

    #[test]
    fn all_subsets_limit() {
        let s = Settings::default();
        let net = LatticeNet::z2_chain(8, &s).unwrap();
        assert_eq!(candidate_regions(&net, true).unwrap().len(), 255);
        let big = LatticeNet::new(9, UnitaryRep::cyclic(2, &pauli_z(), 1e-10).unwrap(), &Settings { dim_cap: 512, ..s });
        assert!(candidate_regions(&big.unwrap(), true).is_err());
        assert!(LatticeNet::z2_chain(9, &s).is_err());
    }

    #[test]
    fn morphism_application() {
        let s = settings();
        let net = LatticeNet::z2_chain(3, &s).unwrap();
        let obs = observable_algebra(&net, &s).unwrap();
        let rho = flip(&net, 0);
        let one = linalg::identity(8);
        assert_eq!(apply_morphism(&rho, &one, &obs).unwrap(), one);
        let z0 = net.embed(&Region::new(vec![0]), &pauli_z()).unwrap();
        assert_eq!(apply_morphism(&rho, &z0, &obs).unwrap(), -z0);
        let z12 = net.embed(&Region::new(vec![1, 2]), &kron(&pauli_x(), &pauli_x())).unwrap();
        assert_eq!(apply_morphism(&rho, &z12, &obs).unwrap(), z12);
        let x0 = net.embed(&Region::new(vec![0]), &pauli_x()).unwrap();
        assert!(matches!(apply_morphism(&rho, &x0, &obs), Err(Error::NotObservable(_))));
    }

    #[test]
    fn non_preserving_morphism_rejected() {
        let s = settings();
        let net = LatticeNet::z2_chain(2, &s).unwrap();
        let h = linalg::from_real(2, 2, &[1.0, 1.0, 1.0, -1.0]).unscale(2f64.sqrt());
        assert!(LocalizedMorphism::from_local(&net, "h", Region::new(vec![0]), &[h], &s).is_err());
    }

    #[test]
    fn selected_states() {
        let s = settings();
        let net = LatticeNet::z2_chain(3, &s).unwrap();
        let v = vacuum(&net);
        let id = selected_state(&LocalizedMorphism::identity(&net), &v).unwrap();
        assert_eq!(id.density(), v.density());
        let w = selected_state(&flip(&net, 1), &v).unwrap();
        let marginal = net.reduce(&Region::new(vec![1]), w.density()).unwrap();
        assert!((marginal[(1, 1)].re - 1.0).abs() < 1e-15);
        let both = flip(&net, 0).compose(&flip(&net, 2)).unwrap();
        assert_eq!(both.region(), &Region::new(vec![0, 2]));
        let w = selected_state(&both, &v).unwrap();
        assert!((w.density()[(0b101, 0b101)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flip_intertwiners_on_two_sites() {
        let s = settings();
        let net = LatticeNet::z2_chain(2, &s).unwrap();
        let obs = observable_algebra(&net, &s).unwrap();
        let (r0, r1) = (flip(&net, 0), flip(&net, 1));
        let ts = solve_intertwiners(&r0, &r1, &obs, &s).unwrap();
        let span = OperatorAlgebra::from_spanning_set(4, &ts, 1e-9).unwrap();
        let xx = kron(&pauli_x(), &pauli_x());
        assert!(span.contains(&xx, 1e-10));
        assert!(span.contains(&kron(&pauli_y(), &pauli_y()), 1e-10));
        assert_eq!(ts.len(), 2);
        assert!(intertwiner_residual(&xx, &r0, &r1, &obs) <= 1e-10);

        let id = LocalizedMorphism::identity(&net);
        assert!(solve_intertwiners(&id, &r0, &obs, &s).unwrap().is_empty());
        let selfs = solve_intertwiners(&r0, &r0, &obs, &s).unwrap();
        let span = OperatorAlgebra::from_spanning_set(4, &selfs, 1e-9).unwrap();
        assert!(span.contains(&linalg::identity(4), 1e-10));

        // composition of intertwiners r0 -> r1 -> r0
        let back = solve_intertwiners(&r1, &r0, &obs, &s).unwrap();
        for t in &ts {
            for u in &back {
                assert!(intertwiner_residual(&(u * t), &r0, &r0, &obs) <= 1e-10);
            }
        }
    }

    #[test]
    fn haag_duality() {
        let s = settings();
        let net = LatticeNet::z2_chain(3, &s).unwrap();
        for region in [Region::new(vec![0]), Region::new(vec![1, 2]), net.full_region()] {
            let r = haag_duality_check(&net, &region, false, &s).unwrap();
            assert!(r.passes && r.defect == 0, "{r:?}");
        }
        let net2 = LatticeNet::z2_chain(2, &s).unwrap();
        let r = haag_duality_check(&net2, &Region::new(vec![1]), true, &s).unwrap();
        assert!(r.defect > 0);
        let r = haag_duality_check(&net2, &net2.full_region(), true, &s).unwrap();
        assert_eq!(r.lhs_dim, 16);
    }

    #[test]
    fn selected_states_identify_their_morphism() {
        let s = settings();
        let net = LatticeNet::z2_chain(3, &s).unwrap();
        let v = vacuum(&net);
        let family: Vec<_> = (0..3).map(|k| flip(&net, k)).collect();
        for (k, m) in family.iter().enumerate() {
            let w = selected_state(m, &v).unwrap();
            let found = invert_selected_state(&w, &v, &family, &net, 1e-10, &s).unwrap();
            assert_eq!(found.len(), 1);
            assert_eq!(found[0].index, k);
        }
    }

    #[test]
    fn net_json() {
        let s = settings();
        let json = r#"{"sites":2,"onsite_dim":2,"group":"cyclic:2",
            "onsite_rep":{"matrices":[{"rows":2,"cols":2,"re":[1,0,0,1]},{"rows":2,"cols":2,"re":[1,0,0,-1]}]}}"#;
        let net = LatticeNet::from_json(&serde_json::from_str(json).unwrap(), &s).unwrap();
        assert_eq!(net.dim(), 4);
        let again = serde_json::to_string(&net.to_json()).unwrap();
        assert!(again.contains(r#""group":"cyclic:2""#));
    }
}
