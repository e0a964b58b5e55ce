//! Unital *-subalgebras of `M_d(C)`, commutants, centres and states.
//!
//! An [`OperatorAlgebra`] is stored as a basis that is orthonormal for the
//! trace inner product. Commutants are computed from two generic Hermitian
//! elements of the algebra, which generate it with probability one; every
//! result is verified against the full basis before it is returned, and a
//! fresh seed is drawn when the verification fails.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, cluster_sorted, eigh, extend_orthonormal, fro_norm, hermitian_part, identity, inner,
    max_abs, nullspace, orthonormalize, projection_residual, random_combination, CMat, Settings,
    C64, ONE, ZERO,
};

/// Orthonormal basis of a *-closed subspace of `d x d` matrices.
#[derive(Clone, Debug)]
pub struct OperatorAlgebra {
    dim: usize,
    basis: Vec<CMat>,
    contains_unit: bool,
}

impl OperatorAlgebra {
    /// Wraps a basis that is already orthonormal. Callers own that invariant.
    pub(crate) fn from_orthonormal(dim: usize, basis: Vec<CMat>) -> Self {
        let contains_unit = projection_residual(&basis, &identity(dim)) <= 1e-8 * (dim as f64).sqrt();
        Self {
            dim,
            basis,
            contains_unit,
        }
    }

    /// Orthonormalizes a spanning set. No closure is attempted.
    pub fn from_spanning_set(dim: usize, elements: &[CMat], tol: f64) -> Result<Self> {
        for e in elements {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "expected {dim}x{dim}, got {}x{}",
                    e.nrows(),
                    e.ncols()
                )));
            }
        }
        Ok(Self::from_orthonormal(dim, orthonormalize(elements, tol)))
    }

    /// `M_d(C)` with the matrix-unit basis.
    pub fn full(dim: usize) -> Self {
        let basis = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| linalg::matrix_unit(dim, i, j)))
            .collect();
        Self {
            dim,
            basis,
            contains_unit: true,
        }
    }

    /// `C * 1`.
    pub fn scalars(dim: usize) -> Self {
        Self {
            dim,
            basis: vec![identity(dim).unscale((dim as f64).sqrt())],
            contains_unit: true,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn contains_unit(&self) -> bool {
        self.contains_unit
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.dim * self.dim
    }

    /// Distance from `x` to the span of the basis.
    pub fn residual(&self, x: &CMat) -> f64 {
        projection_residual(&self.basis, x)
    }

    pub fn contains(&self, x: &CMat, tol: f64) -> bool {
        self.residual(x) <= tol * fro_norm(x).max(1.0)
    }

    /// Largest residual of `other`'s basis against this span.
    pub fn span_residual(&self, other: &OperatorAlgebra) -> f64 {
        other
            .basis
            .iter()
            .map(|b| self.residual(b))
            .fold(0.0, f64::max)
    }

    pub fn same_span(&self, other: &OperatorAlgebra, tol: f64) -> bool {
        self.dim == other.dim
            && self.dimension() == other.dimension()
            && self.span_residual(other) <= tol
            && other.span_residual(self) <= tol
    }

    /// Coefficients `<B_i, x>` of `x` in the basis.
    pub fn coordinates(&self, x: &CMat) -> Vec<C64> {
        self.basis.iter().map(|b| inner(b, x)).collect()
    }

    /// Largest deviation from orthonormality and from closure under `*` and products.
    pub fn closure_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let g = inner(a, b);
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((g - target).norm());
                worst = worst.max(self.residual(&(a * b)));
            }
            worst = worst.max(self.residual(&a.adjoint()));
        }
        worst
    }

    fn is_scalar(&self) -> bool {
        self.basis.len() == 1 && self.contains_unit
    }
}

/// Smallest *-closed (optionally unital) subspace closed under products that
/// contains `generators`.
pub fn generate_algebra(
    dim: usize,
    generators: &[CMat],
    include_unit: bool,
    settings: &Settings,
) -> Result<OperatorAlgebra> {
    settings.check_dim(dim)?;
    for g in generators {
        let d = linalg::is_square(g)?;
        if d != dim {
            return Err(Error::DimensionMismatch(format!(
                "generator is {d}x{d}, algebra dimension is {dim}"
            )));
        }
    }
    let tol = settings.tol.rank;
    let mut basis = Vec::new();
    if include_unit {
        extend_orthonormal(&mut basis, &identity(dim), tol);
    }
    for g in generators {
        extend_orthonormal(&mut basis, g, tol);
        extend_orthonormal(&mut basis, &g.adjoint(), tol);
    }
    let mut frontier = 0;
    loop {
        let n = basis.len();
        let mut products = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i >= frontier || j >= frontier {
                    products.push(&basis[i] * &basis[j]);
                }
            }
        }
        for p in &products {
            if basis.len() == dim * dim {
                break;
            }
            extend_orthonormal(&mut basis, p, tol);
        }
        if basis.len() == n {
            break;
        }
        frontier = n;
    }
    Ok(OperatorAlgebra::from_orthonormal(dim, basis))
}

/// `{X : XB = BX for all B in alg}`.
pub fn commutant(alg: &OperatorAlgebra, settings: &Settings) -> Result<OperatorAlgebra> {
    let d = alg.dim;
    settings.check_dim(d)?;
    if alg.basis.is_empty() || alg.is_scalar() {
        return Ok(OperatorAlgebra::full(d));
    }
    const ATTEMPTS: u64 = 5;
    for attempt in 0..ATTEMPTS {
        let mut rng = linalg::rng(settings.seed.wrapping_add(attempt));
        let h1 = hermitian_part(&random_combination(&mut rng, &alg.basis, d));
        let h2 = hermitian_part(&random_combination(&mut rng, &alg.basis, d));
        let Some((vectors, clusters)) = spectral_blocks(&h1, settings) else {
            continue;
        };
        let h2p = vectors.adjoint() * &h2 * &vectors;
        if let Some(basis) = transported_commutant(&vectors, &clusters, &h2p, settings) {
            if commutes_with(alg, &basis, &mut rng) {
                return Ok(OperatorAlgebra {
                    dim: d,
                    basis,
                    contains_unit: true,
                });
            }
        }
        let basis = blockwise_nullspace(&vectors, &clusters, &h2p, settings);
        if commutes_with(alg, &basis, &mut rng) {
            return Ok(OperatorAlgebra {
                dim: d,
                basis,
                contains_unit: true,
            });
        }
    }
    Err(Error::GapAmbiguity {
        attempts: ATTEMPTS as usize,
        detail: "commutant verification failed for every seed".into(),
    })
}

/// Joint nullspace of `X -> [X, B_i]` over the whole basis, in matrix-unit
/// coordinates. Quadratic in `d^2`; meant for small algebras and cross-checks.
pub fn commutant_dense(alg: &OperatorAlgebra, settings: &Settings) -> Result<OperatorAlgebra> {
    let d = alg.dim;
    if d > 16 {
        return Err(Error::DimensionCap { dim: d, cap: 16 });
    }
    let k = alg.basis.len();
    let mut l = CMat::zeros(k * d * d, d * d);
    for (bi, b) in alg.basis.iter().enumerate() {
        for a in 0..d {
            for c in 0..d {
                // [E_ac, B] = E_ac B - B E_ac
                let col = a * d + c;
                for s in 0..d {
                    l[(bi * d * d + a * d + s, col)] += b[(c, s)];
                }
                for r in 0..d {
                    l[(bi * d * d + r * d + c, col)] -= b[(r, a)];
                }
            }
        }
    }
    let basis = nullspace(&l, settings.tol.rank)
        .into_iter()
        .map(|v| CMat::from_fn(d, d, |i, j| v[i * d + j]))
        .collect();
    Ok(OperatorAlgebra {
        dim: d,
        basis,
        contains_unit: true,
    })
}

/// Eigenvectors of `h` and its eigenvalue clusters, or `None` on a gap ambiguity.
fn spectral_blocks(h: &CMat, settings: &Settings) -> Option<(CMat, Vec<std::ops::Range<usize>>)> {
    let eig = eigh(h);
    let clusters = cluster_sorted(&eig.values, settings.tol.gap)?;
    Some((eig.vectors, clusters))
}

fn block(m: &CMat, rows: &std::ops::Range<usize>, cols: &std::ops::Range<usize>) -> CMat {
    m.view((rows.start, cols.start), (rows.len(), cols.len()))
        .into_owned()
}

/// Solves `[X, h2] = 0` inside `{h1}'` by transporting a free block along
/// the non-zero off-diagonal blocks of `h2` (which are multiples of unitaries
/// when `h1, h2` generate the algebra). Returns `None` when that structure is
/// absent so the caller can fall back to a nullspace solve.
fn transported_commutant(
    vectors: &CMat,
    clusters: &[std::ops::Range<usize>],
    h2p: &CMat,
    settings: &Settings,
) -> Option<Vec<CMat>> {
    let d = vectors.nrows();
    let nc = clusters.len();
    let scale = max_abs(h2p).max(f64::MIN_POSITIVE);
    let mut adjacent = vec![vec![false; nc]; nc];
    for p in 0..nc {
        let hpp = block(h2p, &clusters[p], &clusters[p]);
        let m = clusters[p].len();
        let mean = linalg::trace(&hpp) / m as f64;
        let off = hpp - identity(m) * mean;
        if max_abs(&off) > 1e-8 * scale {
            return None;
        }
        for q in 0..nc {
            if p == q {
                continue;
            }
            let n = max_abs(&block(h2p, &clusters[p], &clusters[q]));
            if n > settings.tol.gap * scale {
                adjacent[p][q] = true;
            } else if n > 1e-12 * scale {
                return None;
            }
        }
    }

    let mut transport: Vec<Option<CMat>> = vec![None; nc];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for root in 0..nc {
        if transport[root].is_some() {
            continue;
        }
        let m = clusters[root].len();
        transport[root] = Some(identity(m));
        let mut members = vec![root];
        let mut queue = vec![root];
        while let Some(p) = queue.pop() {
            for q in 0..nc {
                if !adjacent[p][q] || transport[q].is_some() {
                    continue;
                }
                if clusters[q].len() != m {
                    return None;
                }
                let hpq = block(h2p, &clusters[p], &clusters[q]);
                let norm = fro_norm(&hpq) / (m as f64).sqrt();
                let u = hpq.unscale(norm);
                if fro_norm(&(u.adjoint() * &u - identity(m))) > 1e-8 {
                    return None;
                }
                let tp = transport[p].as_ref().expect("visited");
                transport[q] = Some(tp * u);
                members.push(q);
                queue.push(q);
            }
        }
        components.push(members);
    }

    let mut basis = Vec::new();
    for members in &components {
        let m = clusters[members[0]].len();
        let norm = (members.len() as f64).sqrt();
        for a in 0..m {
            for b in 0..m {
                let mut xp = CMat::zeros(d, d);
                for &q in members {
                    let t = transport[q].as_ref().expect("visited");
                    // X_q = T_q* E_ab T_q
                    let blk = t.row(a).adjoint() * t.row(b);
                    xp.view_mut((clusters[q].start, clusters[q].start), (m, m))
                        .copy_from(&blk);
                }
                basis.push((vectors * xp * vectors.adjoint()).unscale(norm));
            }
        }
    }
    Some(basis)
}

/// Nullspace of `X' -> [X', h2']` over block-diagonal `X'`.
fn blockwise_nullspace(
    vectors: &CMat,
    clusters: &[std::ops::Range<usize>],
    h2p: &CMat,
    settings: &Settings,
) -> Vec<CMat> {
    let d = vectors.nrows();
    let unknowns: Vec<(usize, usize)> = clusters
        .iter()
        .flat_map(|r| r.clone().flat_map(move |i| r.clone().map(move |j| (i, j))))
        .collect();
    let mut l = CMat::zeros(d * d, unknowns.len());
    for (col, &(gi, gj)) in unknowns.iter().enumerate() {
        for s in 0..d {
            l[(gi * d + s, col)] += h2p[(gj, s)];
        }
        for r in 0..d {
            l[(r * d + gj, col)] -= h2p[(r, gi)];
        }
    }
    nullspace(&l, settings.tol.rank)
        .into_iter()
        .map(|y| {
            let mut xp = CMat::zeros(d, d);
            for (k, &(gi, gj)) in unknowns.iter().enumerate() {
                xp[(gi, gj)] = y[k];
            }
            vectors * xp * vectors.adjoint()
        })
        .collect()
}

/// Generic-element check that `basis` commutes with `alg`, in both directions.
fn commutes_with(alg: &OperatorAlgebra, basis: &[CMat], rng: &mut impl rand::Rng) -> bool {
    if basis.is_empty() {
        return false;
    }
    let d = alg.dim;
    let x = random_combination(rng, basis, d);
    let a = random_combination(rng, &alg.basis, d);
    let tol = 1e-8;
    let xn = fro_norm(&x);
    let an = fro_norm(&a);
    alg.basis
        .iter()
        .all(|b| fro_norm(&linalg::commutator(&x, b)) <= tol * xn * fro_norm(b).max(1.0))
        && basis
            .iter()
            .all(|c| fro_norm(&linalg::commutator(&a, c)) <= tol * an * fro_norm(c).max(1.0))
}

/// `alg ∩ alg'`.
pub fn center(alg: &OperatorAlgebra, settings: &Settings) -> Result<OperatorAlgebra> {
    if alg.basis.len() <= 64 {
        return center_in_coordinates(alg, settings);
    }
    let comm = commutant(alg, settings)?;
    Ok(intersection(alg, &comm))
}

/// Centre computed as the joint nullspace of `t -> [sum_j t_j B_j, B_i]`.
pub fn center_in_coordinates(alg: &OperatorAlgebra, settings: &Settings) -> Result<OperatorAlgebra> {
    let d = alg.dim;
    settings.check_dim(d)?;
    let k = alg.basis.len();
    let mut l = CMat::zeros(k * d * d, k);
    for (j, bj) in alg.basis.iter().enumerate() {
        for (i, bi) in alg.basis.iter().enumerate() {
            let comm = linalg::commutator(bj, bi);
            for r in 0..d {
                for s in 0..d {
                    l[(i * d * d + r * d + s, j)] = comm[(r, s)];
                }
            }
        }
    }
    let basis = nullspace(&l, settings.tol.rank)
        .into_iter()
        .map(|t| {
            let mut z = CMat::zeros(d, d);
            for (j, b) in alg.basis.iter().enumerate() {
                z.zip_apply(b, |x, y| *x += t[j] * y);
            }
            z
        })
        .collect();
    Ok(OperatorAlgebra::from_orthonormal(d, basis))
}

/// Intersection of two spans: the eigenvalue-one eigenspace of `P_a` compressed to `b`.
pub fn intersection(a: &OperatorAlgebra, b: &OperatorAlgebra) -> OperatorAlgebra {
    let d = a.dim;
    let kb = b.basis.len();
    // G[k][i] = <A_k, B_i>
    let g = CMat::from_fn(a.basis.len(), kb, |k, i| inner(&a.basis[k], &b.basis[i]));
    let m = g.adjoint() * g;
    let eig = eigh(&m);
    let mut basis = Vec::new();
    for (idx, &val) in eig.values.iter().enumerate() {
        if val >= 1.0 - 1e-8 {
            let v = eig.vectors.column(idx);
            let mut z = CMat::zeros(d, d);
            for (i, bi) in b.basis.iter().enumerate() {
                z.zip_apply(bi, |x, y| *x += v[i] * y);
            }
            basis.push(z);
        }
    }
    OperatorAlgebra::from_orthonormal(d, basis)
}

/// Minimal projections of the centre of `alg`, in canonical order.
pub fn minimal_central_projections(alg: &OperatorAlgebra, settings: &Settings) -> Result<Vec<CMat>> {
    let z = center(alg, settings)?;
    spectral_projections(&z, settings)
}

/// Minimal projections of a commutative *-algebra, found by diagonalizing a
/// seeded generic Hermitian element and grouping its eigenspaces.
pub fn spectral_projections(commutative: &OperatorAlgebra, settings: &Settings) -> Result<Vec<CMat>> {
    let d = commutative.dim;
    let want = commutative.dimension();
    const ATTEMPTS: u64 = 5;
    for attempt in 0..ATTEMPTS {
        let mut rng = linalg::rng(settings.seed.wrapping_add(attempt));
        let h = hermitian_part(&random_combination(&mut rng, &commutative.basis, d));
        let eig = eigh(&h);
        let Some(clusters) = cluster_sorted(&eig.values, settings.tol.gap) else {
            continue;
        };
        let mut projections: Vec<CMat> = clusters
            .iter()
            .map(|r| {
                let v = eig.vectors.columns(r.start, r.len());
                v * v.adjoint()
            })
            .filter(|p| commutative.residual(p) <= 1e-8 * fro_norm(p).max(1.0))
            .collect();
        if projections.len() != want {
            continue;
        }
        projections.sort_by(canonical_projection_order);
        return Ok(projections);
    }
    Err(Error::GapAmbiguity {
        attempts: ATTEMPTS as usize,
        detail: format!("could not resolve {want} central projections"),
    })
}

/// Descending rank, then descending lexicographic diagonal.
pub fn canonical_projection_order(a: &CMat, b: &CMat) -> Ordering {
    let ra = linalg::trace(a).re.round() as i64;
    let rb = linalg::trace(b).re.round() as i64;
    rb.cmp(&ra).then_with(|| {
        for (x, y) in a.diagonal().iter().zip(b.diagonal().iter()) {
            if (x.re - y.re).abs() > 1e-9 {
                return y.re.total_cmp(&x.re);
            }
        }
        Ordering::Equal
    })
}

/// A density matrix with a label.
#[derive(Clone, Debug)]
pub struct State {
    density: CMat,
    label: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(default)]
    pub label: String,
    pub density: linalg::MatrixJson,
}

impl State {
    pub fn new(density: CMat, label: impl Into<String>, tol: f64) -> Result<Self> {
        let d = linalg::is_square(&density)?;
        let label = label.into();
        if d == 0 {
            return Err(Error::InvalidState(format!("{label}: empty density")));
        }
        let herm = fro_norm(&(&density - density.adjoint()));
        if herm > tol {
            return Err(Error::InvalidState(format!(
                "{label}: not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = linalg::trace(&density);
        if (tr - ONE).norm() > tol {
            return Err(Error::InvalidState(format!(
                "{label}: trace {} differs from 1",
                tr.re
            )));
        }
        let min = eigh(&density).values[0];
        if min < -tol {
            return Err(Error::InvalidState(format!(
                "{label}: negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { density, label })
    }

    pub fn pure(vector: &linalg::CVec, label: impl Into<String>) -> Result<Self> {
        let n = vector.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v = vector.unscale(n);
        Ok(Self {
            density: linalg::projector(&v),
            label: label.into(),
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            density: identity(d).unscale(d as f64),
            label: "maximally mixed".into(),
        }
    }

    pub fn density(&self) -> &CMat {
        &self.density
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.density.nrows()
    }

    /// `tr(rho A)`.
    pub fn expect(&self, a: &CMat) -> C64 {
        linalg::expectation(&self.density, a)
    }

    pub fn from_json(json: &StateJson, tol: f64) -> Result<Self> {
        Self::new(json.density.to_matrix()?, json.label.clone(), tol)
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            label: self.label.clone(),
            density: (&self.density).into(),
        }
    }
}

/// `max_i |tr(rho1 B_i) - tr(rho2 B_i)|` over the orthonormal basis of `sub`.
pub fn state_distance_mod(w1: &State, w2: &State, sub: &OperatorAlgebra) -> Result<f64> {
    if w1.dim() != w2.dim() || w1.dim() != sub.dim {
        return Err(Error::DimensionMismatch(format!(
            "states {} and {}, subalgebra {}",
            w1.dim(),
            w2.dim(),
            sub.dim
        )));
    }
    let diff = &w1.density - &w2.density;
    Ok(sub
        .basis
        .iter()
        .map(|b| inner(&diff, b).norm())
        .fold(0.0, f64::max))
}
