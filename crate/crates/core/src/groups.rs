//! Finite groups, unitary representations, the averaging conditional
//! expectation and isotypic decomposition.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{center_in_coordinates, spectral_projections, OperatorAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{
    self, cluster_sorted, eigh, fro_norm, hermitian_part, identity, inner, nullspace,
    orthonormalize, random_combination, CMat, CVec, MatrixJson, Settings, C64, ONE,
};

/// A finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupJson {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
}

impl FiniteGroup {
    pub fn from_table(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        for row in &table {
            if row.len() != n || row.iter().any(|&x| x >= n) {
                return Err(Error::InvalidGroup("table is not an n x n table over 0..n".into()));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for g in 0..n {
            let h = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {g} has no inverse")))?;
            inverse[g] = h;
        }
        let assoc = |a: usize, b: usize, c: usize| table[table[a][b]][c] == table[a][table[b][c]];
        if n <= 64 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !assoc(a, b, c) {
                            return Err(Error::InvalidGroup(format!(
                                "associativity fails at ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut rng = linalg::rng(0);
            for _ in 0..20_000 {
                let (a, b, c) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
                if !assoc(a, b, c) {
                    return Err(Error::InvalidGroup(format!(
                        "associativity fails at ({a}, {b}, {c})"
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            table,
            identity,
            inverse,
        })
    }

    pub fn from_json(json: &GroupJson) -> Result<Self> {
        if json.order != json.table.len() {
            return Err(Error::InvalidGroup(format!(
                "order {} but table has {} rows",
                json.order,
                json.table.len()
            )));
        }
        Self::from_table("table", json.table.clone())
    }

    pub fn to_json(&self) -> GroupJson {
        GroupJson {
            order: self.order(),
            table: self.table.clone(),
        }
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(format!("cyclic:{n}"), table).expect("cyclic group table is valid")
    }

    /// Permutations of three letters in lexicographic order; `(gh)(x) = g(h(x))`.
    pub fn symmetric3() -> Self {
        let perms = permutations3();
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("closed");
        let table = perms
            .iter()
            .map(|g| {
                perms
                    .iter()
                    .map(|h| index([g[h[0]], g[h[1]], g[h[2]]]))
                    .collect()
            })
            .collect();
        Self::from_table("symmetric:3", table).expect("S3 table is valid")
    }

    /// Elements ordered `1, -1, i, -i, j, -j, k, -k`.
    pub fn quaternion8() -> Self {
        // units 0:1 1:i 2:j 3:k; product of units as (sign, unit)
        let unit_mul = |a: usize, b: usize| -> (bool, usize) {
            match (a, b) {
                (0, x) | (x, 0) => (false, x),
                (x, y) if x == y => (true, 0),
                (1, 2) => (false, 3),
                (2, 1) => (true, 3),
                (2, 3) => (false, 1),
                (3, 2) => (true, 1),
                (3, 1) => (false, 2),
                (1, 3) => (true, 2),
                _ => unreachable!(),
            }
        };
        let table = (0..8)
            .map(|g| {
                (0..8)
                    .map(|h| {
                        let (sg, ug) = (g % 2 == 1, g / 2);
                        let (sh, uh) = (h % 2 == 1, h / 2);
                        let (s, u) = unit_mul(ug, uh);
                        2 * u + usize::from(sg ^ sh ^ s)
                    })
                    .collect()
            })
            .collect();
        Self::from_table("quaternion:8", table).expect("Q8 table is valid")
    }

    /// `cyclic:N`, `symmetric:3`, `quaternion:8` or `trivial`.
    pub fn builtin(spec: &str) -> Result<Self> {
        let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
        match (kind, arg) {
            ("trivial", _) => Ok(Self::trivial()),
            ("cyclic", n) => {
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::InvalidGroup(format!("bad cyclic order `{n}`")))?;
                if n == 0 {
                    return Err(Error::InvalidGroup("cyclic order must be positive".into()));
                }
                Ok(Self::cyclic(n))
            }
            ("symmetric", "3") => Ok(Self::symmetric3()),
            ("quaternion", "8") => Ok(Self::quaternion8()),
            _ => Err(Error::InvalidGroup(format!("unknown built-in group `{spec}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }
}

fn permutations3() -> Vec<[usize; 3]> {
    vec![
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ]
}

/// `g -> U(g)`, one unitary per group element.
#[derive(Clone, Debug)]
pub struct UnitaryRep {
    group: FiniteGroup,
    dim: usize,
    matrices: Vec<CMat>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepJson {
    pub matrices: Vec<MatrixJson>,
}

impl UnitaryRep {
    pub fn new(group: FiniteGroup, matrices: Vec<CMat>, tol: f64) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::InvalidRepresentation(format!(
                "{} matrices for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        let dim = linalg::is_square(&matrices[0])?;
        for (g, u) in matrices.iter().enumerate() {
            if linalg::is_square(u)? != dim {
                return Err(Error::InvalidRepresentation("matrices differ in size".into()));
            }
            if fro_norm(&(u.adjoint() * u - identity(dim))) > tol {
                return Err(Error::InvalidRepresentation(format!("U({g}) is not unitary")));
            }
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                let ab = group.mul(a, b);
                if fro_norm(&(&matrices[a] * &matrices[b] - &matrices[ab])) > tol {
                    return Err(Error::InvalidRepresentation(format!(
                        "U({a})U({b}) != U({ab})"
                    )));
                }
            }
        }
        Ok(Self {
            group,
            dim,
            matrices,
        })
    }

    pub fn from_json(group: FiniteGroup, json: &RepJson, tol: f64) -> Result<Self> {
        let matrices = json
            .matrices
            .iter()
            .map(MatrixJson::to_matrix)
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, matrices, tol)
    }

    pub fn to_json(&self) -> RepJson {
        RepJson {
            matrices: self.matrices.iter().map(MatrixJson::from).collect(),
        }
    }

    pub fn trivial(group: FiniteGroup, dim: usize) -> Self {
        let matrices = vec![identity(dim); group.order()];
        Self {
            group,
            dim,
            matrices,
        }
    }

    /// Left regular representation `U(g)|h> = |gh>`.
    pub fn regular(group: FiniteGroup) -> Self {
        let n = group.order();
        let matrices = (0..n)
            .map(|g| {
                let mut u = CMat::zeros(n, n);
                for h in 0..n {
                    u[(group.mul(g, h), h)] = ONE;
                }
                u
            })
            .collect();
        Self {
            group,
            dim: n,
            matrices,
        }
    }

    /// Representation of `cyclic:n` sending the generator `1` to `u`.
    pub fn cyclic(n: usize, u: &CMat, tol: f64) -> Result<Self> {
        let d = linalg::is_square(u)?;
        let mut matrices = vec![identity(d)];
        for k in 1..n {
            matrices.push(&matrices[k - 1] * u);
        }
        Self::new(FiniteGroup::cyclic(n), matrices, tol)
    }

    pub fn tensor(&self, other: &UnitaryRep) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::InvalidRepresentation("tensor of different groups".into()));
        }
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| a.kronecker(b))
            .collect();
        Ok(Self {
            group: self.group.clone(),
            dim: self.dim * other.dim,
            matrices,
        })
    }

    pub fn tensor_power(&self, n: usize) -> Self {
        let mut acc = Self::trivial(self.group.clone(), 1);
        for _ in 0..n {
            acc = acc.tensor(self).expect("same group");
        }
        acc
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    pub fn matrix(&self, g: usize) -> &CMat {
        &self.matrices[g]
    }

    pub fn character(&self) -> Vec<C64> {
        self.matrices.iter().map(linalg::trace).collect()
    }

    /// Orthonormal basis of `span U(G)`, which is the algebra `U(G)''`.
    pub fn group_algebra(&self, tol: f64) -> OperatorAlgebra {
        OperatorAlgebra::from_orthonormal(self.dim, orthonormalize(&self.matrices, tol))
    }
}

/// `m(F) = |G|^-1 sum_g U(g) F U(g)*`.
pub fn average(f: &CMat, rep: &UnitaryRep) -> Result<CMat> {
    if f.nrows() != rep.dim || f.ncols() != rep.dim {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} vs representation dimension {}",
            f.nrows(),
            f.ncols(),
            rep.dim
        )));
    }
    let mut acc = CMat::zeros(rep.dim, rep.dim);
    for u in &rep.matrices {
        acc += u * f * u.adjoint();
    }
    Ok(acc.unscale(rep.group.order() as f64))
}

/// `{A in F_alg : U(g) A U(g)* = A for all g}`.
///
/// For the full matrix algebra the basis is read off the isotypic
/// decomposition; otherwise the averaging route is used.
pub fn fixed_point_algebra(
    f_alg: &OperatorAlgebra,
    rep: &UnitaryRep,
    settings: &Settings,
) -> Result<OperatorAlgebra> {
    if f_alg.ambient_dim() != rep.dim {
        return Err(Error::DimensionMismatch(format!(
            "algebra in dimension {}, representation in {}",
            f_alg.ambient_dim(),
            rep.dim
        )));
    }
    if f_alg.is_full() {
        let iso = isotypic_decomposition(rep, settings)?;
        return Ok(iso.commutant_algebra());
    }
    fixed_point_algebra_by_averaging(f_alg, rep)
}

/// Eigenvalue-one eigenspace of `m` compressed to `F_alg`, i.e. `range(m) ∩ F_alg`.
pub fn fixed_point_algebra_by_averaging(
    f_alg: &OperatorAlgebra,
    rep: &UnitaryRep,
) -> Result<OperatorAlgebra> {
    let basis = f_alg.basis();
    let averaged = basis
        .iter()
        .map(|b| average(b, rep))
        .collect::<Result<Vec<_>>>()?;
    let k = basis.len();
    let m = CMat::from_fn(k, k, |i, j| inner(&basis[i], &averaged[j]));
    let eig = eigh(&m);
    let d = rep.dim;
    let fixed = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= 1.0 - 1e-8)
        .map(|(idx, _)| {
            let v = eig.vectors.column(idx);
            let mut a = CMat::zeros(d, d);
            for (j, b) in basis.iter().enumerate() {
                a.zip_apply(b, |x, y| *x += v[j] * y);
            }
            a
        })
        .collect();
    Ok(OperatorAlgebra::from_orthonormal(d, fixed))
}

/// One isotypic component `H_γ ⊗ V_γ`.
#[derive(Clone, Debug)]
pub struct Isotype {
    pub dim_h: usize,
    pub dim_v: usize,
    /// `γ(g)` on `V_γ`, one matrix per group element.
    pub irrep: Vec<CMat>,
    pub character: Vec<C64>,
    /// Central projection onto the component, in the original basis.
    pub projection: CMat,
    /// First column of the component inside `W`.
    pub offset: usize,
}

impl Isotype {
    pub fn block_size(&self) -> usize {
        self.dim_h * self.dim_v
    }

    pub fn is_trivial(&self) -> bool {
        self.dim_v == 1 && self.character.iter().all(|c| (c - ONE).norm() < 1e-9)
    }
}

/// `W* U(g) W = ⊕_γ 1_{H_γ} ⊗ γ(g)`, columns of `W` ordered `(a, k) -> offset + a·dim_v + k`.
#[derive(Clone, Debug)]
pub struct IsotypicDecomposition {
    pub isotypes: Vec<Isotype>,
    pub w: CMat,
    pub reconstruction_residual: f64,
}

impl IsotypicDecomposition {
    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    /// `⊕_γ 1_{H_γ} ⊗ γ(g)` in the adapted basis.
    pub fn block_form(&self, g: usize) -> CMat {
        let d = self.dim();
        let mut m = CMat::zeros(d, d);
        for iso in &self.isotypes {
            let blk = identity(iso.dim_h).kronecker(&iso.irrep[g]);
            m.view_mut((iso.offset, iso.offset), (iso.block_size(), iso.block_size()))
                .copy_from(&blk);
        }
        m
    }

    /// Orthonormal basis `W (E_ab ⊗ 1_V) W* / sqrt(dim V)` of `U(G)'`.
    pub fn commutant_algebra(&self) -> OperatorAlgebra {
        let d = self.dim();
        let mut basis = Vec::new();
        for iso in &self.isotypes {
            let norm = (iso.dim_v as f64).sqrt();
            for a in 0..iso.dim_h {
                for b in 0..iso.dim_h {
                    let mut x = CMat::zeros(d, d);
                    for k in 0..iso.dim_v {
                        let ca = self.w.column(iso.offset + a * iso.dim_v + k);
                        let cb = self.w.column(iso.offset + b * iso.dim_v + k);
                        x += ca * cb.adjoint();
                    }
                    basis.push(x.unscale(norm));
                }
            }
        }
        OperatorAlgebra::from_orthonormal(d, basis)
    }
}

/// Simultaneous block form of `U(G)''` and `U(G)'`.
pub fn isotypic_decomposition(rep: &UnitaryRep, settings: &Settings) -> Result<IsotypicDecomposition> {
    let d = rep.dim;
    settings.check_dim(d)?;
    let tol = settings.tol.rank;
    let group_alg = rep.group_algebra(tol);
    let z = center_in_coordinates(&group_alg, settings)?;
    let projections = spectral_projections(&z, settings)?;

    let mut isotypes = Vec::new();
    let mut columns: Vec<Vec<CVec>> = Vec::new();
    for p in projections {
        let rank = linalg::trace(&p).re.round() as usize;
        let eig = eigh(&p);
        let q = eig.vectors.columns(d - rank, rank).into_owned();
        let compressed: Vec<CMat> = rep
            .matrices
            .iter()
            .map(|u| q.adjoint() * u * &q)
            .collect();
        let block_alg = orthonormalize(&compressed, tol);
        let dim_v = (block_alg.len() as f64).sqrt().round() as usize;
        if dim_v * dim_v != block_alg.len() || !rank.is_multiple_of(dim_v) {
            return Err(Error::Numerical(format!(
                "isotypic block of rank {rank} has a {}-dimensional group algebra",
                block_alg.len()
            )));
        }
        let dim_h = rank / dim_v;
        // local vectors e_k^a in the coordinates of `q`
        let local = split_block(&block_alg, rank, dim_h, dim_v, settings)?;
        let vecs: Vec<CVec> = local.iter().map(|e| &q * e).collect();
        let irrep = rep
            .matrices
            .iter()
            .map(|u| {
                CMat::from_fn(dim_v, dim_v, |k, l| {
                    (vecs[k].adjoint() * u * &vecs[l])[(0, 0)]
                })
            })
            .collect::<Vec<_>>();
        let character = irrep.iter().map(linalg::trace).collect();
        isotypes.push(Isotype {
            dim_h,
            dim_v,
            irrep,
            character,
            projection: p,
            offset: 0,
        });
        columns.push(vecs);
    }

    let mut order: Vec<usize> = (0..isotypes.len()).collect();
    order.sort_by(|&i, &j| canonical_label_order(&isotypes[i], &isotypes[j]));
    let mut w = CMat::zeros(d, d);
    let mut offset = 0;
    let mut sorted = Vec::with_capacity(isotypes.len());
    for &i in &order {
        let mut iso = isotypes[i].clone();
        iso.offset = offset;
        for (c, v) in columns[i].iter().enumerate() {
            w.set_column(offset + c, v);
        }
        offset += iso.block_size();
        sorted.push(iso);
    }
    if offset != d {
        return Err(Error::Numerical(format!(
            "isotypic blocks cover {offset} of {d} dimensions"
        )));
    }
    let mut decomposition = IsotypicDecomposition {
        isotypes: sorted,
        w,
        reconstruction_residual: 0.0,
    };
    decomposition.reconstruction_residual = (0..rep.group.order())
        .map(|g| {
            let rebuilt = &decomposition.w * decomposition.block_form(g) * decomposition.w.adjoint();
            fro_norm(&(rebuilt - &rep.matrices[g]))
        })
        .fold(0.0, f64::max);
    Ok(decomposition)
}

/// Vectors `e_k^a` (index `a·dim_v + k`) with `span{e_k^a}_a` the `k`-th
/// eigenspace of a generic Hermitian element of the block algebra
/// `1_H ⊗ M_V`, transported from `k = 0` by a second generic element.
fn split_block(
    block_alg: &[CMat],
    rank: usize,
    dim_h: usize,
    dim_v: usize,
    settings: &Settings,
) -> Result<Vec<CVec>> {
    if dim_v == 1 {
        return Ok((0..rank).map(|a| linalg::basis_vector(rank, a)).collect());
    }
    const ATTEMPTS: u64 = 5;
    for attempt in 0..ATTEMPTS {
        let mut rng = linalg::rng(settings.seed.wrapping_add(attempt));
        let y = hermitian_part(&random_combination(&mut rng, block_alg, rank));
        let z = random_combination(&mut rng, block_alg, rank);
        let eig = eigh(&y);
        let Some(clusters) = cluster_sorted(&eig.values, settings.tol.gap) else {
            continue;
        };
        if clusters.len() != dim_v || clusters.iter().any(|r| r.len() != dim_h) {
            continue;
        }
        let first = eig.vectors.columns(clusters[0].start, dim_h).into_owned();
        let mut out = vec![CVec::zeros(rank); rank];
        let mut ok = true;
        for (k, r) in clusters.iter().enumerate() {
            let ek = eig.vectors.columns(r.start, dim_h).into_owned();
            let pk = &ek * ek.adjoint();
            let mut norms = Vec::with_capacity(dim_h);
            for a in 0..dim_h {
                let f = first.column(a).into_owned();
                let v = if k == 0 { f } else { &pk * &z * f };
                let n = v.norm();
                norms.push(n);
                out[a * dim_v + k] = v.unscale(n.max(f64::MIN_POSITIVE));
            }
            let nmax = norms.iter().cloned().fold(0.0, f64::max);
            let nmin = norms.iter().cloned().fold(f64::INFINITY, f64::min);
            if nmin < 1e-6 * fro_norm(&z) || nmax - nmin > 1e-8 * nmax {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(out);
        }
    }
    Err(Error::GapAmbiguity {
        attempts: ATTEMPTS as usize,
        detail: format!("could not split a block of rank {rank} into {dim_h} x {dim_v}"),
    })
}

/// Ascending `dim V`, then characters compared element by element (descending).
fn canonical_label_order(a: &Isotype, b: &Isotype) -> Ordering {
    a.dim_v.cmp(&b.dim_v).then_with(|| {
        for (x, y) in a.character.iter().zip(&b.character) {
            if (x.re - y.re).abs() > 1e-8 {
                return y.re.total_cmp(&x.re);
            }
            if (x.im - y.im).abs() > 1e-8 {
                return y.im.total_cmp(&x.im);
            }
        }
        Ordering::Equal
    })
}

/// Orthonormal basis of `{S : S U1(g) = U2(g) S for all g}`.
pub fn intertwiner_space(rep1: &UnitaryRep, rep2: &UnitaryRep, settings: &Settings) -> Result<Vec<CMat>> {
    if rep1.group != rep2.group {
        return Err(Error::InvalidRepresentation(
            "intertwiners require representations of the same group".into(),
        ));
    }
    let (d1, d2) = (rep1.dim, rep2.dim);
    let n = rep1.group.order();
    let block = d2 * d1;
    let mut l = CMat::zeros(n * block, block);
    for g in 0..n {
        let u1 = &rep1.matrices[g];
        let u2 = &rep2.matrices[g];
        for i in 0..d2 {
            for j in 0..d1 {
                let col = i * d1 + j;
                for s in 0..d1 {
                    l[(g * block + i * d1 + s, col)] += u1[(j, s)];
                }
                for r in 0..d2 {
                    l[(g * block + r * d1 + j, col)] -= u2[(r, i)];
                }
            }
        }
    }
    Ok(nullspace(&l, settings.tol.rank)
        .into_iter()
        .map(|v| CMat::from_fn(d2, d1, |i, j| v[i * d1 + j]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli_x, pauli_z};

    fn s() -> Settings {
        Settings::default()
    }

    fn z2(u: &CMat) -> UnitaryRep {
        UnitaryRep::cyclic(2, u, 1e-10).unwrap()
    }

    #[test]
    fn builtin_groups_are_valid() {
        for spec in ["trivial", "cyclic:5", "symmetric:3", "quaternion:8"] {
            let g = FiniteGroup::builtin(spec).unwrap();
            assert_eq!(FiniteGroup::from_json(&g.to_json()).unwrap().table(), g.table());
        }
        assert_eq!(FiniteGroup::quaternion8().mul(2, 4), 6); // i j = k
        assert_eq!(FiniteGroup::quaternion8().mul(4, 2), 7); // j i = -k
        assert!(FiniteGroup::builtin("dihedral:4").is_err());
    }

    #[test]
    fn non_associative_table_is_rejected() {
        // a Latin square with identity 0 that is not a group (order 5 loop)
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(FiniteGroup::from_table("loop", t).is_err());
    }

    #[test]
    fn averaging_examples() {
        let rep = z2(&pauli_z());
        assert!(fro_norm(&(average(&identity(2), &rep).unwrap() - identity(2))) < 1e-15);
        assert!(fro_norm(&average(&pauli_x(), &rep).unwrap()) < 1e-15);
        assert!(fro_norm(&(average(&pauli_z(), &rep).unwrap() - pauli_z())) < 1e-15);
        assert!(average(&identity(3), &rep).is_err());
    }

    #[test]
    fn fixed_points_examples() {
        let trivial = UnitaryRep::trivial(FiniteGroup::trivial(), 3);
        let full = OperatorAlgebra::full(3);
        assert_eq!(fixed_point_algebra(&full, &trivial, &s()).unwrap().dimension(), 9);

        let rep = z2(&pauli_z());
        let a = fixed_point_algebra(&OperatorAlgebra::full(2), &rep, &s()).unwrap();
        assert_eq!(a.dimension(), 2);

        let rep = z2(&kron(&pauli_z(), &pauli_z()));
        let a = fixed_point_algebra(&OperatorAlgebra::full(4), &rep, &s()).unwrap();
        assert_eq!(a.dimension(), 8);
        let b = fixed_point_algebra_by_averaging(&OperatorAlgebra::full(4), &rep).unwrap();
        assert!(a.same_span(&b, 1e-9));
    }

    #[test]
    fn isotypic_examples() {
        let iso = isotypic_decomposition(&UnitaryRep::trivial(FiniteGroup::trivial(), 2), &s()).unwrap();
        assert_eq!(iso.isotypes.len(), 1);
        assert_eq!((iso.isotypes[0].dim_h, iso.isotypes[0].dim_v), (2, 1));

        let iso = isotypic_decomposition(&z2(&pauli_z()), &s()).unwrap();
        assert_eq!(iso.isotypes.len(), 2);
        assert!(iso.isotypes[0].is_trivial());
        assert!((iso.isotypes[1].character[1] + ONE).norm() < 1e-12);

        let iso = isotypic_decomposition(&z2(&kron(&pauli_z(), &pauli_z())), &s()).unwrap();
        let dims: Vec<_> = iso.isotypes.iter().map(|i| (i.dim_h, i.dim_v)).collect();
        assert_eq!(dims, vec![(2, 1), (2, 1)]);
        assert!(iso.reconstruction_residual < 1e-10);
    }

    #[test]
    fn regular_representation_of_s3_and_q8() {
        let iso = isotypic_decomposition(&UnitaryRep::regular(FiniteGroup::symmetric3()), &s()).unwrap();
        let dims: Vec<_> = iso.isotypes.iter().map(|i| (i.dim_h, i.dim_v)).collect();
        assert_eq!(dims, vec![(1, 1), (1, 1), (2, 2)]);
        assert!(iso.reconstruction_residual < 1e-8);

        let iso = isotypic_decomposition(&UnitaryRep::regular(FiniteGroup::quaternion8()), &s()).unwrap();
        let dims: Vec<_> = iso.isotypes.iter().map(|i| (i.dim_h, i.dim_v)).collect();
        assert_eq!(dims, vec![(1, 1), (1, 1), (1, 1), (1, 1), (2, 2)]);
        assert!(iso.reconstruction_residual < 1e-8);
    }

    #[test]
    fn intertwiner_examples() {
        let g = FiniteGroup::cyclic(2);
        let triv = UnitaryRep::trivial(g.clone(), 1);
        let sign = UnitaryRep::new(g.clone(), vec![identity(1), identity(1).scale(-1.0)], 1e-12).unwrap();
        assert_eq!(intertwiner_space(&sign, &sign, &s()).unwrap().len(), 1);
        assert!(intertwiner_space(&triv, &sign, &s()).unwrap().is_empty());
        let reg = UnitaryRep::regular(g);
        assert_eq!(intertwiner_space(&reg, &reg, &s()).unwrap().len(), 2);
    }

    #[test]
    fn distinct_labels_are_disjoint() {
        let rep = UnitaryRep::regular(FiniteGroup::symmetric3());
        let iso = isotypic_decomposition(&rep, &s()).unwrap();
        let irreps: Vec<UnitaryRep> = iso
            .isotypes
            .iter()
            .map(|i| UnitaryRep::new(rep.group().clone(), i.irrep.clone(), 1e-9).unwrap())
            .collect();
        for (a, ra) in irreps.iter().enumerate() {
            for (b, rb) in irreps.iter().enumerate() {
                let n = intertwiner_space(ra, rb, &s()).unwrap().len();
                assert_eq!(n, usize::from(a == b), "labels {a}, {b}");
            }
        }
    }
}
