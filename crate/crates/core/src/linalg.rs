//! Dense complex matrix helpers shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex<f64>>`. The trace inner product
//! `<A, B> = tr(A* B)` is used for every orthonormalization in the crate.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = Complex::new(0.0, 0.0);
pub const ONE: C64 = Complex::new(1.0, 0.0);
pub const I: C64 = Complex::new(0.0, 1.0);

/// Numerical thresholds, overridable through the `tol.*` config keys.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value / residual threshold for rank decisions.
    pub rank: f64,
    /// Eigenvalue gap below which two eigenvalues are treated as one.
    pub gap: f64,
    /// Hermiticity, positivity and trace tolerance for states.
    pub state: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-9,
            gap: 1e-8,
            state: 1e-10,
        }
    }
}

/// Tolerances plus the seed used wherever a generic random element is drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub tol: Tolerances,
    pub seed: u64,
    pub dim_cap: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            seed: 0,
            dim_cap: 256,
        }
    }
}

impl Settings {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if dim > self.dim_cap {
            return Err(Error::DimensionCap {
                dim,
                cap: self.dim_cap,
            });
        }
        Ok(())
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, entries.iter().map(|&x| c(x, 0.0)))
}

pub fn pauli_x() -> CMat {
    from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMat {
    from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn diag(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(
        values.len(),
        values.iter().map(|&x| c(x, 0.0)),
    ))
}

/// The matrix unit `|i><j|` in dimension `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn basis_vector(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = ONE;
    v
}

/// `tr(A* B)`.
pub fn inner(a: &CMat, b: &CMat) -> C64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

pub fn fro_norm(a: &CMat) -> f64 {
    a.as_slice().iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.as_slice().iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().sum()
}

/// `tr(rho A)` without forming the product.
pub fn expectation(rho: &CMat, a: &CMat) -> C64 {
    let d = rho.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += rho[(i, j)] * a[(j, i)];
        }
    }
    acc
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(factors: &[CMat]) -> CMat {
    factors
        .iter()
        .fold(identity(1), |acc, f| acc.kronecker(f))
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

pub fn is_square(a: &CMat) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eigh(a: &CMat) -> Eigh {
    let h = hermitian_part(a);
    let n = h.nrows();
    if n == 0 {
        return Eigh {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        };
    }
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Eigh { values, vectors }
}

/// Groups ascending eigenvalues into clusters separated by more than `gap * scale`.
///
/// Returns `None` when some consecutive gap falls in the ambiguous window
/// `(1e-12 * scale, gap * scale]`.
pub fn cluster_sorted(values: &[f64], gap: f64) -> Option<Vec<Range<usize>>> {
    if values.is_empty() {
        return Some(vec![]);
    }
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..values.len() {
        let g = values[k] - values[k - 1];
        if g > gap * scale {
            clusters.push(start..k);
            start = k;
        } else if g > 1e-12 * scale {
            return None;
        }
    }
    clusters.push(start..values.len());
    Some(clusters)
}

/// Orthonormal basis (as columns) of the numerical nullspace of `l`.
///
/// Singular values at or below `tol * max(sigma_max, 1)` count as zero.
pub fn nullspace(l: &CMat, tol: f64) -> Vec<CVec> {
    let (m, n) = l.shape();
    if n == 0 {
        return vec![];
    }
    if m == 0 || l.as_slice().iter().all(|x| *x == ZERO) {
        return (0..n).map(|i| basis_vector(n, i)).collect();
    }
    let a = if m < n {
        let mut padded = CMat::zeros(n, n);
        padded.view_mut((0, 0), (m, n)).copy_from(l);
        padded
    } else {
        l.clone()
    };
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values[0];
    let thresh = tol * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > thresh).count();
    (rank..n).map(|r| vt.row(r).adjoint()).collect()
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return vec![];
    }
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Adds `candidate` to an orthonormal `basis` by two-pass Gram–Schmidt.
///
/// Returns `false` when the residual is below `tol` relative to the candidate norm.
pub fn extend_orthonormal(basis: &mut Vec<CMat>, candidate: &CMat, tol: f64) -> bool {
    let norm0 = fro_norm(candidate);
    if norm0 <= f64::MIN_POSITIVE {
        return false;
    }
    let mut v = candidate.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let coef = inner(b, &v);
            if coef != ZERO {
                v.zip_apply(b, |x, y| *x -= coef * y);
            }
        }
    }
    let norm = fro_norm(&v);
    if norm <= tol * norm0 {
        return false;
    }
    basis.push(v.unscale(norm));
    true
}

pub fn orthonormalize<'a>(candidates: impl IntoIterator<Item = &'a CMat>, tol: f64) -> Vec<CMat> {
    let mut basis = Vec::new();
    for cand in candidates {
        extend_orthonormal(&mut basis, cand, tol);
    }
    basis
}

/// Frobenius norm of `x` minus its orthogonal projection onto an orthonormal basis.
pub fn projection_residual(basis: &[CMat], x: &CMat) -> f64 {
    let mut r = x.clone();
    for b in basis {
        let coef = inner(b, x);
        r.zip_apply(b, |v, w| *v -= coef * w);
    }
    fro_norm(&r)
}

pub fn random_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> CMat {
    hermitian_part(&random_complex(rng, d, d))
}

pub fn random_unitary(rng: &mut impl Rng, d: usize) -> CMat {
    let z = random_complex(rng, d, d);
    z.qr().q()
}

pub fn random_gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// A random linear combination `sum_i z_i B_i` with complex Gaussian coefficients.
pub fn random_combination(rng: &mut impl Rng, basis: &[CMat], d: usize) -> CMat {
    let mut acc = CMat::zeros(d, d);
    for b in basis {
        let z = c(rng.sample(StandardNormal), rng.sample(StandardNormal));
        acc.zip_apply(b, |x, y| *x += z * y);
    }
    acc
}

/// Wire format `{"rows":r,"cols":c,"re":[...],"im":[...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.rows * self.cols;
        if self.re.len() != n || !(self.im.is_empty() || self.im.len() == n) {
            return Err(Error::InvalidInput(format!(
                "matrix {}x{} needs {} entries, got re={} im={}",
                self.rows,
                self.cols,
                n,
                self.re.len(),
                self.im.len()
            )));
        }
        let im = |k: usize| if self.im.is_empty() { 0.0 } else { self.im[k] };
        Ok(CMat::from_row_iterator(
            self.rows,
            self.cols,
            (0..n).map(|k| c(self.re[k], im(k))),
        ))
    }
}

impl From<&CMat> for MatrixJson {
    fn from(m: &CMat) -> Self {
        let mut re = Vec::with_capacity(m.len());
        let mut im = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            re,
            im,
        }
    }
}
