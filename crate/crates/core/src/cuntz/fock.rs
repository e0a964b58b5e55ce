//! Truncated Fock representation: strings of length at most `L` with
//! `ψ_i|μ⟩ = |iμ⟩` (zero beyond `L`) and `ψ_i*|jμ⟩ = δ_ij|μ⟩`.
//!
//! `ψ_i*ψ_j = δ_ij` holds on strings of length below `L`, where no creation
//! is truncated. `Σ ψ_iψ_i*` is the identity on every non-empty string and
//! annihilates the empty one.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{CuntzPolynomial, Scalar};
use crate::error::{Error, Result};
use crate::linalg::{CMat, Settings};

pub type FockVector = BTreeMap<Vec<u8>, Scalar>;

fn add_to(v: &mut FockVector, s: Vec<u8>, c: Scalar) {
    let e = v.entry(s).or_insert_with(Scalar::zero);
    *e = &*e + &c;
}

fn prune(mut v: FockVector) -> FockVector {
    v.retain(|_, c| !c.is_zero());
    v
}

/// `p|s⟩` at truncation level `level`.
pub fn fock_apply(p: &CuntzPolynomial, s: &[u8], level: usize) -> FockVector {
    let mut out = FockVector::new();
    for (w, c) in p.terms() {
        if let Some(rest) = s.strip_prefix(w.nu.as_slice()) {
            if w.mu.len() + rest.len() <= level {
                add_to(&mut out, [w.mu.as_slice(), rest].concat(), c.clone());
            }
        }
    }
    prune(out)
}

/// `p v` for a sparse vector.
pub fn fock_apply_vector(p: &CuntzPolynomial, v: &FockVector, level: usize) -> FockVector {
    let mut out = FockVector::new();
    for (s, x) in v {
        for (t, y) in fock_apply(p, s, level) {
            add_to(&mut out, t, x * &y);
        }
    }
    prune(out)
}

/// Number of strings of length at most `level` over `d` letters.
pub fn fock_dim(d: usize, level: usize) -> Option<usize> {
    (0..=level as u32).try_fold(0usize, |acc, k| d.checked_pow(k).and_then(|x| acc.checked_add(x)))
}

/// All strings of length `len`, lexicographic.
pub fn strings_of_len(d: usize, len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                (1..=d as u8).map(move |l| {
                    let mut t = s.clone();
                    t.push(l);
                    t
                })
            })
            .collect();
    }
    out
}

/// Position of a string in the length-then-lexicographic basis order.
pub fn string_index(d: usize, s: &[u8]) -> usize {
    let shorter: usize = (0..s.len() as u32).map(|k| d.pow(k)).sum();
    shorter + s.iter().fold(0, |acc, &l| acc * d + (l as usize - 1))
}

fn check_level(p: &CuntzPolynomial, level: usize) -> Result<()> {
    let longest = p.max_creation().max(p.max_annihilation());
    if level < longest {
        return Err(Error::InvalidInput(format!(
            "truncation level {level} is below the longest creation or annihilation part {longest}"
        )));
    }
    Ok(())
}

/// Dense matrix of `p` on strings of length at most `level`, ordered by
/// length and then lexicographically.
pub fn fock_matrix(p: &CuntzPolynomial, level: usize, settings: &Settings) -> Result<CMat> {
    check_level(p, level)?;
    let d = p.d();
    let dim = fock_dim(d, level).ok_or(Error::DimensionCap {
        dim: usize::MAX,
        cap: settings.dim_cap,
    })?;
    settings.check_dim(dim)?;
    let mut m = CMat::zeros(dim, dim);
    for len in 0..=level {
        for s in strings_of_len(d, len) {
            let col = string_index(d, &s);
            for (t, c) in fock_apply(p, &s, level) {
                m[(string_index(d, &t), col)] = c.to_c64();
            }
        }
    }
    Ok(m)
}

/// Lengths of basis strings on which the truncated representation of a
/// product is faithful.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SafeWindow {
    pub min_len: usize,
    pub max_len: usize,
}

impl SafeWindow {
    pub fn is_empty(&self) -> bool {
        self.min_len > self.max_len
    }
}

/// Strings short enough that neither factor creates past `level`, and, when
/// the normal form of `p q` used `Σ ψ_iψ_i* = 1`, long enough that every
/// annihilation part is absorbed.
pub fn safe_window(p: &CuntzPolynomial, q: &CuntzPolynomial, level: usize) -> SafeWindow {
    let min_len = if p.product_uses_sum_relation(q) {
        p.max_annihilation() + q.max_annihilation()
    } else {
        0
    };
    match level.checked_sub(p.max_creation() + q.max_creation()) {
        Some(max_len) => SafeWindow { min_len, max_len },
        None => SafeWindow { min_len: 1, max_len: 0 },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductCheck {
    pub window: SafeWindow,
    pub strings_checked: usize,
    pub mismatches: usize,
    /// Largest coefficient difference, in absolute value.
    pub max_deviation: f64,
}

impl ProductCheck {
    pub fn agrees(&self) -> bool {
        self.mismatches == 0
    }
}

/// Compares `F(pq)` with `F(p)F(q)` on every basis string of the safe window.
///
/// No operator involved reads more than `D = |ν|_max(p) + |ν|_max(q)`
/// letters of its input, so for lengths above `D` one tail per
/// `D`-letter prefix represents all strings of that length.
pub fn check_product(p: &CuntzPolynomial, q: &CuntzPolynomial, level: usize) -> Result<ProductCheck> {
    let pq = p.multiply(q);
    for x in [p, q, &pq] {
        check_level(x, level)?;
    }
    let window = safe_window(p, q, level);
    let mut check = ProductCheck {
        window,
        strings_checked: 0,
        mismatches: 0,
        max_deviation: 0.0,
    };
    if window.is_empty() {
        return Ok(check);
    }
    let d = p.d();
    let reach = p.max_annihilation() + q.max_annihilation();
    let mut compare = |s: Vec<u8>| {
        let lhs = fock_apply(&pq, &s, level);
        let basis: FockVector = [(s, Scalar::one())].into_iter().collect();
        let rhs = fock_apply_vector(p, &fock_apply_vector(q, &basis, level), level);
        check.strings_checked += 1;
        let mut keys: Vec<&Vec<u8>> = lhs.keys().chain(rhs.keys()).collect();
        keys.sort();
        keys.dedup();
        let zero = Scalar::zero();
        let mut mismatch = false;
        for k in keys {
            let (a, b) = (lhs.get(k).unwrap_or(&zero), rhs.get(k).unwrap_or(&zero));
            if a != b {
                mismatch = true;
                check.max_deviation = check.max_deviation.max((a.to_c64() - b.to_c64()).norm());
            }
        }
        if mismatch {
            check.mismatches += 1;
        }
    };
    for len in window.min_len..=window.max_len.min(reach) {
        strings_of_len(d, len).into_iter().for_each(&mut compare);
    }
    for len in (reach + 1).max(window.min_len)..=window.max_len {
        for prefix in strings_of_len(d, reach) {
            let mut s = prefix;
            s.resize(len, 1);
            compare(s);
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuntz::parse::parse_expression;
    use crate::linalg;

    fn settings() -> Settings {
        Settings::default()
    }

    #[test]
    fn identity_is_identity() {
        let one = CuntzPolynomial::one(2).unwrap();
        for level in 0..4 {
            let m = fock_matrix(&one, level, &settings()).unwrap();
            assert_eq!(m, linalg::identity(fock_dim(2, level).unwrap()));
        }
    }

    #[test]
    fn range_projection_at_level_one() {
        let p = parse_expression("s1 s1*", 2).unwrap();
        let m = fock_matrix(&p, 1, &settings()).unwrap();
        let mut expected = CMat::zeros(3, 3);
        expected[(1, 1)] = linalg::ONE;
        assert_eq!(m, expected);
    }

    #[test]
    fn isometry_relation_holds_below_the_top_level() {
        let level = 4;
        let m = |src: &str| fock_matrix(&parse_expression(src, 2).unwrap(), level, &settings()).unwrap();
        let below = fock_dim(2, level - 1).unwrap();
        let one = m("s1").adjoint() * m("s1");
        let cross = m("s1").adjoint() * m("s2");
        assert_eq!(one.columns(0, below), linalg::identity(one.nrows()).columns(0, below));
        assert!(cross.iter().all(|z| *z == linalg::ZERO));
        assert_eq!(one[(below, below)], linalg::ZERO);
        assert_eq!(m("s1*"), m("s1").adjoint());
    }

    #[test]
    fn sum_relation_fails_only_on_the_empty_string() {
        let level = 3;
        let s1 = fock_matrix(&parse_expression("s1", 2).unwrap(), level, &settings()).unwrap();
        let s2 = fock_matrix(&parse_expression("s2", 2).unwrap(), level, &settings()).unwrap();
        let sum = &s1 * s1.adjoint() + &s2 * s2.adjoint();
        let mut expected = linalg::identity(sum.nrows());
        expected[(0, 0)] = linalg::ZERO;
        assert_eq!(sum, expected);
    }

    #[test]
    fn level_below_word_length_is_rejected() {
        let p = parse_expression("s1 s2 s1*", 2).unwrap();
        assert!(fock_matrix(&p, 1, &settings()).is_err());
        assert!(fock_matrix(&p, 2, &settings()).is_ok());
    }

    #[test]
    fn dense_matrices_multiply_on_the_window() {
        let level = 5;
        let p = parse_expression("s1 s2* + 2 s2", 2).unwrap();
        let q = parse_expression("s2 s1* s1* - i s1", 2).unwrap();
        let fp = fock_matrix(&p, level, &settings()).unwrap();
        let fq = fock_matrix(&q, level, &settings()).unwrap();
        let fpq = fock_matrix(&p.multiply(&q), level, &settings()).unwrap();
        let w = safe_window(&p, &q, level);
        let prod = fp * fq;
        for len in w.min_len..=w.max_len {
            for s in strings_of_len(2, len) {
                let j = string_index(2, &s);
                assert_eq!(prod.column(j), fpq.column(j), "{s:?}");
            }
        }
    }

    #[test]
    fn sparse_check_on_polynomials() {
        let p = parse_expression("s1 + s2", 2).unwrap();
        let check = check_product(&p, &p.adjoint(), 12).unwrap();
        assert_eq!(check.window, SafeWindow { min_len: 1, max_len: 11 });
        assert!(check.agrees(), "{check:?}");
        let w = parse_expression("s1 s2 s2* s1* s1*", 3).unwrap();
        let v = parse_expression("s1 s2 s3*", 3).unwrap();
        let check = check_product(&w, &v, 12).unwrap();
        assert!(check.agrees() && check.strings_checked > 0);
    }
}
