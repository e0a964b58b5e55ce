//! Word arithmetic in the Cuntz algebra `O_d` generated by isometries
//! `ψ_1 … ψ_d` with `ψ_i*ψ_j = δ_ij` and `Σ ψ_iψ_i* = 1`.
//!
//! Every element is a combination of words `ψ_μψ_ν*`. Products contract
//! `ψ_ν*ψ_α` by prefix matching. The second relation
//! `ψ_μψ_ν* = Σ_i ψ_{μi}ψ_{νi}*` is used to bring polynomials to a unique
//! normal form: words are grouped by their root (the pair left after
//! removing the longest common suffix of `μ` and `ν`), the coefficients on
//! each root are read as a function on suffix strings, and that function is
//! written with the shortest suffixes on which it is constant.

pub mod example;
pub mod fock;
pub mod parse;
pub mod scalar;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
pub use scalar::{Mode, Scalar, ScalarJson};

/// `ψ_μψ_ν*`, letters numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CuntzWord {
    pub mu: Vec<u8>,
    pub nu: Vec<u8>,
}

impl CuntzWord {
    pub fn new(mu: Vec<u8>, nu: Vec<u8>) -> Self {
        Self { mu, nu }
    }

    pub fn identity() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    /// `|μ| + |ν|`.
    pub fn len(&self) -> usize {
        self.mu.len() + self.nu.len()
    }

    pub fn is_identity(&self) -> bool {
        self.mu.is_empty() && self.nu.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    /// Gauge charge `|μ| - |ν|`.
    pub fn charge(&self) -> i64 {
        self.mu.len() as i64 - self.nu.len() as i64
    }

    fn check(&self, d: usize) -> Result<()> {
        match self.mu.iter().chain(&self.nu).find(|&&l| l == 0 || l as usize > d) {
            Some(l) => Err(Error::InvalidInput(format!("letter {l} outside 1..={d}"))),
            None => Ok(()),
        }
    }

    pub fn adjoint(&self) -> CuntzWord {
        CuntzWord::new(self.nu.clone(), self.mu.clone())
    }

    /// Product of two words, `None` when the inner letters mismatch.
    pub fn product(&self, other: &CuntzWord) -> Option<CuntzWord> {
        let (nu, alpha) = (&self.nu, &other.mu);
        if let Some(rest) = alpha.strip_prefix(nu.as_slice()) {
            Some(CuntzWord::new([self.mu.as_slice(), rest].concat(), other.nu.clone()))
        } else {
            nu.strip_prefix(alpha.as_slice())
                .map(|rest| CuntzWord::new(self.mu.clone(), [other.nu.as_slice(), rest].concat()))
        }
    }

    /// Splits off the longest common suffix: `(root, suffix)`.
    fn root(&self) -> (CuntzWord, Vec<u8>) {
        let common = self
            .mu
            .iter()
            .rev()
            .zip(self.nu.iter().rev())
            .take_while(|(a, b)| a == b)
            .count();
        let suffix = self.mu[self.mu.len() - common..].to_vec();
        (
            CuntzWord::new(
                self.mu[..self.mu.len() - common].to_vec(),
                self.nu[..self.nu.len() - common].to_vec(),
            ),
            suffix,
        )
    }
}

fn length_lex(a: &[u8], b: &[u8]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl Ord for CuntzWord {
    fn cmp(&self, other: &Self) -> Ordering {
        length_lex(&self.mu, &other.mu).then_with(|| length_lex(&self.nu, &other.nu))
    }
}

impl PartialOrd for CuntzWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CuntzWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "1");
        }
        let letters: Vec<String> = self
            .mu
            .iter()
            .map(|l| format!("s{l}"))
            .chain(self.nu.iter().rev().map(|l| format!("s{l}*")))
            .collect();
        write!(f, "{}", letters.join(" "))
    }
}

/// Coefficient trie over suffix strings below one root.
#[derive(Default)]
struct Trie {
    value: Option<Scalar>,
    children: BTreeMap<u8, Trie>,
}

enum Shape {
    Leaf(Scalar),
    Branch(Vec<Shape>),
}

impl Trie {
    fn insert(&mut self, path: &[u8], c: Scalar) {
        let node = path.iter().fold(self, |n, &l| n.children.entry(l).or_default());
        node.value = Some(match node.value.take() {
            Some(v) => &v + &c,
            None => c,
        });
    }

    /// Pushes inherited values down and merges complete sibling sets
    /// carrying equal values.
    fn resolve(&self, d: usize, inherited: &Scalar) -> Shape {
        let v = match &self.value {
            Some(own) => inherited + own,
            None => inherited.clone(),
        };
        if self.children.is_empty() {
            return Shape::Leaf(v);
        }
        let kids: Vec<Shape> = (1..=d as u8)
            .map(|l| match self.children.get(&l) {
                Some(c) => c.resolve(d, &v),
                None => Shape::Leaf(v.clone()),
            })
            .collect();
        if let Shape::Leaf(first) = &kids[0] {
            if kids.iter().all(|k| matches!(k, Shape::Leaf(x) if x.approx_eq(first))) {
                return Shape::Leaf(first.clone());
            }
        }
        Shape::Branch(kids)
    }
}

fn emit(shape: Shape, root: &CuntzWord, path: &mut Vec<u8>, out: &mut BTreeMap<CuntzWord, Scalar>) {
    match shape {
        Shape::Leaf(v) => {
            if !v.is_zero() {
                let word = CuntzWord::new([root.mu.as_slice(), path].concat(), [root.nu.as_slice(), path].concat());
                out.insert(word, v);
            }
        }
        Shape::Branch(kids) => {
            for (k, s) in kids.into_iter().enumerate() {
                path.push(k as u8 + 1);
                emit(s, root, path, out);
                path.pop();
            }
        }
    }
}

fn normalize(d: usize, raw: impl IntoIterator<Item = (CuntzWord, Scalar)>) -> BTreeMap<CuntzWord, Scalar> {
    let mut roots: BTreeMap<CuntzWord, Trie> = BTreeMap::new();
    for (w, c) in raw {
        if c.is_zero() {
            continue;
        }
        let (root, suffix) = w.root();
        roots.entry(root).or_default().insert(&suffix, c);
    }
    let mut out = BTreeMap::new();
    for (root, trie) in roots {
        let shape = trie.resolve(d, &Scalar::zero());
        emit(shape, &root, &mut Vec::new(), &mut out);
    }
    out
}

/// Sums coefficients of equal words without using `Σ ψ_iψ_i* = 1`.
fn collect(raw: impl IntoIterator<Item = (CuntzWord, Scalar)>) -> BTreeMap<CuntzWord, Scalar> {
    let mut out: BTreeMap<CuntzWord, Scalar> = BTreeMap::new();
    for (w, c) in raw {
        let e = out.entry(w).or_insert_with(Scalar::zero);
        *e = &*e + &c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// A polynomial in normal form: no zero coefficients, terms in length-lex
/// order of `μ` then `ν`, and no set `{ψ_{μi}ψ_{νi}* : i}` of equal
/// coefficients left uncontracted.
#[derive(Clone, Debug, PartialEq)]
pub struct CuntzPolynomial {
    d: usize,
    terms: BTreeMap<CuntzWord, Scalar>,
}

impl CuntzPolynomial {
    fn check_d(d: usize) -> Result<()> {
        if d == 0 || d > u8::MAX as usize {
            return Err(Error::InvalidInput(format!("number of generators must be in 1..=255, got {d}")));
        }
        Ok(())
    }

    pub fn zero(d: usize) -> Result<Self> {
        Self::check_d(d)?;
        Ok(Self { d, terms: BTreeMap::new() })
    }

    pub fn one(d: usize) -> Result<Self> {
        Self::from_terms(d, [(CuntzWord::identity(), Scalar::one())])
    }

    /// `ψ_i`.
    pub fn generator(d: usize, i: u8) -> Result<Self> {
        Self::from_terms(d, [(CuntzWord::new(vec![i], vec![]), Scalar::one())])
    }

    pub fn word(d: usize, word: CuntzWord) -> Result<Self> {
        Self::from_terms(d, [(word, Scalar::one())])
    }

    pub fn scalar(d: usize, c: Scalar) -> Result<Self> {
        Self::from_terms(d, [(CuntzWord::identity(), c)])
    }

    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (CuntzWord, Scalar)>) -> Result<Self> {
        Self::check_d(d)?;
        let terms: Vec<_> = terms.into_iter().collect();
        for (w, _) in &terms {
            w.check(d)?;
        }
        Ok(Self {
            d,
            terms: normalize(d, terms),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &BTreeMap<CuntzWord, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact unless some coefficient is floating.
    pub fn mode(&self) -> Mode {
        if self.terms.values().any(|c| c.mode() == Mode::Float) {
            Mode::Float
        } else {
            Mode::Exact
        }
    }

    /// Longest creation part `|μ|` over the terms.
    pub fn max_creation(&self) -> usize {
        self.terms.keys().map(|w| w.mu.len()).max().unwrap_or(0)
    }

    /// Longest annihilation part `|ν|` over the terms.
    pub fn max_annihilation(&self) -> usize {
        self.terms.keys().map(|w| w.nu.len()).max().unwrap_or(0)
    }

    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(CuntzWord::len).max().unwrap_or(0)
    }

    fn same_d(&self, other: &Self) {
        assert_eq!(self.d, other.d, "polynomials over different Cuntz algebras");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_d(other);
        Self {
            d: self.d,
            terms: normalize(self.d, self.terms.iter().chain(&other.terms).map(|(w, c)| (w.clone(), c.clone()))),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Scalar::integer(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self {
            d: self.d,
            terms: normalize(self.d, self.terms.iter().map(|(w, x)| (w.clone(), x * c))),
        }
    }

    /// Termwise products before any use of `Σ ψ_iψ_i* = 1`.
    fn raw_product(&self, other: &Self) -> Vec<(CuntzWord, Scalar)> {
        self.same_d(other);
        let mut raw = Vec::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if let Some(w) = a.product(b) {
                    raw.push((w, x * y));
                }
            }
        }
        raw
    }

    /// The product in normal form.
    ///
    /// # Panics
    /// When the polynomials have different numbers of generators.
    pub fn multiply(&self, other: &Self) -> Self {
        Self {
            d: self.d,
            terms: normalize(self.d, self.raw_product(other)),
        }
    }

    /// Whether normalizing `self · other` needed `Σ ψ_iψ_i* = 1`.
    pub fn product_uses_sum_relation(&self, other: &Self) -> bool {
        collect(self.raw_product(other)) != self.multiply(other).terms
    }

    pub fn adjoint(&self) -> Self {
        Self {
            d: self.d,
            terms: normalize(self.d, self.terms.iter().map(|(w, c)| (w.adjoint(), c.conj()))),
        }
    }

    /// `σ(p) = Σ_i ψ_i p ψ_i*`.
    pub fn canonical_endomorphism(&self) -> Self {
        let raw = (1..=self.d as u8).flat_map(|i| {
            self.terms.iter().map(move |(w, c)| {
                let mut mu = vec![i];
                mu.extend(&w.mu);
                let mut nu = vec![i];
                nu.extend(&w.nu);
                (CuntzWord::new(mu, nu), c.clone())
            })
        });
        Self {
            d: self.d,
            terms: normalize(self.d, raw.collect::<Vec<_>>()),
        }
    }

    /// Image under `ψ_i ↦ Σ_j g_{ji} ψ_j`.
    pub fn gauge_act(&self, g: &GaugeMatrix) -> Result<Self> {
        if g.d != self.d {
            return Err(Error::DimensionMismatch(format!(
                "gauge matrix is {0}x{0} for {1} generators",
                g.d, self.d
            )));
        }
        let mut raw = Vec::new();
        for (w, c) in &self.terms {
            let mut partial: Vec<(Vec<u8>, Vec<u8>, Scalar)> = vec![(Vec::new(), Vec::new(), c.clone())];
            for &l in &w.mu {
                partial = partial
                    .into_iter()
                    .flat_map(|(mu, nu, x)| {
                        g.column(l).map(move |(j, gji)| {
                            let mut mu = mu.clone();
                            mu.push(j);
                            (mu, nu.clone(), &x * gji)
                        })
                    })
                    .collect();
            }
            for &l in &w.nu {
                partial = partial
                    .into_iter()
                    .flat_map(|(mu, nu, x)| {
                        g.column(l).map(move |(j, gji)| {
                            let mut nu = nu.clone();
                            nu.push(j);
                            (mu.clone(), nu, &x * &gji.conj())
                        })
                    })
                    .collect();
            }
            raw.extend(partial.into_iter().map(|(mu, nu, x)| (CuntzWord::new(mu, nu), x)));
        }
        Ok(Self {
            d: self.d,
            terms: normalize(self.d, raw),
        })
    }

    pub fn is_gauge_fixed(&self, g: &GaugeMatrix) -> Result<bool> {
        Ok(self.gauge_act(g)?.approx_eq(self))
    }

    /// Equal words with coefficients equal under [`Scalar::approx_eq`].
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.d == other.d
            && self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|((w, x), (v, y))| w == v && x.approx_eq(y))
    }

    pub fn to_json(&self) -> PolynomialJson {
        PolynomialJson {
            d: self.d,
            mode: self.mode(),
            terms: self
                .terms
                .iter()
                .map(|(w, c)| TermJson {
                    mu: w.mu.clone(),
                    nu: w.nu.clone(),
                    coefficient: c.into(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolynomialJson) -> Result<Self> {
        let terms = json
            .terms
            .iter()
            .map(|t| {
                let c = Scalar::try_from(&t.coefficient).map_err(Error::InvalidInput)?;
                Ok((CuntzWord::new(t.mu.clone(), t.nu.clone()), c))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(json.d, terms)
    }
}

impl fmt::Display for CuntzPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let (neg, coef) = c.coefficient_text();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            match (coef, w.is_identity()) {
                (Some(c), true) => write!(f, "{c}")?,
                (Some(c), false) => write!(f, "{c} {w}")?,
                (None, _) => write!(f, "{w}")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub mu: Vec<u8>,
    pub nu: Vec<u8>,
    pub coefficient: ScalarJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub d: usize,
    pub mode: Mode,
    pub terms: Vec<TermJson>,
}

/// A unitary `d×d` matrix acting on the generators.
#[derive(Clone, Debug)]
pub struct GaugeMatrix {
    d: usize,
    /// Column-major entries `g_{ji}`, zeros included.
    entries: Vec<Scalar>,
}

impl GaugeMatrix {
    /// Integer-valued entries are kept exact.
    pub fn new(g: &CMat, tol: f64) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::NotSquare {
                rows: g.nrows(),
                cols: g.ncols(),
            });
        }
        let d = g.nrows();
        let defect = linalg::max_abs(&(g.adjoint() * g - linalg::identity(d)));
        if defect > tol {
            return Err(Error::InvalidInput(format!("gauge matrix is not unitary (defect {defect:.3e})")));
        }
        Ok(Self {
            d,
            entries: g.iter().map(|z| Scalar::from_c64(*z)).collect(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Non-zero `(j, g_{ji})` for the generator `i`, letters from 1.
    fn column(&self, i: u8) -> impl Iterator<Item = (u8, &Scalar)> + '_ {
        let col = &self.entries[(i as usize - 1) * self.d..i as usize * self.d];
        col.iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(j, x)| (j as u8 + 1, x))
    }
}
