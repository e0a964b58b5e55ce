//! Charge-zero words acting on a spin chain.
//!
//! `ψ_μψ_ν*` with `|μ| = |ν| = m` is sent to `e_{μ₁ν₁} ⊗ … ⊗ e_{μₘνₘ} ⊗ 1`
//! on an `n`-site chain of `d`-level sites. The map respects both Cuntz
//! relations on these words, intertwines the gauge action with the on-site
//! symmetry, and turns the canonical endomorphism into the translation
//! `1 ⊗ X` by one site.

use rand::Rng;
use serde::Serialize;

use super::{CuntzPolynomial, CuntzWord, GaugeMatrix, Scalar};
use crate::dhrnet::{LatticeNet, Region};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Settings};

pub struct ChainEmbedding<'a> {
    net: &'a LatticeNet,
}

impl<'a> ChainEmbedding<'a> {
    pub fn new(net: &'a LatticeNet) -> Self {
        Self { net }
    }

    /// Longest `|μ|` whose image under the canonical endomorphism still fits.
    pub fn max_depth(&self) -> usize {
        self.net.sites() - 1
    }

    fn word_image(&self, w: &CuntzWord) -> Result<CMat> {
        if w.charge() != 0 {
            return Err(Error::InvalidInput(format!("word `{w}` has non-zero charge")));
        }
        if w.mu.len() > self.net.sites() {
            return Err(Error::InvalidInput(format!(
                "word `{w}` is longer than the {}-site chain",
                self.net.sites()
            )));
        }
        let d = self.net.onsite_dim();
        let local: Vec<CMat> = w
            .mu
            .iter()
            .zip(&w.nu)
            .map(|(&a, &b)| linalg::matrix_unit(d, a as usize - 1, b as usize - 1))
            .collect();
        if local.is_empty() {
            return Ok(linalg::identity(self.net.dim()));
        }
        self.net.embed(&Region::interval(0, local.len()), &linalg::kron_all(&local))
    }

    pub fn embed(&self, p: &CuntzPolynomial) -> Result<CMat> {
        if p.d() != self.net.onsite_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} generators for sites of dimension {}",
                p.d(),
                self.net.onsite_dim()
            )));
        }
        let dim = self.net.dim();
        p.terms().iter().try_fold(CMat::zeros(dim, dim), |acc, (w, c)| {
            Ok(acc + self.word_image(w)? * c.to_c64())
        })
    }

    /// `1 ⊗ X'` for `X = X' ⊗ 1` supported on all but the last site.
    pub fn translate(&self, x: &CMat) -> Result<CMat> {
        let n = self.net.sites();
        let head = Region::interval(0, n - 1);
        let d = self.net.onsite_dim() as f64;
        let local = self.net.reduce(&head, x)?.unscale(d);
        let residual = linalg::max_abs(&(self.net.embed(&head, &local)? - x));
        if residual > 1e-12 * linalg::max_abs(x).max(1.0) {
            return Err(Error::InvalidInput(format!(
                "operator acts on the last site (residual {residual:.3e})"
            )));
        }
        self.net.embed(&Region::interval(1, n - 1), &local)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    pub samples: usize,
    /// `max |E(σ(p)) - T(E(p))|` with `T` the translation.
    pub translation_residual: f64,
    /// `max |E(pq) - E(p)E(q)|`.
    pub multiplicative_residual: f64,
    /// `max_g |U_g E(p) U_g* - E(p)|` for gauge-invariant `p`.
    pub invariance_residual: f64,
}

impl EmbeddingReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.translation_residual <= tol && self.multiplicative_residual <= tol && self.invariance_residual <= tol
    }
}

fn random_charge_zero(rng: &mut impl Rng, d: usize, depth: usize) -> Result<CuntzPolynomial> {
    let terms = (0..rng.random_range(1..=3))
        .map(|_| {
            let m = rng.random_range(0..=depth);
            let mut letters = || (0..m).map(|_| rng.random_range(1..=d as u8)).collect::<Vec<_>>();
            let (mu, nu) = (letters(), letters());
            (CuntzWord::new(mu, nu), Scalar::integer(rng.random_range(-3..=3)))
        })
        .collect::<Vec<_>>();
    CuntzPolynomial::from_terms(d, terms)
}

/// Group average `(1/|G|) Σ_g g·p` under the on-site representation.
pub fn gauge_average(p: &CuntzPolynomial, net: &LatticeNet) -> Result<CuntzPolynomial> {
    let rep = net.onsite();
    let mut acc = CuntzPolynomial::zero(p.d())?;
    for m in rep.matrices() {
        acc = acc.add(&p.gauge_act(&GaugeMatrix::new(m, 1e-10)?)?);
    }
    Ok(acc.scale(&Scalar::ratio(1, rep.matrices().len() as i64)))
}

/// Random gauge-invariant charge-zero polynomials checked against the
/// translation, multiplicativity and the on-site symmetry.
pub fn check_chain_embedding(net: &LatticeNet, samples: usize, settings: &Settings) -> Result<EmbeddingReport> {
    let emb = ChainEmbedding::new(net);
    let d = net.onsite_dim();
    let mut rng = linalg::rng(settings.seed);
    let mut report = EmbeddingReport {
        samples,
        translation_residual: 0.0,
        multiplicative_residual: 0.0,
        invariance_residual: 0.0,
    };
    let half = (emb.max_depth() / 2).max(1).min(emb.max_depth());
    for _ in 0..samples {
        let p = gauge_average(&random_charge_zero(&mut rng, d, emb.max_depth())?, net)?;
        let q = gauge_average(&random_charge_zero(&mut rng, d, half)?, net)?;
        let ep = emb.embed(&p)?;
        let shifted = emb.embed(&p.canonical_endomorphism())?;
        report.translation_residual = report.translation_residual.max(linalg::max_abs(&(shifted - emb.translate(&ep)?)));
        let r = gauge_average(&random_charge_zero(&mut rng, d, half)?, net)?;
        let prod = emb.embed(&r.multiply(&q))?;
        report.multiplicative_residual = report
            .multiplicative_residual
            .max(linalg::max_abs(&(prod - emb.embed(&r)? * emb.embed(&q)?)));
        for u in net.global().matrices() {
            let moved = u * &ep * u.adjoint();
            report.invariance_residual = report.invariance_residual.max(linalg::max_abs(&(moved - &ep)));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuntz::parse::parse_expression;

    #[test]
    fn canonical_endomorphism_becomes_translation() {
        let s = Settings::default();
        let net = LatticeNet::z2_chain(3, &s).unwrap();
        let emb = ChainEmbedding::new(&net);
        let one = CuntzPolynomial::one(2).unwrap();
        assert_eq!(emb.embed(&one).unwrap(), linalg::identity(8));
        let p = parse_expression("s1 s2 s2* s1* + s2 s2*", 2).unwrap();
        let lhs = emb.embed(&p.canonical_endomorphism()).unwrap();
        let rhs = emb.translate(&emb.embed(&p).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert!(emb.embed(&parse_expression("s1", 2).unwrap()).is_err());
    }

    #[test]
    fn random_invariant_polynomials() {
        let s = Settings::default();
        for n in [2, 3, 4] {
            let net = LatticeNet::z2_chain(n, &s).unwrap();
            let r = check_chain_embedding(&net, 20, &s).unwrap();
            assert!(r.passes(1e-12), "{n}: {r:?}");
        }
    }
}
