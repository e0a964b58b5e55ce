use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

use sectorlab::algebra::{self, OperatorAlgebra, State};
use sectorlab::channels::{self, ClassicalQuantumChannel, ClassifyingSpace, ProbabilityWeight};
use sectorlab::cuntz::fock::check_product;
use sectorlab::cuntz::parse::parse_expression;
use sectorlab::cuntz::{CuntzPolynomial, CuntzWord, GaugeMatrix, Scalar};
use sectorlab::linalg::{self, C64, CMat};

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> State {
    let a = linalg::random_complex(rng, d, d);
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    State::new(rho / tr, "random", 1e-9).unwrap()
}

fn random_channel(rng: &mut ChaCha8Rng, points: usize, d: usize) -> ClassicalQuantumChannel {
    let names: Vec<String> = (0..points).map(|k| format!("x{k}")).collect();
    let space = ClassifyingSpace::symbols(&names).unwrap();
    ClassicalQuantumChannel::new(space, (0..points).map(|_| random_state(rng, d)).collect()).unwrap()
}

fn weight(space: &ClassifyingSpace, raw: &[f64]) -> ProbabilityWeight {
    ProbabilityWeight::from_raw(space.clone(), raw).unwrap()
}

fn word(d: u8, max: usize) -> impl Strategy<Value = CuntzWord> {
    (
        prop::collection::vec(1..=d, 0..=max),
        prop::collection::vec(1..=d, 0..=max),
    )
        .prop_map(|(mu, nu)| CuntzWord::new(mu, nu))
}

fn polynomial(d: u8, max: usize) -> impl Strategy<Value = CuntzPolynomial> {
    prop::collection::vec((word(d, max), -3i64..=3, 0i64..=1), 1..=3).prop_map(move |terms| {
        CuntzPolynomial::from_terms(
            d as usize,
            terms.into_iter().map(|(w, re, im)| (w, &Scalar::integer(re) + &(&Scalar::imaginary_unit() * &Scalar::integer(im)))),
        )
        .unwrap()
    })
}

fn gauge(theta: f64, phi: f64) -> GaugeMatrix {
    let (c, s) = (theta.cos(), theta.sin());
    let e = C64::from_polar(1.0, phi);
    let g = CMat::from_row_slice(2, 2, &[C64::new(c, 0.0), -e.conj() * s, e * s, C64::new(c, 0.0)]);
    GaugeMatrix::new(&g, 1e-12).unwrap()
}

proptest! {
    #[test]
    fn state_distance_is_a_pseudo_metric(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = linalg::rng(seed);
        let (a, b, c) = (random_state(&mut rng, d), random_state(&mut rng, d), random_state(&mut rng, d));
        let sub = OperatorAlgebra::from_spanning_set(
            d,
            &[linalg::identity(d), linalg::random_hermitian(&mut rng, d)],
            1e-10,
        ).unwrap();
        for alg in [OperatorAlgebra::full(d), sub] {
            let dist = |x: &State, y: &State| algebra::state_distance_mod(x, y, &alg).unwrap();
            prop_assert!(dist(&a, &a) <= 1e-12);
            prop_assert!((dist(&a, &b) - dist(&b, &a)).abs() <= 1e-12);
            prop_assert!(dist(&a, &c) <= dist(&a, &b) + dist(&b, &c) + 1e-12);
        }
    }

    #[test]
    fn classical_quantum_channels_are_affine(
        seed in any::<u64>(),
        raw1 in prop::collection::vec(0.01f64..1.0, 3),
        raw2 in prop::collection::vec(0.01f64..1.0, 3),
        t in 0.0f64..=1.0,
    ) {
        let mut rng = linalg::rng(seed);
        let ch = random_channel(&mut rng, 3, 3);
        let (n1, n2) = (weight(ch.space(), &raw1), weight(ch.space(), &raw2));
        let mix: Vec<f64> = n1.weights().iter().zip(n2.weights()).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let lhs = channels::apply_cq(&ch, &weight(ch.space(), &mix)).unwrap();
        let r1 = channels::apply_cq(&ch, &n1).unwrap();
        let r2 = channels::apply_cq(&ch, &n2).unwrap();
        let rhs = r1.density().scale(t) + r2.density().scale(1.0 - t);
        prop_assert!(linalg::max_abs(&(lhs.density() - rhs)) <= 1e-12);
    }

    #[test]
    fn pushforward_is_dual_to_pullback(seed in any::<u64>(), raw in prop::collection::vec(0.01f64..1.0, 4)) {
        let mut rng = linalg::rng(seed);
        let ch = random_channel(&mut rng, 4, 3);
        let nu = weight(ch.space(), &raw);
        let a = linalg::random_complex(&mut rng, 3, 3);
        let lhs = channels::apply_cq(&ch, &nu).unwrap().expect(&a);
        let rhs: C64 = nu.weights().iter().zip(ch.fibres()).map(|(w, f)| f.expect(&a) * *w).sum();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn adjoint_reverses_products(p in polynomial(2, 3), q in polynomial(2, 3)) {
        prop_assert_eq!(p.multiply(&q).adjoint(), q.adjoint().multiply(&p.adjoint()));
        prop_assert_eq!(p.adjoint().adjoint(), p);
    }

    #[test]
    fn truncated_representation_is_multiplicative(p in polynomial(2, 2), q in polynomial(2, 2)) {
        let c = check_product(&p, &q, 12).unwrap();
        prop_assert!(c.agrees(), "{} mismatches", c.mismatches);
    }

    #[test]
    fn gauge_action_is_a_star_automorphism(
        p in polynomial(2, 2),
        q in polynomial(2, 2),
        theta in 0.0f64..6.3,
        phi in 0.0f64..6.3,
    ) {
        let g = gauge(theta, phi);
        let act = |x: &CuntzPolynomial| x.gauge_act(&g).unwrap();
        prop_assert!(act(&p.adjoint()).approx_eq(&act(&p).adjoint()));
        prop_assert!(act(&p.multiply(&q)).approx_eq(&act(&p).multiply(&act(&q))));
    }

    #[test]
    fn canonical_endomorphism_is_multiplicative(p in polynomial(3, 3), q in polynomial(3, 3)) {
        prop_assert_eq!(
            p.multiply(&q).canonical_endomorphism(),
            p.canonical_endomorphism().multiply(&q.canonical_endomorphism())
        );
        prop_assert_eq!(p.adjoint().canonical_endomorphism(), p.canonical_endomorphism().adjoint());
    }

    #[test]
    fn display_round_trips(p in polynomial(3, 3)) {
        prop_assert_eq!(parse_expression(&p.to_string(), 3).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn normal_form_is_associative(p in polynomial(2, 3), q in polynomial(2, 3), r in polynomial(2, 3)) {
        prop_assert_eq!(p.multiply(&q).multiply(&r), p.multiply(&q.multiply(&r)));
    }
}
