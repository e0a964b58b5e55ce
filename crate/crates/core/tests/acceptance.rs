//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sectorlab::algebra::{OperatorAlgebra, State};
use sectorlab::channels::{self, ProbabilityWeight};
use sectorlab::cuntz::fock::check_product;
use sectorlab::cuntz::{CuntzPolynomial, CuntzWord};
use sectorlab::dhrnet::{self, DhrOptions, LatticeNet, LocalizedMorphism, Region};
use sectorlab::groups::{FiniteGroup, UnitaryRep};
use sectorlab::linalg::{self, CMat, Settings};
use sectorlab::models::{ChainModel, GibbsModel};
use sectorlab::sectors;
use sectorlab::thermal::{self, HamiltonianSystem, ObservableHierarchy, Probe, ProbeLevel, ThermalGrid};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

fn settings() -> Settings {
    Settings::default()
}

fn random_weight(rng: &mut ChaCha8Rng, space: channels::ClassifyingSpace) -> ProbabilityWeight {
    let raw: Vec<f64> = (0..space.len()).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    ProbabilityWeight::new(space, raw.iter().map(|w| w / total).collect()).expect("normalized")
}

fn sector_structure() -> Outcome {
    let s = settings();
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        let z = linalg::kron_all(&vec![linalg::pauli_z(); n]);
        let rep = UnitaryRep::cyclic(2, &z, 1e-10).map_err(|e| e.to_string())?;
        let dec = sectors::decompose_sectors(&OperatorAlgebra::full(1 << n), &rep, &s).map_err(|e| e.to_string())?;
        let centre = sectors::center_dim(&dec, &s).map_err(|e| e.to_string())?;
        let total: usize = dec.sectors().iter().map(|x| x.dim_h * x.dim_v).sum();
        worst = worst.max(dec.residuals().max());
        ensure(
            dec.sectors().len() == 2 && centre == 2 && total == 1 << n && dec.residuals().max() <= 1e-8,
            || format!("n={n}: sectors {}, centre {centre}, total {total}, residual {:.3e}", dec.sectors().len(), dec.residuals().max()),
        )?;
    }
    let rep = UnitaryRep::regular(FiniteGroup::symmetric3());
    let dec = sectors::decompose_sectors(&OperatorAlgebra::full(6), &rep, &s).map_err(|e| e.to_string())?;
    let mut dims: Vec<usize> = dec.sectors().iter().map(|x| x.dim_v).collect();
    dims.sort_unstable();
    let centre = sectors::center_dim(&dec, &s).map_err(|e| e.to_string())?;
    ensure(dims == [1, 1, 2] && centre == 3, || format!("S3: dim V {dims:?}, centre {centre}"))?;
    Ok(format!("Z2 chains n=2..6 and S3 regular; max residual {worst:.2e}"))
}

fn channel_duality() -> Outcome {
    let s = settings();
    let mut rng = linalg::rng(s.seed);
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        let m = ChainModel::z2(n, &s).map_err(|e| e.to_string())?;
        let ch = m.charging_channel().map_err(|e| e.to_string())?;
        let obs = m.decomposition.observables();
        for _ in 0..100 {
            let nu = random_weight(&mut rng, ch.space().clone());
            let a = linalg::random_combination(&mut rng, obs.basis(), m.net.dim());
            let lhs = channels::apply_cq(&ch, &nu).map_err(|e| e.to_string())?.expect(&a);
            let k = sectors::k_map(&a, &m.vacuum, &m.charges, obs).map_err(|e| e.to_string())?;
            let rhs: linalg::C64 = nu.weights().iter().zip(&k).map(|(w, v)| v * *w).sum();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    let g = GibbsModel::two_level().map_err(|e| e.to_string())?;
    let ch = g.channel().map_err(|e| e.to_string())?;
    for _ in 0..100 {
        let nu = random_weight(&mut rng, ch.space().clone());
        let a = linalg::random_complex(&mut rng, 2, 2);
        let lhs = channels::apply_cq(&ch, &nu).map_err(|e| e.to_string())?.expect(&a);
        let f = thermal::thermal_function(&g.system, &g.grid, &a).map_err(|e| e.to_string())?;
        let rhs: linalg::C64 = nu.weights().iter().zip(&f).map(|(w, v)| v * *w).sum();
        worst = worst.max((lhs - rhs).norm());
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("300 pairs over 3 models; max deviation {worst:.2e}"))
}

const LADDER_BETAS: [f64; 11] = [0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0];

fn ladder() -> (HamiltonianSystem, Vec<Probe>) {
    let levels: Vec<f64> = (0..16).map(f64::from).collect();
    let sys = HamiltonianSystem::new(linalg::diag(&levels), None).expect("hermitian");
    let probes = (0..16)
        .map(|k| Probe::new(format!("p{k}"), linalg::matrix_unit(16, k, k)).expect("hermitian"))
        .collect();
    (sys, probes)
}

fn adjunction_round_trips() -> Outcome {
    let s = settings();
    let mut rng = linalg::rng(s.seed);
    let (sys, probes) = ladder();
    let grid = ThermalGrid::betas(&LADDER_BETAS).map_err(|e| e.to_string())?;
    let ch = thermal::build_thermal_channel(&sys, &grid).map_err(|e| e.to_string())?;
    let mats: Vec<CMat> = probes.iter().map(|p| p.matrix.clone()).collect();
    let sep = channels::separation_check(&ch, &mats, &s).map_err(|e| e.to_string())?;
    ensure(sep.passes, || format!("probes do not separate (rank {})", sep.rank))?;
    let mut thermal_worst: f64 = 0.0;
    let mut targets: Vec<ProbabilityWeight> = (0..ch.space().len())
        .map(|k| ProbabilityWeight::point_mass(ch.space().clone(), k).expect("index"))
        .collect();
    targets.extend((0..5).map(|_| random_weight(&mut rng, ch.space().clone())));
    for rho0 in &targets {
        let data = channels::forward_data(&ch, &mats, rho0).map_err(|e| e.to_string())?;
        let inv = channels::invert_cq(&ch, &mats, &data, &s).map_err(|e| e.to_string())?;
        thermal_worst = thermal_worst.max(inv.weights.l1_distance(rho0));
    }
    ensure(thermal_worst <= 1e-6, || format!("thermal l1 error {thermal_worst:.3e}"))?;

    let m = ChainModel::z2(2, &s).map_err(|e| e.to_string())?;
    let cc = m.charging_channel().map_err(|e| e.to_string())?;
    let mut charge_worst: f64 = 0.0;
    for _ in 0..20 {
        let nu = random_weight(&mut rng, cc.space().clone());
        let state = channels::apply_cq(&cc, &nu).map_err(|e| e.to_string())?;
        let back = sectors::estimate_charge(&state, &m.decomposition).map_err(|e| e.to_string())?;
        charge_worst = charge_worst.max(back.l1_distance(&nu));
    }
    ensure(charge_worst <= 1e-10, || format!("charge l1 error {charge_worst:.3e}"))?;
    Ok(format!("thermal l1 {thermal_worst:.2e} on 11 points, charge l1 {charge_worst:.2e}"))
}

fn gibbs_kms() -> Outcome {
    let s = settings();
    let mut rng = linalg::rng(s.seed);
    let mut kms_worst: f64 = 0.0;
    for d in [2, 3, 4, 5, 8, 16] {
        for _ in 0..4 {
            let h = linalg::random_hermitian(&mut rng, d);
            let sys = HamiltonianSystem::new(h, None).map_err(|e| e.to_string())?;
            let beta = rng.random_range(0.1..2.0);
            let a = linalg::random_complex(&mut rng, d, d);
            let b = linalg::random_complex(&mut rng, d, d);
            kms_worst = kms_worst.max(thermal::kms_residual(&sys, beta, None, &a, &b).map_err(|e| e.to_string())?);
        }
    }
    ensure(kms_worst <= 1e-8, || format!("KMS residual {kms_worst:.3e}"))?;
    let sys = HamiltonianSystem::new(linalg::pauli_z(), None).map_err(|e| e.to_string())?;
    let mut tanh_worst: f64 = 0.0;
    for beta in [0.5, 1.0, 2.0] {
        let st = thermal::gibbs_state(&sys, beta, None).map_err(|e| e.to_string())?;
        tanh_worst = tanh_worst.max((st.expect(&linalg::pauli_z()).re + f64::tanh(beta)).abs());
    }
    ensure(tanh_worst <= 1e-12, || format!("tanh deviation {tanh_worst:.3e}"))?;
    Ok(format!("KMS {kms_worst:.2e} for d<=16, tanh {tanh_worst:.2e}"))
}

fn thermality_criterion() -> Outcome {
    let s = settings();
    let g = GibbsModel::two_level().map_err(|e| e.to_string())?;
    let ch = g.channel().map_err(|e| e.to_string())?;
    let all = g.hierarchy.cumulative(g.hierarchy.levels().len() - 1);
    let mut on_grid: f64 = 0.0;
    for p in g.grid.points() {
        let st = thermal::gibbs_state(&g.system, p.beta, None).map_err(|e| e.to_string())?;
        let v = thermal::s_thermal_check(&thermal::measure(&st, &all), &all, &ch, 1e-10, &s).map_err(|e| e.to_string())?;
        on_grid = on_grid.max(v.residual);
        ensure(v.accepted, || format!("on-grid data at beta={} rejected ({:.3e})", p.beta, v.residual))?;
    }

    let check_hierarchy = |measured: &thermal::MeasuredData, h: &ObservableHierarchy, ch: &channels::ClassicalQuantumChannel, name: &str| {
        let r = thermal::hierarchy_report(measured, h, ch, 1e-6, &s).map_err(|e| e.to_string())?;
        ensure(
            r.levels[0].verdict.accepted && !r.levels[1].verdict.accepted && r.monotone,
            || format!("{name}: residuals {:?}", r.levels.iter().map(|l| l.verdict.residual).collect::<Vec<_>>()),
        )
    };
    let st = thermal::gibbs_state(&g.system, 1.0, None).map_err(|e| e.to_string())?;
    let mut measured = thermal::measure(&st, &all);
    *measured.get_mut("sx").expect("probe") += 0.1;
    check_hierarchy(&measured, &g.hierarchy, &ch, "two-level")?;

    let (sys, probes) = ladder();
    let grid = ThermalGrid::betas(&LADDER_BETAS).map_err(|e| e.to_string())?;
    let lch = thermal::build_thermal_channel(&sys, &grid).map_err(|e| e.to_string())?;
    let coarse = vec![
        Probe::new("one", linalg::identity(16)).map_err(|e| e.to_string())?,
        Probe::new("energy", sys.hamiltonian().clone()).map_err(|e| e.to_string())?,
    ];
    let mut fine = coarse.clone();
    fine.extend(probes);
    let h = ObservableHierarchy::new(vec![
        ProbeLevel { name: "coarse".into(), probes: coarse },
        ProbeLevel { name: "fine".into(), probes: fine },
    ])
    .map_err(|e| e.to_string())?;
    let mut measured = thermal::measure(&thermal::gibbs_state(&sys, 1.0, None).map_err(|e| e.to_string())?, &h.cumulative(1));
    *measured.get_mut("p3").expect("probe") += 0.1;
    check_hierarchy(&measured, &h, &lch, "ladder")?;
    Ok(format!("on-grid residual {on_grid:.2e}; perturbation caught at level 2 in both models"))
}

fn dhr_criterion() -> Outcome {
    let s = settings();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [2, 3] {
        let m = ChainModel::z2(n, &s).map_err(|e| e.to_string())?;
        for rho in &m.flips {
            let w = dhrnet::selected_state(rho, &m.vacuum).map_err(|e| e.to_string())?;
            let r = dhrnet::dhr_check(&w, &m.vacuum, &m.net, &DhrOptions::default(), &s).map_err(|e| e.to_string())?;
            let d = r
                .distances
                .iter()
                .find(|x| &x.region == rho.region())
                .map(|x| x.distance)
                .ok_or_else(|| format!("{}: region not among candidates", rho.label()))?;
            worst = worst.max(d);
            count += 1;
            ensure(r.passes && d <= 1e-12, || format!("{} on n={n}: distance {d:.3e}", rho.label()))?;
        }
    }
    let net = LatticeNet::z2_chain(3, &s).map_err(|e| e.to_string())?;
    let zz = |i: usize| net.embed(&Region::new(vec![i, i + 1]), &linalg::kron(&linalg::pauli_z(), &linalg::pauli_z()));
    let x = |i: usize| net.embed(&Region::new(vec![i]), &linalg::pauli_x());
    let mut h = CMat::zeros(8, 8);
    for i in 0..2 {
        h -= zz(i).map_err(|e| e.to_string())?;
    }
    for i in 0..3 {
        h -= x(i).map_err(|e| e.to_string())?.scale(0.7);
    }
    let gibbs = thermal::gibbs_state(&HamiltonianSystem::new(h, None).map_err(|e| e.to_string())?, 1.0, None).map_err(|e| e.to_string())?;
    let vacuum = State::pure(&linalg::basis_vector(8, 0), "vacuum").map_err(|e| e.to_string())?;
    let opts = DhrOptions { tol: 1e-6, all_subsets: false };
    let r = dhrnet::dhr_check(&gibbs, &vacuum, &net, &opts, &s).map_err(|e| e.to_string())?;
    let closest = r.distances.iter().map(|x| x.distance).fold(f64::INFINITY, f64::min);
    ensure(!r.passes, || format!("coupled Gibbs state passes at {:?}", r.witness_regions))?;
    Ok(format!("{count} morphisms localized (max {worst:.1e}); coupled Gibbs state min distance {closest:.3}"))
}

fn intertwiners() -> Outcome {
    let s = settings();
    let m = ChainModel::z2(2, &s).map_err(|e| e.to_string())?;
    let obs = dhrnet::observable_algebra(&m.net, &s).map_err(|e| e.to_string())?;
    let (r0, r1) = (&m.flips[0], &m.flips[1]);
    let ts = dhrnet::solve_intertwiners(r0, r1, &obs, &s).map_err(|e| e.to_string())?;
    let span = OperatorAlgebra::from_spanning_set(4, &ts, 1e-9).map_err(|e| e.to_string())?;
    let xx = linalg::kron(&linalg::pauli_x(), &linalg::pauli_x());
    ensure(span.contains(&xx, 1e-10), || format!("σx⊗σx not in the {}-dim solution space", ts.len()))?;
    let res = dhrnet::intertwiner_residual(&xx, r0, r1, &obs);
    ensure(res <= 1e-10, || format!("σx⊗σx residual {res:.3e}"))?;
    let id = LocalizedMorphism::identity(&m.net);
    for (a, b) in [(&id, r0), (r1, &id)] {
        let t = dhrnet::solve_intertwiners(a, b, &obs, &s).map_err(|e| e.to_string())?;
        ensure(t.is_empty(), || format!("{} -> {}: {} intertwiners", a.label(), b.label(), t.len()))?;
    }
    Ok(format!("{}-dim space contains σx⊗σx (residual {res:.1e}); inequivalent pairs empty", ts.len()))
}

fn conditional_expectation() -> Outcome {
    let s = settings();
    let mut worst = Vec::new();
    for n in [2, 3] {
        let m = ChainModel::z2(n, &s).map_err(|e| e.to_string())?;
        let r = sectors::check_conditional_expectation(&m.decomposition, 100, &s).map_err(|e| e.to_string())?;
        ensure(r.passes(1e-9), || format!("n={n}: {r:?}"))?;
        worst.push(r.idempotence.max(r.unitality).max(r.bimodule));
    }
    let rep = UnitaryRep::regular(FiniteGroup::symmetric3());
    let dec = sectors::decompose_sectors(&OperatorAlgebra::full(6), &rep, &s).map_err(|e| e.to_string())?;
    let r = sectors::check_conditional_expectation(&dec, 100, &s).map_err(|e| e.to_string())?;
    ensure(r.passes(1e-9), || format!("S3: {r:?}"))?;
    worst.push(r.idempotence.max(r.unitality).max(r.bimodule));
    let w = worst.iter().copied().fold(0.0, f64::max);
    Ok(format!("100 samples on 3 models; max defect {w:.2e}"))
}

fn random_word(rng: &mut ChaCha8Rng, d: usize, max_len: usize) -> CuntzWord {
    let len = rng.random_range(0..=max_len);
    let split = rng.random_range(0..=len);
    let mut letter = || rng.random_range(1..=d as u8);
    let mu = (0..split).map(|_| letter()).collect();
    let nu = (split..len).map(|_| letter()).collect();
    CuntzWord::new(mu, nu)
}

fn cuntz_engine() -> Outcome {
    let mut rng = linalg::rng(settings().seed);
    let mut strings = 0;
    for k in 0..1000 {
        let d = 2 + k % 2;
        let p = CuntzPolynomial::word(d, random_word(&mut rng, d, 6)).map_err(|e| e.to_string())?;
        let q = CuntzPolynomial::word(d, random_word(&mut rng, d, 6)).map_err(|e| e.to_string())?;
        let c = check_product(&p, &q, 12).map_err(|e| e.to_string())?;
        ensure(c.agrees(), || format!("({p})·({q}): {} mismatched strings", c.mismatches))?;
        strings += c.strings_checked;
    }
    for d in [2, 3] {
        let one = CuntzPolynomial::one(d).map_err(|e| e.to_string())?;
        ensure(one.canonical_endomorphism() == one, || format!("σ(1) ≠ 1 for d={d}"))?;
    }
    for k in 0..100 {
        let d = 2 + k % 2;
        let poly = |rng: &mut ChaCha8Rng| {
            let terms: Vec<_> = (0..rng.random_range(1..=3))
                .map(|_| (random_word(rng, d, 4), sectorlab::cuntz::Scalar::integer(rng.random_range(-2..=2))))
                .collect();
            CuntzPolynomial::from_terms(d, terms)
        };
        let p = poly(&mut rng).map_err(|e| e.to_string())?;
        let q = poly(&mut rng).map_err(|e| e.to_string())?;
        let lhs = p.multiply(&q).canonical_endomorphism();
        let rhs = p.canonical_endomorphism().multiply(&q.canonical_endomorphism());
        ensure(lhs == rhs, || format!("σ not multiplicative on ({p}), ({q})"))?;
    }
    Ok(format!("1000 word products on {strings} Fock strings; σ(1)=1; σ multiplicative on 100 pairs"))
}

fn charged_vector() -> Outcome {
    let s = settings();
    let m = ChainModel::z2(2, &s).map_err(|e| e.to_string())?;
    let nu = ProbabilityWeight::new(m.decomposition.space(), vec![0.5, 0.5]).map_err(|e| e.to_string())?;
    let (_, r) = sectors::induce_charged_state(&nu, &m.charges, &m.vacuum_vector, &m.decomposition, &OperatorAlgebra::full(4))
        .map_err(|e| e.to_string())?;
    ensure(r.max_deviation <= 1e-8, || format!("deviation {:.3e}", r.max_deviation))?;
    Ok(format!("{} field basis elements; max deviation {:.2e}", r.checked, r.max_deviation))
}

fn haag_duality() -> Outcome {
    let s = settings();
    let mut checked = 0;
    for n in 1..=5 {
        let net = LatticeNet::z2_chain(n, &s).map_err(|e| e.to_string())?;
        for len in 1..=n {
            for start in 0..=n - len {
                let r = dhrnet::haag_duality_check(&net, &Region::interval(start, len), false, &s).map_err(|e| e.to_string())?;
                ensure(r.passes && r.defect == 0, || format!("field net n={n} [{start},{}): {r:?}", start + len))?;
                checked += 1;
            }
        }
    }
    let mut defects = Vec::new();
    for n in [2, 3] {
        let net = LatticeNet::z2_chain(n, &s).map_err(|e| e.to_string())?;
        let r = dhrnet::haag_duality_check(&net, &Region::new(vec![0]), true, &s).map_err(|e| e.to_string())?;
        ensure(r.defect > 0, || format!("observable single-site defect {} on n={n}", r.defect))?;
        defects.push(r.defect);
    }
    Ok(format!("{checked} field intervals with defect 0; observable single-site defects {defects:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1 sector structure", sector_structure),
        ("2 channel duality", channel_duality),
        ("3 adjunction round trips", adjunction_round_trips),
        ("4 Gibbs/KMS", gibbs_kms),
        ("5 thermality criterion", thermality_criterion),
        ("6 localization criterion", dhr_criterion),
        ("7 intertwiners", intertwiners),
        ("8 conditional expectation", conditional_expectation),
        ("9 Cuntz engine", cuntz_engine),
        ("10 charged vector", charged_vector),
        ("11 Haag duality", haag_duality),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name:<28} {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<28} {detail} [{secs:.2}s]");
            }
        }
    }
    let total = start.elapsed().as_secs_f64();
    println!("acceptance: {} passed, {failed} failed in {total:.1}s", criteria.len() - failed);
    if failed == 0 && total < 60.0 {
        ExitCode::SUCCESS
    } else {
        if total >= 60.0 {
            println!("FAIL  time budget: {total:.1}s exceeds 60s");
        }
        ExitCode::FAILURE
    }
}
