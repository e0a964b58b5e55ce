use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn sectorlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sectorlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn bundled() -> (tempfile::TempDir, PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("ex");
    let out = sectorlab(&["examples", "init", "--dir", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    (tmp, dir)
}

fn p(dir: &Path, rel: &str) -> String {
    dir.join(rel).to_str().unwrap().to_owned()
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push((path.strip_prefix(dir).unwrap().to_owned(), fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn examples_init_is_idempotent() {
    let (_tmp, dir) = bundled();
    let first = snapshot(&dir);
    let models = fs::read_dir(&dir).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert!(models >= 3, "{models} model directories");
    let out = sectorlab(&["examples", "init", "--dir", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(snapshot(&dir), first);
}

#[test]
fn sectors_analyze_reports_two_sectors() {
    let (_tmp, dir) = bundled();
    for n in [2, 3] {
        let out = sectorlab(&["sectors", "analyze", "--model", &p(&dir, &format!("z2_chain_n{n}/model.json"))]);
        assert_eq!(code(&out), 0);
        let r = json(&out);
        assert_eq!(r["center_dim"], 2);
        assert_eq!(r["sectors"].as_array().unwrap().len(), 2);
        assert_eq!(r["vacuum_sector"], "s0");
        assert_eq!(r["conditional_expectation_passes"], true);
    }
    let out = sectorlab(&[
        "sectors",
        "analyze",
        "--model",
        &p(&dir, "z2_chain_n2/model.json"),
        "--state",
        &p(&dir, "z2_chain_n2/states/charge_mixture.json"),
    ]);
    let r = json(&out);
    for s in r["sectors"].as_array().unwrap() {
        assert!((s["weight"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn thermal_estimate_accepts_exact_gibbs_data() {
    let (tmp, dir) = bundled();
    let csv = tmp.path().join("functions.csv");
    let out = sectorlab(&[
        "thermal",
        "estimate",
        "--model",
        &p(&dir, "gibbs_two_level/model.json"),
        "--data",
        &p(&dir, "gibbs_two_level/data.json"),
        "--functions-csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    for level in r["levels"].as_array().unwrap() {
        assert!(level["verdict"]["residual"].as_f64().unwrap() <= 1e-10);
    }
    let table = fs::read_to_string(csv).unwrap();
    assert_eq!(table.lines().next().unwrap(), "beta,mu,sz,sx");
    assert_eq!(table.lines().count(), 4);

    let out = sectorlab(&[
        "thermal",
        "estimate",
        "--model",
        &p(&dir, "gibbs_two_level/model.json"),
        "--data",
        &p(&dir, "gibbs_two_level/data_perturbed.json"),
    ]);
    assert_eq!(code(&out), 1);
    let r = json(&out);
    assert_eq!(r["maximal_accepted"], "energy");
    assert_eq!(r["monotone"], true);
}

#[test]
fn dhr_check_and_invert_on_bundled_states() {
    let (_tmp, dir) = bundled();
    for n in [2, 3] {
        let model = p(&dir, &format!("z2_chain_n{n}/model.json"));
        for k in 0..n {
            let state = p(&dir, &format!("z2_chain_n{n}/states/flip{k}.json"));
            let out = sectorlab(&["dhr", "check", "--model", &model, "--state", &state]);
            assert_eq!(code(&out), 0, "flip{k} on n={n}");
            let r = json(&out);
            assert!(r["witness_regions"].as_array().unwrap().contains(&serde_json::json!([k])));
            let out = sectorlab(&["dhr", "invert", "--model", &model, "--state", &state]);
            assert_eq!(code(&out), 0);
            assert_eq!(json(&out)["matches"][0]["label"], format!("flip{k}"));
        }
        let gibbs = p(&dir, &format!("z2_chain_n{n}/states/ising_gibbs.json"));
        assert_eq!(code(&sectorlab(&["dhr", "check", "--model", &model, "--state", &gibbs])), 1);
        assert_eq!(code(&sectorlab(&["dhr", "invert", "--model", &model, "--state", &gibbs])), 1);
    }
}

#[test]
fn cuntz_normal_forms() {
    let out = sectorlab(&["cuntz", "nf", "--d", "2", "--expr", "s1* s2 s2* s1", "--format", "text"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0\n");
    let out = sectorlab(&["cuntz", "nf", "--d", "2", "--expr", "s1 s1* + s2 s2*"]);
    let r = json(&out);
    assert_eq!(r["results"][0]["normal_form"], "1");
    assert_eq!(r["results"][0]["polynomial"]["terms"][0]["mu"], serde_json::json!([]));

    let (_tmp, dir) = bundled();
    let out = sectorlab(&["cuntz", "nf", "--file", &p(&dir, "cuntz_d2/expressions.json"), "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("input,normal_form\n"));
    assert!(text.contains("1 - s1 s1*,s2 s2*"));

    let out = sectorlab(&["cuntz", "nf", "--d", "2", "--expr", "s1 + s3"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("6"));
}

#[test]
fn channels_invert_recovers_grid_weights() {
    let (tmp, dir) = bundled();
    let design = tmp.path().join("design.csv");
    let out = sectorlab(&[
        "channels",
        "invert",
        "--channel",
        &p(&dir, "gibbs_two_level/channel.json"),
        "--data",
        &p(&dir, "gibbs_two_level/data.json"),
        "--design",
        design.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert!(r["residual"].as_f64().unwrap() <= 1e-10);
    let weights: f64 = r["weights"]["weights"].as_array().unwrap().iter().map(|w| w.as_f64().unwrap()).sum();
    assert!((weights - 1.0).abs() < 1e-12);
    let table = fs::read_to_string(design).unwrap();
    assert!(table.starts_with("probe,beta=0.5,beta=1,beta=2\nsz,"));
}

#[test]
fn input_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.json");
    let out = sectorlab(&["sectors", "analyze", "--model", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{\n  \"name\": \"x\",\n  \"net\": [1,\n}").unwrap();
    let out = sectorlab(&["sectors", "analyze", "--model", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:4:1"), "{err}");

    let out = sectorlab(&["--tol.gap=-1", "cuntz", "nf", "--d", "2", "--expr", "s1"]);
    assert_eq!(code(&out), 2);
    let out = sectorlab(&["cuntz", "nf", "--expr", "s1"]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&sectorlab(&["sectors", "frobnicate"])), 2);
}

#[test]
fn config_file_and_flags_are_deterministic() {
    let (tmp, dir) = bundled();
    let config = tmp.path().join("run.json");
    fs::write(&config, r#"{"seed": 11, "tol": {"rank": 1e-9}, "format": "text"}"#).unwrap();
    let model = p(&dir, "z2_chain_n3/model.json");
    let args = ["--config", config.to_str().unwrap(), "sectors", "analyze", "--model", &model];
    let a = sectorlab(&args);
    let b = sectorlab(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("model z2_chain_n3"));

    let out = sectorlab(&["--config", config.to_str().unwrap(), "--format", "json", "--seed", "5", "sectors", "analyze", "--model", &model]);
    assert_eq!(json(&out)["center_dim"], 2);

    let report = tmp.path().join("report.json");
    let out = sectorlab(&["sectors", "analyze", "--model", &model, "--output", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["sites"], 3);

    fs::write(&config, r#"{"sede": 1}"#).unwrap();
    assert_eq!(code(&sectorlab(&["--config", config.to_str().unwrap(), "cuntz", "nf", "--d", "2", "--expr", "s1"])), 2);
}
