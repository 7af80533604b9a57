//! End-to-end coverage of the command-line surface: determinism, exit codes,
//! and the report shapes downstream tooling consumes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_chronorev")
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chronorev-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, contents: &str) {
    fs::write(path, contents).unwrap();
}

const LOGIT_SPEC: &str = r#"{
    "model": "rum_cf",
    "utilities": {"x": 1.0, "y": 0.5, "z": 0.0},
    "diff": {"family": "logistic", "scale": 1.0},
    "chronometric": {"kind": "reciprocal", "kappa": 1.0},
    "pairs": [["x", "y"], ["y", "z"]],
    "trials_per_pair": 2000
}"#;

const BIMODAL_FIXTURE: &str = r#"{
    "model": "rum_cf",
    "utilities": {"x": 0.5, "y": 0.0},
    "diff": {"family": "bimodal"},
    "chronometric": {"kind": "reciprocal", "kappa": 1.0},
    "pairs": [["x", "y"]],
    "trials_per_pair": 1
}"#;

#[test]
fn simulate_is_byte_deterministic_across_runs_and_thread_counts() {
    let dir = tmp_dir("determinism");
    let spec = dir.join("spec.json");
    write(&spec, LOGIT_SPEC);
    let outputs: Vec<(Vec<u8>, Vec<u8>)> = [
        ("a.csv", vec![]),
        ("b.csv", vec![]),
        ("c.csv", vec![("CHRONO_THREADS", "1")]),
    ]
    .into_iter()
    .map(|(name, envs)| {
        let out = dir.join(name);
        let status = run(
            &[
                "simulate",
                "--config",
                spec.to_str().unwrap(),
                "--seed",
                "7",
                "--out",
                out.to_str().unwrap(),
            ],
            &envs,
        );
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        let sidecar = PathBuf::from(format!("{}.sidecar.json", out.display()));
        (fs::read(&out).unwrap(), fs::read(&sidecar).unwrap())
    })
    .collect();
    assert_eq!(
        outputs[0], outputs[1],
        "same seed must give identical bytes"
    );
    assert_eq!(
        outputs[0], outputs[2],
        "thread count must not affect output"
    );
}

#[test]
fn different_seeds_differ() {
    let dir = tmp_dir("seeds");
    let spec = dir.join("spec.json");
    write(&spec, LOGIT_SPEC);
    let mut outs = vec![];
    for seed in ["1", "2"] {
        let out = dir.join(format!("s{seed}.csv"));
        let status = run(
            &[
                "simulate",
                "--config",
                spec.to_str().unwrap(),
                "--seed",
                seed,
                "--out",
                out.to_str().unwrap(),
            ],
            &[],
        );
        assert!(status.status.success());
        outs.push(fs::read(&out).unwrap());
    }
    assert_ne!(outs[0], outs[1]);
}

#[test]
fn invalid_spec_exits_2() {
    let dir = tmp_dir("badspec");
    let spec = dir.join("bad.json");
    write(
        &spec,
        r#"{"model": "rum_cf", "utilities": {}, "pairs": []}"#,
    );
    let out = run(
        &[
            "simulate",
            "--config",
            spec.to_str().unwrap(),
            "--out",
            dir.join("x.csv").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn analyze_full_pipeline_and_determinism() {
    let dir = tmp_dir("analyze");
    let spec = dir.join("spec.json");
    write(&spec, LOGIT_SPEC);
    let trials = dir.join("trials.csv");
    assert!(run(
        &[
            "simulate",
            "--config",
            spec.to_str().unwrap(),
            "--seed",
            "11",
            "--n",
            "4000",
            "--out",
            trials.to_str().unwrap(),
        ],
        &[],
    )
    .status
    .success());

    let mut reports = vec![];
    for name in ["r1.json", "r2.json"] {
        let report = dir.join(name);
        let out = run(
            &[
                "analyze",
                "--trials",
                trials.to_str().unwrap(),
                "--class",
                "all",
                "--tol",
                "0.02",
                "--out",
                report.to_str().unwrap(),
            ],
            &[],
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        reports.push(fs::read(&report).unwrap());
    }
    assert_eq!(reports[0], reports[1], "reports must be byte-identical");

    let parsed: Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(parsed["schema"], "1");
    assert!(parsed["unrestricted"]["pairs"].as_array().unwrap().len() == 4);
    assert!(parsed["symmetric"]["sign_forecasts"].is_array());
    assert!(parsed["fechner"]["predictions"].is_array());
    // recovered order shows up as strict closure edges
    let strict = parsed["unrestricted"]["closure"]["strict"]
        .as_array()
        .unwrap();
    assert!(
        strict.iter().any(|e| e[0] == "x" && e[1] == "z"),
        "closure must chain x over z, got {strict:?}"
    );
}

#[test]
fn analyze_accepts_closed_form_fixture() {
    let dir = tmp_dir("fixture");
    let fixture = dir.join("fixture.json");
    write(&fixture, BIMODAL_FIXTURE);
    let out = run(
        &[
            "analyze",
            "--analytic",
            fixture.to_str().unwrap(),
            "--class",
            "unrestricted",
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let parsed: Value = serde_json::from_slice(&out.stdout).unwrap();
    let pairs = parsed["unrestricted"]["pairs"].as_array().unwrap();
    let fwd = pairs
        .iter()
        .find(|p| p["x"] == "x" && p["y"] == "y")
        .unwrap();
    assert_eq!(fwd["verdict"]["holds"], true);
    assert_eq!(fwd["verdict"]["strict"], true);
    assert_eq!(fwd["q"], 3.0);
    let kind = fwd["density_ratio"]["verdict"]["kind"].as_str().unwrap();
    assert!(
        kind == "fails" || kind == "inconclusive",
        "density verdict {kind}"
    );
}

#[test]
fn analyze_rejects_missing_input() {
    let out = run(&["analyze", "--trials", "/nonexistent/trials.csv"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["analyze"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn predict_without_pivot_exits_3() {
    let dir = tmp_dir("predict3");
    let trials = dir.join("trials.csv");
    write(
        &trials,
        "trial_id,option_a,option_b,choice,rt_seconds\n1,a,b,a,1.0\n2,a,b,b,2.0\n",
    );
    let out = run(
        &[
            "predict",
            "--trials",
            trials.to_str().unwrap(),
            "--pair",
            "a,q",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("not predictable"), "{msg}");
}

#[test]
fn predict_reports_cases_and_pivots() {
    let dir = tmp_dir("predict");
    let spec = dir.join("spec.json");
    write(&spec, LOGIT_SPEC);
    let trials = dir.join("trials.csv");
    assert!(run(
        &[
            "simulate",
            "--config",
            spec.to_str().unwrap(),
            "--seed",
            "3",
            "--n",
            "20000",
            "--out",
            trials.to_str().unwrap(),
        ],
        &[],
    )
    .status
    .success());
    let out = run(
        &[
            "predict",
            "--trials",
            trials.to_str().unwrap(),
            "--pair",
            "x,z",
        ],
        &[],
    );
    assert!(out.status.success());
    let parsed: Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = &parsed["predictions"][0]["predictions"][0];
    assert_eq!(p["pivot"], "y");
    let p_bar = p["p_bar"].as_f64().unwrap();
    assert!((p_bar - 0.7311).abs() < 0.03, "p_bar={p_bar}");
}

#[test]
fn check_flags_cyclic_frequencies() {
    let dir = tmp_dir("check");
    let trials = dir.join("cycle.csv");
    let mut csv = String::from("trial_id,option_a,option_b,choice,rt_seconds\n");
    let mut i = 0;
    for (a, b) in [("x", "y"), ("y", "z"), ("z", "x")] {
        for k in 0..4 {
            i += 1;
            let chooser = if k < 3 { a } else { b };
            csv.push_str(&format!("{i},{a},{b},{chooser},1.{k}\n"));
        }
    }
    write(&trials, &csv);
    let out = run(&["check", "--trials", trials.to_str().unwrap()], &[]);
    assert!(out.status.success());
    let parsed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["pass"], false);
    let classes = parsed["classes"].as_array().unwrap();
    let symmetric = classes.iter().find(|c| c["class"] == "symmetric").unwrap();
    assert_eq!(symmetric["pass"], false);
    let freq_check = symmetric["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["relation"] == "frequency")
        .unwrap();
    assert!(freq_check["witness"].as_array().unwrap().len() >= 3);
}

#[test]
fn check_on_empty_trials_exits_2() {
    let dir = tmp_dir("checkempty");
    let trials = dir.join("empty.csv");
    write(&trials, "trial_id,option_a,option_b,choice,rt_seconds\n");
    let out = run(&["check", "--trials", trials.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ddm_sidecar_reports_truncation_rate() {
    let dir = tmp_dir("ddm");
    let spec = dir.join("ddm.json");
    write(
        &spec,
        r#"{
            "model": "ddm",
            "utilities": {"x": 0.5, "y": 0.0},
            "sigma2": 1.0,
            "boundary": {"shape": "hyperbolic", "scale": 1.0, "shift": 1.0},
            "dt": 0.001,
            "t_max": 30.0,
            "pairs": [["x", "y"]],
            "trials_per_pair": 500
        }"#,
    );
    let out_csv = dir.join("ddm.csv");
    let out = run(
        &[
            "simulate",
            "--config",
            spec.to_str().unwrap(),
            "--seed",
            "5",
            "--out",
            out_csv.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let sidecar: Value =
        serde_json::from_slice(&fs::read(format!("{}.sidecar.json", out_csv.display())).unwrap())
            .unwrap();
    assert!(sidecar["truncation_resample_rate"].is_number());
    assert_eq!(sidecar["model"], "ddm");
    assert!(sidecar["pairs"][0]["drift"].as_f64().unwrap() > 0.0);
}
