// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn autoknot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autoknot"))
        .args(args)
        .env_remove("AUTOKNOT_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Piecewise-linear data with a kink at 40 and a small deterministic wiggle.
fn write_xy(dir: &Path) -> String {
    let mut s = String::from("x,y\n");
    for i in 0..=100 {
        let x = i as f64;
        let y = if x < 40.0 { 0.2 * x } else { 8.0 - 0.3 * (x - 40.0) } + 0.05 * (i as f64 * 1.7).sin();
        let _ = writeln!(s, "{x},{y}");
    }
    let path = dir.join("xy.csv");
    std::fs::write(&path, s).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&autoknot(&["--help"])), 0);
    assert_eq!(code(&autoknot(&["--version"])), 0);
}

#[test]
fn unknown_flag_is_a_configuration_error() {
    let out = autoknot(&["fit", "whatever.csv", "--no-such-flag"]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_input_is_a_data_error_with_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let out = autoknot(&["fit", "/definitely/not/here.csv", "-o", target.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    assert!(!target.exists());
}

#[test]
fn malformed_rows_are_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "x,y\n1,2\n2,oops\n3,4\n").unwrap();
    assert_eq!(code(&autoknot(&["fit", path.to_str().unwrap()])), 2);
}

#[test]
fn bad_scenario_key_reports_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.toml");
    std::fs::write(
        &path,
        "[[scenario]]\nname = \"x\"\ntruth_knots = [50.0]\nsnr = 3.0\nn = 100\n\n[scenario.search]\nk_maks = 3\n",
    )
    .unwrap();
    let out = autoknot(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scenario[0].search.k_maks"), "{err}");
}

#[test]
fn simulation_without_scenarios_is_a_configuration_error() {
    assert_eq!(code(&autoknot(&["simulate", "--replications", "1"])), 3);
}

#[test]
fn seeded_simulation_is_reproducible() {
    let args = ["simulate", "--scenario", "two-knots-snr3-n100", "--replications", "1", "--seed", "7"];
    let a = autoknot(&args);
    let b = autoknot(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["config"]["seed"], 7);
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let xy = write_xy(dir.path());
    let runs: [&[&str]; 3] = [
        &["simulate", "--scenario", "three-knots-snr3-n100", "--replications", "4", "--seed", "11"],
        &["demo"],
        &["fit", &xy, "--cv-grid", "0.1,1,10"],
    ];
    for args in runs {
        let outputs: Vec<Vec<u8>> = ["1", "2", "4"]
            .iter()
            .map(|t| {
                let mut full = vec!["--threads", t];
                full.extend_from_slice(args);
                let out = autoknot(&full);
                assert_eq!(code(&out), 0, "{args:?}");
                out.stdout
            })
            .collect();
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{args:?} differs across threads");
    }
}

#[test]
fn omitted_seed_is_drawn_and_recorded() {
    let out = autoknot(&["simulate", "--scenario", "one-knot-snr9-n100", "--replications", "1"]);
    let doc = json(&out);
    let seed = doc["config"]["seed"].as_u64().expect("seed recorded");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(&seed.to_string()), "{err}");
    assert!(doc["result"][0].get("timing").is_none());
}

#[test]
fn fit_then_predict_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let xy = write_xy(dir.path());
    let model = dir.path().join("model.json");
    let out = autoknot(&["fit", &xy, "--basis", "tp", "--degree", "1", "-o", model.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let fit: Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    let result = &fit["result"];
    for key in ["knots", "coefficients", "rss", "pss"] {
        assert!(result.get(key).is_some(), "missing {key}");
    }
    let knots = result["knots"].as_array().unwrap();
    assert_eq!(knots.len(), 1);
    assert!((knots[0].as_f64().unwrap() - 40.0).abs() <= 1.0);

    let pred = json(&autoknot(&["predict", "--model", model.to_str().unwrap(), "--x", "10,70,120"]));
    let rows = pred["result"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!((rows[0]["y"].as_f64().unwrap() - 2.0).abs() < 0.1);
    assert!((rows[1]["y"].as_f64().unwrap() - -1.0).abs() < 0.1);
    assert_eq!(rows[2]["extrapolated"], true);
}

#[test]
fn demo_includes_the_crowded_fit() {
    let doc = json(&autoknot(&["demo"]));
    let bad: Vec<f64> = doc["result"]["bad"]["knots"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let expected: Vec<f64> = (0..11).map(|i| 6.0 + 2.0 * i as f64).collect();
    assert_eq!(bad, expected);
    assert_eq!(doc["result"]["automatic"]["knots"].as_array().unwrap().len(), 3);
}

#[test]
fn svg_output_is_a_document() {
    let out = autoknot(&["demo", "--format", "svg"]);
    assert_eq!(code(&out), 0);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
}
