use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn projexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projexp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_matrix(dir: &Path, name: &str, re: &str, im: &str, dim: usize) -> String {
    let path = dir.join(name);
    fs::write(&path, format!(r#"{{"dim":{dim},"re":{re},"im":{im}}}"#)).unwrap();
    path.to_str().unwrap().to_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn expm_diagonal_passes_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_matrix(dir.path(), "a.json", "[[1,0],[0,-1]]", "[[0,0],[0,0]]", 2);
    let out_path = dir.path().join("r.json");
    let out = projexp(&[
        "expm",
        "--input",
        &input,
        "--samples",
        "4000000",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = read_json(&out_path);
    assert_eq!(r["schema"], "projexp/1");
    assert_eq!(r["command"], "expm");
    assert_eq!(r["passed"], true);
    assert_eq!(r["provenance"]["seed"], 42);
    assert_eq!(r["provenance"]["samples"], 4_000_000);
    let oracle00 = r["result"]["oracle"]["re"][0][0].as_f64().unwrap();
    assert!((oracle00 - 1f64.exp()).abs() < 1e-12);
    assert!(r["result"]["max_z"].as_f64().unwrap() <= 4.0);
    assert!(r["result"]["relative_error"].as_f64().unwrap() <= 0.05);
}

#[test]
fn expm_fourier_zero_matrix_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_matrix(dir.path(), "z.json", "[[0,0],[0,0]]", "[[0,0],[0,0]]", 2);
    let out = projexp(&[
        "expm",
        "--input",
        &input,
        "--samples",
        "100000",
        "--mode",
        "fourier",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["result"]["mode"], "fourier");
    assert_eq!(r["result"]["oracle"]["re"][1][1], 1.0);
    assert!((r["result"]["estimate"]["re"][1][1].as_f64().unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn non_hermitian_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_matrix(dir.path(), "n.json", "[[1,2],[0,-1]]", "[[0,0],[0,0]]", 2);
    let out = projexp(&["expm", "--input", &input]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("NotHermitian"), "{}", stderr(&out));
}

#[test]
fn malformed_and_missing_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{not json").unwrap();
    let out = projexp(&["expm", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("InvalidJson"));

    let shape = write_matrix(dir.path(), "s.json", "[[1,0],[0]]", "[[0,0],[0,0]]", 2);
    let out = projexp(&["expm", "--input", &shape]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("BadShape"));

    let out = projexp(&[
        "expm",
        "--input",
        dir.path().join("nope.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = projexp(&["expm"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn too_few_samples_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_matrix(dir.path(), "a.json", "[[1,0],[0,-1]]", "[[0,0],[0,0]]", 2);
    let out = projexp(&["expm", "--input", &input, "--samples", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("TooFewSamples"));
}

#[test]
fn reports_are_reproducible_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_matrix(
        dir.path(),
        "h.json",
        "[[0.5,0.2,0],[0.2,-0.1,0.3],[0,0.3,-0.4]]",
        "[[0,0.1,-0.2],[-0.1,0,0],[0.2,0,0]]",
        3,
    );
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = projexp(&[
            "expm",
            "--input",
            &input,
            "--samples",
            "200000",
            "--seed",
            "7",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let mut v = read_json(&p);
        v.as_object_mut().unwrap().remove("timing");
        v["provenance"]["command_line"] = Value::Null;
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run("one.json"), run("two.json"));
}

#[test]
fn verify_moments_passes_for_supported_dimensions() {
    for dim in ["2", "3", "4"] {
        let out = projexp(&["verify-moments", "--dim", dim]);
        assert_eq!(out.status.code(), Some(0), "d={dim}: {}", stderr(&out));
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(r["command"], "verify-moments");
        assert_eq!(r["result"]["passed"], true);
    }
    let out = projexp(&["verify-moments", "--dim", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("BadDimension"));
}

#[test]
fn verify_moments_d3_reports_reduced_forms() {
    let out = projexp(&["verify-moments", "--dim", "3", "--samples", "100000"]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = r["result"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    let cubic = checks.iter().find(|c| c["order"] == 3).unwrap();
    assert_eq!(cubic["reduced"]["Tr(A^2) A"], "1/60");
    assert_eq!(cubic["reduced"]["Tr(A^3) I"], "1/90");
}

#[test]
fn asymptotics_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("asym.json");
    let out = projexp(&[
        "asymptotics",
        "--lambda1",
        "-0.5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = read_json(&out_path);
    assert_eq!(r["command"], "asymptotics");
    let rows = r["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let last = rows.last().unwrap()["ratio"].as_f64().unwrap();
    assert!((last - 1.0).abs() <= 0.10);
    assert!(r["result"]["identity_residual"].as_f64().unwrap() <= 1e-12);

    let csv = fs::read_to_string(dir.path().join("asym.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,computed,predicted,ratio"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn asymptotics_explicit_csv_and_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let out = projexp(&[
        "asymptotics",
        "--lambda1",
        "0",
        "--lambda2",
        "-1",
        "--s",
        "10,30",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 3);
}

#[test]
fn asymptotics_rejects_bad_spectra_and_schedules() {
    let out = projexp(&["asymptotics", "--lambda1", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("BadSpectrum"));

    let out = projexp(&["asymptotics", "--lambda1", "-0.5", "--lambda2", "-0.4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("BadSpectrum"));

    let out = projexp(&["asymptotics", "--lambda1", "-0.5", "--s", "20,10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("NonIncreasingSchedule"));
}

#[test]
fn asymptotics_small_s_is_a_tolerance_failure() {
    let out = projexp(&["asymptotics", "--lambda1", "-0.5", "--s", "0.5,1"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["passed"], false);
}
