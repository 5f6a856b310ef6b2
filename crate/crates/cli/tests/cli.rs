//! End-to-end runs of the `qillum` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn qillum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qillum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = qillum(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .unwrap()
        .iter()
        .map(str::to_owned)
        .collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect();
    (header, rows)
}

#[test]
fn ppt_verdict_for_amplified_source() {
    let v = json(&["ppt", "--ns", "1", "--gain-db", "12"]);
    let eig = v["min_ppt_eigenvalue"].as_f64().unwrap();
    assert!((eig - 0.0857864).abs() < 1e-7, "{eig}");
    assert_eq!(v["verdict"], "NONSEPARABLE");
    let vacuum = json(&["ppt", "--ns", "0", "--gain", "1"]);
    assert_eq!(vacuum["verdict"], "SEPARABLE");
}

#[test]
fn gain_prefactor_figure() {
    let (header, rows) = csv_rows(&stdout(&["figure", "gain-prefactor"]));
    assert_eq!(header, ["gain_db", "prefactor"]);
    assert_eq!(rows.len(), 301);
    assert_eq!(rows[0], ["0", "0"]);
    assert_eq!(rows[300][0], "30");
    let at_15: f64 = rows[150][1].parse().unwrap();
    assert!((at_15 - 0.93682).abs() < 1e-5, "{at_15}");
    let (_, power) = csv_rows(&stdout(&[
        "figure",
        "gain-prefactor",
        "--db-convention",
        "power",
    ]));
    let at_15: f64 = power[150][1].parse().unwrap();
    assert!((at_15 - 0.998).abs() < 1e-3, "{at_15}");
}

#[test]
fn snr_ratio_figure_starts_near_two() {
    let (header, rows) = csv_rows(&stdout(&["figure", "snr-ratio"]));
    assert_eq!(header, ["n_s", "snr_qi", "snr_csh", "ratio", "regime"]);
    assert_eq!(rows[0][0], "0.01");
    assert_eq!(rows.last().unwrap()[0], "100000000");
    let ratio: f64 = rows[0][3].parse().unwrap();
    assert!((ratio - 2.0).abs() <= 0.2, "{ratio}");
    assert_eq!(rows[0][4], "QUANTUM_ADVANTAGE");
    assert_eq!(rows.last().unwrap()[4], "DISADVANTAGE");
}

#[test]
fn report_round_trips_through_its_echo() {
    let args = [
        "report",
        "--ns",
        "0.3",
        "--nb",
        "20",
        "--kappa",
        "0.01",
        "--gain-db",
        "17.5",
        "--modes",
        "5000",
    ];
    let first = stdout(&args);
    let v: Value = serde_json::from_str(&first).unwrap();
    let p = &v["params"];
    let field = |k: &str| p[k].to_string();
    let (ns, nb, kappa, gain, modes) = (
        field("n_s"),
        field("n_b"),
        field("kappa"),
        field("gain"),
        field("modes"),
    );
    let again = stdout(&[
        "report", "--ns", &ns, "--nb", &nb, "--kappa", &kappa, "--gain", &gain, "--modes", &modes,
    ]);
    assert_eq!(first, again);
    let report = &v["report"];
    let p_error = report["p_error"].as_f64().unwrap();
    assert!(p_error > 0.0 && p_error <= 0.5);
    assert_eq!(report["h0"]["mean"].as_f64().unwrap(), 0.0);
}

#[test]
fn sweep_emits_ordered_rows() {
    let text = stdout(&[
        "sweep",
        "--param",
        "n_s",
        "--from",
        "1e-3",
        "--to",
        "1e7",
        "--points",
        "11",
        "--spacing",
        "log",
    ]);
    let (header, rows) = csv_rows(&text);
    assert_eq!(
        header,
        ["value", "snr_qi", "snr_csh", "ratio", "p_error", "regime"]
    );
    assert_eq!(rows.len(), 11);
    let values: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(rows[0][5], "QUANTUM_ADVANTAGE");
    assert_eq!(rows[10][5], "DISADVANTAGE");
    // Plain decimal points, no grouping separators.
    assert!(!text.contains(';') && rows.iter().all(|r| r.len() == 6));

    let gains = stdout(&[
        "sweep", "--param", "gain_db", "--from", "0", "--to", "30", "--points", "4",
    ]);
    let (_, rows) = csv_rows(&gains);
    assert_eq!(rows[0][1], "0");
    let modes = stdout(&[
        "sweep",
        "--param",
        "modes",
        "--from",
        "10",
        "--to",
        "1e6",
        "--points",
        "3",
        "--spacing",
        "log",
        "--format",
        "json",
    ]);
    let modes: Value = serde_json::from_str(&modes).unwrap();
    let p: Vec<f64> = modes
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["p_error"].as_f64().unwrap())
        .collect();
    assert!(p[0] > p[1] && p[1] > p[2], "{p:?}");
}

#[test]
fn exit_codes() {
    assert_eq!(qillum(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        qillum(&["report", "--gain", "2", "--gain-db", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qillum(&[
            "sweep",
            "--param",
            "n_s",
            "--from",
            "0",
            "--to",
            "1",
            "--spacing",
            "log"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        qillum(&["sweep", "--param", "n_s", "--from", "0", "--to", "1", "--points", "1"])
            .status
            .code(),
        Some(2)
    );
    let bad = qillum(&["report", "--kappa", "1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("kappa"));
    assert_eq!(qillum(&["report", "--gain", "0.5"]).status.code(), Some(1));
    assert_eq!(
        qillum(&["report", "--nb", "0", "--ns", "0", "--kappa", "0", "--gain", "1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ppt.csv");
    let to_file = qillum(&["ppt", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        stdout(&["ppt", "--format", "csv"])
    );
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate", "--ns", "0.1", "--nb", "1", "--kappa", "0.05", "--modes", "1000", "--trials",
        "200000", "--seed", "3",
    ];
    let first = stdout(&args);
    assert_eq!(first, stdout(&args));
    let v: Value = serde_json::from_str(&first).unwrap();
    assert!(v["z_score"].as_f64().unwrap().abs() < 5.0);
    assert_eq!(v["estimate"]["trials"], 200000);
}

#[test]
fn validate_single_point() {
    let v = json(&[
        "validate", "--point", "--ns", "0.1", "--nb", "0.5", "--kappa", "0.1", "--gain", "2",
        "--dim", "24",
    ]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["hypothesis"], "ABSENT");
    assert!(v["max_relative_deviation"].as_f64().unwrap() < 1e-3);
}
