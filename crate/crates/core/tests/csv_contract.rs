//! The CSV files the plotting scripts read: header row, metadata lines,
//! column sets and row layout for each figure kind.

use std::process::{Command, Output};

use isingring::sweep::SweepResult;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isingring"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv(args: &[&str]) -> (String, SweepResult) {
    let out = cli(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed = SweepResult::from_csv(&text).unwrap();
    (text, parsed)
}

fn assert_layout(text: &str, header: &str) {
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let mut meta = 0;
    let first_data = loop {
        let line = lines.next().unwrap();
        if line.starts_with("# ") {
            meta += 1;
        } else {
            break line;
        }
    };
    assert!(meta >= 3, "metadata lines: {meta}");
    assert_eq!(first_data, header);
    assert!(text.starts_with("# tool: isingring "));
}

#[test]
fn spectrum_lines() {
    let (text, r) = csv(&["spectrum", "-n", "3", "--lambda-min", "0", "--lambda-max", "3", "--lambda-steps", "31"]);
    assert_layout(&text, "lambda,level,energy");
    assert_eq!(r.rows.len(), 8 * 31);
    for chunk in r.rows.chunks(8) {
        let l = chunk[0][0].as_f64();
        assert!(chunk.iter().all(|row| row[0].as_f64() == l));
        assert!(chunk.windows(2).all(|w| w[0][2].as_f64() <= w[1][2].as_f64()));
        let levels: Vec<f64> = chunk.iter().map(|row| row[1].as_f64()).collect();
        assert_eq!(levels, (0..8).map(|k| k as f64).collect::<Vec<_>>());
    }
    assert_eq!(r.meta("num_qubits"), Some("3"));
    assert_eq!(r.meta("lambda_grid"), Some("linspace(0, 3, 31)"));
}

#[test]
fn measure_vs_lambda() {
    let (text, r) = csv(&["ground-entanglement", "-n", "3", "--lambda-steps", "11"]);
    assert_layout(&text, "lambda,i,j,concurrence");
    assert_eq!(r.rows.len(), 11);
    let (text, r) = csv(&["ground-entanglement", "-n", "3", "--measure", "tangle", "--qubit", "1", "--lambda-steps", "11"]);
    assert_layout(&text, "lambda,qubit,tangle");
    assert_eq!(r.rows.len(), 11);
    let (text, r) = csv(&["ground-entanglement", "-n", "3", "--measure", "three-tangle", "--lambda-steps", "11"]);
    assert_layout(&text, "lambda,three_tangle");
    assert_eq!(r.rows.len(), 11);
    assert!(r.column("three_tangle").unwrap().iter().all(|t| (-1e-9..=1.0).contains(t)));
}

#[test]
fn thermal_heatmap() {
    let (text, r) = csv(&["thermal", "-n", "3", "--lambda-steps", "5", "--temp-steps", "4"]);
    assert_layout(&text, "lambda,temperature,concurrence");
    assert_eq!(r.rows.len(), 20);
    // lambda-major, temperature varies fastest
    let l = r.column("lambda").unwrap();
    let t = r.column("temperature").unwrap();
    assert!(l[..4].iter().all(|&x| x == l[0]) && l[4] > l[0]);
    assert_eq!(t[..4], t[4..8]);
    assert_eq!(r.meta("pair"), Some("1,2"));
}

#[test]
fn distance_fan() {
    let (text, r) = csv(&["ground-entanglement", "-n", "7", "--distances", "--lambda-steps", "6"]);
    assert_layout(&text, "lambda,i,j,concurrence");
    assert_eq!(r.rows.len(), 6 * 3);
    let j = r.column("j").unwrap();
    assert_eq!(j[..3], [2.0, 3.0, 4.0]);
    assert!(r.column("i").unwrap().iter().all(|&i| i == 1.0));
}

#[test]
fn json_mirrors_csv() {
    let (_, from_csv) = csv(&["spectrum", "-n", "2", "--lambda-steps", "3"]);
    let out = cli(&["spectrum", "-n", "2", "--lambda-steps", "3", "--format", "json"]);
    assert!(out.status.success());
    let from_json: SweepResult = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(from_json, from_csv);
}

#[test]
fn errors_leave_no_file() {
    let dir = std::env::temp_dir().join(format!("isingring-contract-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("never.csv");
    let out = cli(&["spectrum", "-n", "20", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!path.exists());
    let out = cli(&["thermal", "-n", "3", "--temp-min", "-0.5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!path.exists());
    let out = cli(&["xstate-verify", "-n", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!path.exists());
    std::fs::remove_dir_all(&dir).unwrap();
}
