//! End-to-end tests of the `cvqit` binary: determinism, output formats,
//! exit codes, config-file resolution and golden-file regression.

use std::process::{Command, Output};

fn cvqit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvqit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn same_config_and_seed_give_byte_identical_output() {
    let args = [
        "broadcast",
        "run",
        "--m-states",
        "300",
        "--sigma",
        "0.1",
        "--seed",
        "11",
    ];
    let first = cvqit(&args);
    let second = cvqit(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn csv_output_is_rectangular_with_full_precision() {
    let out = cvqit(&["qkd", "--lambda", "2", "--cx", "1.2", "--cp", "0.8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"efficiency"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), header.len());
    // 17 significant digits: mantissa with 16 fractional digits.
    for cell in &row {
        if !cell.is_empty() && *cell != "inf" && *cell != "-inf" {
            let mantissa = cell.split('e').next().unwrap();
            let frac = mantissa.split('.').nth(1).unwrap();
            assert_eq!(frac.len(), 16, "cell {cell} lacks full precision");
        }
    }
    // The interval and the efficiency are finite for this entangled state.
    let eff: f64 = row[header.iter().position(|c| *c == "efficiency").unwrap()]
        .parse()
        .unwrap();
    assert!(eff > 0.0 && eff < 1.0);
}

#[test]
fn json_output_carries_metadata_and_config_echo() {
    let out = cvqit(&["--format", "json", "core", "--cx", "0.7"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(value["metadata"]["version"].is_string());
    assert_eq!(value["metadata"]["config"]["cx"], 0.7);
    assert_eq!(value["metadata"]["config"]["command"], "core");
    assert!(value["rows"][0].is_array());
}

#[test]
fn usage_errors_exit_with_code_two() {
    // Unknown flag (clap) and invalid enum choice (command validation).
    let bad_flag = cvqit(&["qkd", "--no-such-flag", "1"]);
    assert_eq!(bad_flag.status.code(), Some(2));
    let bad_choice = cvqit(&["broadcast", "run", "--strategy", "bogus"]);
    assert_eq!(bad_choice.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_with_code_one() {
    let out = cvqit(&["qkd", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(&cfg, r#"{"core": {"cx": 0.9, "cp": -0.5}}"#).unwrap();
    let from_file = cvqit(&["--config", cfg.to_str().unwrap(), "core"]);
    assert!(from_file.status.success());
    let overridden = cvqit(&["--config", cfg.to_str().unwrap(), "core", "--cx", "0.2"]);
    assert!(overridden.status.success());
    let row = |o: &Output| stdout(o).lines().nth(1).unwrap().to_string();
    assert!(row(&from_file).contains("9.0000000000000002e-1"));
    assert!(row(&overridden).contains("2.0000000000000001e-1"));
    assert_ne!(row(&from_file), row(&overridden));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let to_file = cvqit(&["core", "--output", path.to_str().unwrap()]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    let to_stdout = cvqit(&["core"]);
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn regress_passes_fresh_and_detects_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let golden = dir.path().to_str().unwrap();
    let name = "broadcast_honest_run";
    let update = cvqit(&[
        "regress",
        "--golden-dir",
        golden,
        "--update",
        "--only",
        name,
    ]);
    assert!(update.status.success(), "{update:?}");
    let fresh = cvqit(&["regress", "--golden-dir", golden, "--only", name]);
    assert!(fresh.status.success());
    assert!(stdout(&fresh).contains("PASS"));

    // Perturb one cell; this table is compared with tolerance zero, so any
    // numeric drift at all must trip the report.
    let path = dir.path().join(format!("{name}.csv"));
    let text = std::fs::read_to_string(&path).unwrap();
    let perturbed = text.replace("2.0000000000000000e3", "2.0000000000000005e3");
    assert_ne!(text, perturbed);
    std::fs::write(&path, perturbed).unwrap();
    let drift = cvqit(&["regress", "--golden-dir", golden, "--only", name]);
    assert_eq!(drift.status.code(), Some(1));
    assert!(stdout(&drift).contains("FAIL"));
}

#[test]
fn unknown_regress_table_is_reported() {
    let drift = cvqit(&["regress", "--only", "no_such_table"]);
    assert!(!drift.status.success());
}
