//! CLI contract: exit statuses, error messages, and output formats.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sectors")
}

fn data(file: &str) -> String {
    format!("{}/../../data/{file}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn analyze_s3_exits_zero() {
    let out = Command::new(bin())
        .args(["analyze", "--group", &data("s3.json"), "--subgroup", "Z3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"all_pass\": true"));
}

#[test]
fn analyze_whole_group_is_unbroken() {
    // Z4 against itself: the equivariant algebra is the field itself.
    let out = Command::new(bin())
        .args([
            "analyze",
            "--group",
            &data("z4.json"),
            "--subgroup",
            "Z2",
            "--format",
            "text",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("symmetry (full group):   broken"));
    assert!(text.contains("symmetry (subgroup):     unbroken"));
}

#[test]
fn malformed_table_exits_one_with_associativity_message() {
    // A latin square with identity that fails associativity.
    let doc = r#"{
        "name": "loop5",
        "order": 5,
        "mult_table": [
            [0, 1, 2, 3, 4],
            [1, 0, 3, 4, 2],
            [2, 4, 0, 1, 3],
            [3, 2, 4, 0, 1],
            [4, 3, 1, 2, 0]
        ],
        "subgroups": { "e": [0] }
    }"#;
    let path = std::env::temp_dir().join("sectors_loop5.json");
    std::fs::write(&path, doc).unwrap();
    let out = Command::new(bin())
        .args(["analyze", "--group", path.to_str().unwrap(), "--subgroup", "e"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("associativity fails at triple"),
        "stderr: {err}"
    );
}

#[test]
fn unknown_subgroup_exits_one() {
    let out = Command::new(bin())
        .args(["analyze", "--group", &data("s3.json"), "--subgroup", "Z5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_file_exits_one() {
    let out = Command::new(bin())
        .args(["analyze", "--group", "/nonexistent.json", "--subgroup", "Z3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn measure_qubit_exits_zero() {
    let out = Command::new(bin())
        .args(["measure", "--scenario", &data("qubit_measurement.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"pass\": true"));
}

#[test]
fn identity_coupling_fails_scheme_and_exits_two() {
    let out = Command::new(bin())
        .args([
            "measure",
            "--scenario",
            &data("identity_coupling.json"),
            "--format",
            "text",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("scheme check: FAIL"));
}

#[test]
fn decoherence_scenario_reaches_target() {
    let out = Command::new(bin())
        .args([
            "measure",
            "--scenario",
            &data("decoherence_preparation.json"),
            "--format",
            "text",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("reached at step 1"));
}

#[test]
fn unreachable_scenario_reports_not_reached_but_passes() {
    let out = Command::new(bin())
        .args([
            "measure",
            "--scenario",
            &data("unreachable_target.json"),
            "--format",
            "text",
        ])
        .output()
        .unwrap();
    // Not-reached is a result, not a verification failure.
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("not reached"));
}

#[test]
fn out_file_is_written() {
    let path = std::env::temp_dir().join("sectors_out.json");
    let _ = std::fs::remove_file(&path);
    let out = Command::new(bin())
        .args([
            "measure",
            "--scenario",
            &data("qubit_measurement.json"),
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.contains("\"scheme_check\""));
}
