//! End-to-end tests for the `cwq` binary.
//!
//! Each test invokes the compiled binary in a temporary directory and checks
//! exit codes, artifact layout, and the determinism contract: identical inputs
//! must produce byte-identical CSV output, regardless of the thread count.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cwq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwq"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("read {name}: {e}"))
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "expected exit 0, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn su_basis_writes_generators_and_structure_constants() {
    let tmp = TempDir::new().unwrap();
    let out = cwq(tmp.path(), &["su-basis", "--k", "2", "--convention", "pauli"]);
    assert_success(&out);

    let json: serde_json::Value = serde_json::from_str(&read(tmp.path(), "su_basis.json")).unwrap();
    assert_eq!(json["k"], 2);
    assert_eq!(json["convention"], "pauli");
    assert_eq!(json["dim"], 3);
    assert_eq!(json["generators"].as_array().unwrap().len(), 3);
    let first = &json["generators"][0];
    assert_eq!(first["index"], 1);
    assert_eq!(first["matrix"].as_array().unwrap().len(), 8);
    assert!(!json["structure_constants"].as_array().unwrap().is_empty());

    let manifest: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "su_basis_manifest.json")).unwrap();
    assert_eq!(manifest["subcommand"], "su-basis");
    assert_eq!(manifest["schema_version"], 1);
    assert!(manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .any(|a| a == "su_basis.json"));
}

#[test]
fn membership_classifies_bloch_vectors() {
    let tmp = TempDir::new().unwrap();
    let out = cwq(
        tmp.path(),
        &[
            "membership",
            "--k",
            "2",
            "--convention",
            "pauli",
            "--x",
            "0.6,0.0,0.8",
        ],
    );
    assert_success(&out);
    let json: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "membership.json")).unwrap();
    assert_eq!(json["is_state"], true);
    assert!(json["margin"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn bracket_matches_hand_computed_pauli_bracket() {
    let tmp = TempDir::new().unwrap();
    let out = cwq(
        tmp.path(),
        &[
            "bracket",
            "--k",
            "2",
            "--convention",
            "pauli",
            "--f",
            "x3^2",
            "--g",
            "x1",
        ],
    );
    assert_success(&out);
    assert_eq!(read(tmp.path(), "bracket.txt").trim(), "-4*x2*x3");
}

#[test]
fn quantize_emits_matrix_with_header_sidecar() {
    let tmp = TempDir::new().unwrap();
    let out = cwq(
        tmp.path(),
        &[
            "quantize",
            "--k",
            "2",
            "--N",
            "4",
            "--convention",
            "pauli",
            "--f",
            "x3^2",
            "--emit-matrix",
            "qmat.bin",
        ],
    );
    assert_success(&out);

    let header: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "qmat.bin.json")).unwrap();
    let dim = header["dim"].as_u64().unwrap() as usize;
    assert_eq!(dim, 16);
    assert_eq!(header["layout"], "row-major");

    let bytes = std::fs::read(tmp.path().join("qmat.bin")).unwrap();
    assert_eq!(bytes.len(), dim * dim * 16);

    // Q(x3^2) is Hermitian with real entries; the first diagonal entry is the
    // symbol value on the all-up product state, (N choose 2) pair terms scaled
    // by 1/N^2 plus the 1/N diagonal correction: for N=4 it equals 1.
    let entry = f64::from_le_bytes(bytes[0..8].try_into().unwrap());
    assert!((entry - 1.0).abs() < 1e-12, "corner entry {entry}");
    let imag = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    assert_eq!(imag, 0.0);
}

#[test]
fn cw_ground_reports_energy_gap_and_coefficients() {
    let tmp = TempDir::new().unwrap();
    let out = cwq(tmp.path(), &["cw-ground", "--N", "40", "--csv"]);
    assert_success(&out);

    let json: serde_json::Value = serde_json::from_str(&read(tmp.path(), "cw_ground.json")).unwrap();
    for key in ["N", "J", "B", "energy", "gap", "purified", "c"] {
        assert!(json.get(key).is_some(), "missing key {key}");
    }
    assert_eq!(json["N"], 40);
    assert_eq!(json["J"], 1.0);
    assert_eq!(json["B"], 0.5);
    assert_eq!(json["c"].as_array().unwrap().len(), 41);

    let csv = read(tmp.path(), "cw_ground.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,c"));
    assert_eq!(lines.count(), 41);
}

#[test]
fn combinatorics_class_counts_sum_to_factorial() {
    let tmp = TempDir::new().unwrap();
    let out = cwq(
        tmp.path(),
        &["combinatorics", "--N", "12", "--L", "2", "--M", "3"],
    );
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("sum of class counts 479001600"),
        "stdout: {stdout}"
    );
    assert!(stdout.contains("N! 479001600"), "stdout: {stdout}");

    let csv = read(tmp.path(), "combinatorics.csv");
    assert_eq!(csv.lines().next(), Some("K,count"));
    let total: u128 = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<u128>().unwrap())
        .sum();
    assert_eq!(total, 479_001_600);
}

#[test]
fn table1_rows_match_frozen_values() {
    let tmp = TempDir::new().unwrap();
    let out = cwq(tmp.path(), &["tables", "--which", "1", "--N-list", "10,20"]);
    assert_success(&out);
    let csv = read(tmp.path(), "table1.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,value"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "10");
    let value: f64 = row[1].parse().unwrap();
    assert!(
        (value - 5.9547e-3).abs() < 1e-6,
        "table 1 row N=10 drifted: {value}"
    );
}

#[test]
fn csv_output_is_byte_identical_across_runs_and_thread_counts() {
    let run = |threads: Option<&str>| {
        let tmp = TempDir::new().unwrap();
        let mut args = vec!["tables", "--which", "2", "--N-list", "10,20"];
        if let Some(t) = threads {
            args.extend_from_slice(&["--threads", t]);
        }
        let out = cwq(tmp.path(), &args);
        assert_success(&out);
        read(tmp.path(), "table2.csv")
    };
    let first = run(None);
    let second = run(None);
    let third = run(Some("2"));
    assert_eq!(first, second, "rerun changed the bytes");
    assert_eq!(first, third, "thread count changed the bytes");
}

#[test]
fn dgr_sweep_reports_defects_per_size() {
    let tmp = TempDir::new().unwrap();
    let out = cwq(
        tmp.path(),
        &[
            "dgr-sweep",
            "--f",
            "x3^2",
            "--g",
            "x1",
            "--N-list",
            "4,5,6",
        ],
    );
    assert_success(&out);
    let csv = read(tmp.path(), "dgr_sweep.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,defect"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn unknown_arguments_exit_with_usage_code() {
    let tmp = TempDir::new().unwrap();
    let out = cwq(tmp.path(), &["quantize", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_one_with_json_diagnostic() {
    let tmp = TempDir::new().unwrap();
    let out = cwq(
        tmp.path(),
        &[
            "bracket",
            "--k",
            "3",
            "--convention",
            "pauli",
            "--f",
            "x1",
            "--g",
            "x2",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let diag: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(diag["error"], "dimension");
    assert!(diag["message"].as_str().unwrap().contains("k = 2"));
}

#[test]
fn verify_all_quick_writes_report_and_flags_failures() {
    let tmp = TempDir::new().unwrap();
    let out = cwq(tmp.path(), &["verify-all", "--quick"]);
    // The commutator-defect criterion measures an identically vanishing defect
    // for the shipped quantization map, so its slope clause fails and the
    // verification run exits nonzero by design.
    assert_eq!(out.status.code(), Some(1));

    let report: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "verify_report.json")).unwrap();
    assert_eq!(report["quick"], true);
    assert_eq!(report["all_passed"], false);
    let criteria = report["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 11);
    for c in criteria {
        let index = c["index"].as_u64().unwrap();
        let passed = c["passed"].as_bool().unwrap();
        assert_eq!(
            passed,
            index != 5,
            "criterion {index} unexpected status {passed}"
        );
    }
}
