//! End-to-end tests of the installed binary: JSON shape, reference values,
//! and the exit-code contract (0 success, 1 bad input, 2 failed check).

use std::process::{Command, Output};

fn qlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn theta_e8_reference_row() {
    let out = qlat(&["theta", "--lattice", "E8", "--genus", "1", "--max-trace", "3"]);
    assert!(out.status.success());
    let doc = json_of(&out);
    let counts: Vec<&str> = doc["counts"]
        .as_array()
        .expect("counts row")
        .iter()
        .map(|v| v.as_str().expect("stringified count"))
        .collect();
    assert_eq!(counts, ["1", "240", "2160", "6720"]);
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert!(doc["input"].as_array().is_some(), "input echo present");
}

#[test]
fn disc_of_hyperbolic_plane_is_trivial() {
    let out = qlat(&["disc", "--lattice", "H"]);
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["gamma"], 0);
    assert_eq!(doc["invariant_factors"].as_array().map(Vec::len), Some(0));
}

#[test]
fn modcheck_passes_at_difficult_base_point() {
    let out = qlat(&[
        "modcheck",
        "--lattice",
        "A1",
        "--word",
        "S",
        "--tau",
        "0.3i",
        "--max-trace",
        "24",
    ]);
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["verdict"], "PASS");
}

#[test]
fn repnum_counts_roots() {
    let out = qlat(&["repnum", "--lattice", "E8", "--moment", "1"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["count"], "240");
}

#[test]
fn factorcheck_small_sum_is_exact() {
    let out = qlat(&[
        "factorcheck",
        "--left",
        "A1",
        "--right",
        "A1",
        "--genus",
        "1",
        "--max-trace",
        "3",
    ]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["verdict"], "PASS");
}

#[test]
fn weil_relations_and_word_matrix() {
    let out = qlat(&["weil", "--lattice", "A1", "--word", "STS"]);
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["relations"]["braid"], true);
    assert_eq!(doc["relations"]["s2_flip"], true);
    assert_eq!(doc["matrix_unitary"], true);
    assert_eq!(doc["dim"], 2);
}

#[test]
fn usage_errors_exit_one() {
    // unknown subcommand
    assert_eq!(qlat(&["frobnicate"]).status.code(), Some(1));
    // odd diagonal rejected as bad input, with JSON error payload
    let out = qlat(&["theta", "--lattice", "2,1;1,1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json_of(&out)["error"].as_str().is_some());
    // non-symmetric inline Gram
    let out = qlat(&["disc", "--lattice", "[[2,1],[0,2]]"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn budget_refusal_exits_two() {
    let out = qlat(&[
        "theta",
        "--lattice",
        "E8",
        "--genus",
        "2",
        "--max-trace",
        "12",
        "--budget",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json_of(&out);
    assert!(doc["error"]
        .as_str()
        .expect("error message")
        .contains("budget"));
}

#[test]
fn cycles_roundtrip_through_files() {
    let dir = std::env::temp_dir().join("qlat-cli-test");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let series = dir.join("series.json");
    std::fs::write(
        &series,
        r#"{
            "lattice": "A1",
            "genus": 1,
            "trunc": "2",
            "terms": [
                {"t": [["1"]], "mu": [0], "c": "1"},
                {"t": [["1/4"]], "mu": [1], "c": "3"}
            ]
        }"#,
    )
    .expect("write series");
    let path = series.to_str().expect("utf-8 path");
    let out = qlat(&[
        "cycles",
        "intersect",
        "--series-a",
        path,
        "--series-b",
        path,
        "--trunc",
        "2",
    ]);
    assert!(out.status.success());
    let doc = json_of(&out);
    let terms = doc["series"]["terms"].as_array().expect("terms");
    assert!(!terms.is_empty());
    // all completions of the odd-coset square land in one singular class:
    // 2 from (1/4)x(1/4) at 9 each, plus 4 cross completions at 3 each
    assert!(terms.iter().any(|t| t["c"] == "30"));
    // the identity-moment completion of the integer term survives unmerged
    assert!(terms.iter().any(|t| t["c"] == "1"));

    let out = qlat(&[
        "cycles",
        "pullback",
        "--series",
        path,
        "--lattice",
        "A1",
        "--selfdual",
        "E8",
        "--trunc",
        "2",
    ]);
    // the series is over A1, not A1+E8; the precondition check fails (exit 2)
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn embed_hyperbolic_and_negative_witness() {
    let out = qlat(&["embed", "hyperbolic", "--lattice", "H+A1"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["found"], true);

    let out = qlat(&["embed", "hyperbolic", "--lattice", "0,3;3,0"]);
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["found"], false);
    assert_eq!(doc["min_pairing_content"], 3);
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join("qlat-cli-test");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("disc.json");
    let out = qlat(&[
        "disc",
        "--lattice",
        "A1",
        "--output",
        path.to_str().expect("utf-8 path"),
    ]);
    assert!(out.status.success());
    let from_file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).expect("file written"))
            .expect("file is JSON");
    assert_eq!(from_file, json_of(&out));
}
