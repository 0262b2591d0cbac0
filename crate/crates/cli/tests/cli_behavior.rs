//! Black-box tests of the binary: formats, exit codes, manifests, replay.

use std::path::Path;
use std::process::{Command, Output};

fn opident(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opident"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn monomials_text_listing() {
    let out = opident(&[
        "monomials",
        "--arity",
        "3",
        "--degree",
        "3",
        "--multiplicity",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 20);
    assert!(text.lines().next().unwrap().contains("L(L(L(***)))"));
}

#[test]
fn monomials_trivial_case() {
    let out = opident(&["monomials", "--degree", "1", "--multiplicity", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    assert!(text.contains('*'));
}

#[test]
fn monomials_binary_arity() {
    let out = opident(&[
        "monomials",
        "--arity",
        "2",
        "--degree",
        "3",
        "--multiplicity",
        "1",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 6);
}

#[test]
fn invalid_parameters_exit_with_usage_error() {
    // degree 4 is not congruent to 1 mod 2 for a ternary product
    let out = opident(&["monomials", "--degree", "4", "--multiplicity", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    let out = opident(&["monomials", "--degree", "3"]);
    assert_eq!(out.status.code(), Some(1), "missing required flag");

    let out = opident(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = opident(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn monomials_csv_and_json_formats() {
    let out = opident(&[
        "monomials",
        "--degree",
        "3",
        "--multiplicity",
        "1",
        "--format",
        "csv",
    ]);
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "index,monomial,dyck");
    assert_eq!(text.lines().count(), 5);

    let out = opident(&[
        "monomials",
        "--degree",
        "3",
        "--multiplicity",
        "1",
        "--format",
        "json",
    ]);
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 4);
    assert_eq!(rows[0]["monomial"], "L(***)");
    assert_eq!(rows[0]["dyck"], "(()()())");
}

#[test]
fn narayana_csv_row() {
    let out = opident(&["narayana", "--max-weight", "4", "--format", "csv"]);
    assert!(stdout(&out).lines().any(|l| l == "4,2,42"));
}

#[test]
fn matrix_symbolic_dimensions() {
    let out = opident(&[
        "matrix",
        "--degree",
        "3",
        "--multiplicity",
        "2",
        "--format",
        "csv",
    ]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 42);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 140);
}

#[test]
fn matrix_rejects_zero_vector() {
    let out = opident(&[
        "matrix",
        "--degree",
        "3",
        "--multiplicity",
        "1",
        "--mode",
        "vector",
        "--vector",
        "0,0,0,0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn matrix_vector_mode_places_coefficients() {
    let out = opident(&[
        "matrix",
        "--degree",
        "3",
        "--multiplicity",
        "1",
        "--mode",
        "vector",
        "--vector",
        "1,-1,0,2",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let dump: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(dump["cols"], 42);
    let entries = dump["entries"].as_array().unwrap();
    assert!(entries.iter().all(|e| e["value"] != "0"));
    assert!(entries.iter().any(|e| e["value"] == "-1"));
}

#[test]
fn small_search_with_custom_coefficient_set() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("solutions.csv");
    let out = opident(&[
        "search",
        "--degree",
        "3",
        "--multiplicity",
        "1",
        "--coeff-set",
        "0,1",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&output).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "a1,a2,a3,a4,rank_mod,rank_rational"
    );
    // manifest exists and checksums the primary output
    let manifest_path = dir.path().join("solutions.csv.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["command"], "search");
    let recorded = manifest["outputs"][0]["sha256"].as_str().unwrap();
    let actual = {
        use sha2::Digest;
        hex::encode(sha2::Sha256::digest(text.as_bytes()))
    };
    assert_eq!(recorded, actual);
}

#[test]
fn search_runs_are_replayable_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (path, threads) in [(&a, "1"), (&b, "2")] {
        let out = opident(&[
            "search",
            "--degree",
            "3",
            "--multiplicity",
            "1",
            "--threads",
            threads,
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn search_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("solutions.json");
    let out = opident(&[
        "search",
        "--degree",
        "3",
        "--multiplicity",
        "1",
        "--format",
        "json",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let records: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 41);
    assert_eq!(records[0]["prime_used"], 1009);
}

fn write_corpus(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("corpus.csv");
    std::fs::write(&path, opident_core::families::builtin::SOLUTIONS_DEG3_MULT1).unwrap();
    path
}

#[test]
fn classify_shipped_corpus_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let out = opident(&["classify", "--solutions", corpus.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("unmatched: 0"));
}

#[test]
fn classify_empty_solution_file_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "a1,a2,a3,a4,rank_mod,rank_rational\n").unwrap();
    let out = opident(&["classify", "--solutions", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn classify_with_bogus_row_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tampered.csv");
    let mut text = opident_core::families::builtin::SOLUTIONS_DEG3_MULT1.to_string();
    // a vector outside every family: mutate one entry of a corpus solution
    text.push_str("1,2,2,1,27,27\n");
    std::fs::write(&path, text).unwrap();
    let out = opident(&["classify", "--solutions", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("classification gap"));
}

#[test]
fn classify_malformed_templates_error_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let templates = dir.path().join("bad.jsonl");
    std::fs::write(
        &templates,
        "{\"label\": \"ok\", \"entries\": [\"1\",\"0\",\"0\",\"a4\"], \"generic_rank\": 32}\nnot json\n",
    )
    .unwrap();
    let out = opident(&[
        "classify",
        "--solutions",
        corpus.to_str().unwrap(),
        "--templates",
        templates.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn stdout_runs_are_deterministic() {
    let first = stdout(&opident(&[
        "matrix",
        "--degree",
        "3",
        "--multiplicity",
        "1",
    ]));
    let second = stdout(&opident(&[
        "matrix",
        "--degree",
        "3",
        "--multiplicity",
        "1",
    ]));
    assert_eq!(first, second);
}
