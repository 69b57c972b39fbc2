use std::path::{Path, PathBuf};
use std::process::Command;

use docalc_cli::{execute, Outcome};
use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fx(rel: &str) -> String {
    fixtures().join(rel).display().to_string()
}

fn run(args: &[&str]) -> Outcome {
    execute(std::iter::once("docalc").chain(args.iter().copied()))
}

fn schema() -> jsonschema::JSONSchema {
    let text = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json"),
    )
    .unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&value).unwrap()
}

#[test]
fn front_door_text_output() {
    let out = run(&["run", &fx("examples/front-door.scenario")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("identifiable: TRUE"));
    assert!(out
        .stdout
        .contains("formula: [sum_{Z} [p(Z|X)*p(Y|do(Z))]]"));
}

#[test]
fn negative_cell_exits_one() {
    let out = run(&["run", &fx("table1/r5-a.scenario")]);
    assert_eq!(out.code, 1);
    assert!(out
        .stdout
        .contains("identifiable: FALSE (not identifiable by rule closure)"));
}

#[test]
fn term_limit_is_inconclusive() {
    let out = run(&[
        "run",
        &fx("examples/salt-intake.scenario"),
        "--limits",
        "terms=5",
        "--json",
    ]);
    assert_eq!(out.code, 2);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["status"], "inconclusive");
    assert_eq!(v["limit"], "terms");
    assert!(schema().is_valid(&v));
}

#[test]
fn json_reports_match_schema() {
    let schema = schema();
    for (file, extra) in [
        ("examples/front-door.scenario", vec!["--verify", "seed=1"]),
        ("examples/salt-intake.scenario", vec![]),
        ("table1/r2-b.scenario", vec![]),
        ("fig4/b-r3.scenario", vec!["--verify", "seed=2"]),
    ] {
        let path = fx(file);
        let mut args = vec!["run", path.as_str(), "--json"];
        args.extend(extra);
        let out = run(&args);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        if let Err(errors) = schema.validate(&v) {
            let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
            panic!("{file}: {msgs:?}");
        };
    }
}

#[test]
fn trace_ends_at_query() {
    let out = run(&["run", &fx("examples/front-door.scenario"), "--json"]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    let trace = v["trace"].as_array().unwrap();
    assert_eq!(trace.last().unwrap()["produced"], "P(Y|do(X))");
    assert_eq!(trace.iter().filter(|s| s["rule"] == "input").count(), 2);
}

#[test]
fn injected_chain_formula_is_caught_on_xor_model() {
    let out = run(&[
        "verify",
        &fx("examples/xor-chain.scenario"),
        "--scm",
        &fx("models/xor.json"),
        "--inject-formula",
        &fx("formulas/chain.formula"),
        "--json",
    ]);
    assert_eq!(out.code, 70, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    let diff = v["verification"]["max_abs_diff"].as_f64().unwrap();
    assert!((diff - 0.5).abs() < 1e-12, "{diff}");
    assert_eq!(v["verification"]["passed"], false);
}

#[test]
fn reference_salt_formula_verifies() {
    let out = run(&[
        "verify",
        &fx("examples/salt-intake.scenario"),
        "--seed",
        "11",
        "--inject-formula",
        &fx("formulas/salt-reference.formula"),
    ]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("PASS"));
}

#[test]
fn batch_grids_have_no_mismatches() {
    for m in ["table1.toml", "fig4.toml", "examples.toml"] {
        let out = run(&["batch", &fx(m)]);
        assert_eq!(out.code, 0, "{m}\n{}{}", out.stdout, out.stderr);
        assert!(out.stdout.contains(", 0 mismatches"));
    }
}

#[test]
fn batch_reports_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.toml");
    let scenario = fx("table1/r5-a.scenario");
    std::fs::write(
        &manifest,
        format!("title = \"t\"\n[[cell]]\nrow = \"5\"\ncolumn = \"a\"\nfile = {scenario:?}\nexpect = \"identifiable\"\n"),
    )
    .unwrap();
    let out = run(&["batch", manifest.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("1 mismatches"));
    assert!(out.stdout.contains("✗!"));
}

#[test]
fn exported_fixtures_match_repository_copy() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["export-fixtures", dir.path().to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let mut count = 0;
    for entry in walkdir::WalkDir::new(dir.path()) {
        let entry = entry.unwrap();
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(dir.path()).unwrap();
        let fresh = std::fs::read_to_string(entry.path()).unwrap();
        let shipped = std::fs::read_to_string(fixtures().join(rel))
            .unwrap_or_else(|_| panic!("{} missing from fixtures/", rel.display()));
        assert_eq!(
            fresh,
            shipped,
            "{} drifted; rerun export-fixtures",
            rel.display()
        );
        count += 1;
    }
    assert_eq!(count, 78);
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(run(&["frobnicate"]).code, 64);
    assert_eq!(run(&["run"]).code, 64);
    assert_eq!(run(&["run", "x", "--limits", "terms=abc"]).code, 64);
    assert_eq!(
        run(&["verify", &fx("examples/front-door.scenario")]).code,
        64
    );
    assert_eq!(run(&["run", "/nonexistent/file.scenario"]).code, 66);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scenario");
    std::fs::write(&bad, "[graph]\nX -> Y\n[data]\nP(Q)\n[query]\nP(Y|do(X))\n").unwrap();
    let out = run(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.code, 65);
    assert!(out.stderr.starts_with("error:"));
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_docalc");
    let ok = Command::new(bin)
        .args(["run", &fx("examples/front-door.scenario")])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("identifiable: TRUE"));
    let no = Command::new(bin)
        .args(["run", &fx("examples/xor-chain.scenario")])
        .output()
        .unwrap();
    assert_eq!(no.status.code(), Some(1));
}
