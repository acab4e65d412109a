//! Behavioral tests for the command-line interface: exit codes, diagnostics
//! routing, artifact writing, and the verify/metrics commands.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/illustrative")
}

fn liveplan() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liveplan"))
}

fn copy_fixture(target: &Path) {
    std::fs::create_dir_all(target).unwrap();
    for entry in std::fs::read_dir(fixture_dir()).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), target.join(entry.file_name())).unwrap();
    }
}

fn patch_json(path: &Path, patch: impl FnOnce(&mut serde_json::Value)) {
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    patch(&mut doc);
    std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
}

fn generate(bundle: &Path, out: &Path) -> Output {
    liveplan()
        .args(["generate", "--input"])
        .arg(bundle)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn generate_writes_plan_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("artifacts/plan.json");
    let output = generate(&fixture_dir(), &out);
    assert_eq!(output.status.code(), Some(0));
    // Artifacts to files, nothing on stdout.
    assert!(output.stdout.is_empty());
    assert!(out.exists());
    assert!(dir.path().join("artifacts/metrics.json").exists());
}

#[test]
fn unresolved_ci_reference_exits_one_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle");
    copy_fixture(&bundle);
    patch_json(&bundle.join("testsuite.json"), |doc| {
        doc["items"][0]["call_paths"] = serde_json::json!([["CI99"]]);
    });
    let output = generate(&bundle, &dir.path().join("plan.json"));
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("CI99"), "stderr: {stderr}");
}

#[test]
fn precedence_cycle_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle");
    copy_fixture(&bundle);
    patch_json(&bundle.join("testsuite.json"), |doc| {
        doc["precedence"] = serde_json::json!([
            { "leading": "TC1", "following": "TC2" },
            { "leading": "TC2", "following": "TC1" }
        ]);
    });
    let output = generate(&bundle, &dir.path().join("plan.json"));
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("precedence cycle"), "stderr: {stderr}");
}

#[test]
fn unsatisfiable_budgets_exit_two_naming_the_ci() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle");
    copy_fixture(&bundle);
    // Make CI5 hopeless: risk, snapshot slower than every dependent's
    // tolerance (kills rolling and small flip), isolation sum above every
    // budget of its SIs (kills big flip).
    patch_json(&bundle.join("system.json"), |doc| {
        let cis = doc["configured_instances"].as_array_mut().unwrap();
        let ci5 = cis.iter_mut().find(|c| c["id"] == "CI5").unwrap();
        ci5["interference_risk"] = serde_json::json!(true);
    });
    patch_json(&bundle.join("isolation.json"), |doc| {
        let rows = doc["entries"].as_array_mut().unwrap();
        let ci5 = rows.iter_mut().find(|r| r["ci"] == "CI5").unwrap();
        ci5["risk"] = serde_json::json!(true);
        ci5["snapshot_seconds"] = serde_json::json!(50.0);
        ci5["clone_seconds"] = serde_json::json!(50.0);
        ci5["relocation_seconds"] = serde_json::json!(50.0);
    });
    patch_json(&bundle.join("outage.json"), |doc| {
        for row in doc["acceptable_outages"].as_array_mut().unwrap() {
            if row["service_instance"].as_str().unwrap().starts_with("CI5") {
                row["seconds"] = serde_json::json!(5.0);
            }
        }
    });
    let output = generate(&bundle, &dir.path().join("plan.json"));
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("no safe test method"), "stderr: {stderr}");
    assert!(stderr.contains("CI5"), "stderr: {stderr}");
}

#[test]
fn empty_test_suite_yields_an_empty_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle");
    copy_fixture(&bundle);
    patch_json(&bundle.join("testsuite.json"), |doc| {
        doc["items"] = serde_json::json!([]);
        doc["precedence"] = serde_json::json!([]);
    });
    let out = dir.path().join("plan.json");
    let output = generate(&bundle, &out);
    assert_eq!(output.status.code(), Some(0));
    let plan = liveplan_cli::parse_plan(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(plan.schedule.is_empty());
}

#[test]
fn verify_passes_on_generated_plan_and_flags_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    assert_eq!(generate(&fixture_dir(), &out).status.code(), Some(0));

    let verify = liveplan()
        .args(["verify", "--input"])
        .arg(fixture_dir())
        .arg("--plan")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(verify.status.code(), Some(0));
    let report = String::from_utf8_lossy(&verify.stdout);
    for claim in [
        "coverage-completeness: PASS",
        "merging-minimality: PASS",
        "precedence: PASS",
        "ordering-optimality: PASS",
        "simulation: PASS",
    ] {
        assert!(report.contains(claim), "missing `{claim}` in:\n{report}");
    }

    // Duplicate a run: invoke the same application twice in one case.
    let mut plan = liveplan_cli::parse_plan(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let first = plan.schedule[0].main[0].clone();
    plan.schedule[0].main.push(first);
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, liveplan_cli::serialize_plan(&plan)).unwrap();

    let verify = liveplan()
        .args(["verify", "--input"])
        .arg(fixture_dir())
        .arg("--plan")
        .arg(&tampered)
        .output()
        .unwrap();
    assert_eq!(verify.status.code(), Some(1));
    let report = String::from_utf8_lossy(&verify.stdout);
    assert!(
        report.contains("duplicate run"),
        "expected a duplicate-run failure in:\n{report}"
    );
}

#[test]
fn parse_error_mentions_the_missing_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    assert_eq!(generate(&fixture_dir(), &out).status.code(), Some(0));

    patch_json(&out, |doc| {
        doc["schedule"][0]
            .as_object_mut()
            .unwrap()
            .remove("teardown");
    });
    let metrics = liveplan()
        .args(["metrics", "--plan"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(metrics.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&metrics.stderr);
    assert!(stderr.contains("teardown"), "stderr: {stderr}");
}

#[test]
fn metrics_reports_rolling_relocations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    assert_eq!(generate(&fixture_dir(), &out).status.code(), Some(0));

    let metrics = liveplan()
        .args(["metrics", "--plan"])
        .arg(&out)
        .arg("--input")
        .arg(fixture_dir())
        .args(["--format", "json"])
        .output()
        .unwrap();
    assert_eq!(metrics.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&metrics.stdout).unwrap();
    // CI5 rolls in two groupings of two cases each: entry plus one
    // transition per grouping.
    assert_eq!(doc["per_ci"]["CI5"]["relocations"], 4);
    assert_eq!(doc["budget_violations"].as_array().unwrap().len(), 0);
    assert!(doc["estimated_wall_seconds"].as_f64().unwrap() > 0.0);

    // The text format renders the same numbers.
    let text = liveplan()
        .args(["metrics", "--plan"])
        .arg(&out)
        .arg("--input")
        .arg(fixture_dir())
        .output()
        .unwrap();
    assert_eq!(text.status.code(), Some(0));
    let rendered = String::from_utf8_lossy(&text.stdout);
    assert!(rendered.contains("CI5"), "{rendered}");
    assert!(rendered.contains("estimated wall time"), "{rendered}");
}

#[test]
fn seed_flag_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let status = liveplan()
            .args(["generate", "--input"])
            .arg(fixture_dir())
            .arg("--out")
            .arg(path)
            .args(["--seed", "42"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
