//! The binary's exit-status contract, subcommands and output files.

use std::path::Path;
use std::process::{Command, Output};

fn gkvcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkvcs")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const MODEL: &str = r#""model": {"modes": 1, "levels": 1, "omega": [1.0], "epsilon": [0.5], "g_diag": [0.2]}"#;

fn passing() -> String {
    format!(
        r#"{{"name": "small", {MODEL}, "truncation": {{"boson_cutoffs": [20]}},
            "spectrum": {{"variants": ["diag"]}},
            "families": [{{"family": "single-mode", "checks": ["normalization", "continuity"]}}],
            "grids": {{"J": [1]}}}}"#
    )
}

fn too_small_cutoff() -> String {
    format!(
        r#"{{{MODEL}, "truncation": {{"boson_cutoffs": [20]}},
            "families": [{{"family": "single-mode", "checks": ["normalization"], "cutoff": 5}}],
            "grids": {{"J": [4]}}}}"#
    )
}

#[test]
fn exit_status_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let ok = write(dir.path(), "ok.json", &passing());
    let o = gkvcs(&["run", "--config", &ok, "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));

    let bad = write(dir.path(), "fail.json", &too_small_cutoff());
    let o = gkvcs(&["run", "--config", &bad, "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    let summary = std::fs::read_to_string(dir.path().join("out/summary.txt")).unwrap();
    assert!(summary.contains("tail-bound refusal"), "{summary}");

    let invalid = write(dir.path(), "invalid.json", &format!(r#"{{{MODEL}, "truncation": {{"boson_cutoffs": "x"}}}}"#));
    let o = gkvcs(&["run", "--config", &invalid, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("truncation.boson_cutoffs"), "{}", stderr(&o));

    let o = gkvcs(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("usage"));
}

#[test]
fn semantic_errors_are_all_reported() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"model": {"modes": 1, "levels": 1, "omega": [-1.0], "epsilon": [0.5], "g_diag": [0.2]},
                   "truncation": {"boson_cutoffs": [20, 20], "tail_tolerance": -1}}"#;
    let p = write(dir.path(), "c.json", text);
    let o = gkvcs(&["run", "--config", &p, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.lines().filter(|l| l.contains("config error")).count() >= 2, "{err}");
}

#[test]
fn empty_campaign_passes_with_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c.json", &format!(r#"{{{MODEL}, "truncation": {{"boson_cutoffs": [10]}}}}"#));
    let out = dir.path().join("out");
    let o = gkvcs(&["run", "--config", &p, "--out", out.to_str().unwrap(), "--format", "ndjson"]);
    assert_eq!(o.status.code(), Some(0));
    let nd = std::fs::read_to_string(out.join("results.ndjson")).unwrap();
    assert_eq!(nd.lines().count(), 1);
    assert!(nd.contains("\"record\":\"campaign\""));
    assert!(!out.join("results.csv").exists());
}

#[test]
fn strict_counts_report_only_failures() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(r#"{{{MODEL}, "truncation": {{"boson_cutoffs": [10]}}, "moments": {{"Q": 8}}}}"#);
    let p = write(dir.path(), "c.json", &text);
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(gkvcs(&["run", "--config", &p, "--out", out]).status.code(), Some(0));
    assert_eq!(gkvcs(&["run", "--config", &p, "--out", out, "--strict"]).status.code(), Some(1));
}

#[test]
fn spectrum_subcommand_prints_two_columns() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"model": {"modes": 1, "levels": 2, "omega": [1.0], "epsilon": [0.5, 0.9], "g_diag": [0.2, 0.1]},
                   "truncation": {"boson_cutoffs": [30]}, "spectrum": {"variants": ["diag"]}}"#;
    let p = write(dir.path(), "c.json", text);
    let out = dir.path().join("out");
    let o = gkvcs(&["spectrum", "--config", &p, "--variant", "diag", "--sector", "11", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("# diag sector=11"), "{text}");
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("n=")).collect();
    assert_eq!(rows.len(), 15);
    for row in rows {
        let cols: Vec<f64> = row.split_whitespace().skip(1).map(|x| x.parse().unwrap()).collect();
        assert_eq!(cols.len(), 2);
        assert!((cols[0] - cols[1]).abs() < 1e-6);
    }
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("variant,sector,label,analytic,numeric,abs_error\n"));
    assert!(csv.lines().skip(1).all(|l| l.starts_with("diag,11,")));
}

#[test]
fn moments_subcommand_passes() {
    let o = gkvcs(&["moments"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("exponential"));
    assert!(stdout(&o).contains("FAIL (report-only)"));
}

#[test]
fn vcs_verify_filters_families() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        r#"{{{MODEL}, "truncation": {{"boson_cutoffs": [20]}},
            "families": [{{"family": "single-mode", "checks": ["normalization"]}},
                         {{"family": "degenerate-theta", "checks": ["normalization"]}}]}}"#
    );
    let p = write(dir.path(), "c.json", &text);
    let out = dir.path().join("out");
    let o = gkvcs(&["vcs-verify", "--config", &p, "--family", "single-mode", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let nd = std::fs::read_to_string(out.join("results.ndjson")).unwrap();
    assert!(nd.contains("single-mode") && !nd.contains("degenerate"));
    let o = gkvcs(&["vcs-verify", "--config", &p, "--family", "nonesuch", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_configs_give_identical_bundles_and_merge_is_order_stable() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c.json", &passing());
    let q = write(dir.path(), "d.json", &too_small_cutoff());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    gkvcs(&["run", "--config", &p, "--out", a.to_str().unwrap()]);
    gkvcs(&["run", "--config", &p, "--out", b.to_str().unwrap(), "--parallel", "3"]);
    gkvcs(&["run", "--config", &q, "--out", c.to_str().unwrap()]);
    for f in ["results.ndjson", "results.csv", "spectrum.csv", "summary.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let an = a.join("results.ndjson");
    let cn = c.join("results.ndjson");
    let m1 = dir.path().join("m1.ndjson");
    let m2 = dir.path().join("m2.ndjson");
    let s = |p: &Path| p.to_str().unwrap().to_string();
    assert_eq!(gkvcs(&["report-merge", &s(&an), &s(&cn), "--out", &s(&m1)]).status.code(), Some(0));
    assert_eq!(gkvcs(&["report-merge", &s(&cn), &s(&an), "--out", &s(&m2)]).status.code(), Some(0));
    let merged = std::fs::read(&m1).unwrap();
    assert_eq!(merged, std::fs::read(&m2).unwrap());
    let lines = String::from_utf8(merged).unwrap();
    let total = |p: &Path| std::fs::read_to_string(p).unwrap().lines().count();
    assert_eq!(lines.lines().count(), total(&an) + total(&cn));
}
