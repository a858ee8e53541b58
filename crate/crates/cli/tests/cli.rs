use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use treemoments::limits::ConvergenceRow;
use treemoments_cli::commands::{CppRow, ModelCheckRow, MomentRecord, SimulationRow, SurvivalRow, VerifyRow};
use treemoments_cli::output::{read_csv, read_json};

const BINARY_GW: &str = r#"{"types": ["A"], "offspring": {"A": [
    {"prob": 0.5, "children": []}, {"prob": 0.5, "children": ["A", "A"]}]}}"#;

const SUBCRITICAL: &str = r#"{"types": ["A"], "offspring": {"A": [
    {"prob": 0.75, "children": []}, {"prob": 0.25, "children": ["A", "A"]}]}}"#;

const REDUCIBLE: &str = r#"{"types": ["A", "B"], "offspring": {
    "A": [{"prob": 0.5, "children": []}, {"prob": 0.5, "children": ["A", "B"]}],
    "B": [{"prob": 0.5, "children": []}, {"prob": 0.5, "children": ["B", "B"]}]}}"#;

const TWO_TYPE: &str = r#"{"types": ["A", "B"], "offspring": {
    "A": [{"prob": 0.5, "children": []}, {"prob": 0.5, "children": ["A", "B"]}],
    "B": [{"prob": 0.5, "children": []}, {"prob": 0.5, "children": ["A", "B"]}]}}"#;

/// A scratch directory holding `model.json` and `config.json`.
struct Setup {
    dir: TempDir,
}

impl Setup {
    fn new(model: &str, config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("model.json"), model).unwrap();
        fs::write(dir.path().join("config.json"), config).unwrap();
        Setup { dir }
    }

    fn with_model(model: &str) -> Self {
        Self::new(model, r#"{"model": "model.json"}"#)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_treemoments"))
            .args(args)
            .arg("--config")
            .arg(self.path("config.json"))
            .output()
            .unwrap()
    }

    /// Runs with `--out <name>` and returns the exit code.
    fn run_to(&self, args: &[&str], name: &str) -> i32 {
        let mut all = args.to_vec();
        let out = self.path(name);
        let out = out.to_str().unwrap();
        all.extend(["--out", out]);
        let o = self.run(&all);
        o.status.code().unwrap()
    }
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .expect("a JSON error line");
    serde_json::from_str(line).unwrap()
}

fn csv_rows<R: serde::de::DeserializeOwned>(path: &Path) -> Vec<R> {
    read_csv::<R>(path).unwrap().1
}

#[test]
fn model_check_binary_gw() {
    let s = Setup::with_model(BINARY_GW);
    assert_eq!(s.run_to(&["model-check"], "out.csv"), 0);
    let rows: Vec<ModelCheckRow> = csv_rows(&s.path("out.csv"));
    assert_eq!(rows.len(), 1);
    assert!((rows[0].perron - 1.0).abs() < 1e-12);
    assert!((rows[0].sigma2 - 1.0).abs() < 1e-12);
    assert!(rows[0].critical);
}

#[test]
fn model_check_subcritical_exits_2() {
    let s = Setup::with_model(SUBCRITICAL);
    assert_eq!(s.run_to(&["model-check", "--format", "json"], "out.json"), 2);
    let (_, summary, _) = read_json::<ModelCheckRow>(&s.path("out.json")).unwrap();
    assert!((summary["perron"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(summary["critical"], Value::Bool(false));
}

#[test]
fn model_check_reducible_is_diagnosed() {
    let s = Setup::with_model(REDUCIBLE);
    let o = s.run(&["model-check"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"]["kind"], "reducible");
    assert!(e["error"]["message"].as_str().unwrap().contains("cannot reach"));
}

#[test]
fn malformed_model_gives_json_error() {
    let s = Setup::with_model(r#"{"types": ["A"], "offspring": {"A": [{"prob": 0.5}"#);
    let o = s.run(&["model-check"]);
    assert_ne!(o.status.code(), Some(0));
    assert_eq!(stderr_json(&o)["error"]["kind"], "model");

    let s = Setup::with_model(r#"{"types": ["A"], "offspring": {"A": [{"prob": 0.5, "children": ["Z"]}]}}"#);
    let o = s.run(&["model-check"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr_json(&o)["error"]["message"].is_string());
}

#[test]
fn unknown_config_key_is_rejected() {
    let s = Setup::new(
        BINARY_GW,
        r#"{"model": "model.json", "survival": {"n_grid": [10]}, "sede": 3}"#,
    );
    let o = s.run(&["survival"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["error"]["kind"], "config");
    assert!(e["error"]["message"].as_str().unwrap().contains("sede"));
}

#[test]
fn survival_matches_kolmogorov() {
    let s = Setup::new(
        BINARY_GW,
        r#"{"model": "model.json", "survival": {"n_grid": [10, 100, 10000]}}"#,
    );
    assert_eq!(s.run_to(&["survival"], "out.csv"), 0);
    let rows: Vec<SurvivalRow> = csv_rows(&s.path("out.csv"));
    let last = rows.last().unwrap();
    assert_eq!(last.n, 10_000);
    assert!((last.scaled - 2.0).abs() <= 0.05, "{last:?}");
    assert_eq!(last.limit, Some(2.0));
}

#[test]
fn convergence_first_moment() {
    let s = Setup::new(
        BINARY_GW,
        r#"{"model": "model.json", "convergence": {"k": 1, "n_grid": [100], "paths": ["rescaled"]}}"#,
    );
    assert_eq!(s.run_to(&["convergence"], "out.csv"), 0);
    let rows: Vec<ConvergenceRow> = csv_rows(&s.path("out.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].n, 100);
    assert!(rows[0].rel_error.unwrap() <= 0.02, "{:?}", rows[0]);
}

#[test]
fn cpp_first_moment() {
    let s = Setup::new(
        BINARY_GW,
        r#"{"model": "model.json", "cpp": {"k": [1], "samples": 50000}}"#,
    );
    assert_eq!(s.run_to(&["cpp", "--seed", "11"], "out.csv"), 0);
    let rows: Vec<CppRow> = csv_rows(&s.path("out.csv"));
    let r = &rows[0];
    // Closed form Σ²/2 with Σ² = 1.
    assert_eq!(r.formula, 0.5);
    assert!((r.mc - 0.5).abs() <= 3.0 * r.stderr, "{r:?}");
}

#[test]
fn verify_m2f_passes_on_two_types() {
    let s = Setup::new(
        TWO_TYPE,
        r#"{"model": "model.json", "verify_m2f": {"k": [1, 2, 3], "radius": [1, 2]}}"#,
    );
    assert_eq!(s.run_to(&["verify-m2f"], "out.csv"), 0);
    let rows: Vec<VerifyRow> = csv_rows(&s.path("out.csv"));
    // k × radius × ψ × x0.
    assert_eq!(rows.len(), 3 * 2 * 2 * 2);
    assert!(rows.iter().all(|r| r.status == "pass" && r.max_abs_diff <= 1e-9));
}

#[test]
fn verify_m2f_marks_capped_cells() {
    let s = Setup::new(
        BINARY_GW,
        r#"{"model": "model.json", "verify_m2f": {"k": [2], "radius": [3], "psi": ["unit"], "outcome_cap": 2}}"#,
    );
    assert_eq!(s.run_to(&["verify-m2f"], "out.csv"), 0);
    let rows: Vec<VerifyRow> = csv_rows(&s.path("out.csv"));
    assert_eq!(rows[0].status, "skipped");
    assert_eq!(rows[0].bruteforce, None);
}

#[test]
fn cpp_failure_exits_3() {
    // With a zero z bound any sampling noise fails the row.
    let s = Setup::new(
        BINARY_GW,
        r#"{"model": "model.json", "cpp": {"k": [2], "samples": 2000, "max_z": 0.0}}"#,
    );
    assert_eq!(s.run_to(&["cpp"], "out.csv"), 3);
    let rows: Vec<CppRow> = csv_rows(&s.path("out.csv"));
    assert_eq!(rows[0].status, "fail");
}

#[test]
fn identical_runs_are_byte_identical() {
    let config = r#"{"model": "model.json", "seed": 5,
        "simulate": {"generations": 6, "replicas": 20},
        "cpp": {"k": [1, 2], "samples": 20000},
        "convergence": {"k": 2, "n_grid": [10], "mc_samples": 100000}}"#;
    let s = Setup::new(TWO_TYPE, config);
    for (cmd, format) in [
        ("simulate", "csv"),
        ("cpp", "json"),
        ("convergence", "csv"),
        ("moments", "json"),
    ] {
        let a = format!("{cmd}-a.{format}");
        let b = format!("{cmd}-b.{format}");
        assert_eq!(s.run_to(&[cmd, "--format", format], &a), 0);
        assert_eq!(s.run_to(&[cmd, "--format", format, "--threads", "2"], &b), 0);
        assert_eq!(fs::read(s.path(&a)).unwrap(), fs::read(s.path(&b)).unwrap(), "{cmd}");
    }
    // A different seed changes simulated trees.
    assert_eq!(s.run_to(&["simulate", "--seed", "6"], "other.csv"), 0);
    assert_ne!(
        fs::read(s.path("simulate-a.csv")).unwrap(),
        fs::read(s.path("other.csv")).unwrap()
    );
}

#[test]
fn header_records_provenance() {
    let s = Setup::new(BINARY_GW, r#"{"model": "model.json", "seed": 42}"#);
    assert_eq!(s.run_to(&["simulate"], "out.csv"), 0);
    let (header, rows) = read_csv::<SimulationRow>(&s.path("out.csv")).unwrap();
    assert_eq!(header.command, "simulate");
    assert_eq!(header.seed, 42);
    assert_eq!(header.config_sha256.len(), 64);
    assert!(!header.git_describe.is_empty());
    assert_eq!(rows.len(), 10);
    for r in &rows {
        let tree = treemoments::tree::PlanarTree::parse_canonical(&r.tree).unwrap();
        assert_eq!(tree.len(), r.vertices);
        assert_eq!(r.marks.split(' ').count(), r.vertices);
    }
}

#[test]
fn every_csv_parses_back() {
    let s = Setup::new(
        TWO_TYPE,
        r#"{"model": "model.json", "moments": {"k": [1, 2], "radius": [1, 2]},
            "verify_m2f": {"k": [1, 2], "radius": [1]}, "cpp": {"k": [1], "samples": 5000, "max_z": 10.0},
            "convergence": {"n_grid": [5]}, "survival": {"n_grid": [3]}}"#,
    );
    let cmds = [
        "model-check",
        "simulate",
        "verify-m2f",
        "moments",
        "convergence",
        "survival",
        "cpp",
    ];
    for cmd in cmds {
        let name = format!("{cmd}.csv");
        assert_eq!(s.run_to(&[cmd], &name), 0, "{cmd}");
        let path = s.path(&name);
        let n = match cmd {
            "model-check" => parsed::<ModelCheckRow>(&path, cmd),
            "simulate" => parsed::<SimulationRow>(&path, cmd),
            "verify-m2f" => parsed::<VerifyRow>(&path, cmd),
            "moments" => parsed::<MomentRecord>(&path, cmd),
            "convergence" => parsed::<ConvergenceRow>(&path, cmd),
            "survival" => parsed::<SurvivalRow>(&path, cmd),
            _ => parsed::<CppRow>(&path, cmd),
        };
        assert!(n > 0, "{cmd}");
        // Every record line was read, none skipped.
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), n + 1, "{cmd}");
    }
}

fn parsed<R: serde::de::DeserializeOwned>(path: &Path, cmd: &str) -> usize {
    let (header, rows) = read_csv::<R>(path).unwrap();
    assert_eq!(header.command, cmd);
    rows.len()
}

#[test]
fn moment_records_have_the_documented_fields() {
    let s = Setup::new(
        BINARY_GW,
        r#"{"model": "model.json", "moments": {"k": [2], "radius": [2]}}"#,
    );
    assert_eq!(s.run_to(&["moments", "--format", "json"], "m.json"), 0);
    let (_, _, rows) = read_json::<Value>(&s.path("m.json")).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let mut keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["k", "n", "path", "psi", "runtime_ms", "value"]);
        assert!((r["value"].as_f64().unwrap() - rows[0]["value"].as_f64().unwrap()).abs() < 1e-9);
    }
    let paths: Vec<&str> = rows.iter().map(|r| r["path"].as_str().unwrap()).collect();
    assert_eq!(paths, ["bruteforce", "m2f", "recursive"]);
    assert_eq!(s.run_to(&["moments", "--format", "json", "--timings"], "t.json"), 0);
    let (_, _, rows) = read_json::<Value>(&s.path("t.json")).unwrap();
    assert!(rows.iter().all(|r| r["runtime_ms"].is_u64()));
}
