mod common;

use common::SplitMix;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_frechet-sets");

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("FRECHET_SETS_THREADS").output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_outputs_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "small.json",
        r#"{"experiment": "median", "seeds": [1, 2], "n_max": 63, "params": {"n_grid": "all"}}"#,
    );
    let out = tmp.path().join("res");
    let o = cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["small.json", "small.csv", "manifest.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let csv = fs::read(out.join("small.csv")).unwrap();
    assert_eq!(manifest["files"]["small.csv"]["bytes"], csv.len() as u64);
    assert!(stdout(&o).contains(manifest["files"]["small.csv"]["sha256"].as_str().unwrap()));

    let batch: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("small.json")).unwrap()).unwrap();
    assert_eq!(batch["name"], "small");
    assert_eq!(batch["runs"].as_array().unwrap().len(), 2);
    // defaults are echoed into the emitted config
    assert_eq!(batch["config"]["experiment"]["s"], 1);
    assert_eq!(batch["config"]["seeds"], serde_json::json!([1, 2]));
    for run in batch["runs"].as_array().unwrap() {
        for rec in run["records"].as_array().unwrap() {
            assert_eq!(rec["values"]["d_sub"], 0.0);
        }
    }
}

#[test]
fn negative_exponent_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.json",
        r#"{"experiment": "median", "seed": 1,
            "schedule": {"kind": "power_decay", "c": 1.0, "exponent": -1}}"#,
    );
    let o = cli(&["run", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schedule exponent must be ≥ 0"), "{}", stderr(&o));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn unknown_experiment_lists_valid_ids() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "x.json", r#"{"experiment": "weiszfeld", "seed": 1}"#);
    let o = cli(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("median, circle, regression, ulln, fixtures"));
}

#[test]
fn unreadable_config_and_bad_flags_exit_two() {
    assert_eq!(cli(&["run", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert_eq!(cli(&["run"]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "j.json", "{ not json");
    assert_eq!(cli(&["validate", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn jobs_must_be_positive() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"experiment": "fixtures", "seed": 1}"#);
    let o = cli(&["run", "--config", &cfg, "--jobs", "0", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(BIN)
        .args(["run", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()])
        .env("FRECHET_SETS_THREADS", "two")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("FRECHET_SETS_THREADS"));
}

#[test]
fn validate_reports_issues_warnings_and_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = write_config(tmp.path(), "ok.json", r#"{"experiment": "circle", "seed": 3}"#);
    let o = cli(&["validate", "--config", &ok]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(!text.contains("issue:"));
    assert!(text.contains("default: params.grid_size = 360"), "{text}");
    assert!(text.contains("config is valid"));

    let missing = write_config(tmp.path(), "missing.json", r#"{"experiment": "circle"}"#);
    let o = cli(&["validate", "--config", &missing]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).matches("issue:").count(), 1);

    let extra = write_config(tmp.path(), "extra.json", r#"{"experiment": "ulln", "seed": 1, "colour": 3}"#);
    let o = cli(&["validate", "--config", &extra]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("warning: unknown key \"colour\""));

    let o = cli(&["run", "--config", &ok, "--validate-only", "--out", tmp.path().join("v").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(!tmp.path().join("v").exists());
}

#[test]
fn repeated_runs_have_identical_manifests() {
    let tmp = tempfile::tempdir().unwrap();
    let manifests: Vec<String> = (0..2)
        .map(|k| {
            let out = tmp.path().join(format!("r{k}"));
            let jobs = if k == 0 { "1" } else { "4" };
            let o = cli(&[
                "run",
                "--config",
                configs_dir().join("circle.json").to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--jobs",
                jobs,
            ]);
            assert!(o.status.success(), "{}", stderr(&o));
            fs::read_to_string(out.join("manifest.json")).unwrap()
        })
        .collect();
    assert_eq!(manifests[0], manifests[1]);
}

#[test]
fn manifest_merges_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("res");
    for name in ["a", "b"] {
        let cfg = write_config(
            tmp.path(),
            &format!("{name}.json"),
            r#"{"experiment": "fixtures", "seed": 0, "n_max": 20, "thresholds": {"tail_start": 10}}"#,
        );
        assert!(cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_object().unwrap();
    assert_eq!(files.len(), 4);
    assert_eq!(files["a.csv"]["sha256"], files["b.csv"]["sha256"]);
}

#[test]
fn e3_seed_42_matches_the_golden_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("e3");
    let o = cli(&[
        "run",
        "--config",
        configs_dir().join("e3.json").to_str().unwrap(),
        "--seed-override",
        "42",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert_eq!(manifest, fs::read_to_string(golden("e3_seed42_manifest.json")).unwrap());

    let csv = fs::read_to_string(out.join("e3.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    let trajectory: Vec<&str> = std::iter::once(header)
        .chain(lines.filter(|l| {
            let f: Vec<&str> = l.split(',').collect();
            !f[2].is_empty() && !f[3].starts_with("event:")
        }))
        .collect();
    let expected = fs::read_to_string(golden("e3_seed42_trajectory.csv")).unwrap();
    assert_eq!(trajectory, expected.lines().collect::<Vec<_>>());

    // p_n recomputed from a reference SplitMix64 coin stream
    let p: Vec<(usize, f64)> = expected
        .lines()
        .skip(1)
        .filter_map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[3] == "p1").then(|| (f[2].parse().unwrap(), f[4].parse().unwrap()))
        })
        .collect();
    let mut coins = SplitMix(42);
    let mut ones = 0u64;
    let mut it = p.iter().peekable();
    for n in 1..=16384usize {
        ones += coins.coin();
        if let Some(&&(m, value)) = it.peek() {
            if m == n {
                assert_eq!(value, ones as f64 / n as f64, "n = {n}");
                it.next();
            }
        }
    }
    assert!(it.next().is_none());
    // odd n below 64 and the powers of two 2..=16384
    assert_eq!(p.len(), 32 + 14);
}
