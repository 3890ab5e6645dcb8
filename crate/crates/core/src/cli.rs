//! `frechet-sets` command line: run or validate experiment configs.
//!
//! A config is a JSON object:
//!
//! ```json
//! {
//!   "experiment": "median",
//!   "name": "e1",
//!   "seeds": [1, 2, 3],
//!   "n_max": 4095,
//!   "schedule": { "kind": "power_decay", "c": 1.0, "exponent": 0.25 },
//!   "params": { "s": 1, "n_grid": "all" },
//!   "output_dir": "out",
//!   "thresholds": {}
//! }
//! ```
//!
//! `seed` may replace `seeds`. Everything except `experiment` and the seeds
//! has a default; defaults are listed by `validate` and written into the
//! config echo of the results. Exit codes: 0 success, 2 config error,
//! 3 runtime error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lab::{
    run_batch, CircleConfig, Experiment, ExperimentBatch, FixturesConfig, LabError, MedianConfig, RegressionConfig,
    UllnConfig,
};
use crate::par;
use crate::solver::EpsilonSchedule;

/// Worker count used when `--jobs` is absent.
pub const THREADS_ENV: &str = "FRECHET_SETS_THREADS";
pub const MANIFEST_FILE: &str = "manifest.json";
const DEFAULT_OUTPUT_DIR: &str = "out";
const TOP_LEVEL_KEYS: [&str; 9] =
    ["experiment", "name", "seed", "seeds", "n_max", "schedule", "params", "output_dir", "thresholds"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "frechet-sets", version, about = "Fréchet mean set experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a config file.
    Run(RunArgs),
    /// Check a config file without running it.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Run this single seed instead of the configured ones.
    #[arg(long, value_name = "U64")]
    pub seed_override: Option<u64>,
    /// Worker threads; falls back to FRECHET_SETS_THREADS.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub validate_only: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
}

/// Outcome of a schema check. Issues are errors; warnings are not.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<String>,
    pub warnings: Vec<String>,
    pub defaulted: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for i in &self.issues {
            out.push_str(&format!("issue: {i}\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        for d in &self.defaulted {
            out.push_str(&format!("default: {d}\n"));
        }
        if self.is_valid() {
            out.push_str("config is valid\n");
        }
        out
    }
}

/// A config with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub name: String,
    pub seeds: Vec<u64>,
    pub experiment: Experiment,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub thresholds: BTreeMap<String, f64>,
}

impl ResolvedConfig {
    /// The batch as written by `run`: named after the config, echoing it.
    pub fn run(&self) -> Result<ExperimentBatch, LabError> {
        let mut batch = run_batch(&self.experiment, &self.seeds)?;
        batch.name = self.name.clone();
        batch.config = serde_json::to_value(self).expect("config serializes");
        Ok(batch)
    }
}

fn default_params(id: &str) -> Option<Value> {
    let v = match id {
        "median" => serde_json::to_value(MedianConfig::default()),
        "circle" => serde_json::to_value(CircleConfig::default()),
        "regression" => serde_json::to_value(RegressionConfig::default()),
        "ulln" => serde_json::to_value(UllnConfig::default()),
        "fixtures" => serde_json::to_value(FixturesConfig::default()),
        _ => return None,
    };
    Some(v.expect("defaults serialize"))
}

fn threshold_keys(id: &str) -> &'static [&'static str] {
    match id {
        "fixtures" => &["tol", "cap", "tail_start"],
        _ => &[],
    }
}

fn as_seed(v: &Value) -> Option<u64> {
    v.as_u64()
}

/// Checks a parsed config; returns the resolved config when it is valid.
pub fn validate_value(
    value: &Value,
    default_name: &str,
    seed_override: Option<u64>,
) -> (ValidationReport, Option<ResolvedConfig>) {
    let mut rep = ValidationReport::default();
    let Some(obj) = value.as_object() else {
        rep.issues.push("config must be a JSON object".into());
        return (rep, None);
    };
    for key in obj.keys() {
        if !TOP_LEVEL_KEYS.contains(&key.as_str()) {
            rep.warnings.push(format!("unknown key \"{key}\" is ignored"));
        }
    }

    let id = match obj.get("experiment").map(|v| v.as_str()) {
        Some(Some(id)) if Experiment::IDS.contains(&id) => Some(id.to_string()),
        Some(Some(id)) => {
            rep.issues.push(format!("unknown experiment \"{id}\"; valid ids: {}", Experiment::IDS.join(", ")));
            None
        }
        Some(None) => {
            rep.issues.push("experiment must be a string".into());
            None
        }
        None => {
            rep.issues.push(format!("missing experiment; valid ids: {}", Experiment::IDS.join(", ")));
            None
        }
    };

    let name = match obj.get("name") {
        Some(Value::String(s)) if !s.is_empty() && !s.contains(['/', '\\']) => s.clone(),
        Some(_) => {
            rep.issues.push("name must be a nonempty string without path separators".into());
            String::new()
        }
        None => {
            rep.defaulted.push(format!("name = \"{default_name}\""));
            default_name.to_string()
        }
    };

    let mut seeds = match (obj.get("seeds"), obj.get("seed")) {
        (Some(_), Some(_)) => {
            rep.issues.push("give either \"seed\" or \"seeds\", not both".into());
            Vec::new()
        }
        (Some(Value::Array(a)), None) => {
            let s: Vec<u64> = a.iter().filter_map(as_seed).collect();
            if s.len() != a.len() {
                rep.issues.push("seeds must be unsigned 64-bit integers".into());
            } else if s.is_empty() {
                rep.issues.push("seeds must be nonempty".into());
            }
            s
        }
        (Some(_), None) => {
            rep.issues.push("seeds must be an array".into());
            Vec::new()
        }
        (None, Some(v)) => match as_seed(v) {
            Some(s) => vec![s],
            None => {
                rep.issues.push("seed must be an unsigned 64-bit integer".into());
                Vec::new()
            }
        },
        (None, None) => {
            if seed_override.is_none() {
                rep.issues.push("missing seed: set \"seed\" or \"seeds\"".into());
            }
            Vec::new()
        }
    };
    if let Some(s) = seed_override {
        seeds = vec![s];
    }

    let output_dir = match obj.get("output_dir") {
        Some(Value::String(s)) => PathBuf::from(s),
        Some(_) => {
            rep.issues.push("output_dir must be a string".into());
            PathBuf::new()
        }
        None => {
            rep.defaulted.push(format!("output_dir = \"{DEFAULT_OUTPUT_DIR}\""));
            PathBuf::from(DEFAULT_OUTPUT_DIR)
        }
    };

    let mut thresholds = BTreeMap::new();
    match obj.get("thresholds") {
        None => {}
        Some(Value::Object(m)) => {
            for (k, v) in m {
                match v.as_f64() {
                    Some(x) => {
                        if let Some(id) = &id {
                            if !threshold_keys(id).contains(&k.as_str()) {
                                rep.warnings.push(format!("threshold \"{k}\" is not used by {id}"));
                            }
                        }
                        thresholds.insert(k.clone(), x);
                    }
                    None => rep.issues.push(format!("threshold \"{k}\" must be a number")),
                }
            }
        }
        Some(_) => rep.issues.push("thresholds must be an object".into()),
    }

    let Some(id) = id else {
        return (rep, None);
    };
    let defaults = default_params(&id).expect("id was checked");
    let defaults = defaults.as_object().expect("configs are objects");

    let mut params: Map<String, Value> = match obj.get("params") {
        None => Map::new(),
        Some(Value::Object(m)) => m.clone(),
        Some(_) => {
            rep.issues.push("params must be an object".into());
            Map::new()
        }
    };
    params.retain(|k, _| {
        let known = defaults.contains_key(k);
        if !known {
            rep.warnings.push(format!("unknown parameter \"params.{k}\" is ignored"));
        }
        known
    });

    let size_key = if id == "fixtures" { "horizon" } else { "n_max" };
    match obj.get("n_max") {
        Some(v) => match v.as_u64() {
            Some(n) if n >= 2 => {
                params.insert(size_key.into(), Value::from(n));
            }
            _ => rep.issues.push("n_max must be an integer ≥ 2".into()),
        },
        None if !params.contains_key(size_key) => {
            rep.defaulted.push(format!("n_max = {}", defaults[size_key]));
        }
        None => {}
    }

    let uses_schedule = defaults.contains_key("schedule");
    match obj.get("schedule") {
        Some(v) if uses_schedule => match serde_json::from_value::<EpsilonSchedule>(v.clone()) {
            Ok(s) => match s.validate() {
                Ok(()) => {
                    params.insert("schedule".into(), v.clone());
                }
                Err(e) => rep.issues.push(e.to_string()),
            },
            Err(e) => rep.issues.push(format!("schedule: {e}")),
        },
        Some(_) => rep.warnings.push(format!("schedule is not used by {id}")),
        None => {}
    }

    if id == "fixtures" {
        for key in threshold_keys("fixtures") {
            if let Some(x) = thresholds.get(*key) {
                let v = if *key == "tail_start" { Value::from(*x as u64) } else { Value::from(*x) };
                params.insert((*key).into(), v);
            }
        }
    }

    for key in defaults.keys() {
        if !params.contains_key(key) && key != size_key {
            rep.defaulted.push(format!("params.{key} = {}", defaults[key]));
        }
    }

    let mut tagged = params.clone();
    tagged.insert("experiment".into(), Value::from(id.clone()));
    let experiment = match serde_json::from_value::<Experiment>(Value::Object(tagged)) {
        Ok(e) => Some(e),
        Err(e) => {
            rep.issues.push(format!("params: {e}"));
            None
        }
    };
    if let Some(e) = &experiment {
        if e.n_max() < 2 {
            rep.issues.push("n_max must be an integer ≥ 2".into());
        }
    }

    if !rep.is_valid() {
        return (rep, None);
    }
    let experiment = experiment.expect("valid reports have an experiment");
    (rep, Some(ResolvedConfig { name, seeds, experiment, output_dir, thresholds }))
}

fn config_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "experiment".into())
}

pub fn load_config(
    path: &Path,
    seed_override: Option<u64>,
) -> Result<(ValidationReport, Option<ResolvedConfig>), CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{} is not valid JSON: {e}", path.display())))?;
    Ok(validate_value(&value, &config_stem(path), seed_override))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
struct Manifest {
    schema_version: u32,
    files: BTreeMap<String, ManifestFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
struct ManifestFile {
    sha256: String,
    bytes: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<ManifestEntry, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(ManifestEntry { path: name.to_string(), sha256: sha256_hex(contents), bytes: contents.len() as u64 })
}

/// Merges `entries` into the directory manifest.
fn update_manifest(dir: &Path, entries: &[ManifestEntry]) -> Result<(), CliError> {
    let path = dir.join(MANIFEST_FILE);
    let mut manifest = fs::read_to_string(&path)
        .ok()
        .and_then(|t| serde_json::from_str::<Manifest>(&t).ok())
        .unwrap_or(Manifest { schema_version: 1, files: BTreeMap::new() });
    for e in entries {
        manifest.files.insert(e.path.clone(), ManifestFile { sha256: e.sha256.clone(), bytes: e.bytes });
    }
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn configure_jobs(jobs: Option<usize>) -> Result<(), CliError> {
    let jobs = match jobs {
        Some(j) => Some(j),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got \"{v}\"")))?,
            ),
            _ => None,
        },
    };
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        // the global pool can be built once per process; later calls keep it
        let _ = par::configure_threads(j);
    }
    Ok(())
}

/// Runs a config and writes `<name>.json`, `<name>.csv` and the manifest.
pub fn run(args: &RunArgs) -> Result<Vec<ManifestEntry>, CliError> {
    let (report, resolved) = load_config(&args.config, args.seed_override)?;
    if args.validate_only {
        print!("{}", report.render());
        return if report.is_valid() { Ok(Vec::new()) } else { Err(CliError::Config(report.issues.join("; "))) };
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let Some(cfg) = resolved else {
        return Err(CliError::Config(report.issues.join("; ")));
    };
    configure_jobs(args.jobs)?;

    let batch = cfg.run().map_err(|e| CliError::Runtime(e.to_string()))?;

    let dir = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let entries = vec![
        write_file(&dir, &format!("{}.json", cfg.name), batch.to_json().as_bytes())?,
        write_file(&dir, &format!("{}.csv", cfg.name), batch.to_csv().as_bytes())?,
    ];
    update_manifest(&dir, &entries)?;
    Ok(entries)
}

pub fn validate(args: &ValidateArgs) -> Result<ValidationReport, CliError> {
    Ok(load_config(&args.config, None)?.0)
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => run(a).map(|entries| {
            for e in entries {
                println!("{}  {}", e.sha256, e.path);
            }
        }),
        Command::Validate(a) => validate(a).and_then(|rep| {
            print!("{}", rep.render());
            if rep.is_valid() {
                Ok(())
            } else {
                Err(CliError::Config(rep.issues.join("; ")))
            }
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn check(v: Value) -> ValidationReport {
        validate_value(&v, "cfg", None).0
    }

    #[test]
    fn valid_config_has_no_issues() {
        let rep = check(json!({"experiment": "median", "seed": 1}));
        assert!(rep.issues.is_empty() && rep.warnings.is_empty());
        assert!(rep.defaulted.iter().any(|d| d.starts_with("name")));
        assert!(rep.defaulted.iter().any(|d| d.starts_with("params.s ")));
    }

    #[test]
    fn missing_seed_is_one_issue() {
        let rep = check(json!({"experiment": "circle"}));
        assert_eq!(rep.issues.len(), 1, "{:?}", rep.issues);
        assert!(rep.issues[0].contains("seed"));
    }

    #[test]
    fn unknown_key_warns() {
        let rep = check(json!({"experiment": "ulln", "seed": 1, "colour": "red"}));
        assert!(rep.is_valid());
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn unknown_id_names_valid_ids() {
        let rep = check(json!({"experiment": "mode", "seed": 1}));
        assert!(rep.issues[0].contains("median, circle, regression, ulln, fixtures"));
    }

    #[test]
    fn negative_exponent() {
        let rep = check(json!({
            "experiment": "median", "seed": 1,
            "schedule": {"kind": "power_decay", "c": 1.0, "exponent": -1.0}
        }));
        assert_eq!(rep.issues, vec!["schedule exponent must be ≥ 0".to_string()]);
    }

    #[test]
    fn n_max_bounds() {
        assert!(!check(json!({"experiment": "median", "seed": 1, "n_max": 1})).is_valid());
        let (rep, cfg) = validate_value(&json!({"experiment": "fixtures", "seed": 1, "n_max": 60}), "f", None);
        assert!(rep.is_valid());
        match cfg.unwrap().experiment {
            Experiment::Fixtures(f) => assert_eq!(f.horizon, 60),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seed_override_replaces_seeds() {
        let (_, cfg) = validate_value(&json!({"experiment": "median", "seeds": [1, 2]}), "m", Some(9));
        assert_eq!(cfg.unwrap().seeds, vec![9]);
    }
}
