//! Seeded experiments and their serialized results.
//!
//! Every experiment is a pure function of its configuration and a seed.
//! Batches over seeds fan out in parallel; each replication owns its
//! generator and runs sequentially, and results are ordered by seed.

mod circle;
mod fixtures;
mod median;
mod regression;
mod rng;
mod sampling;
mod ulln;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use circle::{run_circle_experiment, CircleConfig};
pub use fixtures::{run_fixtures_experiment, FixturesConfig};
pub use median::{run_median_experiment, MedianConfig};
pub use regression::{
    run_regression_certificate, symmetric_lambda_min, LowerBoundCertificate, RegressionConfig, Shape,
};
pub use rng::Rng;
pub use sampling::{sample, Design, SamplingDistribution};
pub use ulln::{run_ulln_diagnostic, UllnConfig, UllnRow};

use crate::cost::CostError;
use crate::limits::LimitError;
use crate::metric::{CandidateGrid, MetricError};
use crate::par;
use crate::solver::SolverError;

/// Version of the JSON and CSV result layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

/// Which sample sizes get a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NGrid {
    /// Powers of two, every odd `n < 64`, and `n_max`.
    #[default]
    Dyadic,
    All,
}

impl NGrid {
    pub fn points(self, n_max: usize) -> Vec<usize> {
        match self {
            NGrid::All => (1..=n_max).collect(),
            NGrid::Dyadic => {
                let mut v: Vec<usize> = (1..64).step_by(2).filter(|&n| n <= n_max).collect();
                let mut p = 1usize;
                while p <= n_max {
                    v.push(p);
                    p = match p.checked_mul(2) {
                        Some(q) => q,
                        None => break,
                    };
                }
                if n_max >= 1 {
                    v.push(n_max);
                }
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }
}

/// Evenly spaced 1-D grid `lo, …, hi` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn grid(&self) -> Result<CandidateGrid, LabError> {
        Ok(CandidateGrid::uniform_line(self.lo, self.hi, self.count)?)
    }
}

/// `min(1, n^−3 · m4 / (2^−4 ε^4))`, the fourth-moment Markov bound on
/// `P(|p_n − 1/2| ≥ ε/2)`.
pub fn markov_bound(n: usize, eps: f64, fourth_central_moment: f64) -> Result<f64, LabError> {
    if !(eps > 0.0) {
        return Err(LabError::Config(format!("eps must be positive, got {eps}")));
    }
    if n == 0 || !(fourth_central_moment >= 0.0) {
        return Err(LabError::Config("need n ≥ 1 and a nonnegative moment".into()));
    }
    let n = n as f64;
    let bound = fourth_central_moment / (n * n * n) / (eps.powi(4) / 16.0);
    Ok(bound.min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub n: usize,
    pub values: BTreeMap<String, f64>,
}

/// One replication. Non-finite values serialize to JSON as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub n_grid: Vec<usize>,
    pub records: Vec<Record>,
    pub summary: BTreeMap<String, f64>,
    pub events: BTreeMap<String, Vec<usize>>,
    pub config: serde_json::Value,
}

impl ExperimentResult {
    pub fn new(experiment: &str, seed: u64, config: &impl Serialize) -> Self {
        ExperimentResult {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            seed,
            n_grid: Vec::new(),
            records: Vec::new(),
            summary: BTreeMap::new(),
            events: BTreeMap::new(),
            config: serde_json::to_value(config).expect("configs serialize"),
        }
    }

    pub fn push(&mut self, n: usize, values: impl IntoIterator<Item = (String, f64)>) {
        self.n_grid.push(n);
        self.records.push(Record { n, values: values.into_iter().collect() });
    }

    pub fn record(&self, n: usize) -> Option<&Record> {
        self.records.iter().find(|r| r.n == n)
    }

    /// Values of `metric` along the records, `NaN` where absent.
    pub fn series(&self, metric: &str) -> Vec<f64> {
        self.records.iter().map(|r| r.values.get(metric).copied().unwrap_or(f64::NAN)).collect()
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum Experiment {
    Median(MedianConfig),
    Circle(CircleConfig),
    Regression(RegressionConfig),
    Ulln(UllnConfig),
    Fixtures(FixturesConfig),
}

impl Experiment {
    pub const IDS: [&'static str; 5] = ["median", "circle", "regression", "ulln", "fixtures"];

    pub fn id(&self) -> &'static str {
        match self {
            Experiment::Median(_) => "median",
            Experiment::Circle(_) => "circle",
            Experiment::Regression(_) => "regression",
            Experiment::Ulln(_) => "ulln",
            Experiment::Fixtures(_) => "fixtures",
        }
    }

    /// Largest sample size, or the horizon of the fixtures.
    pub fn n_max(&self) -> usize {
        match self {
            Experiment::Median(c) => c.n_max,
            Experiment::Circle(c) => c.n_max,
            Experiment::Regression(c) => c.n_max,
            Experiment::Ulln(c) => c.n_max,
            Experiment::Fixtures(c) => c.horizon,
        }
    }

    pub fn run(&self, seed: u64) -> Result<ExperimentResult, LabError> {
        match self {
            Experiment::Median(c) => run_median_experiment(c, seed),
            Experiment::Circle(c) => run_circle_experiment(c, seed),
            Experiment::Regression(c) => run_regression_certificate(c, seed),
            Experiment::Ulln(c) => ulln::run_ulln_experiment(c, seed),
            Experiment::Fixtures(c) => run_fixtures_experiment(c, seed),
        }
    }
}

/// Runs every seed, in parallel when enabled; output is in seed order.
pub fn run_batch(experiment: &Experiment, seeds: &[u64]) -> Result<ExperimentBatch, LabError> {
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let runs = par::map_slice(&sorted, |&s| experiment.run(s)).into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentBatch {
        schema_version: SCHEMA_VERSION,
        name: experiment.id().to_string(),
        experiment: experiment.id().to_string(),
        config: serde_json::to_value(experiment).expect("configs serialize"),
        runs,
    })
}

/// All replications of one experiment; one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentBatch {
    pub schema_version: u32,
    pub name: String,
    pub experiment: String,
    pub config: serde_json::Value,
    pub runs: Vec<ExperimentResult>,
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

impl ExperimentBatch {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("batch serializes");
        s.push('\n');
        s
    }

    /// Long format `experiment,seed,n,metric,value`. Summary rows leave `n`
    /// empty; event rows use metric `event:<name>` with value 1.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), LabError> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| LabError::Numeric(format!("csv: {e}"));
        w.write_record(["experiment", "seed", "n", "metric", "value"]).map_err(io)?;
        for run in &self.runs {
            let seed = run.seed.to_string();
            for r in &run.records {
                let n = r.n.to_string();
                for (k, v) in &r.values {
                    w.write_record([&self.experiment, &seed, &n, k, &format_value(*v)]).map_err(io)?;
                }
            }
            for (k, v) in &run.summary {
                w.write_record([self.experiment.as_str(), &seed, "", k, &format_value(*v)]).map_err(io)?;
            }
            for (k, ns) in &run.events {
                let metric = format!("event:{k}");
                for n in ns {
                    w.write_record([self.experiment.as_str(), &seed, &n.to_string(), &metric, "1"]).map_err(io)?;
                }
            }
        }
        w.flush().map_err(|e| LabError::Numeric(format!("csv: {e}")))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
