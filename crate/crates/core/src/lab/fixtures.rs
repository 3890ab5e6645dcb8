//! The three truncated `N0` counterexamples as an experiment.

use serde::{Deserialize, Serialize};

use super::{ExperimentResult, LabError};
use crate::limits::fixtures::{default_params, Fixture, FixtureKind};
use crate::limits::LimitParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixturesConfig {
    pub horizon: usize,
    pub tail_start: usize,
    pub tol: f64,
    pub cap: f64,
}

impl Default for FixturesConfig {
    fn default() -> Self {
        let p = default_params();
        FixturesConfig { horizon: 100, tail_start: p.tail_start, tol: p.tol, cap: p.cap }
    }
}

/// Deterministic; the seed is only echoed.
pub fn run_fixtures_experiment(cfg: &FixturesConfig, seed: u64) -> Result<ExperimentResult, LabError> {
    if cfg.tail_start >= cfg.horizon {
        return Err(LabError::Config("tail_start must be below the horizon".into()));
    }
    let params = LimitParams { tail_start: cfg.tail_start, tol: cfg.tol, cap: cfg.cap };
    let mut result = ExperimentResult::new("fixtures", seed, cfg);
    let diagnoses = FixtureKind::ALL
        .iter()
        .map(|&k| Fixture::new(k, cfg.horizon)?.diagnose(params))
        .collect::<Result<Vec<_>, _>>()?;
    for n in 1..=cfg.horizon {
        let mut values = Vec::new();
        for d in &diagnoses {
            let name = d.kind.name();
            values.push((format!("{name}.sup_deviation"), d.sup_deviation[n - 1]));
            values.push((format!("{name}.d_sub"), d.d_sub[n - 1]));
            values.push((format!("{name}.x_n_distance"), d.x_n_distance[n - 1]));
        }
        result.push(n, values);
    }
    for d in &diagnoses {
        let name = d.kind.name();
        let flag = |b: bool| f64::from(u8::from(b));
        let sm = &mut result.summary;
        sm.insert(format!("{name}.uniform_on_bounded"), flag(d.uniform_on_bounded));
        sm.insert(format!("{name}.eventually_bounded"), flag(d.eventually_bounded));
        sm.insert(format!("{name}.approachable"), flag(d.approachable));
        sm.insert(format!("{name}.violations"), d.violated().len() as f64);
        let min_x = d.x_n_distance.iter().copied().fold(f64::INFINITY, f64::min);
        sm.insert(format!("{name}.min_x_n_distance"), min_x);
    }
    Ok(result)
}
