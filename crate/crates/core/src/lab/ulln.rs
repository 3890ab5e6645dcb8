//! Uniform deviation `sup_q |F_n(q) − F(q)|` of empirical objectives.

use serde::{Deserialize, Serialize};

use super::{sample, AxisSpec, ExperimentResult, LabError, Rng, SamplingDistribution};
use crate::cost::CostFunction;
use crate::metric::{CandidateGrid, Point};
use crate::par;
use crate::solver::{empirical_objective, population_objective};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UllnRow {
    pub n: usize,
    pub seed: u64,
    pub deviation: f64,
}

/// One row per `(n, seed)`, seeds outermost. Each seed draws
/// `max(n_list)` points once; smaller `n` use prefixes of that sample.
pub fn run_ulln_diagnostic(
    dist: &SamplingDistribution,
    cost: &CostFunction,
    grid: &CandidateGrid,
    n_list: &[usize],
    seeds: &[u64],
) -> Result<Vec<UllnRow>, LabError> {
    let population =
        dist.population().ok_or_else(|| LabError::Config("uniform deviation needs a finite-support law".into()))?;
    let n_top = *n_list.iter().max().ok_or_else(|| LabError::Config("n_list is empty".into()))?;
    if n_list.contains(&0) {
        return Err(LabError::Config("sample sizes must be positive".into()));
    }
    let pop = population_objective(&population, cost, grid)?;
    let per_seed = par::map_slice(seeds, |&seed| -> Result<Vec<UllnRow>, LabError> {
        let data = sample(dist, &mut Rng::new(seed), n_top)?;
        n_list
            .iter()
            .map(|&n| {
                let emp = empirical_objective(&data[..n], cost, grid)?;
                let deviation = emp.values().iter().zip(pop.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                Ok(UllnRow { n, seed, deviation })
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UllnConfig {
    /// Dimension of the Bernoulli product law.
    pub s: usize,
    pub alpha: f64,
    /// Per-coordinate candidate grid; `s > 1` uses the L1 product.
    pub grid: AxisSpec,
    pub n_max: usize,
    /// Defaults to the powers of ten below `n_max`, then `n_max`.
    pub n_list: Option<Vec<usize>>,
}

impl Default for UllnConfig {
    fn default() -> Self {
        UllnConfig { s: 1, alpha: 2.0, grid: AxisSpec { lo: 0.0, hi: 1.0, count: 21 }, n_max: 10_000, n_list: None }
    }
}

impl UllnConfig {
    pub fn sizes(&self) -> Vec<usize> {
        if let Some(v) = &self.n_list {
            return v.clone();
        }
        let mut v = Vec::new();
        let mut p = 1usize;
        while p < self.n_max {
            v.push(p);
            p *= 10;
        }
        v.push(self.n_max);
        v
    }

    fn setup(&self) -> Result<(SamplingDistribution, CostFunction, CandidateGrid), LabError> {
        if self.s == 0 || self.s > 4 {
            return Err(LabError::Config("s must lie in 1..=4".into()));
        }
        let axis = self.grid.grid()?;
        let grid = if self.s == 1 { axis } else { CandidateGrid::product_l1(vec![axis; self.s])? };
        let cost = CostFunction::power(self.alpha, Point::Vector(vec![0.0; self.s]))?;
        Ok((SamplingDistribution::BernoulliProduct { s: self.s }, cost, grid))
    }
}

pub(super) fn run_ulln_experiment(cfg: &UllnConfig, seed: u64) -> Result<ExperimentResult, LabError> {
    let (dist, cost, grid) = cfg.setup()?;
    let sizes = cfg.sizes();
    let rows = run_ulln_diagnostic(&dist, &cost, &grid, &sizes, &[seed])?;
    let mut result = ExperimentResult::new("ulln", seed, cfg);
    for row in rows {
        result.push(row.n, [("sup_deviation".to_string(), row.deviation)]);
    }
    Ok(result)
}
