//! α-Fréchet mean sets on the circle for two antipodal masses.

use serde::{Deserialize, Serialize};

use super::{sample, ExperimentResult, LabError, NGrid, Rng, SamplingDistribution};
use crate::cost::CostFunction;
use crate::limits::{d_hausdorff, d_subset};
use crate::metric::{CandidateGrid, Point};
use crate::solver::{empirical_objective, eps_argmin, population_objective, EpsilonSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleConfig {
    pub grid_size: usize,
    pub n_max: usize,
    pub alpha: f64,
    pub schedule: EpsilonSchedule,
    pub n_grid: NGrid,
}

impl Default for CircleConfig {
    fn default() -> Self {
        CircleConfig {
            grid_size: 360,
            n_max: 1024,
            alpha: 2.0,
            schedule: EpsilonSchedule::zero(),
            n_grid: NGrid::Dyadic,
        }
    }
}

pub fn run_circle_experiment(cfg: &CircleConfig, seed: u64) -> Result<ExperimentResult, LabError> {
    if cfg.n_max < 1 {
        return Err(LabError::Config("n_max must be at least 1".into()));
    }
    cfg.schedule.validate()?;
    let grid = CandidateGrid::circle(cfg.grid_size)?;
    let cost = CostFunction::power(cfg.alpha, Point::angle(0.0))?;
    let dist = SamplingDistribution::CircleAntipodal;
    let population = dist.population().expect("antipodal law is finite");
    let pop = population_objective(&population, &cost, &grid)?;
    let m = eps_argmin(&pop, 0.0)?;

    let mut rng = Rng::new(seed);
    let data = sample(&dist, &mut rng, cfg.n_max)?;
    let mut result = ExperimentResult::new("circle", seed, cfg);
    let (mut singletons, mut pairs, mut other) = (0.0, 0.0, 0.0);
    for n in cfg.n_grid.points(cfg.n_max) {
        let emp = empirical_objective(&data[..n], &cost, &grid)?;
        let eps = cfg.schedule.eps(n);
        let m_n = eps_argmin(&emp, eps)?;
        match m_n.len() {
            1 => singletons += 1.0,
            2 => pairs += 1.0,
            _ => other += 1.0,
        }
        let antipode = data[..n].iter().filter(|p| **p != Point::angle(0.0)).count();
        result.push(
            n,
            [
                ("eps".to_string(), eps),
                ("card".to_string(), m_n.len() as f64),
                ("d_sub".to_string(), d_subset(&grid, &m_n, &m)?),
                ("d_haus".to_string(), d_hausdorff(&grid, &m_n, &m)?),
                ("p_pi".to_string(), antipode as f64 / n as f64),
            ],
        );
    }
    let sm = &mut result.summary;
    sm.insert("population_card".into(), m.len() as f64);
    for (k, &j) in m.indices().iter().enumerate() {
        sm.insert(format!("population_index_{}", k + 1), j as f64);
    }
    sm.insert("records_card_1".into(), singletons);
    sm.insert("records_card_2".into(), pairs);
    sm.insert("records_card_other".into(), other);
    Ok(result)
}
