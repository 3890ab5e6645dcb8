//! Median sets of fair Bernoulli vectors in `R^s` under the L1 metric.
//!
//! Per coordinate the empirical median set is an exact interval computed
//! from the compressed sample (`n − k` zeros, `k` ones); the product of the
//! intervals, restricted to the product grid, is `M_n`. The walk
//! `S_n^k = 2k − n` of each coordinate is read off the same counts.

use serde::{Deserialize, Serialize};

use super::{markov_bound, AxisSpec, ExperimentResult, LabError, NGrid, Rng, SamplingDistribution};
use crate::limits::{d_hausdorff, d_subset};
use crate::metric::{CandidateGrid, PointSet};
use crate::solver::{median_interval_weighted, product_mean_set, EpsilonSchedule, Interval};

/// Product grids larger than this are rejected.
pub const MAX_PRODUCT_GRID: usize = 200_000;

/// `E[(Y − 1/2)^4]` for a fair coin.
pub const BERNOULLI_FOURTH_MOMENT: f64 = 1.0 / 16.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MedianConfig {
    pub s: usize,
    pub n_max: usize,
    pub schedule: EpsilonSchedule,
    pub n_grid: NGrid,
    pub axis: AxisSpec,
}

impl Default for MedianConfig {
    fn default() -> Self {
        MedianConfig {
            s: 1,
            n_max: 4096,
            schedule: EpsilonSchedule::zero(),
            n_grid: NGrid::Dyadic,
            axis: AxisSpec { lo: -0.5, hi: 1.5, count: 9 },
        }
    }
}

const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

/// Occurrences after this `n` are counted separately.
pub const LATE_AFTER: usize = 1000;

pub fn run_median_experiment(cfg: &MedianConfig, seed: u64) -> Result<ExperimentResult, LabError> {
    let s = cfg.s;
    if s == 0 {
        return Err(LabError::Config("dimension s must be at least 1".into()));
    }
    if cfg.n_max < 1 {
        return Err(LabError::Config("n_max must be at least 1".into()));
    }
    cfg.schedule.validate()?;
    let axis = cfg.axis.grid()?;
    if (axis.len() as f64).powi(s as i32) > MAX_PRODUCT_GRID as f64 {
        return Err(LabError::Config(format!("product grid {}^{s} exceeds {MAX_PRODUCT_GRID} points", axis.len())));
    }
    let axes: Vec<CandidateGrid> = (0..s).map(|_| axis.clone()).collect();
    let grid = CandidateGrid::product_l1(axes.clone())?;
    let unit_sets = axes.iter().map(|a| UNIT.members(a)).collect::<Result<Vec<_>, _>>()?;
    let target = product_mean_set(&grid, &unit_sets, 1.0)?;

    let recorded = cfg.n_grid.points(cfg.n_max);
    let mut next_record = 0;
    let checkpoint = last_checkpoint(cfg.n_max);

    let dist = SamplingDistribution::BernoulliProduct { s };
    let mut rng = Rng::new(seed);
    let mut ones = vec![0usize; s];
    let corners = 1usize << s.min(16);
    let mut corner_last = vec![0usize; corners];
    let mut corner_any_last = 0usize;
    let mut zeros = Vec::new();
    let mut interior = Vec::new();
    let mut failures = Vec::new();
    let mut result = ExperimentResult::new("median", seed, cfg);

    for n in 1..=cfg.n_max {
        let y = dist.draw(&mut rng);
        for (k, v) in y.coords().expect("vector draw").iter().enumerate() {
            if *v == 1.0 {
                ones[k] += 1;
            }
        }
        let eps = cfg.schedule.eps(n);
        let intervals = ones
            .iter()
            .map(|&k| median_interval_weighted([(0.0, (n - k) as f64), (1.0, k as f64)], eps))
            .collect::<Result<Vec<_>, _>>()?;

        if ones.iter().all(|&k| 2 * k == n) {
            zeros.push(n);
        }
        if intervals.iter().all(|iv| iv.contains(0.5)) {
            interior.push(n);
        }
        if s <= 16 {
            let mut any = false;
            for (mask, last) in corner_last.iter_mut().enumerate() {
                let hit = intervals.iter().enumerate().all(|(k, iv)| iv.contains(((mask >> (s - 1 - k)) & 1) as f64));
                if hit {
                    *last = n;
                    any = true;
                }
            }
            if any {
                corner_any_last = n;
            }
        }
        let contains_unit = intervals.iter().all(|iv| iv.contains_interval(&UNIT));
        if !contains_unit {
            failures.push(n);
        }

        if next_record < recorded.len() && recorded[next_record] == n {
            next_record += 1;
            let per_axis =
                intervals.iter().zip(&axes).map(|(iv, a)| iv.members(a)).collect::<Result<Vec<PointSet>, _>>()?;
            let m_n = product_mean_set(&grid, &per_axis, 1.0)?;
            let mut values = vec![
                ("eps".to_string(), eps),
                ("d_sub".to_string(), d_subset(&grid, &m_n, &target)?),
                ("d_haus".to_string(), d_hausdorff(&grid, &m_n, &target)?),
                ("contains_unit".to_string(), f64::from(u8::from(contains_unit))),
                ("card".to_string(), m_n.len() as f64),
                ("zero_returns".to_string(), zeros.len() as f64),
                ("interior".to_string(), f64::from(u8::from(interior.last() == Some(&n)))),
            ];
            if eps > 0.0 {
                values.push(("markov_bound".into(), markov_bound(n, eps, BERNOULLI_FOURTH_MOMENT)?));
            }
            for (k, &c) in ones.iter().enumerate() {
                values.push((format!("p{}", k + 1), c as f64 / n as f64));
                values.push((format!("walk{}", k + 1), 2.0 * c as f64 - n as f64));
            }
            result.push(n, values);
        }
    }

    let late = |v: &[usize]| v.iter().filter(|&&n| n > LATE_AFTER).count() as f64;
    let sm = &mut result.summary;
    sm.insert("zero_returns".into(), zeros.len() as f64);
    sm.insert("zero_returns_late".into(), late(&zeros));
    sm.insert("interior_count".into(), interior.len() as f64);
    sm.insert("interior_late".into(), late(&interior));
    sm.insert("checkpoint_last".into(), checkpoint as f64);
    if s <= 16 {
        sm.insert("corner_any_last".into(), corner_any_last as f64);
        let recurring = corner_last.iter().filter(|&&l| l > checkpoint).count();
        sm.insert("corners_recurring".into(), recurring as f64);
        sm.insert("corners".into(), corners as f64);
        if s <= 4 {
            for (mask, &last) in corner_last.iter().enumerate() {
                let bits: String = (0..s).map(|k| if (mask >> (s - 1 - k)) & 1 == 1 { '1' } else { '0' }).collect();
                sm.insert(format!("corner_{bits}_last"), last as f64);
            }
        }
    }
    sm.insert("unit_failures".into(), failures.len() as f64);
    result.events.insert("zero_return".into(), zeros);
    result.events.insert("interior".into(), interior);
    Ok(result)
}

/// Largest power of two strictly below `n_max` (0 when `n_max ≤ 1`).
pub fn last_checkpoint(n_max: usize) -> usize {
    if n_max <= 1 {
        return 0;
    }
    let mut p = 1usize;
    while p * 2 < n_max {
        p *= 2;
    }
    p
}
