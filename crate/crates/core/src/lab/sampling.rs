//! Data-generating laws and their draw protocols.
//!
//! Draws consumed per data point:
//!
//! - finite support: 1 (inverse cumulative weights)
//! - Bernoulli product of dimension `s`: `s`, one per coordinate in order
//! - antipodal circle: 1 (top bit; 0 → angle 0, 1 → angle π)
//! - regression: `s` design draws, then 2 for the Gaussian noise
//! - Pareto: 1 (inversion)

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{LabError, Rng};
use crate::metric::Point;
use crate::solver::FiniteDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    /// Slopes uniform on `{−1, 1}`.
    Rademacher,
    /// Slopes uniform on `[−1, 1]`.
    Uniform,
}

impl Design {
    pub fn draw(self, rng: &mut Rng) -> f64 {
        match self {
            Design::Rademacher => {
                if rng.bernoulli() {
                    1.0
                } else {
                    -1.0
                }
            }
            Design::Uniform => 2.0 * rng.uniform() - 1.0,
        }
    }

    /// `E[U²]` of one slope coordinate.
    pub fn second_moment(self) -> f64 {
        match self {
            Design::Rademacher => 1.0,
            Design::Uniform => 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingDistribution {
    FiniteSupport(FiniteDistribution),
    BernoulliProduct {
        s: usize,
    },
    CircleAntipodal,
    /// Emits `(1, x_1, …, x_s, y)` with `y = βᵀ(1, x) + noise · N(0, 1)`.
    Regression {
        beta: Vec<f64>,
        noise: f64,
        design: Design,
    },
    Pareto {
        scale: f64,
        shape: f64,
    },
}

impl SamplingDistribution {
    pub fn regression(beta: Vec<f64>, noise: f64, design: Design) -> Result<Self, LabError> {
        if beta.len() < 2 {
            return Err(LabError::Config("regression needs an intercept and a slope".into()));
        }
        if !(noise >= 0.0) || beta.iter().any(|b| !b.is_finite()) {
            return Err(LabError::Config("regression parameters must be finite, noise ≥ 0".into()));
        }
        Ok(SamplingDistribution::Regression { beta, noise, design })
    }

    pub fn draw(&self, rng: &mut Rng) -> Point {
        match self {
            SamplingDistribution::FiniteSupport(d) => d.support()[d.quantile_index(rng.uniform())].clone(),
            SamplingDistribution::BernoulliProduct { s } => {
                Point::Vector((0..*s).map(|_| f64::from(u8::from(rng.bernoulli()))).collect())
            }
            SamplingDistribution::CircleAntipodal => Point::angle(if rng.bernoulli() { PI } else { 0.0 }),
            SamplingDistribution::Regression { beta, noise, design } => {
                let mut row = Vec::with_capacity(beta.len() + 1);
                row.push(1.0);
                for _ in 1..beta.len() {
                    row.push(design.draw(rng));
                }
                let mean: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
                row.push(mean + noise * rng.normal());
                Point::Vector(row)
            }
            SamplingDistribution::Pareto { scale, shape } => Point::scalar(rng.pareto(*scale, *shape)),
        }
    }

    /// The law as a finite distribution, when it is one.
    pub fn population(&self) -> Option<FiniteDistribution> {
        match self {
            SamplingDistribution::FiniteSupport(d) => Some(d.clone()),
            SamplingDistribution::BernoulliProduct { s } => {
                let atoms = (0..1usize << s)
                    .map(|mask| Point::Vector((0..*s).map(|k| ((mask >> (s - 1 - k)) & 1) as f64).collect()))
                    .collect();
                FiniteDistribution::uniform(atoms).ok()
            }
            SamplingDistribution::CircleAntipodal => {
                FiniteDistribution::uniform(vec![Point::angle(0.0), Point::angle(PI)]).ok()
            }
            _ => None,
        }
    }
}

pub fn sample(dist: &SamplingDistribution, rng: &mut Rng, n: usize) -> Result<Vec<Point>, LabError> {
    if n == 0 {
        return Err(LabError::Config("sample size must be at least 1".into()));
    }
    Ok((0..n).map(|_| dist.draw(rng)).collect())
}
