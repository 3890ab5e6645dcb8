//! Coercivity certificate for least squares with anchor `o = 0`:
//! `a⁺_n ‖β‖² − a⁻_n ‖β‖ ≤ F_n(β) = βᵀG_nβ − 2βᵀm_n`, where `G_n` is the
//! empirical Gram matrix of `X = (1, x)`, `m_n` the mean of `XY`,
//! `a⁺_n = λ_min(G_n)` and `a⁻_n = 2‖m_n‖`.

use serde::{Deserialize, Serialize};

use super::{AxisSpec, Design, ExperimentResult, LabError, NGrid, Rng, SamplingDistribution};
use crate::cost::LEMMA_REL_TOL;

/// Largest matrix accepted by [`symmetric_lambda_min`].
pub const MAX_JACOBI_DIM: usize = 8;
const SYMMETRY_TOL: f64 = 1e-10;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_lambda_min(a: &[Vec<f64>]) -> Result<f64, LabError> {
    let n = a.len();
    if n == 0 || n > MAX_JACOBI_DIM {
        return Err(LabError::Numeric(format!("dimension {n} outside 1..={MAX_JACOBI_DIM}")));
    }
    if a.iter().any(|row| row.len() != n) {
        return Err(LabError::Numeric("matrix is not square".into()));
    }
    if a.iter().flatten().any(|x| !x.is_finite()) {
        return Err(LabError::Numeric("matrix has non-finite entries".into()));
    }
    for i in 0..n {
        for j in 0..i {
            if (a[i][j] - a[j][i]).abs() > SYMMETRY_TOL {
                return Err(LabError::Numeric(format!("matrix is not symmetric at ({i},{j})")));
            }
        }
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = avg;
            m[j][i] = avg;
        }
    }
    let off = |m: &[Vec<f64>]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i][j] * m[i][j];
                }
            }
        }
        s.sqrt()
    };
    for _ in 0..MAX_SWEEPS {
        if off(&m) < OFF_DIAGONAL_TOL {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    Ok((0..n).map(|i| m[i][i]).fold(f64::INFINITY, f64::min))
}

/// `ψ(δ) = δ^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub exponent: f64,
}

impl Shape {
    pub fn eval(&self, delta: f64) -> f64 {
        delta.powf(self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCertificate {
    pub psi_plus: Shape,
    pub psi_minus: Shape,
    pub a_plus: f64,
    pub a_minus: f64,
    pub a_plus_n: Vec<f64>,
    pub a_minus_n: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionConfig {
    /// Number of slope coordinates; `X` has `s + 1` entries.
    pub s: usize,
    pub n_max: usize,
    pub design: Design,
    pub noise: f64,
    /// `β*` of length `s + 1`, intercept first. Defaults to `(1, 0.5, 0.5, …)`.
    pub beta: Option<Vec<f64>>,
    /// Per-coordinate grid of checked `β`.
    pub beta_grid: AxisSpec,
    pub n_grid: NGrid,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            s: 1,
            n_max: 10_000,
            design: Design::Rademacher,
            noise: 0.5,
            beta: None,
            beta_grid: AxisSpec { lo: -3.0, hi: 3.0, count: 13 },
            n_grid: NGrid::Dyadic,
        }
    }
}

impl RegressionConfig {
    pub fn beta_star(&self) -> Vec<f64> {
        self.beta.clone().unwrap_or_else(|| std::iter::once(1.0).chain(std::iter::repeat_n(0.5, self.s)).collect())
    }

    /// `(λ_min(E[XXᵀ]), 2‖E[XY]‖)` from the design moments.
    pub fn population_constants(&self) -> (f64, f64) {
        let m2 = self.design.second_moment();
        let beta = self.beta_star();
        let a_plus = if self.s == 0 { 1.0 } else { m2.min(1.0) };
        // E[XXᵀ] = diag(1, m2, …, m2) and E[XY] = E[XXᵀ] β*
        let mean_xy: Vec<f64> = beta.iter().enumerate().map(|(i, b)| if i == 0 { *b } else { m2 * b }).collect();
        (a_plus, 2.0 * norm(&mean_xy))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Grid points of `[lo, hi]^dim`, row-major.
fn beta_points(axis: &AxisSpec, dim: usize) -> Vec<Vec<f64>> {
    let step = if axis.count > 1 { (axis.hi - axis.lo) / (axis.count - 1) as f64 } else { 0.0 };
    let coord = |i: usize| if i + 1 == axis.count { axis.hi } else { axis.lo + step * i as f64 };
    let total = axis.count.pow(dim as u32);
    (0..total)
        .map(|mut flat| {
            let mut b = vec![0.0; dim];
            for k in (0..dim).rev() {
                b[k] = coord(flat % axis.count);
                flat /= axis.count;
            }
            b
        })
        .collect()
}

pub fn run_regression_certificate(cfg: &RegressionConfig, seed: u64) -> Result<ExperimentResult, LabError> {
    if cfg.n_max < 1 {
        return Err(LabError::Config("n_max must be at least 1".into()));
    }
    if cfg.s == 0 || cfg.s + 1 > MAX_JACOBI_DIM {
        return Err(LabError::Config(format!("s must lie in 1..={}", MAX_JACOBI_DIM - 1)));
    }
    let beta_star = cfg.beta_star();
    if beta_star.len() != cfg.s + 1 {
        return Err(LabError::Config(format!("beta must have {} entries", cfg.s + 1)));
    }
    if cfg.beta_grid.count == 0 || cfg.beta_grid.count.pow((cfg.s + 1) as u32) > 1_000_000 {
        return Err(LabError::Config("beta grid is empty or too large".into()));
    }
    let dim = cfg.s + 1;
    let dist = SamplingDistribution::regression(beta_star.clone(), cfg.noise, cfg.design)?;
    let betas = beta_points(&cfg.beta_grid, dim);
    let (a_plus, a_minus) = cfg.population_constants();

    let mut rng = Rng::new(seed);
    let mut gram = vec![vec![0.0; dim]; dim];
    let mut xy = vec![0.0; dim];
    let mut cert = LowerBoundCertificate {
        psi_plus: Shape { exponent: 2.0 },
        psi_minus: Shape { exponent: 1.0 },
        a_plus,
        a_minus,
        a_plus_n: Vec::new(),
        a_minus_n: Vec::new(),
    };
    let mut result = ExperimentResult::new("regression", seed, cfg);
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    let recorded = cfg.n_grid.points(cfg.n_max);
    let mut next = 0;
    for n in 1..=cfg.n_max {
        let row = dist.draw(&mut rng);
        let row = row.coords().expect("regression rows are vectors");
        let (x, y) = row.split_at(dim);
        for i in 0..dim {
            xy[i] += x[i] * y[0];
            for j in 0..dim {
                gram[i][j] += x[i] * x[j];
            }
        }
        if next >= recorded.len() || recorded[next] != n {
            continue;
        }
        next += 1;
        let inv = 1.0 / n as f64;
        let g: Vec<Vec<f64>> = gram.iter().map(|r| r.iter().map(|v| v * inv).collect()).collect();
        let m: Vec<f64> = xy.iter().map(|v| v * inv).collect();
        let ap = symmetric_lambda_min(&g)?.max(0.0);
        let am = 2.0 * norm(&m);
        cert.a_plus_n.push(ap);
        cert.a_minus_n.push(am);

        let mut min_slack = f64::INFINITY;
        let mut bad = 0usize;
        for b in &betas {
            let quad: f64 = (0..dim).map(|i| b[i] * (0..dim).map(|j| g[i][j] * b[j]).sum::<f64>()).sum();
            let lin: f64 = (0..dim).map(|i| b[i] * m[i]).sum();
            let f_n = quad - 2.0 * lin;
            let r = norm(b);
            let lower = ap * cert.psi_plus.eval(r) - am * cert.psi_minus.eval(r);
            let scale = f_n.abs().max(lower.abs()).max(1.0);
            let slack = (f_n - lower) / scale;
            min_slack = min_slack.min(slack);
            if slack < -LEMMA_REL_TOL {
                bad += 1;
            }
        }
        violations += bad;
        worst = worst.min(min_slack);
        result.push(
            n,
            [
                ("a_plus_n".to_string(), ap),
                ("a_minus_n".to_string(), am),
                ("a_plus_rel_err".to_string(), (ap - a_plus).abs() / a_plus),
                ("a_minus_rel_err".to_string(), (am - a_minus).abs() / a_minus),
                ("lower_bound_min_slack".to_string(), min_slack),
                ("lower_bound_violations".to_string(), bad as f64),
            ],
        );
    }
    let sm = &mut result.summary;
    sm.insert("a_plus".into(), a_plus);
    sm.insert("a_minus".into(), a_minus);
    sm.insert("a_plus_final".into(), *cert.a_plus_n.last().expect("n_max is recorded"));
    sm.insert("a_minus_final".into(), *cert.a_minus_n.last().expect("n_max is recorded"));
    sm.insert("lower_bound_violations".into(), violations as f64);
    sm.insert("lower_bound_min_slack".into(), worst);
    sm.insert("beta_points".into(), betas.len() as f64);
    result.config = serde_json::json!({ "config": cfg, "certificate": cert });
    Ok(result)
}
