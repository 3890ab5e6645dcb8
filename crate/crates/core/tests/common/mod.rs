//! Brute-force oracles shared by the integration suites.
#![allow(dead_code)]

use frechet_sets::cost::construct_h;
use frechet_sets::solver::{median_interval_weighted, product_mean_set};
use frechet_sets::{CandidateGrid, NondecreasingFn, Rng};
use std::f64::consts::PI;

pub const AXIS_POINTS: usize = 11;

/// Integer masses on `{0, …, 10}` for each of two axes, each summing to 8.
/// Small dyadic weights make exact median ties common.
pub fn random_product_masses(rng: &mut Rng) -> [[u64; AXIS_POINTS]; 2] {
    let mut out = [[0u64; AXIS_POINTS]; 2];
    for axis in &mut out {
        let atoms: Vec<usize> = (0..1 + rng.below(4)).map(|_| rng.below(AXIS_POINTS as u64) as usize).collect();
        for _ in 0..8 {
            axis[atoms[rng.below(atoms.len() as u64) as usize]] += 1;
        }
    }
    out
}

/// Exhaustive minimisation of `Σ_ij a_i b_j (|i − q1| + |j − q2|)` over the
/// 11×11 integer grid, in exact integer arithmetic. Flat indices are row-major.
pub fn brute_force_product_argmin(m: &[[u64; AXIS_POINTS]; 2]) -> Vec<usize> {
    let mut values = Vec::with_capacity(AXIS_POINTS * AXIS_POINTS);
    for q1 in 0..AXIS_POINTS {
        for q2 in 0..AXIS_POINTS {
            let mut v = 0u64;
            for i in 0..AXIS_POINTS {
                for j in 0..AXIS_POINTS {
                    v += m[0][i] * m[1][j] * (i.abs_diff(q1) + j.abs_diff(q2)) as u64;
                }
            }
            values.push(v);
        }
    }
    let min = *values.iter().min().unwrap();
    (0..values.len()).filter(|&k| values[k] == min).collect()
}

/// Product of the exact per-axis median intervals, restricted to the axis grids.
pub fn library_product_set(m: &[[u64; AXIS_POINTS]; 2]) -> Vec<usize> {
    let axis = CandidateGrid::uniform_line(0.0, 10.0, AXIS_POINTS).unwrap();
    let product = CandidateGrid::product_l1(vec![axis.clone(), axis.clone()]).unwrap();
    let sets: Vec<_> = m
        .iter()
        .map(|masses| {
            let atoms = (0..AXIS_POINTS).map(|i| (i as f64, masses[i] as f64));
            median_interval_weighted(atoms, 0.0).unwrap().members(&axis).unwrap()
        })
        .collect();
    product_mean_set(&product, &sets, 1.0).unwrap().indices().to_vec()
}

/// Arc-length Fréchet function `Σ w d(θ, y)²` on `n` equally spaced angles,
/// minimised exhaustively. Ties are judged with an absolute `1e-12`.
pub fn circle_brute_force(n: usize, atoms: &[(f64, f64)]) -> Vec<usize> {
    let arc = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    };
    let values: Vec<f64> = (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64;
            atoms.iter().map(|&(y, w)| w * arc(theta, y).powi(2)).sum()
        })
        .collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (0..n).filter(|&k| values[k] <= min + 1e-12).collect()
}

/// Reference SplitMix64, written out independently of the library's generator.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn coin(&mut self) -> u64 {
        self.next() >> 63
    }
}

/// Piecewise-linear nondecreasing `h` with positive tail slope and `h > 0`
/// on `(0, ∞)`: up to eight segments of length in `[0.05, 20)`.
pub fn random_h(rng: &mut Rng) -> NondecreasingFn {
    let h0 = if rng.bernoulli() { 0.0 } else { 0.01 + 5.0 * rng.uniform() };
    let mut bp = vec![0.0];
    let mut vals = vec![h0];
    for i in 0..rng.below(9) {
        let rise = 5.0 * rng.uniform() + if i == 0 { 0.01 + 3.0 * rng.uniform() } else { 0.0 };
        bp.push(bp.last().unwrap() + 0.05 + 19.95 * rng.uniform());
        vals.push(vals.last().unwrap() + rise);
    }
    if h0 == 0.0 && bp.len() == 1 {
        return NondecreasingFn::linear(0.001 + 5.0 * rng.uniform());
    }
    NondecreasingFn::new(bp, vals, 0.001 + 5.0 * rng.uniform()).unwrap()
}

/// Nonnegative samples of 20 to 419 points; cases cycle through Pareto tails
/// of random and near-critical shape, exponential, uniform and integer data.
pub fn random_tail_sample(rng: &mut Rng, case: usize) -> Vec<f64> {
    let n = 20 + rng.below(400) as usize;
    let shape = 0.5 + 2.5 * rng.uniform();
    (0..n)
        .map(|_| match case % 5 {
            0 => rng.pareto(1.0, shape),
            1 => rng.pareto(0.5, 1.1),
            2 => -20.0 * rng.uniform_open0().ln(),
            3 => 100.0 * rng.uniform(),
            _ => rng.below(50) as f64,
        })
        .collect()
}

/// Broken invariants of the concave-`h` construction on `sample`.
pub fn construct_h_violations(sample: &[f64]) -> Vec<String> {
    let trace = construct_h(sample, None).unwrap();
    let h = &trace.result;
    let mut bad = Vec::new();
    if trace.z[0] != 0.0 || trace.x[0] != 0.0 {
        bad.push("sequences do not start at 0".to_string());
    }
    if trace.bounded {
        if *h != NondecreasingFn::identity() {
            bad.push("bounded path is not the identity".into());
        }
        return bad;
    }
    let (bp, v) = (h.breakpoints(), h.values());
    if !v.windows(2).all(|w| w[1] > w[0]) || !bp.windows(2).all(|w| w[1] > w[0]) {
        bad.push("not strictly increasing".into());
    }
    if h.tail_slope() <= 0.0 || h.tail_slope().is_nan() {
        bad.push("no divergence".into());
    }
    let mut slopes: Vec<f64> = (0..bp.len() - 1).map(|k| (v[k + 1] - v[k]) / (bp[k + 1] - bp[k])).collect();
    slopes.push(h.tail_slope());
    // slopes recomputed from (x_n, n) carry rounding in the last place
    if !slopes.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)) {
        bad.push("not concave".into());
    }
    if !trace.a.windows(2).all(|w| w[1] <= w[0]) {
        bad.push("a-sequence increases".into());
    }
    for (n, &xn) in trace.x.iter().enumerate() {
        if h.eval(xn).unwrap() != n as f64 {
            bad.push(format!("h(x_{n}) != {n}"));
        }
        if n as f64 > trace.h_tilde(xn) + 1.0 {
            bad.push(format!("h above h-tilde + 1 at x_{n}"));
        }
    }
    bad
}
