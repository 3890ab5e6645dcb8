//! Fréchet objectives on candidate grids and their ε-argmin sets.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{CostError, CostFunction};
pub use crate::metric::PointSet;
use crate::metric::{CandidateGrid, MetricError, Point};
use crate::par::{self, CompensatedSum};

/// Absolute slack added to every ε-argmin threshold so that floating-point
/// ties at the minimum are kept.
pub const ARGMIN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("{0}")]
    Domain(String),
    #[error("axis mismatch: {0}")]
    AxisMismatch(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for SolverError {
    fn from(e: csv::Error) -> Self {
        SolverError::Csv(e.to_string())
    }
}

/// Law with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    support: Vec<Point>,
    weights: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(support: Vec<Point>, weights: Vec<f64>) -> Result<Self, SolverError> {
        let bad = |m: String| Err(SolverError::InvalidDistribution(m));
        if support.is_empty() {
            return bad("support is empty".into());
        }
        if support.len() != weights.len() {
            return bad(format!("{} support points but {} weights", support.len(), weights.len()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return bad("weights must be finite and nonnegative".into());
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("weights sum to {total}, not 1"));
        }
        Ok(FiniteDistribution { support, weights })
    }

    pub fn uniform(support: Vec<Point>) -> Result<Self, SolverError> {
        let w = 1.0 / support.len().max(1) as f64;
        let weights = vec![w; support.len()];
        Self::new(support, weights)
    }

    pub fn point_mass(p: Point) -> Self {
        FiniteDistribution { support: vec![p], weights: vec![1.0] }
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the support point selected by `u` in `[0, 1)` through the
    /// cumulative weights.
    pub fn quantile_index(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        // u beyond the rounded total: last atom with positive weight
        self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Population,
    Empirical {
        n: usize,
    },
    /// Values supplied directly, e.g. deterministic fixtures.
    Given,
}

/// Objective values, one per grid point.
#[derive(Debug, Clone)]
pub struct Objective {
    grid: CandidateGrid,
    values: Vec<f64>,
    provenance: Provenance,
}

impl Objective {
    pub fn new(grid: &CandidateGrid, values: Vec<f64>, provenance: Provenance) -> Result<Self, SolverError> {
        if values.len() != grid.len() {
            return Err(SolverError::Domain(format!("{} values for a grid of {} points", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Domain("objective values must be finite".into()));
        }
        Ok(Objective { grid: grid.clone(), values, provenance })
    }

    pub fn from_fn(grid: &CandidateGrid, f: impl Fn(usize) -> f64) -> Result<Self, SolverError> {
        let values = (0..grid.len()).map(f).collect();
        Self::new(grid, values, Provenance::Given)
    }

    pub fn grid(&self) -> &CandidateGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    PowerDecay,
}

/// `ε_n = c` or `ε_n = c · n^(−exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub kind: ScheduleKind,
    pub c: f64,
    #[serde(default)]
    pub exponent: f64,
}

impl EpsilonSchedule {
    pub fn new(kind: ScheduleKind, c: f64, exponent: f64) -> Result<Self, SolverError> {
        let s = EpsilonSchedule { kind, c, exponent };
        s.validate()?;
        Ok(s)
    }

    pub fn zero() -> Self {
        EpsilonSchedule { kind: ScheduleKind::Constant, c: 0.0, exponent: 0.0 }
    }

    pub fn power_decay(c: f64, exponent: f64) -> Result<Self, SolverError> {
        Self::new(ScheduleKind::PowerDecay, c, exponent)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(SolverError::Domain("schedule constant c must be ≥ 0".into()));
        }
        if !(self.exponent >= 0.0) || !self.exponent.is_finite() {
            return Err(SolverError::Domain("schedule exponent must be ≥ 0".into()));
        }
        Ok(())
    }

    pub fn eps(&self, n: usize) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.c,
            ScheduleKind::PowerDecay => {
                if self.c == 0.0 {
                    0.0
                } else {
                    self.c * (n as f64).powf(-self.exponent)
                }
            }
        }
    }

    /// `ε_n → 0`.
    pub fn vanishes(&self) -> bool {
        self.c == 0.0 || (self.kind == ScheduleKind::PowerDecay && self.exponent > 0.0)
    }
}

/// `F(q_j) = Σ_i w_i c(y_i, q_j)` for every grid point.
pub fn population_objective(
    dist: &FiniteDistribution,
    cost: &CostFunction,
    grid: &CandidateGrid,
) -> Result<Objective, SolverError> {
    let values = weighted_objective(dist.support(), |i| dist.weights()[i], cost, grid)?;
    Objective::new(grid, values, Provenance::Population)
}

/// `F_n(q_j) = Σ_i c(y_i, q_j) / n`.
///
/// Repeated sample points are merged first, so the sum runs over distinct
/// points in order of first appearance with weights `count / n`. A sample
/// of one point repeated has exactly the objective of that point mass, and
/// a sample listing each support point once equals the uniform law.
pub fn empirical_objective(
    sample: &[Point],
    cost: &CostFunction,
    grid: &CandidateGrid,
) -> Result<Objective, SolverError> {
    if sample.is_empty() {
        return Err(SolverError::EmptySample);
    }
    let (atoms, counts) = group_points(sample);
    let n = sample.len() as f64;
    let values = weighted_objective(&atoms, |i| counts[i] as f64 / n, cost, grid)?;
    Objective::new(grid, values, Provenance::Empirical { n: sample.len() })
}

#[derive(Hash, PartialEq, Eq)]
enum PointKey {
    Vector(Vec<u64>),
    Angle(u64),
    Index(usize),
}

fn key_bits(x: f64) -> u64 {
    // +0.0 and -0.0 are the same point
    (x + 0.0).to_bits()
}

fn group_points(sample: &[Point]) -> (Vec<Point>, Vec<usize>) {
    let mut slot: HashMap<PointKey, usize> = HashMap::new();
    let mut atoms = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for p in sample {
        let key = match p {
            Point::Vector(c) => PointKey::Vector(c.iter().map(|&x| key_bits(x)).collect()),
            Point::Angle(t) => PointKey::Angle(key_bits(*t)),
            Point::Index(i) => PointKey::Index(*i),
        };
        let next = atoms.len();
        let j = *slot.entry(key).or_insert(next);
        if j == next {
            atoms.push(p.clone());
            counts.push(0);
        }
        counts[j] += 1;
    }
    (atoms, counts)
}

fn weighted_objective(
    data: &[Point],
    weight: impl Fn(usize) -> f64 + Sync + Send,
    cost: &CostFunction,
    grid: &CandidateGrid,
) -> Result<Vec<f64>, SolverError> {
    let space = grid.space();
    par::map_range(grid.len(), |j| {
        let q = grid.point(j);
        let mut acc = CompensatedSum::default();
        for (i, y) in data.iter().enumerate() {
            acc.add(weight(i) * cost.cost(space, y, q)?);
        }
        Ok(acc.value())
    })
    .into_iter()
    .collect()
}

/// Grid points with `value ≤ min + eps` (plus [`ARGMIN_TOL`]).
pub fn eps_argmin(obj: &Objective, eps: f64) -> Result<PointSet, SolverError> {
    if !(eps >= 0.0) {
        return Err(SolverError::Domain(format!("eps must be ≥ 0, got {eps}")));
    }
    let threshold = obj.min() + eps + ARGMIN_TOL;
    let indices = obj.values.iter().enumerate().filter_map(|(j, &v)| (v <= threshold).then_some(j)).collect();
    Ok(PointSet::from_sorted(&obj.grid, indices))
}

/// Closed interval `[lo, hi]` of the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo - ARGMIN_TOL <= x && x <= self.hi + ARGMIN_TOL
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.contains(other.lo) && self.contains(other.hi)
    }

    /// Grid points of a 1-D grid inside the interval.
    pub fn members(&self, grid: &CandidateGrid) -> Result<PointSet, SolverError> {
        let mut indices = Vec::new();
        for (j, p) in grid.points().iter().enumerate() {
            match p.coords() {
                Some([x]) => {
                    if self.contains(*x) {
                        indices.push(j);
                    }
                }
                _ => return Err(SolverError::AxisMismatch("interval members need a 1-D grid".into())),
            }
        }
        Ok(PointSet::from_sorted(grid, indices))
    }
}

/// Exact ε-argmin over ℝ of `q ↦ (1/n) Σ |y_i − q|`.
pub fn median_interval_1d(sample: &[f64], eps: f64) -> Result<Interval, SolverError> {
    if sample.is_empty() {
        return Err(SolverError::EmptySample);
    }
    median_interval_weighted(sample.iter().map(|&y| (y, 1.0)), eps)
}

/// Exact ε-argmin over ℝ of `q ↦ Σ w_i |y_i − q| / Σ w_i` for positive
/// total weight. Atoms may repeat and come in any order.
pub fn median_interval_weighted(
    atoms: impl IntoIterator<Item = (f64, f64)>,
    eps: f64,
) -> Result<Interval, SolverError> {
    if !(eps >= 0.0) {
        return Err(SolverError::Domain(format!("eps must be ≥ 0, got {eps}")));
    }
    let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
    if atoms.iter().any(|(y, w)| !y.is_finite() || !(*w >= 0.0) || !w.is_finite()) {
        return Err(SolverError::Domain("atoms must be finite with nonnegative weights".into()));
    }
    atoms.retain(|&(_, w)| w > 0.0);
    if atoms.is_empty() {
        return Err(SolverError::EmptySample);
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut nodes: Vec<f64> = Vec::with_capacity(atoms.len());
    let mut mass: Vec<f64> = Vec::with_capacity(atoms.len());
    for (y, w) in atoms {
        if nodes.last() == Some(&y) {
            *mass.last_mut().expect("paired") += w;
        } else {
            nodes.push(y);
            mass.push(w);
        }
    }
    let total: f64 = mass.iter().sum();
    let p: Vec<f64> = mass.iter().map(|w| w / total).collect();
    let m = nodes.len();

    // left mass and left first moment up to and including each node
    let mut left = Vec::with_capacity(m);
    let mut left_moment = Vec::with_capacity(m);
    let (mut l, mut sl) = (CompensatedSum::default(), CompensatedSum::default());
    for j in 0..m {
        l.add(p[j]);
        sl.add(p[j] * nodes[j]);
        left.push(l.value());
        left_moment.push(sl.value());
    }
    let moment = left_moment[m - 1];
    let f_at: Vec<f64> = (0..m)
        .map(|j| {
            let v = nodes[j];
            (v * left[j] - left_moment[j]) + ((moment - left_moment[j]) - v * (1.0 - left[j]))
        })
        .collect();
    let min = f_at.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = min + eps;
    let inside: Vec<usize> = (0..m).filter(|&j| f_at[j] <= threshold + ARGMIN_TOL).collect();
    let (ja, jb) = (inside[0], *inside.last().expect("minimum is inside"));

    let lo = {
        let room = (threshold - f_at[ja]).max(0.0);
        if ja == 0 {
            nodes[0] - room
        } else {
            // slope of F on (nodes[ja-1], nodes[ja]) is 2 L - 1 < 0
            let steep = 1.0 - 2.0 * left[ja - 1];
            if steep > 0.0 {
                (nodes[ja] - room / steep).max(nodes[ja - 1])
            } else {
                nodes[ja - 1]
            }
        }
    };
    let hi = {
        let room = (threshold - f_at[jb]).max(0.0);
        if jb + 1 == m {
            nodes[m - 1] + room
        } else {
            let steep = 2.0 * left[jb] - 1.0;
            if steep > 0.0 {
                (nodes[jb] + room / steep).min(nodes[jb + 1])
            } else {
                nodes[jb + 1]
            }
        }
    };
    Ok(Interval { lo, hi })
}

/// Cartesian product of per-axis mean sets, re-indexed into `product`.
///
/// `alpha ≥ 1` is the exponent of the product metric for which the product
/// decomposition of α-Fréchet means holds.
pub fn product_mean_set(product: &CandidateGrid, per_axis: &[PointSet], alpha: f64) -> Result<PointSet, SolverError> {
    if !(alpha >= 1.0) {
        return Err(SolverError::Domain(format!("product sets need alpha ≥ 1, got {alpha}")));
    }
    let axes = product.axes().ok_or_else(|| SolverError::AxisMismatch("target is not a product grid".into()))?;
    if axes.len() != per_axis.len() {
        return Err(SolverError::AxisMismatch(format!(
            "{} axis sets for a product of {} axes",
            per_axis.len(),
            axes.len()
        )));
    }
    for (k, (set, axis)) in per_axis.iter().zip(axes).enumerate() {
        if set.grid_id() != axis.id() {
            return Err(SolverError::AxisMismatch(format!("set {k} is not over axis {k}")));
        }
    }
    let mut flat = vec![0usize];
    for (set, axis) in per_axis.iter().zip(axes) {
        let mut next = Vec::with_capacity(flat.len() * set.len());
        for &f in &flat {
            for &i in set.indices() {
                next.push(f * axis.len() + i);
            }
        }
        flat = next;
    }
    // row-major enumeration of sorted axis sets is already sorted
    Ok(PointSet::from_sorted(product, flat))
}

fn coordinate_header(grid: &CandidateGrid) -> Vec<String> {
    match grid.point(0) {
        Point::Vector(c) => (1..=c.len()).map(|k| format!("x{k}")).collect(),
        Point::Angle(_) => vec!["theta".into()],
        Point::Index(_) => vec!["label".into()],
    }
}

fn coordinate_fields(p: &Point) -> Vec<String> {
    match p {
        Point::Vector(c) => c.iter().map(f64::to_string).collect(),
        Point::Angle(t) => vec![t.to_string()],
        Point::Index(i) => vec![i.to_string()],
    }
}

/// `index,<coordinates>,value` rows.
pub fn write_objective_csv<W: Write>(obj: &Objective, writer: W) -> Result<(), SolverError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["index".to_string()];
    header.extend(coordinate_header(obj.grid()));
    header.push("value".into());
    w.write_record(&header)?;
    for (j, v) in obj.values().iter().enumerate() {
        let mut row = vec![j.to_string()];
        row.extend(coordinate_fields(obj.grid().point(j)));
        row.push(v.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| SolverError::Csv(e.to_string()))
}

/// `index,<coordinates>,member` rows over the whole grid.
pub fn write_point_set_csv<W: Write>(grid: &CandidateGrid, set: &PointSet, writer: W) -> Result<(), SolverError> {
    set.check_grid(grid)?;
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["index".to_string()];
    header.extend(coordinate_header(grid));
    header.push("member".into());
    w.write_record(&header)?;
    for j in 0..grid.len() {
        let mut row = vec![j.to_string()];
        row.extend(coordinate_fields(grid.point(j)));
        row.push(u8::from(set.contains(j)).to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| SolverError::Csv(e.to_string()))
}
