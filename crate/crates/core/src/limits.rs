//! Set distances and finite-horizon limit diagnostics for sequences of grid
//! subsets and grid objectives.
//!
//! Every limit notion here is a surrogate over the available horizon: a
//! `tail_start` position and a tolerance `tol` replace the asymptotic
//! quantifiers, and reports carry the parameters they were computed with.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{ball_members, CandidateGrid, MetricError, PointSet};
use crate::par;
use crate::solver::{eps_argmin, Objective, SolverError};

/// Default diameter cap below which a tail union counts as bounded.
pub const DEFAULT_BOUNDED_CAP: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("tail start {tail_start} is not below the sequence length {len}")]
    TailOutOfRange { tail_start: usize, len: usize },
    #[error("sequence is empty")]
    EmptySequence,
    #[error("{0}")]
    Domain(String),
}

/// `d(B, q) = min_{b∈B} d(b, q)`; `+∞` for empty `B`.
fn dist_to_set(grid: &CandidateGrid, set: &PointSet, q: usize) -> f64 {
    if set.contains(q) {
        return 0.0;
    }
    set.indices().iter().map(|&b| grid.dist(b, q)).fold(f64::INFINITY, f64::min)
}

/// One-sided Hausdorff distance `sup_{a∈A} inf_{b∈B} d(a, b)`.
///
/// `d_subset(∅, B) = 0` and `d_subset(A, ∅) = +∞` for nonempty `A`.
pub fn d_subset(grid: &CandidateGrid, a: &PointSet, b: &PointSet) -> Result<f64, LimitError> {
    a.check_grid(grid)?;
    b.check_grid(grid)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let idx = a.indices();
    Ok(par::max_range(idx.len(), |k| dist_to_set(grid, b, idx[k])))
}

pub fn d_hausdorff(grid: &CandidateGrid, a: &PointSet, b: &PointSet) -> Result<f64, LimitError> {
    Ok(d_subset(grid, a, b)?.max(d_subset(grid, b, a)?))
}

/// Ordered sets over one grid, labelled by `n` (sample size or iteration).
#[derive(Debug, Clone)]
pub struct SetSequence {
    grid: CandidateGrid,
    ns: Vec<usize>,
    sets: Vec<PointSet>,
}

impl SetSequence {
    /// Labels default to `1..=sets.len()`.
    pub fn new(grid: &CandidateGrid, sets: Vec<PointSet>) -> Result<Self, LimitError> {
        let ns = (1..=sets.len()).collect();
        Self::with_labels(grid, ns, sets)
    }

    pub fn with_labels(grid: &CandidateGrid, ns: Vec<usize>, sets: Vec<PointSet>) -> Result<Self, LimitError> {
        if ns.len() != sets.len() {
            return Err(LimitError::Domain(format!("{} labels for {} sets", ns.len(), sets.len())));
        }
        for s in &sets {
            s.check_grid(grid)?;
        }
        Ok(SetSequence { grid: grid.clone(), ns, sets })
    }

    pub fn grid(&self) -> &CandidateGrid {
        &self.grid
    }

    pub fn sets(&self) -> &[PointSet] {
        &self.sets
    }

    pub fn labels(&self) -> &[usize] {
        &self.ns
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    fn tail(&self, tail_start: usize) -> Result<&[PointSet], LimitError> {
        if tail_start >= self.sets.len() {
            return Err(LimitError::TailOutOfRange { tail_start, len: self.sets.len() });
        }
        Ok(&self.sets[tail_start..])
    }

    pub fn d_subset_trajectory(&self, target: &PointSet) -> Result<Vec<f64>, LimitError> {
        self.sets.iter().map(|s| d_subset(&self.grid, s, target)).collect()
    }

    pub fn d_hausdorff_trajectory(&self, target: &PointSet) -> Result<Vec<f64>, LimitError> {
        self.sets.iter().map(|s| d_hausdorff(&self.grid, s, target)).collect()
    }
}

fn limit_estimate(seq: &SetSequence, tail_start: usize, tol: f64, outer: bool) -> Result<PointSet, LimitError> {
    let tail = seq.tail(tail_start)?;
    let grid = &seq.grid;
    let keep = par::map_range(grid.len(), |q| {
        let mut ds = tail.iter().map(|s| dist_to_set(grid, s, q));
        if outer {
            ds.any(|d| d <= tol)
        } else {
            ds.all(|d| d <= tol)
        }
    });
    let indices = keep.into_iter().enumerate().filter_map(|(q, k)| k.then_some(q)).collect();
    Ok(PointSet::from_sorted(grid, indices))
}

/// Grid points with `min_{n ≥ tail} d(B_n, q) ≤ tol`.
///
/// Over-approximates the outer limit: a point hit once in the tail counts.
pub fn outer_limit_estimate(seq: &SetSequence, tail_start: usize, tol: f64) -> Result<PointSet, LimitError> {
    limit_estimate(seq, tail_start, tol, true)
}

/// Grid points with `max_{n ≥ tail} d(B_n, q) ≤ tol`.
pub fn inner_limit_estimate(seq: &SetSequence, tail_start: usize, tol: f64) -> Result<PointSet, LimitError> {
    limit_estimate(seq, tail_start, tol, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedWitness {
    pub bounded: bool,
    /// Smallest position whose tail union has diameter below the cap.
    pub witness: Option<usize>,
    /// Diameter of that tail union, or of the last set when unbounded.
    pub diameter: f64,
}

/// Tail unions are grown from the end; the sequence is bounded when some
/// tail union has diameter strictly below `cap`.
pub fn eventually_bounded(seq: &SetSequence, cap: f64) -> Result<BoundedWitness, LimitError> {
    if seq.is_empty() {
        return Err(LimitError::EmptySequence);
    }
    if !(cap > 0.0) {
        return Err(LimitError::Domain(format!("cap must be positive, got {cap}")));
    }
    let grid = &seq.grid;
    let mut union: Vec<usize> = Vec::new();
    let mut in_union = vec![false; grid.len()];
    let mut diam = 0.0f64;
    let mut best: Option<(usize, f64)> = None;
    let mut last_diam = None;
    for k in (0..seq.len()).rev() {
        for &a in seq.sets[k].indices() {
            if in_union[a] {
                continue;
            }
            let far = par::max_range(union.len(), |b| grid.dist(a, union[b]));
            diam = diam.max(far);
            in_union[a] = true;
            union.push(a);
        }
        last_diam.get_or_insert(diam);
        if diam < cap {
            best = Some((k, diam));
        } else {
            // unions only grow towards the front
            break;
        }
    }
    Ok(match best {
        Some((k, d)) => BoundedWitness { bounded: true, witness: Some(k), diameter: d },
        None => BoundedWitness { bounded: false, witness: None, diameter: last_diam.unwrap_or(0.0) },
    })
}

/// `(δ, d_subset(δ-argmin f, argmin f))` for each `δ` of a strictly
/// decreasing positive list.
pub fn approachable_minimizers_check(obj: &Objective, eps_list: &[f64]) -> Result<Vec<(f64, f64)>, LimitError> {
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(LimitError::Domain("eps values must be positive".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LimitError::Domain("eps values must be strictly decreasing".into()));
    }
    let grid = obj.grid();
    let argmin = eps_argmin(obj, 0.0)?;
    eps_list.iter().map(|&e| Ok((e, d_subset(grid, &eps_argmin(obj, e)?, &argmin)?))).collect()
}

fn check_same_grid(fs: &[Objective], f: &Objective) -> Result<(), LimitError> {
    if fs.iter().any(|g| g.grid() != f.grid()) {
        return Err(MetricError::GridMismatch.into());
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpiPointReport {
    pub lower: bool,
    pub upper: bool,
    /// `min_{n ≥ tail} inf_{B_δ(x)} f_n − f(x)`.
    pub lower_margin: f64,
    /// `max_{n ≥ tail} f_n(y_n) − f(x)` with `y_n` the ball argmin.
    pub upper_margin: f64,
}

impl EpiPointReport {
    pub fn pass(&self) -> bool {
        self.lower && self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpiReport {
    pub points: Vec<EpiPointReport>,
    pub delta: f64,
    pub tol: f64,
    pub tail_start: usize,
}

impl EpiReport {
    pub fn all_pass(&self) -> bool {
        self.points.iter().all(EpiPointReport::pass)
    }

    pub fn failing(&self) -> Vec<usize> {
        (0..self.points.len()).filter(|&j| !self.points[j].pass()).collect()
    }
}

/// Grid form of the two epi-convergence conditions at every grid point,
/// over the tail `fs[tail_start..]` and the open ball of radius `delta`.
///
/// With `delta` below the minimal point separation the ball is `{x}` and
/// the check reduces to pointwise convergence within `tol`.
pub fn epi_convergence_surrogate(
    fs: &[Objective],
    f: &Objective,
    delta: f64,
    tol: f64,
    tail_start: usize,
) -> Result<EpiReport, LimitError> {
    check_same_grid(fs, f)?;
    if tail_start >= fs.len() {
        return Err(LimitError::TailOutOfRange { tail_start, len: fs.len() });
    }
    if !(delta > 0.0) {
        return Err(LimitError::Domain(format!("delta must be positive, got {delta}")));
    }
    let grid = f.grid();
    let tail = &fs[tail_start..];
    let points = par::map_range(grid.len(), |x| {
        let ball = ball_members(grid, grid.point(x), delta).expect("grid point is in the space");
        let mut lowest = f64::INFINITY;
        let mut highest = f64::NEG_INFINITY;
        for fn_ in tail {
            let ball_min = ball.indices().iter().map(|&y| fn_.value(y)).fold(f64::INFINITY, f64::min);
            lowest = lowest.min(ball_min);
            highest = highest.max(ball_min);
        }
        let fx = f.value(x);
        EpiPointReport {
            lower: lowest >= fx - tol,
            upper: highest <= fx + tol,
            lower_margin: lowest - fx,
            upper_margin: highest - fx,
        }
    });
    Ok(EpiReport { points, delta, tol, tail_start })
}

/// `sup_{q ∈ subset} |f_n(q) − f(q)|` for each `n`.
pub fn uniform_on_bounded_check(fs: &[Objective], f: &Objective, subset: &PointSet) -> Result<Vec<f64>, LimitError> {
    check_same_grid(fs, f)?;
    subset.check_grid(f.grid())?;
    let idx = subset.indices();
    Ok(par::map_slice(fs, |fn_| idx.iter().map(|&q| (fn_.value(q) - f.value(q)).abs()).fold(0.0, f64::max)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    pub tail_start: usize,
    pub tol: f64,
    pub cap: f64,
}

impl Default for LimitParams {
    fn default() -> Self {
        LimitParams { tail_start: 0, tol: 0.0, cap: DEFAULT_BOUNDED_CAP }
    }
}

/// Outer and inner estimates, distance trajectories against a target set
/// and the boundedness witness. Infinite distances serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub outer: Vec<usize>,
    pub inner: Vec<usize>,
    pub d_sub: Vec<f64>,
    pub d_haus: Vec<f64>,
    pub bounded: bool,
    pub witness: Option<usize>,
    pub params: LimitParams,
}

impl LimitReport {
    pub fn compute(seq: &SetSequence, target: &PointSet, params: LimitParams) -> Result<Self, LimitError> {
        target.check_grid(seq.grid())?;
        let outer = outer_limit_estimate(seq, params.tail_start, params.tol)?;
        let inner = inner_limit_estimate(seq, params.tail_start, params.tol)?;
        let bounded = eventually_bounded(seq, params.cap)?;
        Ok(LimitReport {
            outer: outer.indices().to_vec(),
            inner: inner.indices().to_vec(),
            d_sub: seq.d_subset_trajectory(target)?,
            d_haus: seq.d_hausdorff_trajectory(target)?,
            bounded: bounded.bounded,
            witness: bounded.witness,
            params,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub mod fixtures {
    //! Truncated `N0` counterexamples: in each a single hypothesis of the
    //! bounded-sets convergence theorem fails, and so does its conclusion.
    //!
    //! - `unit_indicator`: `f_n = 1 − 1{0, n}` under `d(i, j) = 1`; not
    //!   uniform on bounded sets.
    //! - `line_indicator`: the same functions under `d(i, j) = |i − j|`;
    //!   minimizer sets are not eventually bounded.
    //! - `reciprocal`: `f(i) = 1/i`, `f_n = f · 1{i < n}` under the unit
    //!   metric; `f` has no approachable minimizers.

    use serde::{Deserialize, Serialize};

    use super::*;
    use crate::metric::{MetricSpace, Point};

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(rename_all = "snake_case")]
    pub enum FixtureKind {
        UnitIndicator,
        LineIndicator,
        Reciprocal,
    }

    impl FixtureKind {
        pub const ALL: [FixtureKind; 3] =
            [FixtureKind::UnitIndicator, FixtureKind::LineIndicator, FixtureKind::Reciprocal];

        pub fn name(self) -> &'static str {
            match self {
                FixtureKind::UnitIndicator => "unit_indicator",
                FixtureKind::LineIndicator => "line_indicator",
                FixtureKind::Reciprocal => "reciprocal",
            }
        }
    }

    /// `f_1..f_N` and `f` on the grid `{0, …, N}`.
    #[derive(Debug, Clone)]
    pub struct Fixture {
        pub kind: FixtureKind,
        pub grid: CandidateGrid,
        pub fs: Vec<Objective>,
        pub f: Objective,
    }

    impl Fixture {
        pub fn new(kind: FixtureKind, horizon: usize) -> Result<Self, LimitError> {
            if horizon < 2 {
                return Err(LimitError::Domain("horizon must be at least 2".into()));
            }
            let space = match kind {
                FixtureKind::LineIndicator => MetricSpace::n0_line(),
                _ => MetricSpace::n0_unit(),
            };
            let grid = CandidateGrid::n0(space, horizon + 1)?;
            let (fs, f) = match kind {
                FixtureKind::UnitIndicator | FixtureKind::LineIndicator => {
                    let indicator = |n: usize| move |i: usize| if i == 0 || i == n { 0.0 } else { 1.0 };
                    let fs = (1..=horizon)
                        .map(|n| Objective::from_fn(&grid, indicator(n)))
                        .collect::<Result<Vec<_>, _>>()?;
                    (fs, Objective::from_fn(&grid, indicator(0))?)
                }
                FixtureKind::Reciprocal => {
                    let f = |i: usize| if i == 0 { 0.0 } else { 1.0 / i as f64 };
                    let fs = (1..=horizon)
                        .map(|n| Objective::from_fn(&grid, move |i| if i < n { f(i) } else { 0.0 }))
                        .collect::<Result<Vec<_>, _>>()?;
                    (fs, Objective::from_fn(&grid, f)?)
                }
            };
            Ok(Fixture { kind, grid, fs, f })
        }

        pub fn horizon(&self) -> usize {
            self.fs.len()
        }

        pub fn argmin_sequence(&self) -> Result<SetSequence, LimitError> {
            let sets = self.fs.iter().map(|g| eps_argmin(g, 0.0)).collect::<Result<Vec<_>, _>>()?;
            SetSequence::new(&self.grid, sets)
        }

        pub fn diagnose(&self, params: LimitParams) -> Result<Diagnosis, LimitError> {
            let grid = &self.grid;
            let origin = Point::Index(0);

            // bounded test set: the open cap-ball around the origin
            let test_set = ball_members(grid, &origin, params.cap)?;
            let sup_deviation = uniform_on_bounded_check(&self.fs, &self.f, &test_set)?;
            let tail_dev = sup_deviation[params.tail_start..].iter().copied().fold(0.0, f64::max);

            let seq = self.argmin_sequence()?;
            let bounded = eventually_bounded(&seq, params.cap)?;

            let eps_list: Vec<f64> = (1..=self.horizon()).map(|k| 1.0 / k as f64).collect();
            let approach = approachable_minimizers_check(&self.f, &eps_list)?;
            let approach_final = approach.last().map_or(0.0, |&(_, d)| d);

            let argmin_f = eps_argmin(&self.f, 0.0)?;
            let d_sub = seq.d_subset_trajectory(&argmin_f)?;
            let x_n_distance: Vec<f64> = (1..=self.horizon())
                .map(|n| {
                    debug_assert!(seq.sets()[n - 1].contains(n));
                    argmin_f.indices().iter().map(|&z| grid.dist(n, z)).fold(f64::INFINITY, f64::min)
                })
                .collect();

            Ok(Diagnosis {
                kind: self.kind,
                uniform_on_bounded: tail_dev <= params.tol,
                eventually_bounded: bounded.bounded,
                approachable: approach_final <= params.tol,
                sup_deviation,
                bounded_witness: bounded,
                approach,
                d_sub,
                x_n_distance,
                params,
            })
        }
    }

    /// Hypothesis verdicts of one fixture.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct Diagnosis {
        pub kind: FixtureKind,
        pub uniform_on_bounded: bool,
        pub eventually_bounded: bool,
        pub approachable: bool,
        pub sup_deviation: Vec<f64>,
        pub bounded_witness: BoundedWitness,
        pub approach: Vec<(f64, f64)>,
        /// `d_subset(argmin f_n, argmin f)` for `n = 1..=N`.
        pub d_sub: Vec<f64>,
        /// Distance from `x_n = n ∈ argmin f_n` to `argmin f`.
        pub x_n_distance: Vec<f64>,
        pub params: LimitParams,
    }

    impl Diagnosis {
        /// Hypotheses that fail, by name.
        pub fn violated(&self) -> Vec<&'static str> {
            let mut v = Vec::new();
            if !self.uniform_on_bounded {
                v.push("uniform_on_bounded");
            }
            if !self.eventually_bounded {
                v.push("eventually_bounded");
            }
            if !self.approachable {
                v.push("approachable");
            }
            v
        }
    }

    /// Parameters used by the fixture experiment and its tests.
    pub fn default_params() -> LimitParams {
        LimitParams { tail_start: 50, tol: 0.05, cap: DEFAULT_BOUNDED_CAP }
    }
}
