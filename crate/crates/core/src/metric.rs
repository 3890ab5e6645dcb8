//! Metric spaces over finite candidate grids.
//!
//! Every downstream computation sees points and distances only through
//! [`MetricSpace::distance`] and the [`CandidateGrid`] that discretizes the
//! descriptor space. Grids are reference counted; clones share identity, and
//! [`PointSet`]s remember the identity of the grid they index.

use std::f64::consts::{PI, TAU};
use std::io::Read;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::IntegratedH;
use crate::lab::Rng;
use crate::par;

/// Tables up to this many points get a full `O(n^3)` triangle check.
pub const FULL_TRIANGLE_CHECK_LIMIT: usize = 512;
/// Number of random triples checked for larger tables.
pub const SAMPLED_TRIANGLE_CHECKS: usize = 200_000;

const TABLE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid distance table: {0}")]
    InvalidTable(String),
    #[error("invalid metric transform: {0}")]
    InvalidTransform(String),
    #[error("grid points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("point sets belong to different grids")]
    GridMismatch,
    #[error("grid index {index} out of range for grid of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for MetricError {
    fn from(e: csv::Error) -> Self {
        MetricError::Csv(e.to_string())
    }
}

/// A point of a metric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Point {
    Vector(Vec<f64>),
    /// Radians, normalized to `[0, 2π)`.
    Angle(f64),
    /// Index into a distance table or into `N0`.
    Index(usize),
}

impl Point {
    pub fn scalar(x: f64) -> Self {
        Point::Vector(vec![x])
    }

    pub fn vector(coords: impl Into<Vec<f64>>) -> Self {
        Point::Vector(coords.into())
    }

    /// Angle reduced to `[0, 2π)`.
    pub fn angle(theta: f64) -> Self {
        let mut t = theta.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        if t >= TAU {
            t = 0.0;
        }
        Point::Angle(t)
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Vector(c) => Some(c),
            _ => None,
        }
    }
}

/// Square symmetric matrix of pairwise distances with point labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    labels: Vec<String>,
    n: usize,
    entries: Vec<f64>,
}

impl DistanceTable {
    /// Builds and validates a table. Rows are given in label order.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let n = labels.len();
        if n == 0 {
            return Err(MetricError::InvalidTable("empty table".into()));
        }
        if rows.len() != n {
            return Err(MetricError::InvalidTable(format!("{} labels but {} rows", n, rows.len())));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::InvalidTable(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            entries.extend(row);
        }
        let table = DistanceTable { labels, n, entries };
        table.validate()?;
        Ok(table)
    }

    /// Table from an integer-indexed distance function, e.g. truncations of
    /// infinite fixture spaces.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self, MetricError> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let rows = (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect();
        Self::new(labels, rows)
    }

    /// Reads a square CSV matrix whose header row holds the point labels.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, MetricError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let labels: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| MetricError::Csv(format!("row {}: cannot parse {s:?} as a number", r + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::new(labels, rows)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    fn validate(&self) -> Result<(), MetricError> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let d = self.get(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(MetricError::InvalidTable(format!(
                        "entry ({i},{j}) = {d} is not a finite nonnegative number"
                    )));
                }
                if i == j && d != 0.0 {
                    return Err(MetricError::InvalidTable(format!("diagonal entry {i} is {d}")));
                }
                if i != j && d == 0.0 {
                    return Err(MetricError::InvalidTable(format!("distinct points {i} and {j} at distance 0")));
                }
                if d != self.get(j, i) {
                    return Err(MetricError::InvalidTable(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        let violates = |i: usize, j: usize, k: usize| {
            let lhs = self.get(i, k);
            let rhs = self.get(i, j) + self.get(j, k);
            lhs > rhs + TABLE_TOL * lhs.max(1.0)
        };
        let triangle_error =
            |i, j, k| MetricError::InvalidTable(format!("triangle inequality fails for ({i},{j},{k})"));
        if n <= FULL_TRIANGLE_CHECK_LIMIT {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if violates(i, j, k) {
                            return Err(triangle_error(i, j, k));
                        }
                    }
                }
            }
        } else {
            let mut rng = Rng::new(0x7AB1E);
            for _ in 0..SAMPLED_TRIANGLE_CHECKS {
                let i = rng.below(n as u64) as usize;
                let j = rng.below(n as u64) as usize;
                let k = rng.below(n as u64) as usize;
                if violates(i, j, k) {
                    return Err(triangle_error(i, j, k));
                }
            }
        }
        Ok(())
    }
}

/// Base geometry of a metric space.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceKind {
    /// `R^dim` with the Euclidean norm.
    Euclidean { dim: usize },
    /// `R^dim` with the L1 norm.
    ProductL1 { dim: usize },
    /// Unit circle with arc-length distance.
    Circle,
    /// Finite space given by a distance table.
    Table(Arc<DistanceTable>),
    /// `N0` with `d(i, j) = 1` for `i != j`.
    N0Unit,
    /// `N0` with `d(i, j) = |i - j|`.
    N0Line,
}

/// Monotone reparametrization of distances that keeps the metric axioms.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricTransform {
    /// `d^alpha` with `alpha` in `(0, 1]`.
    Power { alpha: f64 },
    /// `H^{-1}(d)` for a convex, strictly increasing integrated `H`.
    ConcaveInverse(IntegratedH),
}

impl MetricTransform {
    pub fn power(alpha: f64) -> Result<Self, MetricError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(MetricError::InvalidTransform(format!("power exponent must lie in (0, 1], got {alpha}")));
        }
        Ok(MetricTransform::Power { alpha })
    }

    pub fn concave_inverse(h: IntegratedH) -> Result<Self, MetricError> {
        if !h.is_strictly_increasing() {
            return Err(MetricError::InvalidTransform(
                "H must be strictly increasing from 0 (h may not vanish on an initial segment)".into(),
            ));
        }
        Ok(MetricTransform::ConcaveInverse(h))
    }

    fn apply(&self, d: f64) -> f64 {
        match self {
            MetricTransform::Power { alpha } => {
                if *alpha == 1.0 {
                    d
                } else {
                    d.powf(*alpha)
                }
            }
            MetricTransform::ConcaveInverse(h) => h.invert(d).expect("strictly increasing H is invertible on [0, inf)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    kind: SpaceKind,
    transform: Option<MetricTransform>,
}

impl MetricSpace {
    pub fn euclidean(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self::from_kind(SpaceKind::Euclidean { dim })
    }

    pub fn product_l1(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self::from_kind(SpaceKind::ProductL1 { dim })
    }

    pub fn circle() -> Self {
        Self::from_kind(SpaceKind::Circle)
    }

    pub fn table(table: DistanceTable) -> Self {
        Self::from_kind(SpaceKind::Table(Arc::new(table)))
    }

    pub fn n0_unit() -> Self {
        Self::from_kind(SpaceKind::N0Unit)
    }

    pub fn n0_line() -> Self {
        Self::from_kind(SpaceKind::N0Line)
    }

    fn from_kind(kind: SpaceKind) -> Self {
        MetricSpace { kind, transform: None }
    }

    pub fn with_transform(mut self, transform: MetricTransform) -> Self {
        self.transform = Some(transform);
        self
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn transform(&self) -> Option<&MetricTransform> {
        self.transform.as_ref()
    }

    /// Space without its transform.
    pub fn base(&self) -> MetricSpace {
        Self::from_kind(self.kind.clone())
    }

    pub fn check_point(&self, p: &Point) -> Result<(), MetricError> {
        match (&self.kind, p) {
            (SpaceKind::Euclidean { dim } | SpaceKind::ProductL1 { dim }, Point::Vector(c)) => {
                if c.len() != *dim {
                    return Err(MetricError::InvalidPoint(format!(
                        "vector of dimension {} in a space of dimension {dim}",
                        c.len()
                    )));
                }
                if c.iter().any(|x| !x.is_finite()) {
                    return Err(MetricError::InvalidPoint("non-finite coordinate".into()));
                }
                Ok(())
            }
            (SpaceKind::Circle, Point::Angle(t)) => {
                if (0.0..TAU).contains(t) {
                    Ok(())
                } else {
                    Err(MetricError::InvalidPoint(format!("angle {t} is not normalized to [0, 2pi)")))
                }
            }
            (SpaceKind::Table(table), Point::Index(i)) => {
                if *i < table.len() {
                    Ok(())
                } else {
                    Err(MetricError::InvalidPoint(format!("index {i} outside a table of {} points", table.len())))
                }
            }
            (SpaceKind::N0Unit | SpaceKind::N0Line, Point::Index(_)) => Ok(()),
            (kind, p) => {
                Err(MetricError::InvalidPoint(format!("point {p:?} does not belong to a {} space", kind_name(kind))))
            }
        }
    }

    /// Untransformed distance.
    pub fn base_distance(&self, q: &Point, p: &Point) -> Result<f64, MetricError> {
        self.check_point(q)?;
        self.check_point(p)?;
        Ok(self.base_distance_unchecked(q, p))
    }

    fn base_distance_unchecked(&self, q: &Point, p: &Point) -> f64 {
        match (&self.kind, q, p) {
            (SpaceKind::Euclidean { .. }, Point::Vector(a), Point::Vector(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }
            (SpaceKind::ProductL1 { .. }, Point::Vector(a), Point::Vector(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
            }
            (SpaceKind::Circle, Point::Angle(a), Point::Angle(b)) => {
                let diff = (a - b).abs();
                diff.min(TAU - diff)
            }
            (SpaceKind::Table(t), Point::Index(i), Point::Index(j)) => t.get(*i, *j),
            (SpaceKind::N0Unit, Point::Index(i), Point::Index(j)) => {
                if i == j {
                    0.0
                } else {
                    1.0
                }
            }
            (SpaceKind::N0Line, Point::Index(i), Point::Index(j)) => i.abs_diff(*j) as f64,
            _ => unreachable!("points were checked against the space"),
        }
    }

    /// Distance with the transform applied after the base distance.
    pub fn distance(&self, q: &Point, p: &Point) -> Result<f64, MetricError> {
        let d = self.base_distance(q, p)?;
        Ok(self.transformed(d))
    }

    pub(crate) fn distance_unchecked(&self, q: &Point, p: &Point) -> f64 {
        self.transformed(self.base_distance_unchecked(q, p))
    }

    fn transformed(&self, d: f64) -> f64 {
        match &self.transform {
            None => d,
            Some(t) => t.apply(d),
        }
    }
}

fn kind_name(kind: &SpaceKind) -> &'static str {
    match kind {
        SpaceKind::Euclidean { .. } => "euclidean",
        SpaceKind::ProductL1 { .. } => "product-L1",
        SpaceKind::Circle => "circle",
        SpaceKind::Table(_) => "distance-table",
        SpaceKind::N0Unit => "N0-unit",
        SpaceKind::N0Line => "N0-line",
    }
}

/// Identity of a grid, shared by clones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridId(u64);

static NEXT_GRID_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug)]
struct GridInner {
    id: GridId,
    space: MetricSpace,
    points: Vec<Point>,
    mesh: f64,
    axes: Option<Vec<CandidateGrid>>,
}

/// Ordered finite discretization of a metric space.
#[derive(Debug, Clone)]
pub struct CandidateGrid(Arc<GridInner>);

impl PartialEq for CandidateGrid {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl CandidateGrid {
    /// Validates every point and pairwise distinctness.
    pub fn new(space: MetricSpace, points: Vec<Point>, mesh: f64) -> Result<Self, MetricError> {
        Self::build(space, points, mesh, None)
    }

    fn build(
        space: MetricSpace,
        points: Vec<Point>,
        mesh: f64,
        axes: Option<Vec<CandidateGrid>>,
    ) -> Result<Self, MetricError> {
        if points.is_empty() {
            return Err(MetricError::InvalidGrid("a grid needs at least one point".into()));
        }
        if !(mesh >= 0.0) || !mesh.is_finite() {
            return Err(MetricError::InvalidGrid(format!("mesh must be finite and >= 0, got {mesh}")));
        }
        for p in &points {
            space.check_point(p)?;
        }
        let base = space.base();
        let dup = par::map_range(points.len(), |i| {
            (i + 1..points.len()).find(|&j| base.base_distance_unchecked(&points[i], &points[j]) == 0.0).map(|j| (i, j))
        });
        if let Some((i, j)) = dup.into_iter().flatten().next() {
            return Err(MetricError::DuplicatePoint(i, j));
        }
        let id = GridId(NEXT_GRID_ID.fetch_add(1, Ordering::Relaxed));
        Ok(CandidateGrid(Arc::new(GridInner { id, space, points, mesh, axes })))
    }

    /// Points of the real line (1-D Euclidean space).
    pub fn line(values: &[f64]) -> Result<Self, MetricError> {
        let points = values.iter().map(|&x| Point::scalar(x)).collect();
        Self::new(MetricSpace::euclidean(1), points, 0.0)
    }

    /// `count` equally spaced points on `[lo, hi]`; mesh is half the spacing.
    pub fn uniform_line(lo: f64, hi: f64, count: usize) -> Result<Self, MetricError> {
        if count < 2 || !(hi > lo) {
            return Err(MetricError::InvalidGrid("uniform line needs count >= 2 and hi > lo".into()));
        }
        let step = (hi - lo) / (count - 1) as f64;
        let values: Vec<f64> = (0..count).map(|i| if i + 1 == count { hi } else { lo + step * i as f64 }).collect();
        let points = values.iter().map(|&x| Point::scalar(x)).collect();
        Self::new(MetricSpace::euclidean(1), points, step / 2.0)
    }

    /// `count` equally spaced angles `2 pi j / count`.
    pub fn circle(count: usize) -> Result<Self, MetricError> {
        if count == 0 {
            return Err(MetricError::InvalidGrid("circle grid needs count >= 1".into()));
        }
        let points = (0..count).map(|j| Point::angle(TAU * j as f64 / count as f64)).collect();
        Self::new(MetricSpace::circle(), points, PI / count as f64)
    }

    /// The first `count` integers of an `N0` space.
    pub fn n0(space: MetricSpace, count: usize) -> Result<Self, MetricError> {
        if !matches!(space.kind(), SpaceKind::N0Unit | SpaceKind::N0Line) {
            return Err(MetricError::InvalidGrid("n0 grid requires an N0 space".into()));
        }
        Self::new(space, (0..count).map(Point::Index).collect(), 0.0)
    }

    /// All points of a distance-table space.
    pub fn table(space: MetricSpace) -> Result<Self, MetricError> {
        let n = match space.kind() {
            SpaceKind::Table(t) => t.len(),
            _ => return Err(MetricError::InvalidGrid("table grid requires a table space".into())),
        };
        Self::new(space, (0..n).map(Point::Index).collect(), 0.0)
    }

    /// Row-major product of 1-D Euclidean axis grids under the L1 metric.
    pub fn product_l1(axes: Vec<CandidateGrid>) -> Result<Self, MetricError> {
        if axes.is_empty() {
            return Err(MetricError::InvalidGrid("product grid needs at least one axis".into()));
        }
        for a in &axes {
            if a.space() != &MetricSpace::euclidean(1) {
                return Err(MetricError::InvalidGrid("product axes must be untransformed 1-D Euclidean grids".into()));
            }
        }
        let dims: Vec<usize> = axes.iter().map(CandidateGrid::len).collect();
        let total: usize = dims.iter().product();
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let multi = unravel(flat, &dims);
            let coords = multi
                .iter()
                .zip(&axes)
                .map(|(&i, a)| a.point(i).coords().expect("axis points are vectors")[0])
                .collect::<Vec<_>>();
            points.push(Point::Vector(coords));
        }
        let mesh = axes.iter().map(CandidateGrid::mesh).sum();
        Self::build(MetricSpace::product_l1(axes.len()), points, mesh, Some(axes))
    }

    /// Reads one point per CSV row after a header row. Vector spaces take one
    /// column per coordinate; circles take one angle in radians; index spaces
    /// take one nonnegative integer.
    pub fn from_csv<R: Read>(space: MetricSpace, mesh: f64, reader: R) -> Result<Self, MetricError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let bad = |s: &str| MetricError::Csv(format!("row {}: cannot parse {s:?}", r + 1));
            let point = match space.kind() {
                SpaceKind::Euclidean { .. } | SpaceKind::ProductL1 { .. } => Point::Vector(
                    record.iter().map(|s| s.parse::<f64>().map_err(|_| bad(s))).collect::<Result<_, _>>()?,
                ),
                SpaceKind::Circle => {
                    let s = record.get(0).unwrap_or("");
                    Point::angle(s.parse::<f64>().map_err(|_| bad(s))?)
                }
                _ => {
                    let s = record.get(0).unwrap_or("");
                    Point::Index(s.parse::<usize>().map_err(|_| bad(s))?)
                }
            };
            points.push(point);
        }
        Self::new(space, points, mesh)
    }

    pub fn id(&self) -> GridId {
        self.0.id
    }

    pub fn space(&self) -> &MetricSpace {
        &self.0.space
    }

    pub fn points(&self) -> &[Point] {
        &self.0.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.0.points[i]
    }

    pub fn len(&self) -> usize {
        self.0.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.points.is_empty()
    }

    pub fn mesh(&self) -> f64 {
        self.0.mesh
    }

    /// Axis grids of a product grid.
    pub fn axes(&self) -> Option<&[CandidateGrid]> {
        self.0.axes.as_deref()
    }

    /// Distance between two grid points by index.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.space().distance_unchecked(self.point(i), self.point(j))
    }

    /// Distance from an arbitrary point of the space to grid point `j`.
    pub fn dist_to(&self, p: &Point, j: usize) -> Result<f64, MetricError> {
        self.space().distance(p, self.point(j))
    }

    /// Index of the grid point at distance 0 from `p`.
    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.space().check_point(p).ok()?;
        (0..self.len()).find(|&j| self.space().base_distance_unchecked(p, self.point(j)) == 0.0)
    }

    /// Flat index of a multi-index into a product grid.
    pub fn ravel(&self, multi: &[usize]) -> Result<usize, MetricError> {
        let axes = self.axes().ok_or_else(|| MetricError::InvalidGrid("not a product grid".into()))?;
        if multi.len() != axes.len() {
            return Err(MetricError::InvalidGrid("multi-index has the wrong length".into()));
        }
        let mut flat = 0;
        for (&i, a) in multi.iter().zip(axes) {
            if i >= a.len() {
                return Err(MetricError::IndexOutOfRange { index: i, len: a.len() });
            }
            flat = flat * a.len() + i;
        }
        Ok(flat)
    }

    /// Multi-index of a flat product-grid index.
    pub fn unravel(&self, flat: usize) -> Option<Vec<usize>> {
        let axes = self.axes()?;
        let dims: Vec<usize> = axes.iter().map(CandidateGrid::len).collect();
        Some(unravel(flat, &dims))
    }
}

fn unravel(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut multi = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        multi[k] = flat % dims[k];
        flat /= dims[k];
    }
    multi
}

/// Sorted, deduplicated subset of a grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    grid: GridId,
    indices: Vec<usize>,
}

impl PointSet {
    pub fn new(grid: &CandidateGrid, indices: impl IntoIterator<Item = usize>) -> Result<Self, MetricError> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= grid.len() {
                return Err(MetricError::IndexOutOfRange { index: last, len: grid.len() });
            }
        }
        Ok(PointSet { grid: grid.id(), indices })
    }

    /// Caller guarantees sorted, unique, in-range indices.
    pub(crate) fn from_sorted(grid: &CandidateGrid, indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(indices.last().is_none_or(|&i| i < grid.len()));
        PointSet { grid: grid.id(), indices }
    }

    pub fn empty(grid: &CandidateGrid) -> Self {
        PointSet { grid: grid.id(), indices: Vec::new() }
    }

    pub fn full(grid: &CandidateGrid) -> Self {
        PointSet { grid: grid.id(), indices: (0..grid.len()).collect() }
    }

    pub fn grid_id(&self) -> GridId {
        self.grid
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.grid == other.grid && self.indices.iter().all(|&i| other.contains(i))
    }

    pub fn union(&self, other: &PointSet) -> Result<PointSet, MetricError> {
        self.same_grid(other)?;
        let mut indices: Vec<usize> = self.indices.iter().chain(&other.indices).copied().collect();
        indices.sort_unstable();
        indices.dedup();
        Ok(PointSet { grid: self.grid, indices })
    }

    pub fn intersection(&self, other: &PointSet) -> Result<PointSet, MetricError> {
        self.same_grid(other)?;
        let indices = self.indices.iter().copied().filter(|&i| other.contains(i)).collect();
        Ok(PointSet { grid: self.grid, indices })
    }

    pub(crate) fn same_grid(&self, other: &PointSet) -> Result<(), MetricError> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(MetricError::GridMismatch)
        }
    }

    pub(crate) fn check_grid(&self, grid: &CandidateGrid) -> Result<(), MetricError> {
        if self.grid == grid.id() {
            Ok(())
        } else {
            Err(MetricError::GridMismatch)
        }
    }
}

/// Grid points at distance strictly less than `radius` from `center`.
pub fn ball_members(grid: &CandidateGrid, center: &Point, radius: f64) -> Result<PointSet, MetricError> {
    grid.space().check_point(center)?;
    let inside = par::map_range(grid.len(), |j| grid.space().distance_unchecked(center, grid.point(j)) < radius);
    let indices = inside.into_iter().enumerate().filter_map(|(j, hit)| hit.then_some(j)).collect();
    Ok(PointSet::from_sorted(grid, indices))
}

/// Largest pairwise distance within `subset`; 0 for empty sets and singletons.
pub fn diameter(grid: &CandidateGrid, subset: &PointSet) -> Result<f64, MetricError> {
    subset.check_grid(grid)?;
    let idx = subset.indices();
    let d = par::max_range(idx.len(), |a| idx[a + 1..].iter().map(|&b| grid.dist(idx[a], b)).fold(0.0, f64::max));
    Ok(d.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let r2 = MetricSpace::euclidean(2);
        assert_eq!(r2.distance(&Point::vector([0.0, 0.0]), &Point::vector([3.0, 4.0])).unwrap(), 5.0);
        let c = MetricSpace::circle();
        assert_eq!(c.distance(&Point::angle(0.0), &Point::angle(PI)).unwrap(), PI);
        let d = c.distance(&Point::angle(0.0), &Point::angle(1.5 * PI)).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-15);
        let l1 = MetricSpace::product_l1(2);
        assert_eq!(l1.distance(&Point::vector([0.0, 0.0]), &Point::vector([1.0, 1.0])).unwrap(), 2.0);
        let sqrt = MetricSpace::euclidean(1).with_transform(MetricTransform::power(0.5).unwrap());
        assert_eq!(sqrt.distance(&Point::scalar(0.0), &Point::scalar(4.0)).unwrap(), 2.0);
    }

    #[test]
    fn invalid_points_are_rejected() {
        let r2 = MetricSpace::euclidean(2);
        assert!(matches!(
            r2.distance(&Point::scalar(0.0), &Point::vector([1.0, 1.0])),
            Err(MetricError::InvalidPoint(_))
        ));
        assert!(MetricSpace::circle().distance(&Point::Angle(7.0), &Point::Angle(0.0)).is_err());
        assert!(r2.distance(&Point::Index(0), &Point::Index(1)).is_err());
        assert!(MetricTransform::power(1.5).is_err());
        assert!(MetricTransform::power(0.0).is_err());
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(Point::angle(TAU), Point::Angle(0.0));
        assert_eq!(Point::angle(-1e-300), Point::Angle(0.0));
        match Point::angle(-PI / 2.0) {
            Point::Angle(t) => assert!((t - 1.5 * PI).abs() < 1e-15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn n0_spaces() {
        let unit = MetricSpace::n0_unit();
        let line = MetricSpace::n0_line();
        assert_eq!(unit.distance(&Point::Index(3), &Point::Index(90)).unwrap(), 1.0);
        assert_eq!(unit.distance(&Point::Index(3), &Point::Index(3)).unwrap(), 0.0);
        assert_eq!(line.distance(&Point::Index(3), &Point::Index(90)).unwrap(), 87.0);
    }

    #[test]
    fn ball_examples() {
        let g = CandidateGrid::line(&[0.0, 0.5, 1.0]).unwrap();
        let b = ball_members(&g, &Point::scalar(0.0), 0.6).unwrap();
        assert_eq!(b.indices(), &[0, 1]);
        let all = ball_members(&g, &Point::scalar(0.0), 10.0).unwrap();
        assert_eq!(all, PointSet::full(&g));
        let n0 = CandidateGrid::n0(MetricSpace::n0_unit(), 10).unwrap();
        let b = ball_members(&n0, &Point::Index(0), 1.0).unwrap();
        assert_eq!(b.indices(), &[0]);
    }

    #[test]
    fn diameter_examples() {
        let g = CandidateGrid::line(&[0.0, 1.0]).unwrap();
        assert_eq!(diameter(&g, &PointSet::full(&g)).unwrap(), 1.0);
        assert_eq!(diameter(&g, &PointSet::new(&g, [1]).unwrap()).unwrap(), 0.0);
        assert_eq!(diameter(&g, &PointSet::empty(&g)).unwrap(), 0.0);
        let n0 = CandidateGrid::n0(MetricSpace::n0_unit(), 10).unwrap();
        let s = PointSet::new(&n0, [0, 5, 9]).unwrap();
        assert_eq!(diameter(&n0, &s).unwrap(), 1.0);
        let other = CandidateGrid::line(&[0.0, 1.0]).unwrap();
        assert_eq!(diameter(&other, &s), Err(MetricError::GridMismatch));
    }

    #[test]
    fn grids_reject_duplicates() {
        assert_eq!(CandidateGrid::line(&[0.0, 1.0, 0.0]).unwrap_err(), MetricError::DuplicatePoint(0, 2));
        assert!(CandidateGrid::line(&[]).is_err());
    }

    #[test]
    fn circle_grid_is_exactly_symmetric_for_multiples_of_four() {
        let g = CandidateGrid::circle(360).unwrap();
        assert_eq!(g.len(), 360);
        assert_eq!(g.point(180), &Point::Angle(PI));
        let d0 = g.dist(0, 90);
        let d1 = g.dist(180, 90);
        assert!((d0 - d1).abs() < 1e-15);
    }

    #[test]
    fn product_grid_indexing() {
        let x = CandidateGrid::line(&[0.0, 1.0, 2.0]).unwrap();
        let y = CandidateGrid::line(&[10.0, 20.0]).unwrap();
        let g = CandidateGrid::product_l1(vec![x, y]).unwrap();
        assert_eq!(g.len(), 6);
        let flat = g.ravel(&[2, 1]).unwrap();
        assert_eq!(g.point(flat), &Point::vector([2.0, 20.0]));
        assert_eq!(g.unravel(flat).unwrap(), vec![2, 1]);
        assert_eq!(g.dist(0, flat), 12.0);
    }

    #[test]
    fn table_validation() {
        let ok = DistanceTable::from_fn(4, |i, j| i.abs_diff(j) as f64).unwrap();
        assert_eq!(ok.get(0, 3), 3.0);
        // d(0,2) = 5 > d(0,1) + d(1,2) = 2
        let bad = DistanceTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]],
        );
        assert!(matches!(bad, Err(MetricError::InvalidTable(_))));
        let asym = DistanceTable::new(vec!["a".into(), "b".into()], vec![vec![0.0, 1.0], vec![2.0, 0.0]]);
        assert!(asym.is_err());
        let diag = DistanceTable::new(vec!["a".into()], vec![vec![1.0]]);
        assert!(diag.is_err());
    }

    #[test]
    fn table_from_csv() {
        let csv = "a,b,c\n0,1,2\n1,0,1\n2,1,0\n";
        let t = DistanceTable::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.labels(), &["a", "b", "c"]);
        let space = MetricSpace::table(t);
        let grid = CandidateGrid::table(space).unwrap();
        assert_eq!(grid.dist(0, 2), 2.0);
        assert!(DistanceTable::from_csv("a,b\n0,x\n1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn grid_from_csv() {
        let csv = "x,y\n0,0\n1,0\n0,1\n";
        let g = CandidateGrid::from_csv(MetricSpace::product_l1(2), 0.0, csv.as_bytes()).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.dist(1, 2), 2.0);
        let c = CandidateGrid::from_csv(MetricSpace::circle(), 0.0, "theta\n0\n3.0\n".as_bytes()).unwrap();
        assert_eq!(c.point(1), &Point::Angle(3.0));
    }
}
