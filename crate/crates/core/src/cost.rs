//! Cost functions `c(y, q)`.
//!
//! Power costs `d(y,q)^α − d(y,o)^α`, H-costs `H(d(y,q)) − H(d(y,o))` where
//! `H` integrates a piecewise-linear nondecreasing `h`, and tabulated costs.
//! `H` and `H⁻¹` are evaluated in closed form segment by segment, so nothing
//! here involves quadrature.

use std::collections::HashMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::metric::{MetricError, MetricSpace, Point};

/// Relative tolerance used when judging the `H` inequalities.
pub const LEMMA_REL_TOL: f64 = 1e-9;
/// Number of log-spaced probes used by [`estimate_doubling_constant`].
pub const DOUBLING_PROBES: usize = 256;
/// Smallest probe, relative to `x_max`.
pub const DOUBLING_PROBE_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid nondecreasing function: {0}")]
    InvalidFunction(String),
    #[error("h vanishes on the probed range; the doubling constant is undefined")]
    UndefinedDoubling,
    #[error("h(x) = 0 < h(2x) at x = {x}; no finite doubling constant exists")]
    UnboundedDoubling { x: f64 },
    #[error("h vanishes on an initial segment, so H^-1(0) is not unique")]
    AmbiguousInverse,
    #[error("{y} is outside the range of H")]
    OutOfRange { y: f64 },
    #[error("no cost entry for data index {y} and grid index {q}")]
    MissingEntry { y: usize, q: usize },
    #[error("point kind not supported by this cost: {0}")]
    UnsupportedPoint(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for CostError {
    fn from(e: csv::Error) -> Self {
        CostError::Csv(e.to_string())
    }
}

/// Continuous piecewise-linear nondecreasing `h: [0, ∞) → [0, ∞)` with a
/// linear tail beyond the last breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct NondecreasingFn {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    tail_slope: f64,
}

impl NondecreasingFn {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, tail_slope: f64) -> Result<Self, CostError> {
        let bad = |m: String| Err(CostError::InvalidFunction(m));
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return bad("breakpoints and values must be nonempty and of equal length".into());
        }
        if breakpoints[0] != 0.0 {
            return bad("the first breakpoint must be 0".into());
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return bad("breakpoints and values must be finite".into());
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return bad("breakpoints must be strictly increasing".into());
        }
        if values[0] < 0.0 || values.windows(2).any(|w| w[1] < w[0]) {
            return bad("values must be nonnegative and nondecreasing".into());
        }
        if !(tail_slope >= 0.0) || !tail_slope.is_finite() {
            return bad("tail slope must be finite and nonnegative".into());
        }
        Ok(NondecreasingFn { breakpoints, values, tail_slope })
    }

    /// `h(x) = x`.
    pub fn identity() -> Self {
        Self::linear(1.0)
    }

    /// `h(x) = slope · x`.
    pub fn linear(slope: f64) -> Self {
        NondecreasingFn { breakpoints: vec![0.0], values: vec![0.0], tail_slope: slope }
    }

    pub fn constant(c: f64) -> Self {
        NondecreasingFn { breakpoints: vec![0.0], values: vec![c], tail_slope: 0.0 }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_slope(&self) -> f64 {
        self.tail_slope
    }

    /// `h(x) → ∞`, read off the tail slope.
    pub fn has_infinite_increase(&self) -> bool {
        self.tail_slope > 0.0
    }

    /// Index of the segment containing `x` and its slope.
    fn segment(&self, x: f64) -> (usize, f64) {
        let k = self.breakpoints.partition_point(|&b| b <= x) - 1;
        (k, self.slope(k))
    }

    fn slope(&self, k: usize) -> f64 {
        if k + 1 < self.breakpoints.len() {
            (self.values[k + 1] - self.values[k]) / (self.breakpoints[k + 1] - self.breakpoints[k])
        } else {
            self.tail_slope
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, CostError> {
        if !(x >= 0.0) {
            return Err(CostError::Domain(format!("h is defined on [0, inf), got {x}")));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let (k, m) = self.segment(x);
        self.values[k] + m * (x - self.breakpoints[k])
    }

    fn vanishes_initially(&self) -> bool {
        self.values[0] == 0.0 && self.slope(0) == 0.0
    }

    /// Exact sup of `h(2x)/h(x)` over all `x > 0`, at least 1.
    pub fn doubling_constant(&self) -> Result<f64, CostError> {
        let last = *self.breakpoints.last().expect("nonempty");
        let x_max = if last > 0.0 { last } else { 1.0 };
        let on_breakpoints = estimate_doubling_constant(self, x_max)?;
        // beyond the last breakpoint the ratio is monotone and tends to 2 when the tail rises
        let tail = if self.tail_slope > 0.0 { 2.0 } else { 1.0 };
        Ok(on_breakpoints.max(tail))
    }
}

/// Max of `h(2x)/h(x)` over a probe set in `(0, x_max]`, clamped below by 1.
///
/// The probe set holds [`DOUBLING_PROBES`] log-spaced points between
/// `x_max · DOUBLING_PROBE_FLOOR` and `x_max`, plus every breakpoint and
/// every half-breakpoint inside the range. On each piece where both `h(x)`
/// and `h(2x)` are linear the ratio is monotone, so including the piece
/// endpoints makes the maximum exact on `(0, x_max]`.
pub fn estimate_doubling_constant(f: &NondecreasingFn, x_max: f64) -> Result<f64, CostError> {
    if !(x_max > 0.0) || !x_max.is_finite() {
        return Err(CostError::Domain(format!("x_max must be positive, got {x_max}")));
    }
    let floor = x_max * DOUBLING_PROBE_FLOOR;
    let mut probes: Vec<f64> =
        (0..DOUBLING_PROBES).map(|i| floor * (x_max / floor).powf(i as f64 / (DOUBLING_PROBES - 1) as f64)).collect();
    probes.push(x_max);
    for &b in &f.breakpoints[1..] {
        for p in [b, b / 2.0] {
            if p <= x_max {
                probes.push(p);
            }
        }
    }
    let mut best: Option<f64> = None;
    for x in probes {
        let hx = f.eval_unchecked(x);
        let h2x = f.eval_unchecked(2.0 * x);
        if hx == 0.0 {
            if h2x > 0.0 {
                return Err(CostError::UnboundedDoubling { x });
            }
            continue;
        }
        let r = h2x / hx;
        best = Some(best.map_or(r, |b: f64| b.max(r)));
    }
    best.map(|b| b.max(1.0)).ok_or(CostError::UndefinedDoubling)
}

/// `H(x) = ∫₀ˣ h(t) dt`, piecewise quadratic.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedH {
    source: NondecreasingFn,
    /// `H` at each breakpoint.
    cumulative: Vec<f64>,
}

impl IntegratedH {
    pub fn new(source: NondecreasingFn) -> Self {
        let n = source.breakpoints.len();
        let mut cumulative = Vec::with_capacity(n);
        cumulative.push(0.0);
        for k in 0..n - 1 {
            let len = source.breakpoints[k + 1] - source.breakpoints[k];
            let piece = Self::piece(source.values[k], source.slope(k), len);
            cumulative.push(cumulative[k] + piece);
        }
        IntegratedH { source, cumulative }
    }

    /// `∫₀^u (v + m t) dt`.
    fn piece(v: f64, m: f64, u: f64) -> f64 {
        v * u + m * u * u / 2.0
    }

    pub fn source(&self) -> &NondecreasingFn {
        &self.source
    }

    /// `H` at each breakpoint of `h`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn eval(&self, x: f64) -> Result<f64, CostError> {
        if !(x >= 0.0) {
            return Err(CostError::Domain(format!("H is defined on [0, inf), got {x}")));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let (k, m) = self.source.segment(x);
        let u = x - self.source.breakpoints[k];
        self.cumulative[k] + Self::piece(self.source.values[k], m, u)
    }

    /// `H` is a bijection of `[0, ∞)` iff `h > 0` on `(0, ∞)`.
    pub fn is_strictly_increasing(&self) -> bool {
        !self.source.vanishes_initially()
    }

    /// `H⁻¹(y)`. When `h` vanishes on an initial segment, `y = 0` has a whole
    /// interval of preimages and [`CostError::AmbiguousInverse`] is returned;
    /// every `y > 0` still has a unique preimage.
    pub fn invert(&self, y: f64) -> Result<f64, CostError> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(CostError::Domain(format!("H^-1 is defined on [0, inf), got {y}")));
        }
        let f = &self.source;
        let all_zero = *f.values.last().expect("nonempty") == 0.0 && f.tail_slope == 0.0;
        if y == 0.0 {
            return if f.vanishes_initially() { Err(CostError::AmbiguousInverse) } else { Ok(0.0) };
        }
        if all_zero {
            return Err(CostError::OutOfRange { y });
        }
        let k = self.cumulative.partition_point(|&c| c <= y) - 1;
        let v = f.values[k];
        let m = f.slope(k);
        let r = y - self.cumulative[k];
        // stable root of m/2 u^2 + v u - r = 0
        let mut u = 2.0 * r / (v + (v * v + 2.0 * m * r).sqrt());
        if k + 1 < f.breakpoints.len() {
            u = u.min(f.breakpoints[k + 1] - f.breakpoints[k]);
        }
        Ok(f.breakpoints[k] + u)
    }
}

/// Dense `(data index, grid index) → cost` lookup.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CostTable {
    entries: HashMap<(usize, usize), f64>,
}

impl CostTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, y: usize, q: usize, cost: f64) -> Result<(), CostError> {
        if !cost.is_finite() {
            return Err(CostError::Domain(format!("cost entry ({y},{q}) is not finite")));
        }
        self.entries.insert((y, q), cost);
        Ok(())
    }

    pub fn get(&self, y: usize, q: usize) -> Result<f64, CostError> {
        self.entries.get(&(y, q)).copied().ok_or(CostError::MissingEntry { y, q })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `y,q,cost` rows after a header row.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, CostError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut table = CostTable::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let field =
                |i: usize| record.get(i).ok_or_else(|| CostError::Csv(format!("row {}: missing column {i}", r + 1)));
            let bad = |s: &str| CostError::Csv(format!("row {}: cannot parse {s:?}", r + 1));
            let y = field(0)?.parse::<usize>().map_err(|_| bad(field(0).unwrap_or("")))?;
            let q = field(1)?.parse::<usize>().map_err(|_| bad(field(1).unwrap_or("")))?;
            let c = field(2)?.parse::<f64>().map_err(|_| bad(field(2).unwrap_or("")))?;
            table.insert(y, q, c)?;
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostKind {
    Power { alpha: f64 },
    Integrated(IntegratedH),
    Table(CostTable),
}

/// A cost `c(y, q)` together with its anchor `o`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostFunction {
    kind: CostKind,
    anchor: Point,
}

impl CostFunction {
    /// `d(y,q)^α − d(y,o)^α`.
    pub fn power(alpha: f64, anchor: Point) -> Result<Self, CostError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(CostError::Domain(format!("power exponent must be positive, got {alpha}")));
        }
        Ok(CostFunction { kind: CostKind::Power { alpha }, anchor })
    }

    /// `H(d(y,q)) − H(d(y,o))`.
    pub fn integrated(h: IntegratedH, anchor: Point) -> Self {
        CostFunction { kind: CostKind::Integrated(h), anchor }
    }

    /// Tabulated cost; data points and grid points are both `Point::Index`.
    /// The anchor plays no role.
    pub fn table(table: CostTable) -> Self {
        CostFunction { kind: CostKind::Table(table), anchor: Point::Index(0) }
    }

    pub fn kind(&self) -> &CostKind {
        &self.kind
    }

    pub fn anchor(&self) -> &Point {
        &self.anchor
    }

    pub fn with_anchor(mut self, anchor: Point) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn cost(&self, space: &MetricSpace, y: &Point, q: &Point) -> Result<f64, CostError> {
        match &self.kind {
            CostKind::Power { alpha } => {
                let dq = space.distance(y, q)?;
                let d_o = space.distance(y, &self.anchor)?;
                Ok(pow(dq, *alpha) - pow(d_o, *alpha))
            }
            CostKind::Integrated(h) => {
                let dq = space.distance(y, q)?;
                let d_o = space.distance(y, &self.anchor)?;
                Ok(h.eval_unchecked(dq) - h.eval_unchecked(d_o))
            }
            CostKind::Table(t) => match (y, q) {
                (Point::Index(i), Point::Index(j)) => t.get(*i, *j),
                _ => Err(CostError::UnsupportedPoint("tabulated costs take index points for data and grid".into())),
            },
        }
    }
}

fn pow(d: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        d
    } else if alpha == 2.0 {
        d * d
    } else {
        d.powf(alpha)
    }
}

/// Outcome of one inequality: `slack = rhs − lhs` of the `≤` form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub holds: bool,
    pub slack: f64,
    /// Magnitude the slack is judged against.
    pub scale: f64,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64, scale: f64) -> Self {
        let slack = rhs - lhs;
        let scale = scale.max(1.0);
        InequalityCheck { holds: slack >= -LEMMA_REL_TOL * scale, slack, scale }
    }

    fn both(a: InequalityCheck, b: InequalityCheck) -> Self {
        InequalityCheck { holds: a.holds && b.holds, slack: a.slack.min(b.slack), scale: a.scale.max(b.scale) }
    }
}

/// The three inequalities for `h` and its integral `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    /// `|H(x) − H(y)| ≤ |x − y| h(max(x, y))`.
    pub mean_value: InequalityCheck,
    /// `½h(x) + ½h(y) ≤ h(x + y) ≤ b (h(x) + h(y))`.
    pub additivity: InequalityCheck,
    /// `H(|x − y|) − H(x) ≥ b⁻¹ H(y) − 2 y h(x)`.
    pub lower_bound: InequalityCheck,
    pub doubling_constant: f64,
}

impl LemmaReport {
    pub fn all_hold(&self) -> bool {
        self.mean_value.holds && self.additivity.holds && self.lower_bound.holds
    }
}

pub fn check_lemma_inequalities(f: &NondecreasingFn, x: f64, y: f64) -> Result<LemmaReport, CostError> {
    if !(x >= 0.0 && y >= 0.0) {
        return Err(CostError::Domain(format!("x and y must be nonnegative, got {x}, {y}")));
    }
    let b = f.doubling_constant()?;
    let big_h = IntegratedH::new(f.clone());
    let h = |t: f64| f.eval_unchecked(t);
    let hh = |t: f64| big_h.eval_unchecked(t);

    let lhs = (hh(x) - hh(y)).abs();
    let rhs = (x - y).abs() * h(x.max(y));
    let mean_value = InequalityCheck::new(lhs, rhs, lhs.max(rhs));

    let (hx, hy, hxy) = (h(x), h(y), h(x + y));
    let lower = InequalityCheck::new(0.5 * hx + 0.5 * hy, hxy, hxy.max(hx + hy));
    let upper = InequalityCheck::new(hxy, b * (hx + hy), hxy.max(b * (hx + hy)));
    let additivity = InequalityCheck::both(lower, upper);

    let left = hh((x - y).abs()) - hh(x);
    let right = hh(y) / b - 2.0 * y * hx;
    let scale = [hh((x - y).abs()), hh(x), hh(y) / b, 2.0 * y * hx].into_iter().fold(0.0, f64::max);
    let lower_bound = InequalityCheck::new(right, left, scale);

    Ok(LemmaReport { mean_value, additivity, lower_bound, doubling_constant: b })
}

/// Intermediate sequences of the concave-`h` construction.
///
/// Indexing: `z[0]` is `z₁ = 0`; `x[0] = 0` and `a[0] = 1` are the seeds of
/// the interpolation sequence, and `h(x[n]) = n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructHTrace {
    sorted_sample: Vec<f64>,
    /// True when the identity was returned without running the construction.
    pub bounded: bool,
    pub z: Vec<f64>,
    /// Value of `g` on `[z[k], z[k+1])`.
    pub g: Vec<f64>,
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    pub h_tilde_at_x: Vec<f64>,
    /// Knots of the piecewise-linear `h̃`, and `h̃` there.
    h_tilde_knots: Vec<f64>,
    h_tilde_values: Vec<f64>,
    pub result: NondecreasingFn,
}

impl ConstructHTrace {
    /// Empirical distribution function of the sample.
    pub fn empirical_cdf(&self, x: f64) -> f64 {
        let n = self.sorted_sample.len();
        self.sorted_sample.partition_point(|&v| v <= x) as f64 / n as f64
    }

    pub fn sorted_sample(&self) -> &[f64] {
        &self.sorted_sample
    }

    /// `h̃(x)`; constant beyond the sample maximum.
    pub fn h_tilde(&self, x: f64) -> f64 {
        if self.bounded {
            return x;
        }
        interpolate(&self.h_tilde_knots, &self.h_tilde_values, x)
    }
}

fn interpolate(knots: &[f64], values: &[f64], x: f64) -> f64 {
    let last = knots.len() - 1;
    if x >= knots[last] {
        return values[last];
    }
    let k = knots.partition_point(|&t| t <= x) - 1;
    let w = (x - knots[k]) / (knots[k + 1] - knots[k]);
    values[k] + w * (values[k + 1] - values[k])
}

/// Builds a strictly increasing concave `h` with `h → ∞` whose growth is
/// tuned to the tail of `sample`.
///
/// The population construction runs on the empirical distribution function.
/// The `z` sequence stops at the first `z_K` with an exhausted empirical tail;
/// `h̃` integrates `g / (1 − F̂)` below the sample maximum only, and the
/// interpolation of `(x_n, n)` is continued linearly with its last slope.
/// With a `bounded_hint` `K` (every sample value below `K`), or a constant
/// sample, the result is `h(x) = x`.
pub fn construct_h(sample: &[f64], bounded_hint: Option<f64>) -> Result<ConstructHTrace, CostError> {
    if sample.is_empty() {
        return Err(CostError::Domain("construct_h needs a nonempty sample".into()));
    }
    if let Some(&v) = sample.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(CostError::Domain(format!("sample values must be finite and >= 0, got {v}")));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let max = sorted[n - 1];

    let identity_trace = |sorted: Vec<f64>| ConstructHTrace {
        sorted_sample: sorted,
        bounded: true,
        z: vec![0.0],
        g: Vec::new(),
        x: vec![0.0],
        a: vec![1.0],
        h_tilde_at_x: vec![0.0],
        h_tilde_knots: vec![0.0],
        h_tilde_values: vec![0.0],
        result: NondecreasingFn::identity(),
    };

    if let Some(k) = bounded_hint {
        if !(k > 0.0) || !k.is_finite() {
            return Err(CostError::Domain(format!("bounded hint must be positive, got {k}")));
        }
        if max >= k {
            return Err(CostError::Domain(format!("sample value {max} contradicts the bound {k}")));
        }
        return Ok(identity_trace(sorted));
    }
    if sorted[0] == max {
        return Ok(identity_trace(sorted));
    }

    // empirical tail 1 - F(x) as a count of values > x
    let above = |x: f64| n - sorted.partition_point(|&v| v <= x);

    let mut z = vec![0.0];
    let mut k: usize = 1;
    while above(z[k - 1]) > 0 {
        // smallest order statistic with 1 - F <= 1/k, i.e. count(<= x) >= n (k-1) / k
        let need = (n * (k - 1)).div_ceil(k);
        let quantile = if need == 0 { f64::NEG_INFINITY } else { sorted[need - 1] };
        let next = (z[k - 1] + 1.0).max(quantile);
        z.push(next);
        k += 1;
    }
    let g: Vec<f64> = z
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let kk = (i + 1) as f64;
            1.0 / ((w[1] - w[0]) * kk * kk)
        })
        .collect();

    // h-tilde is piecewise linear between the z points and the sample values
    let mut knots: Vec<f64> = z.iter().copied().filter(|&t| t < max).collect();
    knots.extend(sorted.iter().copied().filter(|&t| t > 0.0));
    knots.push(max);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut h_values = Vec::with_capacity(knots.len());
    h_values.push(0.0);
    for w in knots.windows(2) {
        let t = w[0];
        let seg = z.partition_point(|&zz| zz <= t) - 1;
        let tail = above(t) as f64 / n as f64;
        let slope = g[seg] / tail;
        let prev = *h_values.last().expect("seeded");
        h_values.push(prev + slope * (w[1] - w[0]));
    }
    let h_max = *h_values.last().expect("nonempty");

    // smallest x with h-tilde(x) >= level
    let first_reaching = |level: f64| -> f64 {
        let j = h_values.partition_point(|&v| v < level);
        if j == 0 {
            return knots[0];
        }
        let (t0, t1) = (knots[j - 1], knots[j]);
        let (v0, v1) = (h_values[j - 1], h_values[j]);
        (t0 + (level - v0) / (v1 - v0) * (t1 - t0)).clamp(t0, t1)
    };

    let mut xs: Vec<f64> = vec![0.0];
    let mut a: Vec<f64> = vec![1.0];
    let mut level = 1.0;
    while level <= h_max {
        let prev = *xs.last().expect("seeded");
        let next = (prev + 1.0 / a.last().expect("seeded")).max(first_reaching(level));
        xs.push(next);
        // the step is never shorter than 1/a; the clamp absorbs rounding in next - prev
        let last_a = *a.last().expect("seeded");
        a.push((1.0 / (next - prev)).min(last_a));
        level += 1.0;
    }
    let h_tilde_at_x = xs.iter().map(|&x| interpolate(&knots, &h_values, x)).collect();
    let values: Vec<f64> = (0..xs.len()).map(|i| i as f64).collect();
    let tail = *a.last().expect("seeded");
    let result = NondecreasingFn::new(xs.clone(), values, tail)?;

    Ok(ConstructHTrace {
        sorted_sample: sorted,
        bounded: false,
        z,
        g,
        x: xs,
        a,
        h_tilde_at_x,
        h_tilde_knots: knots,
        h_tilde_values: h_values,
        result,
    })
}

/// Writes `breakpoint,value` rows followed by a `tail_slope,<slope>` footer.
pub fn write_nondecreasing_csv<W: Write>(f: &NondecreasingFn, writer: W) -> Result<(), CostError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["breakpoint", "value"])?;
    for (b, v) in f.breakpoints.iter().zip(&f.values) {
        w.write_record([b.to_string(), v.to_string()])?;
    }
    w.write_record(["tail_slope".to_string(), f.tail_slope.to_string()])?;
    w.flush().map_err(|e| CostError::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_nondecreasing_csv<R: Read>(reader: R) -> Result<NondecreasingFn, CostError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    let mut tail = None;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        if tail.is_some() {
            return Err(CostError::Csv(format!("row {}: data after tail_slope footer", r + 1)));
        }
        let first = record.get(0).unwrap_or("");
        let second = record.get(1).unwrap_or("");
        let parse =
            |s: &str| s.parse::<f64>().map_err(|_| CostError::Csv(format!("row {}: cannot parse {s:?}", r + 1)));
        if first == "tail_slope" {
            tail = Some(parse(second)?);
        } else {
            breakpoints.push(parse(first)?);
            values.push(parse(second)?);
        }
    }
    let tail = tail.ok_or_else(|| CostError::Csv("missing tail_slope footer".into()))?;
    NondecreasingFn::new(breakpoints, values, tail)
}
