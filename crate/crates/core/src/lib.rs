//! Generalized Fréchet mean sets over finite metric spaces.
//!
//! The crate computes ε-argmin sets of population and empirical Fréchet
//! objectives on candidate grids, measures how sequences of such sets
//! converge (one-sided Hausdorff distance, outer and inner limits, an
//! epi-convergence surrogate), and runs seeded Monte-Carlo experiments that
//! exhibit the finite-sample behaviour of median and mean sets.
//!
//! Module map:
//!
//! - [`metric`]: metric spaces, points, candidate grids, balls, diameters.
//! - [`cost`]: nondecreasing `h`, its integral `H`, cost functions, the
//!   concave-`h` construction and the `H` inequality checks.
//! - [`solver`]: objectives, ε-argmin sets, exact 1-D median intervals,
//!   product-space mean sets.
//! - [`limits`]: set distances and finite-horizon limit diagnostics.
//! - [`lab`]: pinned RNG, sampling, experiments and result serialization.
//! - [`cli`]: the `frechet-sets` command-line front end.
//!
//! With the default `parallel` feature, grid-point and replication loops run
//! on rayon; without it the same code runs sequentially and produces
//! bit-identical results.

// `!(x >= 0.0)` rejects NaN along with negatives; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod cost;
pub mod lab;
pub mod limits;
pub mod metric;
mod par;
pub mod solver;

pub use cost::{CostError, CostFunction, IntegratedH, NondecreasingFn};
pub use lab::{ExperimentResult, Rng};
pub use limits::{LimitError, LimitReport, SetSequence};
pub use metric::{CandidateGrid, MetricError, MetricSpace, Point, PointSet};
pub use solver::{EpsilonSchedule, FiniteDistribution, Objective, SolverError};
