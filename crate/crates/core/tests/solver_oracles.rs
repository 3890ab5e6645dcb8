mod common;

use common::{brute_force_product_argmin, circle_brute_force, library_product_set, random_product_masses};
use frechet_sets::solver::{
    empirical_objective, eps_argmin, median_interval_1d, population_objective, write_objective_csv,
    write_point_set_csv, Interval,
};
use frechet_sets::{CandidateGrid, CostFunction, EpsilonSchedule, FiniteDistribution, Objective, Point, PointSet, Rng};
use proptest::prelude::*;
use std::f64::consts::PI;

fn mean_abs(sample: &[f64], q: f64) -> f64 {
    sample.iter().map(|y| (y - q).abs()).sum::<f64>() / sample.len() as f64
}

fn l1(anchor: f64) -> CostFunction {
    CostFunction::power(1.0, Point::scalar(anchor)).unwrap()
}

proptest! {
    /// The interval endpoints sit on the level set `min + eps` and nothing
    /// outside reaches it; the minimum of a convex piecewise-linear function
    /// is attained at a data point.
    #[test]
    fn median_interval_matches_direct_evaluation(
        sample in prop::collection::vec(-20i32..20, 1..25),
        eps in prop_oneof![Just(0.0), 0.0f64..3.0],
    ) {
        let ys: Vec<f64> = sample.iter().map(|&v| f64::from(v)).collect();
        let Interval { lo, hi } = median_interval_1d(&ys, eps).unwrap();
        prop_assert!(lo <= hi);
        let min = ys.iter().map(|&y| mean_abs(&ys, y)).fold(f64::INFINITY, f64::min);
        let level = min + eps;
        for q in [lo, hi, 0.5 * (lo + hi)] {
            prop_assert!(mean_abs(&ys, q) <= level + 1e-9);
        }
        if eps > 0.0 {
            prop_assert!((mean_abs(&ys, lo) - level).abs() <= 1e-9);
            prop_assert!((mean_abs(&ys, hi) - level).abs() <= 1e-9);
        }
        // outside the interval F rises with slope at least 1/n
        let n = ys.len() as f64;
        for step in [1e-6, 1e-3, 0.5, 5.0] {
            prop_assert!(mean_abs(&ys, lo - step) >= level + step / n - 1e-9);
            prop_assert!(mean_abs(&ys, hi + step) >= level + step / n - 1e-9);
        }
        // dense scan over a fine grid agrees with the interval
        for k in -1000..=1000 {
            let q = f64::from(k) * 0.025;
            let inside = mean_abs(&ys, q) <= level + 1e-9;
            if inside {
                prop_assert!(q >= lo - 1e-9 && q <= hi + 1e-9, "q = {} outside [{}, {}]", q, lo, hi);
            }
        }
    }

    #[test]
    fn median_interval_agrees_with_grid_argmin(
        sample in prop::collection::vec(-10i32..10, 1..30),
        extra in prop::collection::vec(-48i32..48, 0..20),
    ) {
        let ys: Vec<f64> = sample.iter().map(|&v| f64::from(v)).collect();
        let mut values: Vec<f64> = ys.clone();
        values.extend(extra.iter().map(|&v| f64::from(v) * 0.25));
        values.sort_by(f64::total_cmp);
        values.dedup();
        let grid = CandidateGrid::line(&values).unwrap();
        let pts: Vec<Point> = ys.iter().map(|&y| Point::scalar(y)).collect();
        let obj = empirical_objective(&pts, &l1(0.0), &grid).unwrap();
        let exact = median_interval_1d(&ys, 0.0).unwrap().members(&grid).unwrap();
        prop_assert_eq!(exact, eps_argmin(&obj, 0.0).unwrap());
    }

    #[test]
    fn eps_argmin_is_monotone(
        values in prop::collection::vec(-5.0f64..5.0, 1..60),
        e1 in 0.0f64..2.0,
        e2 in 0.0f64..2.0,
    ) {
        let grid = CandidateGrid::uniform_line(0.0, 1.0, values.len().max(2)).unwrap();
        let vals: Vec<f64> = (0..grid.len()).map(|j| values[j % values.len()]).collect();
        let obj = Objective::from_fn(&grid, |j| vals[j]).unwrap();
        let (small, large) = (e1.min(e2), e1.max(e2));
        let a = eps_argmin(&obj, small).unwrap();
        let b = eps_argmin(&obj, large).unwrap();
        prop_assert!(!a.is_empty());
        prop_assert!(a.is_subset(&b));
    }

    #[test]
    fn sample_listing_the_support_is_the_uniform_law(
        support in prop::collection::btree_set(-30i32..30, 1..10),
        reps in 1usize..5,
        alpha in prop_oneof![Just(1.0), Just(2.0), 0.5f64..3.0],
    ) {
        let pts: Vec<Point> = support.iter().map(|&v| Point::scalar(f64::from(v) / 3.0)).collect();
        let sample: Vec<Point> = (0..reps).flat_map(|_| pts.clone()).collect();
        let grid = CandidateGrid::uniform_line(-10.0, 10.0, 41).unwrap();
        let c = CostFunction::power(alpha, Point::scalar(0.0)).unwrap();
        let emp = empirical_objective(&sample, &c, &grid).unwrap();
        let pop = population_objective(&FiniteDistribution::uniform(pts).unwrap(), &c, &grid).unwrap();
        prop_assert_eq!(emp.values(), pop.values());
    }
}

#[test]
fn product_sets_match_brute_force() {
    let mut rng = Rng::new(5);
    for _ in 0..100 {
        let m = random_product_masses(&mut rng);
        assert_eq!(library_product_set(&m), brute_force_product_argmin(&m), "masses {m:?}");
    }
}

#[test]
fn product_set_of_univariate_medians_is_the_square() {
    let axis = CandidateGrid::uniform_line(0.0, 1.0, 11).unwrap();
    let product = CandidateGrid::product_l1(vec![axis.clone(), axis.clone()]).unwrap();
    let full = median_interval_1d(&[0.0, 1.0], 0.0).unwrap().members(&axis).unwrap();
    let single = median_interval_1d(&[0.0, 0.0, 1.0], 0.0).unwrap().members(&axis).unwrap();
    let square = frechet_sets::solver::product_mean_set(&product, &[full.clone(), full.clone()], 1.0).unwrap();
    assert_eq!(square.len(), 121);
    let segment = frechet_sets::solver::product_mean_set(&product, &[single, full], 1.0).unwrap();
    assert_eq!(segment.indices(), (0..11).collect::<Vec<_>>());
    assert!(frechet_sets::solver::product_mean_set(&product, std::slice::from_ref(&square), 1.0).is_err());
}

#[test]
fn antipodal_circle_has_two_means() {
    let grid = CandidateGrid::circle(360).unwrap();
    let dist = FiniteDistribution::uniform(vec![Point::angle(0.0), Point::angle(PI)]).unwrap();
    let c = CostFunction::power(2.0, Point::angle(0.0)).unwrap();
    let set = eps_argmin(&population_objective(&dist, &c, &grid).unwrap(), 0.0).unwrap();
    assert_eq!(set.indices(), &[90, 270]);
    assert_eq!(set.indices(), circle_brute_force(360, &[(0.0, 0.5), (PI, 0.5)]).as_slice());
}

#[test]
fn symmetric_circle_laws_match_brute_force() {
    let grid = CandidateGrid::circle(72).unwrap();
    let c = CostFunction::power(2.0, Point::angle(0.0)).unwrap();
    for k in [2usize, 3, 4, 6] {
        let atoms: Vec<(f64, f64)> = (0..k).map(|i| (2.0 * PI * i as f64 / k as f64, 1.0 / k as f64)).collect();
        let pts = atoms.iter().map(|&(t, _)| Point::angle(t)).collect();
        let dist = FiniteDistribution::uniform(pts).unwrap();
        let set = eps_argmin(&population_objective(&dist, &c, &grid).unwrap(), 0.0).unwrap();
        assert_eq!(set.indices(), circle_brute_force(72, &atoms).as_slice(), "{k} atoms");
        assert_eq!(set.len(), k);
    }
}

#[test]
fn two_point_objective_is_flat_between_the_atoms() {
    let grid = CandidateGrid::line(&[0.0, 0.5, 1.0]).unwrap();
    let dist = FiniteDistribution::uniform(vec![Point::scalar(0.0), Point::scalar(1.0)]).unwrap();
    let obj = population_objective(&dist, &l1(0.0), &grid).unwrap();
    assert_eq!(obj.values(), &[0.0, 0.0, 0.0]);
    assert_eq!(eps_argmin(&obj, 0.0).unwrap(), PointSet::full(&grid));
}

#[test]
fn bernoulli_sample_objective_has_the_linear_form() {
    let grid = CandidateGrid::line(&[0.0, 0.5, 1.0]).unwrap();
    let mut rng = Rng::new(9);
    for n in [1usize, 2, 7, 64, 1001] {
        let ys: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.bernoulli()))).collect();
        let p = ys.iter().sum::<f64>() / n as f64;
        let pts: Vec<Point> = ys.iter().map(|&y| Point::scalar(y)).collect();
        let obj = empirical_objective(&pts, &l1(0.0), &grid).unwrap();
        for (j, q) in [0.0, 0.5, 1.0].into_iter().enumerate() {
            let expected = p * (1.0 - q) + (1.0 - p) * q - p;
            assert!((obj.value(j) - expected).abs() <= 1e-15, "n={n} q={q}");
        }
        let ends = CandidateGrid::line(&[0.0, 1.0]).unwrap();
        let set = eps_argmin(&empirical_objective(&pts, &l1(0.0), &ends).unwrap(), 0.0).unwrap();
        match p.partial_cmp(&0.5).unwrap() {
            std::cmp::Ordering::Greater => assert_eq!(set.indices(), &[1]),
            std::cmp::Ordering::Less => assert_eq!(set.indices(), &[0]),
            std::cmp::Ordering::Equal => assert_eq!(set.len(), 2),
        }
    }
}

#[test]
fn single_point_sample_is_shifted_quadratic() {
    let grid = CandidateGrid::uniform_line(-2.0, 2.0, 9).unwrap();
    let c = CostFunction::power(2.0, Point::scalar(0.5)).unwrap();
    let obj = empirical_objective(&[Point::scalar(1.0)], &c, &grid).unwrap();
    for (j, p) in grid.points().iter().enumerate() {
        let q = p.coords().unwrap()[0];
        assert_eq!(obj.value(j), (1.0 - q).powi(2) - 0.25);
    }
    assert_eq!(eps_argmin(&obj, 0.0).unwrap().indices(), &[6]);
}

#[test]
fn eps_argmin_examples() {
    let grid = CandidateGrid::uniform_line(0.0, 1.0, 3).unwrap();
    let obj = Objective::from_fn(&grid, |j| [0.3, 0.0, 0.1][j]).unwrap();
    assert_eq!(eps_argmin(&obj, 0.1).unwrap().indices(), &[1, 2]);
    assert_eq!(eps_argmin(&obj, 0.0).unwrap().indices(), &[1]);
    assert!(eps_argmin(&obj, -1.0).is_err());
    assert!(Objective::from_fn(&grid, |_| f64::NAN).is_err());
}

#[test]
fn schedules() {
    let s = EpsilonSchedule::power_decay(1.0, 0.25).unwrap();
    assert_eq!(s.eps(16), 0.5);
    assert!(s.vanishes());
    assert_eq!(EpsilonSchedule::zero().eps(10), 0.0);
    let err = EpsilonSchedule::power_decay(1.0, -1.0).unwrap_err();
    assert!(err.to_string().contains("schedule exponent must be ≥ 0"));
}

#[test]
fn objective_and_set_csv() {
    let grid = CandidateGrid::line(&[0.0, 1.0]).unwrap();
    let obj = Objective::from_fn(&grid, |j| j as f64 * 0.5).unwrap();
    let mut buf = Vec::new();
    write_objective_csv(&obj, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "index,x1,value\n0,0,0\n1,1,0.5\n");
    let mut buf = Vec::new();
    write_point_set_csv(&grid, &eps_argmin(&obj, 0.0).unwrap(), &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "index,x1,member\n0,0,1\n1,1,0\n");
    let circle = CandidateGrid::circle(4).unwrap();
    let mut buf = Vec::new();
    write_point_set_csv(&circle, &PointSet::full(&circle), &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("index,theta,member\n"));
}

#[test]
fn distributions_validate() {
    assert!(FiniteDistribution::new(vec![Point::scalar(0.0)], vec![0.9]).is_err());
    assert!(FiniteDistribution::new(vec![], vec![]).is_err());
    let d = FiniteDistribution::new(vec![Point::scalar(0.0), Point::scalar(1.0)], vec![0.25, 0.75]).unwrap();
    assert_eq!(d.quantile_index(0.1), 0);
    assert_eq!(d.quantile_index(0.5), 1);
    assert!(empirical_objective(&[], &l1(0.0), &CandidateGrid::line(&[0.0]).unwrap()).is_err());
    let space_mismatch = empirical_objective(&[Point::angle(0.0)], &l1(0.0), &CandidateGrid::line(&[0.0]).unwrap());
    assert!(space_mismatch.is_err());
}
