//! Seed-parallel batches against a plain loop over seeds, plus the grid-parallel
//! objective evaluation. Build once with and once without the `parallel`
//! feature and compare baselines to see the grid-level effect:
//!
//! ```text
//! cargo bench -p frechet-sets -- --save-baseline par
//! cargo bench -p frechet-sets --no-default-features -- --baseline par
//! ```

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frechet_sets::lab::{run_batch, sample, Experiment, MedianConfig, SamplingDistribution};
use frechet_sets::solver::empirical_objective;
use frechet_sets::{CandidateGrid, CostFunction, Point, Rng};
use std::hint::black_box;

fn batches(c: &mut Criterion) {
    let exp = Experiment::Median(MedianConfig { s: 3, n_max: 20_000, ..MedianConfig::default() });
    let seeds: Vec<u64> = (0..16).collect();
    let mut group = c.benchmark_group("median_batch_16_seeds");
    group.sample_size(10);
    group.bench_function("run_batch", |b| b.iter(|| black_box(run_batch(&exp, &seeds).unwrap())));
    group.bench_function("sequential_loop", |b| {
        b.iter(|| seeds.iter().map(|&s| exp.run(s).unwrap()).collect::<Vec<_>>())
    });
    group.finish();
}

fn objectives(c: &mut Criterion) {
    let dist = SamplingDistribution::Pareto { scale: 1.0, shape: 2.5 };
    let data = sample(&dist, &mut Rng::new(1), 2_000).unwrap();
    let cost = CostFunction::power(1.5, Point::scalar(0.0)).unwrap();
    let mut group = c.benchmark_group("empirical_objective");
    for points in [1_000usize, 10_000] {
        let grid = CandidateGrid::uniform_line(0.0, 20.0, points).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(points), &grid, |b, g| {
            b.iter(|| black_box(empirical_objective(&data, &cost, g).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, batches, objectives);
criterion_main!(benches);
