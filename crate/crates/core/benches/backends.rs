use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use subrayleigh::montecarlo::simulate_counts_with;
use subrayleigh::par::Exec;
use subrayleigh::pipeline::{run_fringe_scan_with, uniform_phase_grid, DetectorCombo, PipelineConfig};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn gaussian_scan(c: &mut Criterion) {
    let config = PipelineConfig::new(1.4);
    let grid = uniform_phase_grid(256);
    let mut group = c.benchmark_group("gaussian_scan_256");
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_fringe_scan_with(exec, black_box(&config), &grid, DetectorCombo::D1A_D1B_D1C).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let config = PipelineConfig::new(0.8).with_efficiency(0.1);
    let grid = uniform_phase_grid(8);
    let mut group = c.benchmark_group("montecarlo_8x131072");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| simulate_counts_with(exec, black_box(&config), &grid, 131_072, 42).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gaussian_scan, monte_carlo);
criterion_main!(benches);
