use criterion::{criterion_group, criterion_main, Criterion};
use fsl_bench::{jump_diffusion, sde};
use fsl_core::estimators::{estimate_symbols, geometric_t_grid};
use fsl_core::sim::simulate_paths;
use fsl_core::SimulationConfig;
use std::hint::black_box;

fn simulation(c: &mut Criterion) {
    let cfg = SimulationConfig { horizon: 1.0, dt: 1e-3, n_paths: 100, seed: 1, ..Default::default() };
    let levy = jump_diffusion();
    let mut g = c.benchmark_group("simulate-100x1000");
    g.sample_size(10);
    g.bench_function("levy", |b| b.iter(|| simulate_paths(&levy, black_box(&[0.0]), &cfg).unwrap()));
    let m = sde();
    g.bench_function("levy-sde", |b| b.iter(|| simulate_paths(&m, black_box(&[0.0]), &cfg).unwrap()));
    g.finish();

    let est_cfg = SimulationConfig { n_paths: 10_000, ..cfg };
    let xis = vec![vec![0.5], vec![1.0], vec![2.0]];
    let t = geometric_t_grid(0.01, 4);
    let mut g = c.benchmark_group("estimate");
    g.sample_size(10);
    g.bench_function("symbol-3xi-10k", |b| {
        b.iter(|| estimate_symbols(&levy, &[0.0], &xis, &est_cfg, &t, 2.0).unwrap())
    });
    g.finish();
}

criterion_group!(benches, simulation);
criterion_main!(benches);
