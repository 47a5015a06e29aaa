use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rdens_core::dynamics::{build_hamiltonian, evolve_to_purity, initial_state, HamiltonianModel, InitialStateSpec, ModelKind};
use rdens_core::marginals::marginal_lambda1;
use rdens_core::mcmc::{Chain, ChainConfig};
use rdens_core::rng::seeded;
use rdens_core::{ChartDensity, ChartMeasure, StaticEnsembleSpec};

fn mcmc_step(c: &mut Criterion) {
    let spec = StaticEnsembleSpec::purity(4, 16, 0.4).unwrap();
    let config = ChainConfig::new(spec, 1, 1);
    let mut chain = Chain::new(&config, seeded(1)).unwrap();
    chain.burn_in(10_000).unwrap();
    c.bench_function("mcmc_step_m16", |b| b.iter(|| chain.step()));
}

fn density_grid(c: &mut Criterion) {
    let density = ChartDensity::new(16, 0.4, ChartMeasure::default()).unwrap();
    c.bench_function("density_grid_100", |b| b.iter(|| density.grid(black_box(100)).unwrap()));
    c.bench_function("density_normalization", |b| {
        b.iter(|| ChartDensity::new(black_box(16), 0.4, ChartMeasure::default()).unwrap())
    });
}

fn realization(c: &mut Criterion) {
    let mut group = c.benchmark_group("dynamic_realization");
    for m in [8, 16] {
        let model = HamiltonianModel::new(ModelKind::Global, m, 0.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &model, |b, model| {
            let mut rng = seeded(2);
            b.iter(|| {
                let h = build_hamiltonian(model, &mut rng).unwrap();
                let psi = initial_state(&InitialStateSpec::separable(), model.m, &mut rng).unwrap();
                evolve_to_purity(&h, &psi, 0.8, 100.0).unwrap()
            })
        });
    }
    group.finish();
}

fn marginal(c: &mut Criterion) {
    c.bench_function("marginal_lambda1_512", |b| b.iter(|| marginal_lambda1(black_box(16), 0.4, 512).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = mcmc_step, density_grid, realization, marginal
}
criterion_main!(benches);
