//! Compares the data-parallel hot paths against a single-thread pool.
//!
//! Every parallel section maps a pure function over pre-split inputs, so
//! both configurations produce bit-identical results; these benches measure
//! what extra threads buy on batch acquisition scoring, Monte Carlo
//! hypervolume, evolutionary generations, and the raw map facade.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crossbow_core::acquisition::score_batch;
use crossbow_core::eval::synthetic::zdt1;
use crossbow_core::gp::{GpFitConfig, GpModel};
use crossbow_core::hypervolume::hypervolume_mc;
use crossbow_core::nsga2::{evolve, Nsga2Config};
use crossbow_core::par;
use crossbow_core::space::DesignSpace;

fn single_pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("pool")
}

/// Five GP surrogates fit on smooth synthetic targets over encoded designs.
fn fitted_models(space: &DesignSpace, n: usize) -> Vec<GpModel> {
    let points = space.sample_uniform(n, 11);
    let x: Vec<Vec<f64>> = points.iter().map(|p| space.encode(p).unwrap()).collect();
    let config = GpFitConfig {
        epochs: 15,
        step_size: 0.05,
    };
    (0..5)
        .map(|m| {
            let y: Vec<f64> = x
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(d, v)| (v * 2.0 + d as f64 * 0.1 + m as f64 * 0.3).sin())
                        .sum()
                })
                .collect();
            GpModel::fit(x.clone(), y, &config).unwrap()
        })
        .collect()
}

fn bench_batch_scoring(c: &mut Criterion) {
    let space = DesignSpace::vgg8();
    let models = fitted_models(&space, 60);
    let candidates: Vec<Vec<f64>> = space
        .sample_uniform(512, 23)
        .iter()
        .map(|p| space.encode(p).unwrap())
        .collect();
    let single = single_pool();

    let mut group = c.benchmark_group("batch_scoring");
    group.bench_function("default_pool", |b| {
        b.iter(|| black_box(score_batch(&models, &candidates, 2.0)))
    });
    group.bench_function("one_thread", |b| {
        b.iter(|| single.install(|| black_box(score_batch(&models, &candidates, 2.0))))
    });
    group.finish();
}

fn bench_mc_hypervolume(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points: Vec<Vec<f64>> = (0..60)
        .map(|_| (0..5).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let reference = vec![1.0; 5];
    let single = single_pool();

    let mut group = c.benchmark_group("mc_hypervolume");
    group.bench_function("default_pool", |b| {
        b.iter(|| black_box(hypervolume_mc(&points, &reference, 200_000, 7).unwrap()))
    });
    group.bench_function("one_thread", |b| {
        b.iter(|| {
            single.install(|| black_box(hypervolume_mc(&points, &reference, 200_000, 7).unwrap()))
        })
    });
    group.finish();
}

fn bench_evolution(c: &mut Criterion) {
    let space = DesignSpace::grid(8, 16).unwrap();
    let fitness = |p: &crossbow_core::DesignPoint| -> crossbow_core::Result<Vec<f64>> {
        let x = space.encode(p)?;
        let (f1, f2) = zdt1(&x);
        Ok(vec![f1, f2])
    };
    let config = Nsga2Config {
        population_size: 64,
        generations: 10,
        seed: 3,
        ..Nsga2Config::default()
    };
    let single = single_pool();

    let mut group = c.benchmark_group("nsga2_run");
    group.sample_size(20);
    group.bench_function("default_pool", |b| {
        b.iter(|| black_box(evolve(&space, &fitness, &config, None).unwrap()))
    });
    group.bench_function("one_thread", |b| {
        b.iter(|| single.install(|| black_box(evolve(&space, &fitness, &config, None).unwrap())))
    });
    group.finish();
}

fn bench_map_facade(c: &mut Criterion) {
    let inputs: Vec<u64> = (0..4096).collect();
    let work = |&i: &u64| {
        let mut acc = 0.0f64;
        for k in 1..200u64 {
            acc += ((i * k) as f64).sin();
        }
        acc
    };

    let mut group = c.benchmark_group("map_facade");
    group.bench_function("map_collect", |b| {
        b.iter(|| black_box(par::map_collect(&inputs, work)))
    });
    group.bench_function("map_collect_seq", |b| {
        b.iter(|| black_box(par::map_collect_seq(&inputs, work)))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_batch_scoring,
    bench_mc_hypervolume,
    bench_evolution,
    bench_map_facade
);
criterion_main!(benches);
