//! Replicate throughput with and without the rayon pool, and the rank-form
//! win fractions against the pairwise definition on one simulated trial.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use gwp_core::ranks::{win_fractions, win_fractions_bruteforce};
use gwp_core::sim::{generate_trial, prepare, run_prepared, Execution, ScenarioConfig};
use gwp_core::stream::replicate_rng;

fn scenario(clusters: usize, reps: usize) -> ScenarioConfig {
    ScenarioConfig {
        clusters,
        cluster_size: 30,
        theta_targets: [0.56, 0.56],
        reps,
        seed: 1,
        ..ScenarioConfig::default()
    }
}

fn replicates(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_scenario_200_reps");
    group.sample_size(10);
    for clusters in [10, 50] {
        let p = prepare(&scenario(clusters, 200)).unwrap();
        for (label, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(label, clusters), &p, |b, p| {
                b.iter(|| run_prepared(black_box(p), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn win_fraction_forms(c: &mut Criterion) {
    let mut group = c.benchmark_group("win_fractions");
    for clusters in [10, 40] {
        let p = prepare(&scenario(clusters, 1)).unwrap();
        let d = generate_trial(&p, &mut replicate_rng(3, 0)).unwrap();
        group.bench_with_input(BenchmarkId::new("rank_form", d.len()), &d, |b, d| {
            b.iter(|| win_fractions(black_box(d), 0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("pairwise", d.len()), &d, |b, d| {
            b.iter(|| win_fractions_bruteforce(black_box(d), 0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, replicates, win_fraction_forms);
criterion_main!(benches);
