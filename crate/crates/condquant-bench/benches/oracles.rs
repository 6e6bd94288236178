use condquant::constructions::{alpha_f, candidate_errors, greedy_refine, GreedyPolicy};
use condquant::integrals::{descend, exact_distortion};
use condquant::rational::rat;
use condquant::solver::{discretize, dp_optimal, solve_n_means};
use condquant::{CondensationSystem, Preset};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn region_tree(c: &mut Criterion) {
    let sys = CondensationSystem::preset(Preset::Uniform);
    let pts = vec![rat(1, 10), rat(1, 2), rat(9, 10)];
    let mut g = c.benchmark_group("descend");
    for depth in [4u32, 8, 12] {
        g.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, &d| {
            b.iter(|| descend(&sys, black_box(&pts), d).unwrap())
        });
    }
    g.finish();
    c.bench_function("exact_distortion/uniform-3", |b| b.iter(|| exact_distortion(black_box(&pts), &sys, 12).unwrap()));
}

fn dp_oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("dp_optimal");
    g.sample_size(10);
    for case in [Preset::Uniform, Preset::Discrete] {
        let sys = CondensationSystem::preset(case);
        let meas = discretize(&sys, 6, 8).unwrap();
        g.bench_function(format!("{case:?}/n=4"), |b| b.iter(|| dp_optimal(black_box(&meas), 4).unwrap()));
    }
    g.finish();
}

fn lloyd(c: &mut Criterion) {
    let mut g = c.benchmark_group("lloyd");
    g.sample_size(10);
    for case in [Preset::Uniform, Preset::Discrete] {
        let sys = CondensationSystem::preset(case);
        g.bench_function(format!("{case:?}/n=4"), |b| b.iter(|| solve_n_means(4, &sys, 5, 10, 0).unwrap()));
    }
    g.finish();
}

fn constructions(c: &mut Criterion) {
    let mut g = c.benchmark_group("constructions");
    for case in [Preset::Uniform, Preset::Discrete] {
        g.bench_function(format!("{case:?}/alpha_f(4)"), |b| b.iter(|| alpha_f(case, black_box(4)).unwrap()));
        let base = alpha_f(case, 3).unwrap();
        let target = base.total_count + 10;
        g.bench_function(format!("{case:?}/greedy+10"), |b| {
            b.iter(|| greedy_refine(&base, black_box(target), GreedyPolicy::Unbounded).unwrap())
        });
    }
    g.sample_size(10);
    g.bench_function("Discrete/candidate_errors(3..=150)", |b| {
        b.iter(|| candidate_errors(Preset::Discrete, 3, black_box(150)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, region_tree, dp_oracle, lloyd, constructions);
criterion_main!(benches);
