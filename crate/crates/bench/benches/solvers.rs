use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use vor_bench::*;
use vor_core::partial::k_best_partial;
use vor_core::recall::perfect_recall_refinement;
use vor_core::solvers::{best_worst, optimal_strategy, ConceptKind, Selector};
use vor_core::vor::{coefficient_table, vor_compute};
use vor_core::solvers::Concept;

fn optimal(c: &mut Criterion) {
    let cfg = config();
    let mut group = c.benchmark_group("optimal");
    for n in [4, 8, 16] {
        let g = lenny_game(n);
        group.bench_with_input(BenchmarkId::new("lenny", n), &g, |b, g| {
            b.iter(|| optimal_strategy(black_box(g), &cfg).unwrap())
        });
    }
    for n in [2, 3, 4] {
        let g = dory_game(n);
        group.bench_with_input(BenchmarkId::new("dory", n), &g, |b, g| {
            b.iter(|| optimal_strategy(black_box(g), &cfg).unwrap())
        });
    }
    group.finish();
}

fn refinement(c: &mut Criterion) {
    let games = random_games(6, 16);
    c.bench_function("pr/random-depth-6", |b| {
        b.iter(|| {
            for g in &games {
                black_box(perfect_recall_refinement(g, 0).unwrap());
            }
        })
    });
    c.bench_function("coeffs/random-depth-6", |b| {
        b.iter(|| {
            for g in &games {
                black_box(coefficient_table(g));
            }
        })
    });
}

fn equilibria(c: &mut Criterion) {
    let cfg = config();
    let fig3 = fig3_game();
    c.bench_function("wEDT/fig3", |b| {
        b.iter(|| best_worst(black_box(&fig3), ConceptKind::Edt, Selector::Worst, &cfg).unwrap())
    });
    let fig2 = fig2_game();
    c.bench_function("vor/fig2", |b| b.iter(|| vor_compute(black_box(&fig2), Concept::OPT, &cfg).unwrap()));
}

fn partial(c: &mut Criterion) {
    let cfg = config();
    let g = x3c_yes();
    c.bench_function("k-best/x3c-6", |b| b.iter(|| k_best_partial(black_box(&g), 1, &cfg).unwrap()));
}

criterion_group!(benches, optimal, refinement, equilibria, partial);
criterion_main!(benches);
