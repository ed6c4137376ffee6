//! Sequential against rayon batch loops on the two Monte-Carlo workloads:
//! seeded rounding trials and tree embeddings.
//!
//! `cargo bench -p mlufl --bench parallel` compares both paths;
//! with `--no-default-features` only the sequential arm is built.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mlufl::instance::{generate, Family, GenSpec};
use mlufl::par;
use mlufl::relaxations::{solve_mlufl_lp, MluflLpOptions, TimeScale};
use mlufl::round_general::{round_general, GeneralParams};
use mlufl::treekit::frt_embed;

fn rounding_trials(c: &mut Criterion) {
    let inst = generate(&GenSpec::new(Family::Euclidean, 8, 8), 3).unwrap();
    let ts = TimeScale::for_instance(&inst, 0.5).unwrap();
    let lp = solve_mlufl_lp(&inst, &ts, &MluflLpOptions::default()).unwrap();
    let trial = |seed: usize| {
        let params = GeneralParams {
            seed: seed as u64,
            ..GeneralParams::default()
        };
        round_general(&inst, &lp.frac, &params)
            .map(|o| o.solution.routes[0].len())
            .ok()
    };
    let mut g = c.benchmark_group("round_general_trials");
    g.sample_size(10);
    for trials in [8usize, 32] {
        g.bench_with_input(BenchmarkId::new("sequential", trials), &trials, |b, &t| {
            b.iter(|| black_box(par::map_indices_seq(t, trial)))
        });
        #[cfg(feature = "parallel")]
        g.bench_with_input(BenchmarkId::new("parallel", trials), &trials, |b, &t| {
            b.iter(|| black_box(par::map_indices_par(t, trial)))
        });
    }
    g.finish();
}

fn embeddings(c: &mut Criterion) {
    let inst = generate(&GenSpec::new(Family::Euclidean, 24, 1), 5).unwrap();
    let points: Vec<usize> = (0..inst.n).collect();
    let root = inst.root();
    let embed = |seed: usize| frt_embed(&inst.d, &points, root, seed as u64).len();
    let mut g = c.benchmark_group("frt_embed");
    for seeds in [64usize, 256] {
        g.bench_with_input(BenchmarkId::new("sequential", seeds), &seeds, |b, &s| {
            b.iter(|| black_box(par::map_indices_seq(s, embed)))
        });
        #[cfg(feature = "parallel")]
        g.bench_with_input(BenchmarkId::new("parallel", seeds), &seeds, |b, &s| {
            b.iter(|| black_box(par::map_indices_par(s, embed)))
        });
    }
    g.finish();
}

criterion_group!(benches, rounding_trials, embeddings);
criterion_main!(benches);
