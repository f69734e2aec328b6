//! Candidate verification on several threads against one thread.

#[path = "../tests/support/mod.rs"]
mod support;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gale_core::nmso::examples;
use gale_core::par::ExecMode;
use gale_core::solve::{solve_one_counter, SolveOptions};
use gale_core::synth::build_games;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, ExecMode); 2] = [
    ("parallel", ExecMode::Parallel),
    ("sequential", ExecMode::Sequential),
];

fn example_games(c: &mut Criterion) {
    let mut group = c.benchmark_group("example games");
    for a in [
        examples::unbounded(),
        examples::eventually_zero(),
        examples::echo(),
    ] {
        let h = build_games(&a).unwrap().counter;
        for (label, mode) in MODES {
            let opts = SolveOptions {
                mode,
                ..SolveOptions::default()
            };
            group.bench_with_input(BenchmarkId::new(label, &a.name), &h, |b, h| {
                b.iter(|| solve_one_counter(h, (h.initial, 0), &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn random_systems(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe7c);
    let systems: Vec<_> = (0..40).map(|_| support::random_system(&mut rng)).collect();
    let mut group = c.benchmark_group("random systems");
    for (label, mode) in MODES {
        let opts = SolveOptions {
            mode,
            ..SolveOptions::default()
        };
        group.bench_function(label, |b| {
            b.iter(|| {
                for h in &systems {
                    for level in [0, 3, 8] {
                        solve_one_counter(h, (0, level), &opts).unwrap();
                    }
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, example_games, random_systems);
criterion_main!(benches);
