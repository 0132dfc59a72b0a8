use criterion::{criterion_group, criterion_main, Criterion};

use icgm_core::competition::u_stays_at_base_column;
use icgm_core::environment::{Environment, EnvironmentSpec, MeasureSpec, RecipeSpec};
use icgm_core::particles::rost_swap_times;
use icgm_core::rng::replica_seed;
use icgm_core::stationary::{build_stationary, burke_increments, BoundarySide};

fn trap_env() -> Environment {
    Environment::from_spec(EnvironmentSpec {
        a: RecipeSpec::ExplicitWithTail {
            values: vec![1.0, 0.5],
            tail: 1.0,
            start: 1,
        },
        b: RecipeSpec::Constant { value: 1.0 },
        alpha: MeasureSpec::Atomic {
            atoms: vec![(1.0, 1.0)],
        },
        beta: MeasureSpec::Atomic {
            atoms: vec![(1.0, 1.0)],
        },
        seed: 7,
        window: ((-10, -10), (1_000_000, 1_000_000)),
    })
    .unwrap()
}

fn bench_burke_replica(c: &mut Criterion) {
    let env = trap_env();
    c.bench_function("burke_replica_10x10", |b| {
        let mut r = 0u64;
        b.iter(|| {
            r += 1;
            let renv = env.with_seed(replica_seed(env.seed, r));
            let m = build_stationary(&renv, (1, 1), (10, 10), 0.1, BoundarySide::Sw).unwrap();
            burke_increments(&renv, &m, &m.default_path())
                .unwrap()
                .bulk
                .len()
        })
    });
}

fn bench_swap_table(c: &mut Criterion) {
    let env = trap_env();
    c.bench_function("swap_table_400", |b| {
        b.iter(|| rost_swap_times(&env, 400).unwrap().t(400, 400))
    });
}

fn bench_interface_strip(c: &mut Criterion) {
    let env = trap_env();
    c.bench_function("interface_strip_500", |b| {
        let mut r = 0u64;
        b.iter(|| {
            r += 1;
            let renv = env.with_seed(replica_seed(env.seed, r));
            u_stays_at_base_column(&renv, (1, 1), 500).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_burke_replica,
    bench_swap_table,
    bench_interface_strip
);
criterion_main!(benches);
