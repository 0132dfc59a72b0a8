use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use icgm_core::environment::{Environment, EnvironmentSpec, MeasureSpec, RecipeSpec};
use icgm_core::lattice::Rect;
use icgm_core::lpp::{passage_times, trace_geodesic_forward, WeightField};

fn homog_env() -> Environment {
    Environment::from_spec(EnvironmentSpec {
        a: RecipeSpec::Constant { value: 0.5 },
        b: RecipeSpec::Constant { value: 0.5 },
        alpha: MeasureSpec::Atomic {
            atoms: vec![(0.5, 1.0)],
        },
        beta: MeasureSpec::Atomic {
            atoms: vec![(0.5, 1.0)],
        },
        seed: 7,
        window: ((0, 0), (1_000_000, 1_000_000)),
    })
    .unwrap()
}

fn bench_dense_dp(c: &mut Criterion) {
    let env = homog_env();
    let mut group = c.benchmark_group("dense_passage_dp");
    for side in [128i64, 512, 1024] {
        let rect = Rect::new((0, 0), (side - 1, side - 1)).unwrap();
        let w = WeightField::from_environment(&env, rect).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(side), &side, |b, _| {
            b.iter(|| passage_times(&w, (0, 0)).unwrap().g((side - 1, side - 1)))
        });
    }
    group.finish();
}

fn bench_weight_sampling(c: &mut Criterion) {
    let env = homog_env();
    c.bench_function("weight_field_1024", |b| {
        let rect = Rect::new((0, 0), (1023, 1023)).unwrap();
        b.iter(|| WeightField::from_environment(&env, rect).unwrap().at((7, 9)))
    });
}

fn bench_streaming_geodesic(c: &mut Criterion) {
    let env = homog_env();
    c.bench_function("streaming_geodesic_2048", |b| {
        b.iter(|| {
            trace_geodesic_forward(|p| env.weight_unchecked(p), (0, 0), (2047, 2047))
                .unwrap()
                .0
                .sites
                .len()
        })
    });
}

criterion_group!(
    benches,
    bench_dense_dp,
    bench_weight_sampling,
    bench_streaming_geodesic
);
criterion_main!(benches);
