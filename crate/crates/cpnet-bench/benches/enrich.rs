use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cpnet::merge::{enrich, CyclePolicy};
use cpnet::unfold::{fold_net, unfold_net};
use cpnet_bench::{generated_pair, worked_example_pair};

fn bench_enrich(c: &mut Criterion) {
    let mut group = c.benchmark_group("enrich");
    let (initial, reference) = worked_example_pair();
    group.bench_function("worked_example", |b| {
        b.iter(|| {
            enrich(
                black_box(&initial),
                black_box(&reference),
                CyclePolicy::Warn,
            )
            .unwrap()
        })
    });
    for features in [3, 5, 8, 10] {
        let (initial, reference) = generated_pair(features, 10);
        group.bench_with_input(
            BenchmarkId::new("generated_10_values", features),
            &features,
            |b, _| {
                b.iter(|| {
                    enrich(
                        black_box(&initial),
                        black_box(&reference),
                        CyclePolicy::Warn,
                    )
                    .unwrap()
                })
            },
        );
    }
    group.finish();
}

fn bench_unfold_fold(c: &mut Criterion) {
    let (net, _) = generated_pair(8, 8);
    c.bench_function("unfold_net", |b| {
        b.iter(|| unfold_net(black_box(&net)).unwrap())
    });
    let unfolded = unfold_net(&net).unwrap();
    c.bench_function("fold_net", |b| {
        b.iter(|| fold_net(black_box(&unfolded)).unwrap())
    });
}

fn bench_format(c: &mut Criterion) {
    let (net, _) = generated_pair(8, 8);
    let text = cpnet::serialize(&net).unwrap();
    c.bench_function("parse", |b| {
        b.iter(|| cpnet::parse(black_box(&text)).unwrap())
    });
    c.bench_function("serialize", |b| {
        b.iter(|| cpnet::serialize(black_box(&net)).unwrap())
    });
}

criterion_group!(benches, bench_enrich, bench_unfold_fold, bench_format);
criterion_main!(benches);
