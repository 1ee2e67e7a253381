use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dclut::synth::{planted_table, rng};
use dclut::{compress, compress_config, SearchConfig};
use std::hint::black_box;

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("compress");
    group.sample_size(10);
    for w_in in [8u32, 10, 12] {
        let (table, mask) = planted_table(&mut rng(w_in as u64), w_in, 8, 3, 4, 0.6).unwrap();
        group.bench_with_input(BenchmarkId::new("full_sweep", w_in), &w_in, |b, _| {
            b.iter(|| {
                compress(
                    black_box(&table),
                    black_box(&mask),
                    &SearchConfig::default(),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn stage(c: &mut Criterion) {
    let mut group = c.benchmark_group("one_config");
    let (table, mask) = planted_table(&mut rng(1), 14, 8, 4, 8, 0.75).unwrap();
    for (label, dont_cares) in [("all_care", false), ("dont_care", true)] {
        let cfg = SearchConfig {
            dont_cares,
            ..Default::default()
        };
        group.bench_function(label, |b| {
            b.iter(|| compress_config(black_box(&table), black_box(&mask), 4, 0, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, stage);
criterion_main!(benches);
