use cmdual_bench::cm_table;
use cmdual_core::cmdual::dual_representation;
use cmdual_core::walsh::{fast_spectrum, fast_spectrum_with_threads};
use cmdual_core::FieldCtx;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("fast_spectrum");
    group.sample_size(10);
    for (n, k) in [(8, 7), (10, 7), (12, 5)] {
        let (ctx, table) = cm_table(n, k);
        group.bench_with_input(BenchmarkId::new("default", n), &table, |b, t| {
            b.iter(|| fast_spectrum(&ctx, t).unwrap())
        });
    }
    let (ctx, table) = cm_table(12, 5);
    for threads in [1, 2, 4, 8] {
        group.bench_with_input(
            BenchmarkId::new("n12_threads", threads),
            &threads,
            |b, &t| b.iter(|| fast_spectrum_with_threads(&ctx, &table, t).unwrap()),
        );
    }
    group.finish();
}

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("dual");
    for (n, k) in [(11, 5), (20, 13), (30, 19)] {
        let ctx = FieldCtx::new(n, None).unwrap();
        group.bench_function(
            BenchmarkId::new("representation", format!("{n}_{k}")),
            |b| b.iter(|| dual_representation(&ctx, ctx.generator(), k).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, spectrum, construction);
criterion_main!(benches);
