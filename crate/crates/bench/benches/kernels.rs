use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walsh_lp::{
    decompose_instance, fwht_analyze, generate_instance, partition_interval, square_function, DyadicFunction,
    InstanceSpec, IntervalFamily, IntervalZ,
};

fn random_function(resolution: u32, seed: u64) -> DyadicFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..1usize << resolution).map(|_| rng.random_range(-1.0..1.0)).collect();
    DyadicFunction::new(resolution, values).unwrap()
}

fn transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("fwht_analyze");
    for k in [8, 12, 16] {
        let f = random_function(k, 1);
        group.throughput(Throughput::Elements(1 << k));
        group.bench_with_input(BenchmarkId::from_parameter(k), &f, |b, f| b.iter(|| fwht_analyze(black_box(f))));
    }
    group.finish();
}

fn square(c: &mut Criterion) {
    let mut group = c.benchmark_group("square_function");
    for k in [8, 12, 16] {
        let f = random_function(k, 2);
        group.throughput(Throughput::Elements(1 << k));
        group.bench_with_input(BenchmarkId::from_parameter(k), &f, |b, f| b.iter(|| square_function(black_box(f))));
    }
    group.finish();
}

fn partition(c: &mut Criterion) {
    let intervals: Vec<IntervalZ> = (1..=256u64)
        .flat_map(|b| (0..b).step_by(7).map(move |a| IntervalZ::new(a * 37, b * 4093).unwrap()))
        .collect();
    c.bench_function("partition_interval", |b| {
        b.iter(|| {
            for &i in &intervals {
                black_box(partition_interval(black_box(i)));
            }
        })
    });
}

fn chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("theorem_chain");
    group.sample_size(20);
    for m in [4, 16] {
        let spec = InstanceSpec::new(12, IntervalFamily::RandomDisjoint)
            .with_intervals(m, m)
            .with_seed(3);
        let instance = generate_instance(&spec).unwrap();
        group.bench_with_input(BenchmarkId::new("decompose", m), &instance, |b, inst| {
            b.iter(|| decompose_instance(black_box(inst)).unwrap())
        });
        let decomposed = decompose_instance(&instance).unwrap();
        group.bench_with_input(BenchmarkId::new("norms_p1.5", m), &decomposed, |b, d| {
            b.iter(|| d.chain(black_box(1.5)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transform, square, partition, chain);
criterion_main!(benches);
