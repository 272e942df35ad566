use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use softheap_bench::{epsilons, keys};
use softheap_core::workload::{insert_drain, insert_only};
use softheap_core::{Epsilon, HeapKind};

fn insert_drain_by_epsilon(c: &mut Criterion) {
    let n = 1 << 14;
    let ks = keys(n);
    let mut g = c.benchmark_group("insert_drain");
    g.throughput(Throughput::Elements(n as u64));
    for kind in [HeapKind::SoftSequence, HeapKind::Ternary] {
        for eps in epsilons() {
            g.bench_with_input(BenchmarkId::new(kind.name(), eps.denominator()), &ks, |b, ks| {
                b.iter(|| insert_drain(kind, eps, ks))
            });
        }
    }
    let half = Epsilon::new(1, 2).unwrap();
    g.bench_with_input(BenchmarkId::new("seq", "-"), &ks, |b, ks| {
        b.iter(|| insert_drain(HeapKind::Sequence, half, ks))
    });
    g.finish();
}

fn insert_by_size(c: &mut Criterion) {
    let eps = Epsilon::new(1, 16).unwrap();
    let mut g = c.benchmark_group("insert");
    for n in [1 << 10, 1 << 13, 1 << 16] {
        let ks = keys(n);
        g.throughput(Throughput::Elements(n as u64));
        for kind in HeapKind::ALL {
            g.bench_with_input(BenchmarkId::new(kind.name(), n), &ks, |b, ks| {
                b.iter(|| insert_only(kind, eps, ks))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, insert_drain_by_epsilon, insert_by_size);
criterion_main!(benches);
