use std::hint::black_box;

use choicedict::{BPolicy, BarrierMode, ChoiceDict, Config, FillPolicy, Layout};
use choicedict_bench::{populated, probes};
use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};

const SIZES: [u64; 3] = [1 << 10, 1 << 16, 1 << 22];

fn policies() -> [(&'static str, Config); 4] {
    [
        ("2w", Config::default()),
        ("w", Config::default().with_b_policy(BPolicy::Word)),
        // Hidden mode needs b >= 2 ceil(log2(n+1)), more than W/2 allows here.
        (
            "w/2-plain",
            Config::default()
                .with_b_policy(BPolicy::HalfWord)
                .with_barrier(BarrierMode::Plain),
        ),
        ("2w-plain", Config::default().with_barrier(BarrierMode::Plain)),
    ]
}

fn update(c: &mut Criterion) {
    let mut g = c.benchmark_group("insert_delete");
    g.throughput(Throughput::Elements(2 * 1024));
    for (name, config) in policies() {
        for n in SIZES.into_iter().filter(|&n| Layout::for_config(n, &config).is_ok()) {
            let keys = probes(n, 1024, 1);
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter_batched_ref(
                    || populated(n, &config, 0.3, 2),
                    |d| {
                        for &k in &keys {
                            d.insert(k).unwrap();
                        }
                        for &k in &keys {
                            d.delete(k).unwrap();
                        }
                    },
                    BatchSize::LargeInput,
                )
            });
        }
    }
    g.finish();
}

fn queries(c: &mut Criterion) {
    let mut g = c.benchmark_group("contains");
    g.throughput(Throughput::Elements(1024));
    for (name, config) in policies() {
        for n in SIZES.into_iter().filter(|&n| Layout::for_config(n, &config).is_ok()) {
            let d = populated(n, &config, 0.3, 3);
            let keys = probes(n, 1024, 4);
            g.bench_with_input(BenchmarkId::new(name, n), &d, |b, d| {
                b.iter(|| keys.iter().filter(|&&k| d.contains(k).unwrap()).count())
            });
        }
    }
    g.finish();

    let mut g = c.benchmark_group("choice");
    for n in SIZES {
        // Sparse sets: the chosen element is far from the start.
        let d = populated(n, &Config::default(), 0.001, 5);
        g.bench_with_input(BenchmarkId::from_parameter(n), &d, |b, d| {
            b.iter(|| d.choice().unwrap())
        });
    }
    g.finish();
}

fn iteration(c: &mut Criterion) {
    let mut g = c.benchmark_group("iterate");
    for density in [0.01, 0.5] {
        let n = 1 << 16;
        let d = populated(n, &Config::default(), density, 6);
        let members = d.iter().count() as u64;
        g.throughput(Throughput::Elements(members));
        g.bench_with_input(BenchmarkId::new("density", density), &d, |b, d| {
            b.iter(|| d.iter().map(black_box).count())
        });
    }
    g.finish();
}

fn init(c: &mut Criterion) {
    // Allocation is linear in n; only the initialization after it is timed.
    let mut g = c.benchmark_group("init_over_garbage");
    for n in SIZES {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let bytes = ChoiceDict::new(n, &Config::default().with_fill(FillPolicy::Random(n)))
                .unwrap()
                .to_bytes();
            b.iter_batched_ref(
                || ChoiceDict::from_bytes_sized(n, &bytes, &Config::default()).unwrap(),
                |d| d.clear().unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    g.finish();
}

criterion_group!(benches, update, queries, iteration, init);
criterion_main!(benches);
