use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use malias_bench::{run_fib, run_result_size};
use malias_core::laws::{check_equivalence, check_malias_laws, Baseline, GenSpec};
use malias_core::strategies::StrategyId;

fn programs(c: &mut Criterion) {
    let mut group = c.benchmark_group("resultsize");
    for strategy in StrategyId::ALL {
        group.bench_function(strategy.name(), |b| b.iter(|| run_result_size(black_box(strategy))));
    }
    group.finish();

    let mut group = c.benchmark_group("fib");
    for strategy in StrategyId::ALL {
        for n in [10, 15] {
            group.bench_with_input(BenchmarkId::new(strategy.name(), n), &n, |b, &n| {
                b.iter(|| run_fib(black_box(n), strategy))
            });
        }
    }
    group.finish();
}

fn law_suites(c: &mut Criterion) {
    let spec = GenSpec::new(42);
    let mut group = c.benchmark_group("laws-100-cases");
    group.sample_size(20);
    for strategy in StrategyId::ALL {
        group.bench_function(strategy.name(), |b| b.iter(|| check_malias_laws(strategy, &spec, 100)));
    }
    for baseline in Baseline::ALL {
        let name = format!("equivalence-{}", baseline.translation());
        group.bench_function(name, |b| b.iter(|| check_equivalence(baseline, &spec, 100)));
    }
    group.finish();
}

criterion_group!(benches, programs, law_suites);
criterion_main!(benches);
