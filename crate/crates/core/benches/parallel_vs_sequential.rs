//! Compares the data-parallel hot paths against a single-worker run.
//!
//! With the default `parallel` feature the "seq" benchmarks pin a rayon
//! pool of one thread and the "par" benchmarks use the default pool;
//! built with `--no-default-features` both measure the plain sequential
//! code path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use obf_core::linear::{anova_bounds, AnovaSpec, PriorKind, ScanConfig};
use obf_core::montecarlo::{run, SimulationPlan};
use obf_core::sample::Sample;

fn with_workers<T>(threads: Option<usize>, f: impl Fn() -> T + Send + Sync) -> T
where
    T: Send,
{
    #[cfg(feature = "parallel")]
    {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            builder = builder.num_threads(t);
        }
        builder.build().unwrap().install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

fn bench_montecarlo(c: &mut Criterion) {
    let plan = SimulationPlan::for_scenario("eplogp-vs-ibf", 42, Some(64), Some(60)).unwrap();
    let mut group = c.benchmark_group("montecarlo-eplogp");
    group.bench_with_input(BenchmarkId::new("seq", 1), &plan, |b, plan| {
        b.iter(|| with_workers(Some(1), || run(plan).unwrap()))
    });
    group.bench_with_input(BenchmarkId::new("par", 0), &plan, |b, plan| {
        b.iter(|| with_workers(None, || run(plan).unwrap()))
    });
    group.finish();
}

fn bench_anova_scan(c: &mut Criterion) {
    // Four groups of twelve: 23k stratified training samples per scan.
    let spec = AnovaSpec::new(vec![12, 12, 12, 12], PriorKind::FullJeffreys).unwrap();
    let mut state = 0.37f64;
    let values: Vec<f64> = (0..48)
        .map(|i| {
            state = (state * 997.0 + 0.123).fract();
            state + (i / 12) as f64 * 0.4
        })
        .collect();
    let y = Sample::new(values, "bench");
    let scan = ScanConfig::default();
    let mut group = c.benchmark_group("anova-mts-scan");
    group.bench_function("seq", |b| {
        b.iter(|| with_workers(Some(1), || anova_bounds(&spec, &y, &scan).unwrap()))
    });
    group.bench_function("par", |b| {
        b.iter(|| with_workers(None, || anova_bounds(&spec, &y, &scan).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, bench_montecarlo, bench_anova_scan);
criterion_main!(benches);
