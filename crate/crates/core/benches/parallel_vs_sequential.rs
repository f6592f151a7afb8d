//! Rayon pool against a single-thread pool on the two parallel workloads:
//! per-class peel analysis and the random verification suites.
//!
//! `cargo bench --no-default-features` builds the sequential backend, where
//! both series run the plain iterator path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;

use peelkit::enumerate::{slope_arc, EnumerationBound, Slope};
use peelkit::peel::PeelConfig;
use peelkit::surface::torus_from_traces;
use peelkit::verify::{lemma_suite, PeelSetup, SampleSizes};

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let threads = rayon::current_num_threads();
    [("sequential".to_string(), 1), (format!("rayon-{threads}"), threads)]
        .into_iter()
        .map(|(name, n)| {
            (
                name,
                ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool"),
            )
        })
        .collect()
}

fn bench_analysis(c: &mut Criterion) {
    let mut group = c.benchmark_group("torus_peel_analysis");
    group.sample_size(10);
    let setup = PeelSetup {
        surface: torus_from_traces(4.0, 4.0, 4.0).unwrap(),
        arcs: vec![slope_arc(Slope::INFINITY), slope_arc(Slope::ZERO)],
        cfg: PeelConfig::with_eps(0.1),
        bound: EnumerationBound::new(10).unwrap(),
    };
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, "N=10"), |b| {
            b.iter(|| pool.install(|| setup.analyze().unwrap()))
        });
    }
    group.finish();
}

fn bench_lemma(c: &mut Criterion) {
    let mut group = c.benchmark_group("lemma_suite");
    let samples = SampleSizes::default();
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, samples.pairs), |b| {
            b.iter(|| pool.install(|| lemma_suite(42, &samples)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_analysis, bench_lemma);
criterion_main!(benches);
