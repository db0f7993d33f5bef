use criterion::{criterion_group, criterion_main, Criterion};
use intrusion_core::harness::simulate_replication;
use intrusion_core::{preset, run_replications};
use std::hint::black_box;

fn presets(c: &mut Criterion) {
    for name in ["fig4", "fig7_noisy"] {
        let s = preset(name).unwrap();
        c.bench_function(&format!("replication_{name}"), |b| b.iter(|| simulate_replication(black_box(&s), 0)));
    }
}

fn replications(c: &mut Criterion) {
    let s = preset("fig4").unwrap();
    let mut g = c.benchmark_group("replications");
    g.sample_size(10);
    g.bench_function("fig4_x100", |b| b.iter(|| run_replications(black_box(&s), 100, None)));
    g.finish();
}

criterion_group!(benches, presets, replications);
criterion_main!(benches);
