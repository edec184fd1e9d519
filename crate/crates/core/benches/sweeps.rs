use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use walsh_core::exec::Execution;
use walsh_core::sweep::{verify_sweep, SweepConfig, Theorem};
use walsh_core::walsh::orthonormality_defect;

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn bound_sweeps(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify_sweep");
    g.sample_size(10);
    let configs = [
        (
            "smooth_b2",
            SweepConfig::new(Theorem::Smooth, 2, 256)
                .orders(1..=3)
                .functions(["exp:1", "sin:1,1"]),
        ),
        ("bernoulli_b3", SweepConfig::new(Theorem::Bernoulli, 3, 243).orders(1..=8)),
        ("w_extra_b3", SweepConfig::new(Theorem::WExtra, 3, 81).orders(0..=4)),
    ];
    for (name, cfg) in configs {
        for (mode, exec) in modes() {
            let cfg = cfg.clone().execution(exec);
            g.bench_with_input(BenchmarkId::new(name, mode), &cfg, |bch, cfg| {
                bch.iter(|| verify_sweep(black_box(cfg)).unwrap())
            });
        }
    }
    g.finish();
}

fn orthonormality(c: &mut Criterion) {
    let mut g = c.benchmark_group("orthonormality_b3_d4");
    g.sample_size(10);
    for (mode, exec) in modes() {
        g.bench_function(mode, |bch| bch.iter(|| orthonormality_defect(3, 4, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bound_sweeps, orthonormality);
criterion_main!(benches);
