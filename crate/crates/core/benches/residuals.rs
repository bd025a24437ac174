use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use piezosv::verify::{default_stations, residuals_with, LateralCondition, VerifyOptions};
use piezosv::Execution;

#[path = "../tests/common/mod.rs"]
mod common;

fn residual_check(c: &mut Criterion) {
    let m = common::generic_material();
    let mut group = c.benchmark_group("residuals");
    group.sample_size(10);
    for n in [65, 129] {
        let sol = common::generic_fluxfree(n);
        let stations = default_stations(2.0);
        for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let opts = VerifyOptions { execution, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| residuals_with(&sol.solution, &m, &stations, &LateralCondition::FluxFree, &opts).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, residual_check);
criterion_main!(benches);
