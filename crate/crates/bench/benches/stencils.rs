use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hwkg::grid::FieldTag;
use hwkg::physics::CoefficientSet;
use hwkg::solver::{cfl_dt, Integrator, MAX_CFL};
use hwkg_bench::fixture;

fn laplacian(c: &mut Criterion) {
    let mut group = c.benchmark_group("laplacian");
    for n in [32, 64] {
        let (grid, state) = fixture(n);
        let u = state.field(FieldTag::U);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let mut acc = 0.0;
                for m in 0..grid.node_count() {
                    acc += u.laplacian_at(grid.index(grid.node(m)));
                }
                black_box(acc)
            })
        });
    }
    group.finish();
}

fn rk4_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("rk4_step");
    group.sample_size(10);
    for (name, coeffs) in [
        ("free", CoefficientSet::zero()),
        ("all-ones", CoefficientSet::all_ones()),
    ] {
        let (grid, state) = fixture(48);
        let dt = cfl_dt(&grid, MAX_CFL).unwrap();
        let mut integrator = Integrator::new(&grid, &coeffs);
        group.bench_function(name, |b| {
            b.iter(|| black_box(integrator.step(&state, dt).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, laplacian, rk4_step);
criterion_main!(benches);
