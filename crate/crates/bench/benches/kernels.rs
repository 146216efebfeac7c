use criterion::{black_box, criterion_group, criterion_main, Criterion};
use cutlab_core::experiments::rescaled_kernel;
use cutlab_core::gue::hermite_cauchy;
use cutlab_core::{build_recurrence, make_eynard, solve, GridSpec};
use num_complex::Complex64;

fn equilibrium(c: &mut Criterion) {
    let (v, _) = make_eynard(3.0).unwrap();
    c.bench_function("solve eynard3 t=1", |b| {
        b.iter(|| solve(black_box(&v), 1.0, 1.0).unwrap())
    });
    c.bench_function("solve eynard3 t=1.01 m=0.995", |b| {
        b.iter(|| solve(black_box(&v), 1.01, 0.995).unwrap())
    });
}

fn recurrence(c: &mut Criterion) {
    let (v, _) = make_eynard(3.0).unwrap();
    let mut group = c.benchmark_group("recurrence");
    for n in [40, 160] {
        group.bench_function(format!("n={n}"), |b| {
            b.iter(|| build_recurrence(black_box(&v), n, 1.0, n).unwrap())
        });
    }
    group.finish();
}

fn kernel_grid(c: &mut Criterion) {
    let (v, _) = make_eynard(3.0).unwrap();
    let grid = GridSpec::new(-3.0, 3.0, 0.25).unwrap();
    let mut group = c.benchmark_group("rescaled kernel");
    group.sample_size(20);
    group.bench_function("n=160 s=1", |b| {
        b.iter(|| rescaled_kernel(black_box(&v), 160, 1.0, &grid).unwrap())
    });
    group.finish();
}

fn cauchy(c: &mut Criterion) {
    let near = Complex64::new(0.7, 0.3);
    let far = Complex64::new(5.0, 40.0);
    c.bench_function("hermite_cauchy k=3 near axis", |b| {
        b.iter(|| hermite_cauchy(3, black_box(near)).unwrap())
    });
    c.bench_function("hermite_cauchy k=3 far field", |b| {
        b.iter(|| hermite_cauchy(3, black_box(far)).unwrap())
    });
}

criterion_group!(benches, equilibrium, recurrence, kernel_grid, cauchy);
criterion_main!(benches);
