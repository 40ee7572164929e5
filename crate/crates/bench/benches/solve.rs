use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use varmatch::{
    homotopy_solve, jacobian_matrix, poly_product_full, random_problem, spectral_factor,
    varma_cov_fft, varma_cov_linear, FactorConfig, GenConfig, HomotopyConfig, MaInput,
};

const SHAPES: [(usize, usize); 3] = [(2, 2), (3, 2), (5, 10)];

fn problem(m: usize, n: usize) -> varmatch::GeneratedProblem {
    let cfg = GenConfig {
        min_det_pn: 1e-20,
        ..GenConfig::new(17, m, n)
    };
    random_problem(&cfg).unwrap()
}

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("homotopy_solve");
    group.sample_size(10);
    for (m, n) in SHAPES {
        let g = problem(m, n);
        let ma = MaInput::Polynomial(g.b.clone());
        let cfg = HomotopyConfig::default();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{m}x{n}")),
            &g,
            |b, g| b.iter(|| homotopy_solve(black_box(&g.data), &ma, &cfg).unwrap()),
        );
    }
    group.finish();
}

fn bench_factor(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_factor");
    for (m, n) in SHAPES {
        let p = poly_product_full(&problem(m, n).b);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{m}x{n}")),
            &p,
            |b, p| b.iter(|| spectral_factor(black_box(p), &FactorConfig::default()).unwrap()),
        );
    }
    group.finish();
}

fn bench_jacobian(c: &mut Criterion) {
    let mut group = c.benchmark_group("jacobian_matrix");
    for (m, n) in SHAPES {
        let g = problem(m, n);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{m}x{n}")),
            &g,
            |b, g| b.iter(|| jacobian_matrix(black_box(&g.a_star), &g.data).unwrap()),
        );
    }
    group.finish();
}

fn bench_oracles(c: &mut Criterion) {
    let g = problem(3, 2);
    c.bench_function("varma_cov_linear/3x2", |b| {
        b.iter(|| varma_cov_linear(black_box(&g.a_star), &g.b).unwrap())
    });
    c.bench_function("varma_cov_fft/3x2/4096", |b| {
        b.iter(|| varma_cov_fft(black_box(&g.a_star), &g.b, 4096).unwrap())
    });
}

criterion_group!(
    benches,
    bench_solve,
    bench_factor,
    bench_jacobian,
    bench_oracles
);
criterion_main!(benches);
