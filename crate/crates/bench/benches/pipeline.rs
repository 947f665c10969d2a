use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hdmd::schrodinger::{assemble_streaming, reference_observable};
use hdmd::spectral::probes::{basis_vector, free_jacobi, resolvent_convergence_probe};
use hdmd::{
    c64, eigendecompose, hermitian_dmd, spectral_measure, symmetric_procrustes, AxisBox, ObservableCoefficients,
    QuadratureRule, DEFAULT_RANK_TOLERANCE,
};
use hdmd_bench::{assembled, problem, random_complex};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    g.sample_size(10);
    for grid in [40, 75] {
        let p = problem(20);
        let quad = p.grid(grid).unwrap();
        let f = |x: &[f64]| reference_observable([x[0], x[1]]);
        g.bench_with_input(BenchmarkId::from_parameter(grid), &grid, |b, _| {
            b.iter(|| assemble_streaming(&p, &quad, &[&f], 4096, DEFAULT_RANK_TOLERANCE).unwrap())
        });
    }
    g.finish();
}

fn hermitian_pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("hermitian_dmd");
    g.sample_size(10);
    for per_axis in [10, 20] {
        let (pair, moments) = assembled(60, per_axis);
        g.bench_with_input(BenchmarkId::new("operator+eig", per_axis * per_axis), &pair, |b, pair| {
            b.iter(|| {
                let k = hermitian_dmd(pair);
                eigendecompose(&k).unwrap().len()
            })
        });
        let eig = eigendecompose(&hermitian_dmd(&pair)).unwrap();
        let obs = ObservableCoefficients::from_moments(&moments, &pair).unwrap();
        g.bench_function(BenchmarkId::new("measure", per_axis * per_axis), |b| {
            b.iter(|| spectral_measure(&eig, &obs).unwrap())
        });
    }
    g.finish();
}

fn procrustes(c: &mut Criterion) {
    let mut g = c.benchmark_group("procrustes");
    for (m, n) in [(200, 50), (1000, 100)] {
        let x = random_complex(1, m, n);
        let y = random_complex(2, m, n);
        g.bench_function(BenchmarkId::from_parameter(format!("{m}x{n}")), |b| {
            b.iter(|| symmetric_procrustes(black_box(x.as_ref()), y.as_ref()).unwrap())
        });
    }
    g.finish();
}

fn trapezoid(c: &mut Criterion) {
    let domain = AxisBox::cube(-5.0, 5.0, 2).unwrap();
    let quad = QuadratureRule::tensor_trapezoid(&domain, &[300, 300]).unwrap();
    c.bench_function("trapezoid/build 300²", |b| {
        b.iter(|| QuadratureRule::tensor_trapezoid(&domain, black_box(&[300, 300])).unwrap())
    });
    c.bench_function("trapezoid/integrate 300²", |b| {
        b.iter(|| quad.integrate(|x| reference_observable([x[0], x[1]]).powi(2)))
    });
}

fn probes(c: &mut Criterion) {
    let mut g = c.benchmark_group("probes");
    g.sample_size(10);
    let n_ref = 800;
    let l = free_jacobi(n_ref);
    let v = basis_vector(n_ref, 0);
    g.bench_function("resolvent 800", |b| {
        b.iter(|| resolvent_convergence_probe(l.as_ref(), &v, c64::new(0.0, 1.0), &[50, 100, 200, 400]).unwrap())
    });
    g.finish();
}

criterion_group!(benches, assembly, hermitian_pipeline, procrustes, trapezoid, probes);
criterion_main!(benches);
