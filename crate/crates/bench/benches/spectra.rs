use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tband_core::{
    build_toeplitz, eigendecompose, lift_first_order, spectral_function, CirclePoint, Complex64, QuadratureGrid,
    SectionBasis, SymbolFunction, TestFunctionChi,
};

fn toeplitz(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_and_decompose");
    g.sample_size(10);
    for k in [32u32, 128, 256] {
        let basis = SectionBasis::cp1(k).unwrap();
        let grid = QuadratureGrid::for_level(k);
        for (name, f) in [("height", SymbolFunction::height()), ("sphere_x", SymbolFunction::sphere_x())] {
            g.bench_with_input(BenchmarkId::new(name, k), &k, |b, _| {
                b.iter(|| eigendecompose(&build_toeplitz(&f, &basis, &grid).unwrap()).unwrap())
            });
        }
    }
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let k = 256;
    let basis = SectionBasis::cp1(k).unwrap();
    let t = eigendecompose(&build_toeplitz(&SymbolFunction::sphere_x(), &basis, &QuadratureGrid::for_level(k)).unwrap())
        .unwrap();
    let t = lift_first_order(&t).unwrap();
    let x1 = CirclePoint::on_cp1(Complex64::new(0.3, 0.1), 0.2);
    let x2 = CirclePoint::on_cp1(Complex64::new(0.32, 0.08), -0.1);
    c.bench_function("spectral_function_k256", |b| {
        b.iter(|| spectral_function(&t, &basis, black_box(0.1 * k as f64), &x1, &x2).unwrap())
    });
}

fn chi_cache(c: &mut Criterion) {
    let mut g = c.benchmark_group("chi");
    g.sample_size(10);
    g.bench_function("cache_build_eps0.5", |b| {
        b.iter(|| {
            let chi = TestFunctionChi::new(0.5).unwrap();
            black_box(chi.chi_hat(3.0))
        })
    });
    let chi = TestFunctionChi::new(0.5).unwrap();
    let _ = chi.chi_hat(0.0);
    g.bench_function("chi_hat_lookup", |b| b.iter(|| chi.chi_hat(black_box(17.3))));
    g.finish();
}

criterion_group!(benches, toeplitz, kernels, chi_cache);
criterion_main!(benches);
