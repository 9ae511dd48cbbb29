use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hsfc::*;
use num_complex::Complex64;

fn diag(values: &[f64]) -> OperatorHandle {
    OperatorHandle::diagonal(values)
        .unwrap()
        .with_spectral_floor(0.0)
        .unwrap()
        .with_fitted_growth()
        .unwrap()
}

fn jordan() -> OperatorHandle {
    OperatorHandle::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
        .unwrap()
        .with_spectral_floor(0.0)
        .unwrap()
        .with_fitted_growth()
        .unwrap()
}

fn seeley(c: &mut Criterion) {
    let mut g = c.benchmark_group("seeley");
    for k in [4, 8, 16, 32] {
        g.bench_with_input(BenchmarkId::new("coefficients", k), &k, |b, &k| {
            b.iter(|| make_seeley_coefficients(k).unwrap())
        });
    }
    let f = make_builtin(&Builtin::Exp { t: 1.0 }, Domain::HalfLine).unwrap();
    let e = seeley_extend(&f, &default_cutoff(), &make_seeley_coefficients(8).unwrap()).unwrap();
    g.bench_function("extension_derivatives_K8", |b| {
        b.iter(|| e.derivatives(std::hint::black_box(-0.013), 4).unwrap())
    });
    g.finish();
}

fn norms(c: &mut Criterion) {
    let f = make_builtin(&Builtin::Bracket { beta: -1.0 }, Domain::WholeLine).unwrap();
    c.bench_function("an_norm_bracket_n3", |b| {
        b.iter(|| an_norm(&f, 3, Line::Whole, 1e-8).unwrap())
    });
}

fn engine(c: &mut Criterion) {
    let mut g = c.benchmark_group("engine");
    g.sample_size(10);
    let gz = make_builtin(
        &Builtin::Gz {
            z: Complex64::new(-1.0, 1.0),
        },
        Domain::WholeLine,
    )
    .unwrap();
    for dim in [2usize, 8, 32] {
        let values: Vec<f64> = (0..dim).map(|i| 50.0 * i as f64 / dim as f64).collect();
        let h = diag(&values);
        let cfg = QuadratureConfig::new(1e-8, choose_taylor_order(&h.growth().unwrap()));
        g.bench_with_input(BenchmarkId::new("hs_apply_gz", dim), &h, |b, h| {
            b.iter(|| hs_apply(&gz, h, &cfg).unwrap())
        });
    }
    let exp = make_builtin(&Builtin::Exp { t: 1.0 }, Domain::HalfLine).unwrap();
    let j = jordan();
    let cfg = QuadratureConfig::new(1e-8, choose_taylor_order(&j.growth().unwrap()));
    g.bench_function("gamma_apply_exp_jordan", |b| {
        b.iter(|| gamma_apply(&exp, &j, &cfg, cfg.n + 2).unwrap())
    });
    g.finish();
}

fn growth(c: &mut Criterion) {
    let j = OperatorHandle::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
    let grid = default_grid(&j);
    c.bench_function("fit_growth_jordan", |b| b.iter(|| fit_growth(&j, &grid).unwrap()));
}

criterion_group!(benches, seeley, norms, engine, growth);
criterion_main!(benches);
