use criterion::{criterion_group, criterion_main, Criterion};
use lyapdim::{
    check_conditions, find_gamma_certificate, integrate::integrate, le_spectrum_qr, le_spectrum_svd,
    scan::{run_scan, AxisRange, Param, ScanRequest},
    step_augmented, verify_r_nonpositive, IntegratorConfig, Method, SystemParams, TangentFrame,
};
use lyapdim_bench::attractor_point;
use std::hint::black_box;

fn steppers(c: &mut Criterion) {
    let p = SystemParams::classical();
    let s = attractor_point();
    let rk4 = IntegratorConfig::default();
    let dopri = IntegratorConfig::new(1e-2, Method::Dopri45, 1e-10, 1e-10).unwrap();
    c.bench_function("integrate rk4 10tu", |b| b.iter(|| integrate(&p, black_box(&s), 10.0, &rk4)));
    c.bench_function("integrate dopri45 10tu", |b| b.iter(|| integrate(&p, black_box(&s), 10.0, &dopri)));
    c.bench_function("augmented step", |b| {
        b.iter(|| step_augmented(&p, black_box(&s), &TangentFrame::identity(), &rk4))
    });
}

fn exponents(c: &mut Criterion) {
    let p = SystemParams::classical();
    let s = attractor_point();
    let cfg = IntegratorConfig::default();
    let mut g = c.benchmark_group("exponents");
    g.sample_size(10);
    g.bench_function("qr horizon 50", |b| b.iter(|| le_spectrum_qr(&p, black_box(&s), 50.0, 0.0, &cfg)));
    g.bench_function("svd horizon 50", |b| b.iter(|| le_spectrum_svd(&p, black_box(&s), 50.0, &cfg)));
    g.finish();
}

fn theory(c: &mut Criterion) {
    let p = SystemParams::classical();
    c.bench_function("check_conditions", |b| b.iter(|| check_conditions(black_box(&p))));
    c.bench_function("find_gamma_certificate", |b| b.iter(|| find_gamma_certificate(black_box(&p))));
    let cert = find_gamma_certificate(&p).unwrap().unwrap();
    c.bench_function("verify_r 1e4", |b| b.iter(|| verify_r_nonpositive(&p, &cert, 10_000)));
    let req = ScanRequest {
        fixed: Param::R,
        fixed_value: 28.0,
        axis1: AxisRange { param: Param::Sigma, min: 0.0, max: 20.0, cells: 100 },
        axis2: AxisRange { param: Param::B, min: 0.0, max: 8.0, cells: 100 },
    };
    c.bench_function("scan 100x100", |b| b.iter(|| run_scan(black_box(&req))));
}

criterion_group!(benches, steppers, exponents, theory);
criterion_main!(benches);
