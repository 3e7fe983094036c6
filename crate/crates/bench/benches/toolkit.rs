use std::hint::black_box;

use bilayer_bench::bump;
use bilayer_core::discrete::{bs_norm, complex_spectrum_with, SpectrumOptions};
use bilayer_core::enclosure::{Thm11Lhs, Window};
use bilayer_core::specfun::{g_derivs, hankel1, macdonald_k0};
use bilayer_core::{c, region_scan, DiscreteOperator, TheoremConstants, C64};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn special_functions(cr: &mut Criterion) {
    let zs: Vec<C64> = (0..64).map(|i| C64::from_polar(0.01 * 1.12f64.powi(i), 0.02 * i as f64)).collect();
    cr.bench_function("hankel1_0/64", |b| b.iter(|| zs.iter().map(|&z| hankel1(0, black_box(z)).unwrap()).sum::<C64>()));
    cr.bench_function("macdonald_k0/64", |b| b.iter(|| zs.iter().map(|&z| macdonald_k0(black_box(z)).unwrap()).sum::<C64>()));
    cr.bench_function("g_derivs/64", |b| b.iter(|| zs.iter().map(|&z| g_derivs(black_box(z)).unwrap().g).sum::<C64>()));
}

fn operator_application(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("apply_operator");
    for n in [32, 64, 128] {
        let v = bump(n, 6.0);
        let op = DiscreteOperator::new(v.grid, 1.0, Some(v)).unwrap();
        let u: Vec<C64> = (0..op.len()).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| b.iter(|| op.apply_operator(black_box(u))));
    }
    group.finish();
}

fn spectra(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("complex_spectrum");
    group.sample_size(10);
    for n in [8, 16] {
        let v = bump(n, 3.0);
        let op = DiscreteOperator::new(v.grid, 0.5, Some(v)).unwrap();
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| complex_spectrum_with(&op, SpectrumOptions { diagnostics: false }).unwrap())
        });
    }
    group.finish();
    let v = bump(24, 6.0);
    let op = DiscreteOperator::new(v.grid, 0.5, Some(v)).unwrap();
    cr.bench_function("bs_norm/24", |b| b.iter(|| bs_norm(&op, black_box(c(0.3, 1.1))).unwrap()));
}

fn region(cr: &mut Criterion) {
    let w = Window { re_min: -2.0, re_max: 2.0, im_min: -1.0, im_max: 1.0, nx: 160, ny: 80 };
    cr.bench_function("region_scan/160x80", |b| {
        b.iter(|| {
            let mut eval = Thm11Lhs { p: 1.2, consts: TheoremConstants::default(), vp_integral: 0.1 };
            region_scan(&w, 1.0, &mut eval).unwrap()
        })
    });
}

criterion_group!(benches, special_functions, operator_application, spectra, region);
criterion_main!(benches);
