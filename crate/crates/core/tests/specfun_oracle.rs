use std::f64::consts::{FRAC_2_PI, PI};

use bilayer_core::specfun::{
    bessel_j0, bessel_j1, bessel_y0, bessel_y1, g_derivs, hankel1, macdonald_k0, macdonald_k1,
};
use bilayer_core::{c, C64, I};
use proptest::prelude::*;

struct Row {
    z: C64,
    vals: [C64; 9],
}

fn oracle() -> Vec<Row> {
    let text = include_str!("data/bessel_oracle.csv");
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            let z = c(f[0], f[1]);
            let mut vals = [C64::default(); 9];
            for (k, v) in vals.iter_mut().enumerate() {
                *v = c(f[2 + 2 * k], f[3 + 2 * k]);
            }
            Row { z, vals }
        })
        .collect()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn oracle_has_two_hundred_points_in_the_quadrant() {
    let rows = oracle();
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| r.z.re >= 0.0 && r.z.im >= 0.0 && r.z.norm() <= 50.0));
}

#[test]
fn bessel_and_macdonald_match_oracle() {
    for r in oracle() {
        let got = [
            bessel_j0(r.z).unwrap(),
            bessel_y0(r.z).unwrap(),
            macdonald_k0(r.z).unwrap(),
            macdonald_k1(r.z).unwrap(),
            hankel1(0, r.z).unwrap(),
            hankel1(1, r.z).unwrap(),
        ];
        let names = ["J0", "Y0", "K0", "K1", "H0", "H1"];
        for k in 0..6 {
            let e = rel(got[k], r.vals[k]);
            assert!(e < 1e-9, "{} at z = {}: rel err {e:.2e}", names[k], r.z);
        }
    }
}

#[test]
fn g_and_derivatives_match_oracle() {
    for r in oracle() {
        if r.z.norm() < 1e-8 {
            continue;
        }
        let g = g_derivs(r.z).unwrap();
        for (k, (got, name)) in [(g.g, "G"), (g.g1, "G'"), (g.g2, "G''")].into_iter().enumerate() {
            let e = rel(got, r.vals[6 + k]);
            assert!(e < 1e-9, "{name} at z = {}: rel err {e:.2e}", r.z);
        }
    }
}

#[test]
fn connection_between_k0_and_h0() {
    for r in oracle() {
        // K0(z) = (iπ/2) H0(iz) for -π < arg z <= π/2
        let via = I * (PI / 2.0) * hankel1(0, I * r.z).unwrap();
        let k0 = macdonald_k0(r.z).unwrap();
        assert!(rel(via, k0) < 1e-10, "z = {}", r.z);
    }
}

fn quadrant(lo: f64, hi: f64) -> impl Strategy<Value = C64> {
    (lo.ln()..hi.ln(), 0.0..=PI / 2.0).prop_map(|(lr, th)| C64::from_polar(lr.exp(), th))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn g_derivatives_match_finite_differences(z in quadrant(1e-6, 50.0)) {
        let step = 1e-5 * z.norm();
        let g = g_derivs(z).unwrap();
        // stay inside the closed quadrant by stepping along the ray
        let dir = z / z.norm();
        let (zp, zm) = (z + dir * step, z - dir * step);
        let (gp, gm) = (g_derivs(zp).unwrap(), g_derivs(zm).unwrap());
        let d = dir * (2.0 * step);
        let fd1 = (gp.g - gm.g) / d;
        let fd2 = (gp.g1 - gm.g1) / d;
        // a central difference cannot resolve better than eps |f| / h
        let round = |f: C64| 4.0 * f64::EPSILON * f.norm() / step;
        prop_assert!((fd1 - g.g1).norm() < 1e-5 * g.g1.norm() + round(g.g), "G' at {}: {:.2e}", z, rel(fd1, g.g1));
        prop_assert!((fd2 - g.g2).norm() < 1e-4 * g.g2.norm() + round(g.g1), "G'' at {}: {:.2e}", z, rel(fd2, g.g2));
    }

    #[test]
    fn wronskians(z in quadrant(1e-3, 50.0)) {
        let w = bessel_j1(z).unwrap() * bessel_y0(z).unwrap() - bessel_j0(z).unwrap() * bessel_y1(z).unwrap();
        let scale = (bessel_j0(z).unwrap() * bessel_y1(z).unwrap()).norm().max(FRAC_2_PI / z.norm());
        prop_assert!((w - FRAC_2_PI / z).norm() < 1e-10 * scale);
        let k1 = macdonald_k1(z).unwrap();
        let h = 1e-5 * z.norm();
        let dir = z / z.norm();
        let fd = (macdonald_k0(z + dir * h).unwrap() - macdonald_k0(z - dir * h).unwrap()) / (dir * 2.0 * h);
        // K0' = -K1
        prop_assert!(rel(fd, -k1) < 1e-5);
    }
}

fn ratio_sups(n: usize) -> (f64, f64, f64, f64) {
    let (mut a, mut b, mut cc, mut far) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        let r = (1e-8f64.ln() + (0.5f64.ln() - 1e-8f64.ln()) * i as f64 / (n - 1) as f64).exp();
        for th in [0.0, PI / 8.0, PI / 4.0, 3.0 * PI / 8.0, PI / 2.0] {
            let z = C64::from_polar(r, th);
            let g = g_derivs(z).unwrap();
            let l = (1.0 / r).ln();
            a = a.max(g.g.norm());
            b = b.max(g.g1.norm() / (r * l));
            cc = cc.max(g.g2.norm() / l);
            let zf = C64::from_polar(0.5 * 2000f64.powf(i as f64 / (n - 1) as f64), th);
            let gf = g_derivs(zf).unwrap();
            far = far.max(zf.norm().sqrt() * (gf.g.norm() + gf.g1.norm() + gf.g2.norm()));
        }
    }
    (a, b, cc, far)
}

#[test]
fn near_and_far_bounds_are_refinement_stable() {
    let coarse = ratio_sups(200);
    let fine = ratio_sups(399);
    for (x, y) in [(coarse.0, fine.0), (coarse.1, fine.1), (coarse.2, fine.2), (coarse.3, fine.3)] {
        assert!(x.is_finite() && y.is_finite());
        assert!(y / x < 2.0 && x / y < 2.0, "{x} vs {y}");
    }
}
