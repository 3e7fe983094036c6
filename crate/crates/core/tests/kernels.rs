use std::f64::consts::{FRAC_2_PI, PI};
use std::time::Instant;

use bilayer_core::kernels::{biharm_kernel, biharm_kernel_split, kernel_bound_probe, log_grid, rho_kernel};
use bilayer_core::specfun::{g_derivs, hankel1, macdonald_k0, macdonald_k1};
use bilayer_core::{c, frobenius_norm, Error, C64, I};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn upper(rng: &mut ChaCha8Rng) -> C64 {
    C64::from_polar(rng.random_range(0.1f64..4.0), rng.random_range(0.01..PI - 0.01))
}

#[test]
fn two_representations_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let mu = upper(&mut rng);
        let r = rng.random_range(0.01..10.0);
        let a = biharm_kernel(mu, r).unwrap();
        let b = biharm_kernel_split(mu, r).unwrap();
        assert!((a - b).norm() < 1e-9 * a.norm(), "mu = {mu}, r = {r}");
    }
}

#[test]
fn frobenius_norm_from_independent_assembly() {
    let mu = c(0.5, 0.5);
    let w = c(1.3, 0.2);
    let r = w.norm();
    let s = mu.sqrt();
    let z = s * r;
    // G, G', G'' straight from H and K
    let g = hankel1(0, z).unwrap() + I * FRAC_2_PI * macdonald_k0(z).unwrap();
    let g1 = -hankel1(1, z).unwrap() - I * FRAC_2_PI * macdonald_k1(z).unwrap();
    let g2 = -hankel1(0, z).unwrap() + I * FRAC_2_PI * macdonald_k0(z).unwrap() - g1 / z;
    // |4∂_z² G(√μ r)| = |μG'' − √μG'/r|
    let off = (mu * g2 - s * g1 / r).norm();
    let expect = (2.0 * (mu * g).norm_sqr() + 2.0 * off * off).sqrt() / (8.0 * mu.norm());
    let got = frobenius_norm(&rho_kernel(mu, w).unwrap());
    assert!((got - expect).abs() < 1e-12 * expect);
}

#[test]
fn off_diagonal_is_a_wirtinger_derivative() {
    // 4∂_z̄² of the biharmonic kernel by finite differences in x₁, x₂
    let mu = c(0.3, 0.8);
    let w = c(0.9, -0.6);
    let f = |x: f64, y: f64| biharm_kernel(mu, x.hypot(y)).unwrap();
    let h = 1e-3;
    let (x, y) = (w.re, w.im);
    let fxx = (f(x + h, y) - f(x, y) * 2.0 + f(x - h, y)) / (h * h);
    let fyy = (f(x, y + h) - f(x, y) * 2.0 + f(x, y - h)) / (h * h);
    let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
    // ∂_z̄ = ½(∂₁ + i∂₂)
    let dzbar2 = (fxx + I * fxy * 2.0 - fyy) * 0.25;
    let rho = rho_kernel(mu, w).unwrap();
    assert!((rho.a12 - dzbar2 * 4.0).norm() < 1e-5 * rho.a12.norm());
    let dz2 = (fxx - I * fxy * 2.0 - fyy) * 0.25;
    assert!((rho.a21 - dz2 * 4.0).norm() < 1e-5 * rho.a21.norm());
    assert!((rho.a11 - mu * biharm_kernel(mu, w.norm()).unwrap()).norm() < 1e-14);
}

proptest! {
    #[test]
    fn rho_scales_with_sqrt_modulus(
        modulus in 0.05f64..20.0,
        theta in 0.0f64..PI,
        wr in 0.01f64..5.0,
        wa in 0.0f64..(2.0 * PI),
    ) {
        let w = C64::from_polar(wr, wa);
        let lhs = frobenius_norm(&rho_kernel(C64::from_polar(modulus, theta), w).unwrap());
        let rhs = frobenius_norm(&rho_kernel(C64::from_polar(1.0, theta), w * modulus.sqrt()).unwrap());
        prop_assert!((lhs - rhs).abs() < 1e-10 * rhs.max(1e-300));
    }
}

#[test]
fn probe_constants_are_finite_and_stable() {
    let thetas = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];
    let r = log_grid(1e-6, 1e3, 181);
    let t = Instant::now();
    let rep = kernel_bound_probe(&thetas, &r, 4.5).unwrap();
    let secs = t.elapsed().as_secs_f64();
    println!("{}", serde_json::to_string(&rep).unwrap());
    assert!(rep.stable, "drift {:?}", rep.drift);
    assert!(rep.c_log.is_finite() && rep.c_sqrt.is_finite() && rep.m_constant.is_finite());
    assert!(rep.c_log > 0.0 && rep.c_sqrt > 0.0 && rep.m_constant > 0.0);
    assert!(secs < 60.0, "probe took {secs} s");
    // the diagonal of ρ_0 is (i/8)G(r), so |G(r)|√r ≤ 8 c_sqrt/√2
    let g10 = g_derivs(c(10.0, 0.0)).unwrap().g;
    assert!(g10.norm() * 10f64.sqrt() <= 8.0 * rep.c_sqrt / 2f64.sqrt());
    let json = serde_json::to_value(&rep).unwrap();
    for key in ["c_log", "c_sqrt", "m_constant", "q", "stable"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn probe_rejects_q_at_or_below_four() {
    let r = log_grid(1e-3, 10.0, 8);
    assert!(matches!(kernel_bound_probe(&[0.0], &r, 3.9), Err(Error::InvalidArgument(_))));
    assert!(matches!(kernel_bound_probe(&[0.0], &r, 4.0), Err(Error::InvalidArgument(_))));
}
