//! Complex-argument Bessel, Hankel and Macdonald functions of order 0 and 1,
//! and the biharmonic profile `G(z) = H0(z) - H0(iz)` with two derivatives.
//!
//! Evaluation regions:
//!
//! * `|z| <= 2`: ascending series. `G` uses a combined series in which the
//!   logarithmic singularities of `H0(z)` and `H0(iz)` cancel term by term.
//! * `2 < |z|`, `Re z >= 0`: `K0`, `K1` by Temme's continued fraction (CF2);
//!   Hankel functions in the closed upper half-plane through
//!   `H0(z) = -(2i/pi) K0(-iz)` and `H1(z) = -(2/pi) K1(-iz)`.
//! * `J0`, `Y0` (and anything left over): series for `|z| <= 12`, Hankel
//!   asymptotic expansion above.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::Serialize;

use crate::algebra::{c, C64, I};
use crate::error::{Error, Result};
use crate::quad;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Series/asymptotic switch for `J0`, `Y0`.
pub const SWITCH_RADIUS: f64 = 12.0;
/// Below this radius the `I`/`K` series are used.
pub const SMALL_RADIUS: f64 = 2.0;

/// `G`, `G'` and `G''` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GDerivs {
    pub g: C64,
    pub g1: C64,
    pub g2: C64,
}

fn check_nonzero(z: C64, what: &str) -> Result<()> {
    if z == C64::default() || !z.is_finite() {
        return Err(Error::Domain(format!("{what} requires a finite nonzero argument")));
    }
    Ok(())
}

fn log_half_plus_gamma(z: C64) -> C64 {
    (z * 0.5).ln() + EULER_GAMMA
}

/// `(J0, J1, Y0, Y1)` by ascending series.
pub(crate) fn jy_series(z: C64) -> [C64; 4] {
    let s = z * z * 0.25;
    let lg = log_half_plus_gamma(z);
    let (mut t, mut u) = (c(1.0, 0.0), c(1.0, 0.0));
    let (mut j0, mut j1s) = (t, u);
    let (mut y0s, mut y1s) = (C64::default(), u); // H_0 + H_1 = 1 for k = 0
    let mut harm = 0.0;
    let mut k = 1.0;
    loop {
        t *= -s / (k * k);
        u *= -s / (k * (k + 1.0));
        harm += 1.0 / k;
        let harm_next = harm + 1.0 / (k + 1.0);
        j0 += t;
        j1s += u;
        y0s += t * harm;
        y1s += u * (harm + harm_next);
        let small = t.norm() <= 1e-17 * j0.norm().max(1e-300) && u.norm() <= 1e-17 * j1s.norm().max(1e-300);
        if (k > s.norm().sqrt() && small) || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    let j1 = z * 0.5 * j1s;
    let y0 = (lg * j0 - y0s) * FRAC_2_PI;
    let y1 = -FRAC_2_PI / z + FRAC_2_PI * lg * j1 - z * 0.5 * y1s / PI;
    [j0, j1, y0, y1]
}

/// `(I0, I1, K0, K1)` by ascending series.
pub(crate) fn ik_series(z: C64) -> [C64; 4] {
    let s = z * z * 0.25;
    let lg = log_half_plus_gamma(z);
    let (mut t, mut u) = (c(1.0, 0.0), c(1.0, 0.0));
    let (mut i0, mut i1s) = (t, u);
    let (mut k0s, mut k1s) = (C64::default(), u);
    let mut harm = 0.0;
    let mut k = 1.0;
    loop {
        t *= s / (k * k);
        u *= s / (k * (k + 1.0));
        harm += 1.0 / k;
        let harm_next = harm + 1.0 / (k + 1.0);
        i0 += t;
        i1s += u;
        k0s += t * harm;
        k1s += u * (harm + harm_next);
        let small = t.norm() <= 1e-17 * i0.norm() && u.norm() <= 1e-17 * i1s.norm();
        if (k > s.norm().sqrt() && small) || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    let i1 = z * 0.5 * i1s;
    let k0 = -lg * i0 + k0s;
    let k1 = z.inv() + lg * i1 - z * 0.25 * k1s;
    [i0, i1, k0, k1]
}

/// `(K0, K1)` by Temme's CF2 (Steed's algorithm); requires `Re z >= 0`, `|z| > 2`.
pub(crate) fn k_cf2(z: C64) -> Result<(C64, C64)> {
    let one = c(1.0, 0.0);
    let mut b = (one + z) * 2.0;
    let mut d = b.inv();
    let mut h = d;
    let mut delh = d;
    let (mut q1, mut q2) = (C64::default(), one);
    let a1 = 0.25;
    let mut q = c(a1, 0.0);
    let mut cc = c(a1, 0.0);
    let mut a = -a1;
    let mut s = one + q * delh;
    for i in 2..20_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        cc = -cc * a / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += cc * qnew;
        b += 2.0;
        d = (b + d * a).inv();
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() && delh.norm() < 1e-17 * h.norm() {
            let k0 = (c(PI, 0.0) / (z * 2.0)).sqrt() * (-z).exp() / s;
            let k1 = k0 * (z + 0.5 - h * a1) / z;
            return Ok((k0, k1));
        }
    }
    Err(Error::Convergence(format!("CF2 for K0/K1 did not converge at z = {z}")))
}

fn asymptotic_sum(nu: u8, w: C64) -> C64 {
    // sum_k a_k(nu) w^k, truncated at the smallest term
    let four_nu2 = 4.0 * f64::from(nu * nu);
    let mut term = c(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * w * ((four_nu2 - odd * odd) / (8.0 * kf));
        let mag = next.norm();
        if mag > last || mag <= 1e-17 * sum.norm() {
            if mag <= last {
                sum += next;
            }
            break;
        }
        last = mag;
        term = next;
        sum += term;
    }
    sum
}

/// Hankel function of the first (`kind = 1`) or second (`kind = 2`) kind by
/// its large-argument expansion.
pub(crate) fn hankel_asymptotic(nu: u8, kind: u8, z: C64) -> C64 {
    let phase = z - PI * (0.5 * f64::from(nu) + 0.25);
    let amp = (c(2.0 / PI, 0.0) / z).sqrt();
    if kind == 1 {
        amp * (I * phase).exp() * asymptotic_sum(nu, I / z)
    } else {
        amp * (-I * phase).exp() * asymptotic_sum(nu, -I / z)
    }
}

pub(crate) fn k_asymptotic(nu: u8, z: C64) -> C64 {
    (c(PI / 2.0, 0.0) / z).sqrt() * (-z).exp() * asymptotic_sum(nu, z.inv())
}

/// `(K0, K1)` for `|arg z| < pi`.
fn k01(z: C64) -> Result<(C64, C64)> {
    let r = z.norm();
    if r <= SMALL_RADIUS {
        let [_, _, k0, k1] = ik_series(z);
        Ok((k0, k1))
    } else if z.re >= 0.0 {
        k_cf2(z)
    } else if r <= SWITCH_RADIUS {
        let [_, _, k0, k1] = ik_series(z);
        Ok((k0, k1))
    } else {
        Ok((k_asymptotic(0, z), k_asymptotic(1, z)))
    }
}

/// `(H0, H1)` of the first kind, `-pi < arg z <= pi`.
fn h01(z: C64) -> Result<(C64, C64)> {
    let r = z.norm();
    if r <= SMALL_RADIUS {
        let [j0, j1, y0, y1] = jy_series(z);
        Ok((j0 + I * y0, j1 + I * y1))
    } else if z.im >= 0.0 {
        let (k0, k1) = k_cf2(-I * z)?;
        Ok((-I * k0 * FRAC_2_PI, -k1 * FRAC_2_PI))
    } else if r <= SWITCH_RADIUS {
        let [j0, j1, y0, y1] = jy_series(z);
        Ok((j0 + I * y0, j1 + I * y1))
    } else {
        Ok((hankel_asymptotic(0, 1, z), hankel_asymptotic(1, 1, z)))
    }
}

/// `H_n^{(1)}(z)` for `n` in `{0, 1}`.
pub fn hankel1(n: u8, z: C64) -> Result<C64> {
    check_nonzero(z, "hankel1")?;
    let (h0, h1) = h01(z)?;
    match n {
        0 => Ok(h0),
        1 => Ok(h1),
        _ => Err(Error::InvalidArgument(format!("hankel1 order must be 0 or 1, got {n}"))),
    }
}

pub fn bessel_j0(z: C64) -> Result<C64> {
    if z.norm() <= SWITCH_RADIUS {
        return Ok(jy_series(z)[0]);
    }
    Ok((hankel_asymptotic(0, 1, z) + hankel_asymptotic(0, 2, z)) * 0.5)
}

pub fn bessel_y0(z: C64) -> Result<C64> {
    check_nonzero(z, "bessel_y0")?;
    if z.norm() <= SWITCH_RADIUS {
        return Ok(jy_series(z)[2]);
    }
    Ok((hankel_asymptotic(0, 1, z) - hankel_asymptotic(0, 2, z)) / (I * 2.0))
}

pub fn bessel_j1(z: C64) -> Result<C64> {
    if z.norm() <= SWITCH_RADIUS {
        return Ok(jy_series(z)[1]);
    }
    Ok((hankel_asymptotic(1, 1, z) + hankel_asymptotic(1, 2, z)) * 0.5)
}

pub fn bessel_y1(z: C64) -> Result<C64> {
    check_nonzero(z, "bessel_y1")?;
    if z.norm() <= SWITCH_RADIUS {
        return Ok(jy_series(z)[3]);
    }
    Ok((hankel_asymptotic(1, 1, z) - hankel_asymptotic(1, 2, z)) / (I * 2.0))
}

fn check_k_domain(z: C64) -> Result<()> {
    check_nonzero(z, "macdonald_k0")?;
    if z.im == 0.0 && z.re < 0.0 {
        return Err(Error::Domain(format!("K0 requires |arg z| < pi, got z = {z}")));
    }
    Ok(())
}

/// Macdonald function `K0(z)`, `|arg z| < pi`.
pub fn macdonald_k0(z: C64) -> Result<C64> {
    check_k_domain(z)?;
    Ok(k01(z)?.0)
}

/// Macdonald function `K1(z)`, `|arg z| < pi`.
pub fn macdonald_k1(z: C64) -> Result<C64> {
    check_k_domain(z)?;
    Ok(k01(z)?.1)
}

/// `K0` from its Laplace-type integral
/// `K0(z) = e^{-z} sqrt(pi/2z) / Gamma(1/2) int_0^inf e^{-t} t^{-1/2} (1 + t/2z)^{-1/2} dt`,
/// evaluated after the substitution `t = u^2`. Independent of the series and
/// continued-fraction paths; slower and accurate to about `1e-12`.
pub fn macdonald_k0_integral(z: C64) -> Result<C64> {
    check_k_domain(z)?;
    let inv2z = (z * 2.0).inv();
    let integrand = |u: f64| (c(1.0, 0.0) + inv2z * (u * u)).sqrt().inv() * (2.0 * (-u * u).exp());
    let integral = quad::integrate(integrand, 0.0, 10.0, 1e-15, 1e-14)?;
    let pref = (-z).exp() * (c(PI / 2.0, 0.0) / z).sqrt() / PI.sqrt();
    Ok(pref * integral)
}

fn check_quadrant(z: C64) -> Result<()> {
    check_nonzero(z, "g_derivs")?;
    let tol = 1e-12 * z.norm();
    if z.re < -tol || z.im < -tol {
        return Err(Error::Domain(format!("G requires 0 <= arg z <= pi/2, got z = {z}")));
    }
    Ok(())
}

/// Combined ascending series for `G`, `G'`, `G''`.
fn g_series(z: C64) -> GDerivs {
    let s = z * z * 0.25;
    let lg = log_half_plus_gamma(z);
    // t_k = s^k / (k!)^2
    let mut t = c(1.0, 0.0);
    let (mut g, mut g1, mut g2) = (t, C64::default(), C64::default());
    let (mut lg_g, mut lg_g1, mut lg_g2) = (C64::default(), C64::default(), C64::default());
    let mut harm = 0.0;
    let mut k = 1.0;
    loop {
        t *= s / (k * k);
        harm += 1.0 / k;
        let odd = (k as u64) % 2 == 1;
        let sign = if odd { -1.0 } else { 1.0 };
        g += t * sign;
        g1 += t * (sign * 2.0 * k);
        g2 += t * (sign * 2.0 * k * (2.0 * k - 1.0));
        if odd {
            let hl = -lg + harm;
            lg_g += t * hl;
            let d1 = hl * (2.0 * k) - 1.0;
            lg_g1 += t * d1;
            lg_g2 += t * (d1 * (2.0 * k - 1.0) - 2.0 * k);
        }
        if (k > s.norm().sqrt() + 2.0 && t.norm() <= 1e-18 * g.norm().max(1.0)) || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    let lg_coef = I * (4.0 / PI);
    GDerivs {
        g: g + lg_coef * lg_g,
        g1: (g1 + lg_coef * lg_g1) / z,
        g2: (g2 + lg_coef * lg_g2) / (z * z),
    }
}

/// `G(z) = H0(z) - H0(iz)` and its first two derivatives on the closed first
/// quadrant.
pub fn g_derivs(z: C64) -> Result<GDerivs> {
    check_quadrant(z)?;
    // snap rounding noise across the quadrant edges
    let z = c(z.re.max(0.0), z.im.max(0.0));
    if z.norm() <= SMALL_RADIUS {
        return Ok(g_series(z));
    }
    let (h0, h1) = h01(z)?;
    let (k0, k1) = k_cf2(z)?;
    let coef = I * FRAC_2_PI;
    let g = h0 + coef * k0;
    let g1 = -h1 - coef * k1;
    let g2 = -h0 + coef * k0 - g1 / z;
    Ok(GDerivs { g, g1, g2 })
}
