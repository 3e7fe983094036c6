//! Exact 2x2 complex linear algebra and the spectral-parameter bookkeeping
//! shared by the rest of the crate.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A 2x2 complex matrix stored row-major.
///
/// Serialises as `[[[re, im], [re, im]], [[re, im], [re, im]]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[[[f64; 2]; 2]; 2]", into = "[[[f64; 2]; 2]; 2]")]
pub struct Mat2C {
    pub a11: C64,
    pub a12: C64,
    pub a21: C64,
    pub a22: C64,
}

impl From<[[[f64; 2]; 2]; 2]> for Mat2C {
    fn from(v: [[[f64; 2]; 2]; 2]) -> Self {
        let e = |i: usize, j: usize| c(v[i][j][0], v[i][j][1]);
        Mat2C::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }
}

impl From<Mat2C> for [[[f64; 2]; 2]; 2] {
    fn from(m: Mat2C) -> Self {
        let p = |z: C64| [z.re, z.im];
        [[p(m.a11), p(m.a12)], [p(m.a21), p(m.a22)]]
    }
}

impl Mat2C {
    pub const ZERO: Mat2C = Mat2C {
        a11: C64::new(0.0, 0.0),
        a12: C64::new(0.0, 0.0),
        a21: C64::new(0.0, 0.0),
        a22: C64::new(0.0, 0.0),
    };

    pub const IDENTITY: Mat2C = Mat2C {
        a11: C64::new(1.0, 0.0),
        a12: C64::new(0.0, 0.0),
        a21: C64::new(0.0, 0.0),
        a22: C64::new(1.0, 0.0),
    };

    /// `diag(1, -1)`.
    pub const GAMMA0: Mat2C = Mat2C {
        a11: C64::new(1.0, 0.0),
        a12: C64::new(0.0, 0.0),
        a21: C64::new(0.0, 0.0),
        a22: C64::new(-1.0, 0.0),
    };

    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Mat2C { a11, a12, a21, a22 }
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Mat2C::new(d1, C64::default(), C64::default(), d2)
    }

    pub fn scalar(s: C64) -> Self {
        Mat2C::diag(s, s)
    }

    pub fn from_rows(rows: [[C64; 2]; 2]) -> Self {
        Mat2C::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match (i, j) {
            (0, 0) => self.a11,
            (0, 1) => self.a12,
            (1, 0) => self.a21,
            (1, 1) => self.a22,
            _ => panic!("Mat2C index ({i}, {j}) out of range"),
        }
    }

    pub fn adjoint(&self) -> Self {
        Mat2C::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    pub fn trace(&self) -> C64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> C64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2C::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Mat2C::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Inverse, or `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == C64::default() || !d.is_finite() {
            return None;
        }
        let inv = d.inv();
        Some(Mat2C::new(self.a22 * inv, -self.a12 * inv, -self.a21 * inv, self.a11 * inv))
    }

    #[inline]
    pub fn mul_vec(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2C) -> f64 {
        (*self - *other).entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of a general 2x2 matrix.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let half_tr = self.trace() * 0.5;
        let disc = (half_tr * half_tr - self.det()).sqrt();
        [half_tr + disc, half_tr - disc]
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl AddAssign for Mat2C {
    fn add_assign(&mut self, o: Mat2C) {
        *self = *self + o;
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl Neg for Mat2C {
    type Output = Mat2C;
    fn neg(self) -> Mat2C {
        self.scale_re(-1.0)
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    #[inline]
    fn mul(self, o: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

/// Pointwise matrix size `|M| = sqrt(sum |M_ij|^2)`.
pub fn frobenius_norm(m: &Mat2C) -> f64 {
    let [a, b, c, d] = m.entries();
    (a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr()).sqrt()
}

/// Spectral decomposition of a Hermitian 2x2 matrix, eigenvalues descending.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen {
    pub values: [f64; 2],
    pub vectors: [[C64; 2]; 2],
}

impl HermitianEigen {
    /// `sum_i f(lambda_i) v_i v_i^*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Mat2C {
        let mut out = Mat2C::ZERO;
        for (lam, v) in self.values.iter().zip(self.vectors.iter()) {
            out += outer(*v, *v).scale_re(f(*lam));
        }
        out
    }
}

fn outer(u: [C64; 2], v: [C64; 2]) -> Mat2C {
    Mat2C::new(u[0] * v[0].conj(), u[0] * v[1].conj(), u[1] * v[0].conj(), u[1] * v[1].conj())
}

/// Eigen-decomposition of the Hermitian part of `h` (only `a11`, `a22` real
/// parts and `a12` are read). `lower` overrides the smaller eigenvalue when the
/// caller has a better-conditioned expression for it.
fn hermitian_eigen_with(h: &Mat2C, lower: Option<f64>) -> HermitianEigen {
    let a = h.a11.re;
    let d = h.a22.re;
    let b = h.a12;
    let mean = 0.5 * (a + d);
    let half_gap = (0.5 * (a - d)).hypot(b.norm());
    let hi = mean + half_gap;
    let lo = lower.unwrap_or(mean - half_gap);
    if b.norm() <= f64::EPSILON * (a.abs() + d.abs()) || half_gap == 0.0 {
        let e0 = [c(1.0, 0.0), C64::default()];
        let e1 = [C64::default(), c(1.0, 0.0)];
        return if a >= d {
            HermitianEigen { values: [a.max(hi), lo.min(d)], vectors: [e0, e1] }
        } else {
            HermitianEigen { values: [d.max(hi), lo.min(a)], vectors: [e1, e0] }
        };
    }
    // Two candidate null vectors of (H - hi); keep the larger one.
    let u = [b, c(hi - a, 0.0)];
    let w = [c(hi - d, 0.0), b.conj()];
    let nu = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
    let nw = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    let v0 = if nu >= nw { [u[0] / nu, u[1] / nu] } else { [w[0] / nw, w[1] / nw] };
    let v1 = [-v0[1].conj(), v0[0].conj()];
    HermitianEigen { values: [hi, lo], vectors: [v0, v1] }
}

pub fn hermitian_eigen(h: &Mat2C) -> HermitianEigen {
    hermitian_eigen_with(h, None)
}

/// Polar factors `V = U W` with `W = sqrt(V^* V)`.
#[derive(Debug, Clone, Copy)]
pub struct PolarFactors {
    /// `|V| = sqrt(V^* V)`, Hermitian positive semidefinite.
    pub w: Mat2C,
    /// Partial isometry, unitary when `V` is invertible, zero on `ker W`.
    pub u: Mat2C,
    singular: [f64; 2],
    right: [[C64; 2]; 2],
}

impl PolarFactors {
    /// Singular values of `V`, descending.
    pub fn singular_values(&self) -> [f64; 2] {
        self.singular
    }

    /// `W^{1/2}`.
    pub fn w_sqrt(&self) -> Mat2C {
        let mut out = Mat2C::ZERO;
        for (s, v) in self.singular.iter().zip(self.right.iter()) {
            out += outer(*v, *v).scale_re(s.sqrt());
        }
        out
    }
}

/// Polar decomposition of a 2x2 matrix via the eigen-decomposition of `V^* V`.
pub fn matrix_abs_polar(v: &Mat2C) -> PolarFactors {
    // V^* V under- or overflows far from unit scale
    let scale = v.max_abs_diff(&Mat2C::ZERO);
    if !(scale.is_finite() && scale > 0.0) {
        return unit_scale_polar(v);
    }
    let mut p = unit_scale_polar(&v.scale_re(1.0 / scale));
    p.w = p.w.scale_re(scale);
    p.singular = p.singular.map(|s| s * scale);
    p
}

fn unit_scale_polar(v: &Mat2C) -> PolarFactors {
    let gram = v.adjoint() * *v;
    let top = hermitian_eigen(&gram).values[0].max(0.0);
    let s1 = top.sqrt();
    // |det V| = s1 s2 keeps the small singular value accurate.
    let s2 = if s1 > 0.0 { (v.det().norm() / s1).min(s1) } else { 0.0 };
    let eig = hermitian_eigen_with(&gram, Some(s2 * s2));
    let singular = [s1, s2];
    let right = eig.vectors;
    let mut w = Mat2C::ZERO;
    let mut u = Mat2C::ZERO;
    let cutoff = s1 * 1e-14;
    for (s, e) in singular.iter().zip(right.iter()) {
        w += outer(*e, *e).scale_re(*s);
        if *s > cutoff && *s > 0.0 {
            let ve = v.mul_vec(*e);
            u += outer([ve[0] / *s, ve[1] / *s], *e);
        }
    }
    PolarFactors { w, u, singular, right }
}

/// Upper-half-plane root of `mu^2 = k^2 - m^2`; on the real axis `Re mu >= 0`.
pub fn mu_branch(k: C64, m: f64) -> Result<C64> {
    if m == 0.0 {
        // mu = +-k exactly.
        if k == C64::default() {
            return Err(Error::BranchPoint { k_re: k.re, k_im: k.im, m });
        }
        let flip = k.im < 0.0 || (k.im == 0.0 && k.re < 0.0);
        return Ok(if flip { -k } else { k });
    }
    let sq = (k - m) * (k + m);
    if sq.norm() < 1e-300 {
        return Err(Error::BranchPoint { k_re: k.re, k_im: k.im, m });
    }
    let mut mu = sq.sqrt();
    if mu.im < 0.0 {
        mu = -mu;
    }
    if mu.im == 0.0 && mu.re < 0.0 {
        mu = -mu;
    }
    Ok(mu)
}

/// A spectral parameter `k`, the mass `m` and the branch value `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub k: C64,
    pub m: f64,
    pub mu: C64,
}

impl SpectralPoint {
    pub fn new(k: C64, m: f64) -> Result<Self> {
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::InvalidArgument(format!("mass must be finite and >= 0, got {m}")));
        }
        if !k.is_finite() {
            return Err(Error::InvalidArgument("spectral parameter must be finite".into()));
        }
        Ok(SpectralPoint { k, m, mu: mu_branch(k, m)? })
    }

    /// Whether `k` lies on `(-inf, -m] U [m, inf)`.
    pub fn on_free_spectrum(&self) -> bool {
        self.k.im == 0.0 && self.k.re.abs() >= self.m
    }
}
