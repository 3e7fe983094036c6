//! Fourier-spectral discretization of `D_m + V` on the torus `[−L, L)²`.
//!
//! A field is a `Vec<C64>` of length `2n²` with entry `2·site + component`,
//! where `site = i2·n + i1` as in [`GridSpec::point`].

use std::f64::consts::PI;
use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::algebra::{c, frobenius_norm, matrix_abs_polar, mu_branch, Mat2C, C64, I};
use crate::error::{Error, Result};
use crate::fft2::Fft2;
use crate::potentials::{GridSpec, PotentialField};
use crate::quad::integrate_real;

/// Largest `n` accepted by the dense paths.
pub const DENSE_LIMIT: usize = 48;
/// Minimal distance from `k` to the discrete free spectrum.
pub const SPECTRUM_MARGIN: f64 = 1e-10;
/// Relative Ritz residual accepted by [`top_eigenvalue`].
pub const RITZ_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 500;
const START_SEED: u64 = 0x5eed_b1a7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolPoint {
    pub xi1: f64,
    pub xi2: f64,
    pub d0: Mat2C,
    pub dm: Mat2C,
}

impl SymbolPoint {
    pub fn xi_sq(&self) -> f64 {
        self.xi1 * self.xi1 + self.xi2 * self.xi2
    }

    /// `√(|ξ|⁴ + m²)`, the positive eigenvalue of `dm`.
    pub fn band(&self) -> f64 {
        let m = self.dm.a11.re;
        self.xi_sq().hypot(m)
    }
}

/// Symbol of `D_m` at `ξ`, using `∂_j ↦ iξ_j`.
pub fn symbol_at(xi1: f64, xi2: f64, m: f64) -> SymbolPoint {
    let zbar = c(xi1, -xi2);
    let z = c(xi1, xi2);
    // 4∂_z̄² ↦ −(ξ₁ − iξ₂)², 4∂_z² ↦ −(ξ₁ + iξ₂)²
    let d0 = Mat2C::new(C64::default(), -zbar * zbar, -z * z, C64::default());
    let dm = d0 + Mat2C::GAMMA0.scale_re(m);
    SymbolPoint { xi1, xi2, d0, dm }
}

/// Pointwise `2×2` multiplication of a field.
pub fn apply_pointwise(mats: &[Mat2C], u: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::default(); u.len()];
    for (s, a) in mats.iter().enumerate() {
        let v = a.mul_vec([u[2 * s], u[2 * s + 1]]);
        out[2 * s] = v[0];
        out[2 * s + 1] = v[1];
    }
    out
}

fn norm(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn random_unit(len: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..len)
        .map(|_| c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let s = norm(&v);
    v.iter_mut().for_each(|z| *z /= s);
    v
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: GridSpec,
    pub m: f64,
    pub potential: Option<PotentialField>,
    fft: Fft2,
    symbols: Vec<SymbolPoint>,
}

impl DiscreteOperator {
    pub fn new(grid: GridSpec, m: f64, potential: Option<PotentialField>) -> Result<Self> {
        grid.validate()?;
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::InvalidArgument(format!("mass must be finite and >= 0, got {m}")));
        }
        if let Some(v) = &potential {
            if v.grid != grid {
                return Err(Error::InvalidArgument("potential grid differs from operator grid".into()));
            }
        }
        let n = grid.n;
        let symbols = (0..n * n).map(|idx| symbol_at(grid.xi(idx % n), grid.xi(idx / n), m)).collect();
        Ok(DiscreteOperator { grid, m, potential, fft: Fft2::new(n), symbols })
    }

    pub fn free(grid: GridSpec, m: f64) -> Result<Self> {
        Self::new(grid, m, None)
    }

    /// Symbol at FFT index `i2·n + i1`.
    pub fn symbols(&self) -> &[SymbolPoint] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        2 * self.grid.sites()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn potential_samples(&self) -> Option<&[Mat2C]> {
        self.potential.as_ref().filter(|v| !v.is_zero()).map(|v| v.samples.as_slice())
    }

    /// Eigenvalues `±√(|ξ|⁴ + m²)` of the symbol over the lattice, sorted.
    pub fn free_spectrum(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.symbols.iter().flat_map(|s| [-s.band(), s.band()]).collect();
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn free_spectrum_distance(&self, k: C64) -> f64 {
        self.symbols
            .iter()
            .map(|s| (k - s.band()).norm().min((k + s.band()).norm()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Multiply each Fourier mode by a `2×2` matrix.
    pub fn apply_multiplier(&self, mult: &[Mat2C], u: &[C64]) -> Vec<C64> {
        let n2 = self.grid.sites();
        assert_eq!(u.len(), 2 * n2, "field length must be 2n^2");
        let mut p0: Vec<C64> = (0..n2).map(|s| u[2 * s]).collect();
        let mut p1: Vec<C64> = (0..n2).map(|s| u[2 * s + 1]).collect();
        self.fft.forward(&mut p0);
        self.fft.forward(&mut p1);
        for (idx, a) in mult.iter().enumerate() {
            let v = a.mul_vec([p0[idx], p1[idx]]);
            p0[idx] = v[0];
            p1[idx] = v[1];
        }
        self.fft.inverse(&mut p0);
        self.fft.inverse(&mut p1);
        let mut out = vec![C64::default(); 2 * n2];
        for s in 0..n2 {
            out[2 * s] = p0[s];
            out[2 * s + 1] = p1[s];
        }
        out
    }

    /// `D_m u`.
    pub fn apply_free(&self, u: &[C64]) -> Vec<C64> {
        let mult: Vec<Mat2C> = self.symbols.iter().map(|s| s.dm).collect();
        self.apply_multiplier(&mult, u)
    }

    /// `(D_m + V) u`.
    pub fn apply_operator(&self, u: &[C64]) -> Vec<C64> {
        let mut out = self.apply_free(u);
        if let Some(v) = self.potential_samples() {
            for (o, x) in out.iter_mut().zip(apply_pointwise(v, u)) {
                *o += x;
            }
        }
        out
    }

    /// Per-mode `(dm(ξ) − k)⁻¹`.
    pub fn resolvent_symbols(&self, k: C64) -> Result<Vec<Mat2C>> {
        let distance = self.free_spectrum_distance(k);
        if !(distance > SPECTRUM_MARGIN) {
            return Err(Error::NearSpectrum { distance });
        }
        Ok(self
            .symbols
            .iter()
            .map(|s| (s.dm - Mat2C::scalar(k)).inverse().expect("k is off the symbol spectrum"))
            .collect())
    }

    /// `(D_m − k)⁻¹ f`; the potential is ignored.
    pub fn apply_free_resolvent(&self, k: C64, f: &[C64]) -> Result<Vec<C64>> {
        Ok(self.apply_multiplier(&self.resolvent_symbols(k)?, f))
    }

    /// Convolution kernels of a multiplier: entry `[a][b]` at offset `d2·n + d1`.
    fn kernels(&self, mult: &[Mat2C]) -> [[Vec<C64>; 2]; 2] {
        let mut out: [[Vec<C64>; 2]; 2] = Default::default();
        for (a, row) in out.iter_mut().enumerate() {
            for (b, ker) in row.iter_mut().enumerate() {
                let mut plane: Vec<C64> = mult.iter().map(|x| x.get(a, b)).collect();
                self.fft.inverse(&mut plane);
                *ker = plane;
            }
        }
        out
    }

    fn offset(&self, s: usize, t: usize) -> usize {
        let n = self.grid.n;
        let d1 = (s % n + n - t % n) % n;
        let d2 = (s / n + n - t / n) % n;
        d2 * n + d1
    }

    /// Matrix of `D_m + V` in the grid basis.
    pub fn assemble_dense(&self) -> Result<Mat<C64>> {
        let n = self.grid.n;
        if n > DENSE_LIMIT {
            return Err(Error::Size { size: n, limit: DENSE_LIMIT });
        }
        let mult: Vec<Mat2C> = self.symbols.iter().map(|s| s.dm).collect();
        let ker = self.kernels(&mult);
        let v = self.potential_samples();
        let dim = self.len();
        Ok(Mat::from_fn(dim, dim, |i, j| {
            let (s, a, t, b) = (i / 2, i % 2, j / 2, j % 2);
            let mut x = ker[a][b][self.offset(s, t)];
            if s == t {
                if let Some(v) = v {
                    x += v[s].get(a, b);
                }
            }
            x
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigClass {
    RealBand,
    ComplexOutlier,
}

impl EigClass {
    pub fn label(&self) -> &'static str {
        match self {
            EigClass::RealBand => "real-band",
            EigClass::ComplexOutlier => "complex-outlier",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigEntry {
    pub k: C64,
    pub residual: f64,
    pub class: EigClass,
    pub bs_norm: Option<f64>,
    pub bs_residual: Option<f64>,
    /// `‖W(D_m − k)⁻¹W‖` with `W = |V|`.
    pub sandwich: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigReport {
    pub n: usize,
    pub threshold: f64,
    pub entries: Vec<EigEntry>,
}

impl EigReport {
    pub fn outliers(&self) -> impl Iterator<Item = &EigEntry> {
        self.entries.iter().filter(|e| e.class == EigClass::ComplexOutlier)
    }

    pub fn outlier_count(&self) -> usize {
        self.outliers().count()
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "re_k,im_k,residual,class,bs_norm,bs_residual")?;
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        for e in &self.entries {
            writeln!(
                out,
                "{:e},{:e},{:e},{},{},{}",
                e.k.re,
                e.k.im,
                e.residual,
                e.class.label(),
                opt(e.bs_norm),
                opt(e.bs_residual)
            )?;
        }
        Ok(())
    }
}

/// Outlier threshold `10·(max|Im| of the V = 0 spectrum + n⁻²)`; the first
/// term vanishes since the free discrete spectrum is real.
pub fn outlier_threshold(n: usize) -> f64 {
    10.0 * (0.0 + 1.0 / (n * n) as f64)
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    /// Compute Birman–Schwinger diagnostics at complex outliers.
    pub diagnostics: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { diagnostics: true }
    }
}

pub fn complex_spectrum(op: &DiscreteOperator) -> Result<EigReport> {
    complex_spectrum_with(op, SpectrumOptions::default())
}

pub fn complex_spectrum_with(op: &DiscreteOperator, opts: SpectrumOptions) -> Result<EigReport> {
    let mat = op.assemble_dense()?;
    let eig = mat
        .eigen()
        .map_err(|e| Error::Convergence(format!("dense eigensolver: {e:?}")))?;
    let (u, s) = (eig.U(), eig.S());
    let dim = op.len();
    let threshold = outlier_threshold(op.grid.n);
    let bs = if opts.diagnostics { Some(BsFactors::new(op)) } else { None };
    let mut entries = Vec::with_capacity(dim);
    for j in 0..dim {
        let k = s[j];
        let v: Vec<C64> = (0..dim).map(|i| u[(i, j)]).collect();
        let mv = op.apply_operator(&v);
        let r: Vec<C64> = mv.iter().zip(&v).map(|(a, b)| a - k * b).collect();
        let residual = norm(&r) / norm(&v);
        let class = if k.im.abs() > threshold { EigClass::ComplexOutlier } else { EigClass::RealBand };
        let mut entry = EigEntry { k, residual, class, bs_norm: None, bs_residual: None, sandwich: None };
        if let (EigClass::ComplexOutlier, Some(bs)) = (class, &bs) {
            let hint = bs.hint(&v);
            entry.bs_norm = Some(bs.norm(op, k, Some(&hint))?);
            entry.bs_residual = Some(bs.residual(op, k, Some(&hint))?);
            entry.sandwich = Some(sandwich_norm(op, k)?);
        }
        entries.push(entry);
    }
    entries.sort_by(|a, b| a.k.re.total_cmp(&b.k.re).then(a.k.im.total_cmp(&b.k.im)));
    Ok(EigReport { n: op.grid.n, threshold, entries })
}

/// Pointwise factors of `X(k) = W^{1/2}(D_m − k)⁻¹ U W^{1/2}`.
#[derive(Debug, Clone)]
pub struct BsFactors {
    /// `W^{1/2}`.
    pub left: Vec<Mat2C>,
    /// `U W^{1/2}`.
    pub right: Vec<Mat2C>,
    /// `W = |V|`.
    pub abs: Vec<Mat2C>,
}

impl BsFactors {
    pub fn new(op: &DiscreteOperator) -> Self {
        let sites = op.grid.sites();
        let Some(v) = op.potential_samples() else {
            return BsFactors { left: vec![Mat2C::ZERO; sites], right: vec![Mat2C::ZERO; sites], abs: vec![Mat2C::ZERO; sites] };
        };
        let mut left = Vec::with_capacity(sites);
        let mut right = Vec::with_capacity(sites);
        let mut abs = Vec::with_capacity(sites);
        for x in v {
            let p = matrix_abs_polar(x);
            let wh = p.w_sqrt();
            left.push(wh);
            right.push(p.u * wh);
            abs.push(p.w);
        }
        BsFactors { left, right, abs }
    }

    pub fn is_zero(&self) -> bool {
        self.left.iter().all(|m| *m == Mat2C::ZERO)
    }

    /// `W^{1/2} ψ`; satisfies `X(k)φ = −φ` when `(D_m + V)ψ = kψ`.
    pub fn hint(&self, psi: &[C64]) -> Vec<C64> {
        apply_pointwise(&self.left, psi)
    }

    fn adjoint(mats: &[Mat2C]) -> Vec<Mat2C> {
        mats.iter().map(Mat2C::adjoint).collect()
    }

    /// `‖X(k)‖` by power iteration on `X*X`.
    pub fn norm(&self, op: &DiscreteOperator, k: C64, start: Option<&[C64]>) -> Result<f64> {
        let rk = op.resolvent_symbols(k)?;
        if self.is_zero() {
            return Ok(0.0);
        }
        let rkc = op.resolvent_symbols(k.conj())?;
        let right_adj = Self::adjoint(&self.right);
        let x = |v: &[C64]| apply_pointwise(&self.left, &op.apply_multiplier(&rk, &apply_pointwise(&self.right, v)));
        let xa = |v: &[C64]| apply_pointwise(&right_adj, &op.apply_multiplier(&rkc, &apply_pointwise(&self.left, v)));
        gram_norm(op.len(), start, x, xa)
    }

    /// Smallest singular value of `I + X(k)` restricted to the support of `W`.
    pub fn residual(&self, op: &DiscreteOperator, k: C64, hint: Option<&[C64]>) -> Result<f64> {
        let rk = op.resolvent_symbols(k)?;
        let scale = self.abs.iter().map(frobenius_norm).fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(1.0);
        }
        let support: Vec<usize> =
            (0..op.grid.sites()).filter(|&s| frobenius_norm(&self.abs[s]) > 1e-12 * scale).collect();
        let dim = 2 * support.len();
        let limit = 2 * DENSE_LIMIT * DENSE_LIMIT;
        if dim > limit {
            return Err(Error::Size { size: dim, limit });
        }
        let ker = op.kernels(&rk);
        let ns = support.len();
        let mut blocks = Vec::with_capacity(ns * ns);
        for &s in &support {
            for &t in &support {
                let off = op.offset(s, t);
                let r = Mat2C::new(ker[0][0][off], ker[0][1][off], ker[1][0][off], ker[1][1][off]);
                blocks.push(self.left[s] * r * self.right[t]);
            }
        }
        let a = Mat::from_fn(dim, dim, |i, j| {
            let x = blocks[(i / 2) * ns + j / 2].get(i % 2, j % 2);
            if i == j {
                x + 1.0
            } else {
                x
            }
        });
        drop(blocks);
        // the hint gives an upper bound ‖(I + X)φ‖/‖φ‖ on the full space
        let mut bound = f64::INFINITY;
        let mut start: Vec<C64> = Vec::new();
        if let Some(phi) = hint {
            let restricted: Vec<C64> = support.iter().flat_map(|&s| [phi[2 * s], phi[2 * s + 1]]).collect();
            if norm(&restricted) > 0.0 {
                let mut y: Vec<C64> = restricted.clone();
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi += (0..dim).map(|j| a[(i, j)] * restricted[j]).sum::<C64>() - restricted[i];
                }
                bound = norm(&y) / norm(&restricted);
                start = restricted;
            }
        }
        if start.is_empty() {
            start = random_unit(dim, START_SEED);
        }
        let lu = a.partial_piv_lu();
        let mut x = Mat::from_fn(dim, 1, |i, _| start[i]);
        let s0 = norm(&start);
        (0..dim).for_each(|i| x[(i, 0)] /= s0);
        let mut sigma = f64::INFINITY;
        for _ in 0..100 {
            lu.solve_adjoint_in_place(x.as_mut());
            lu.solve_in_place(x.as_mut());
            let s = (0..dim).map(|i| x[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
            if !(s.is_finite()) || s == 0.0 {
                return Ok(0.0);
            }
            let next = 1.0 / s.sqrt();
            (0..dim).for_each(|i| x[(i, 0)] /= s);
            let done = (sigma - next).abs() <= 1e-10 * next;
            sigma = next;
            if done {
                break;
            }
        }
        Ok(sigma.min(bound))
    }
}

/// Largest eigenvalue of a Hermitian positive semidefinite operator by Lanczos
/// with full reorthogonalisation; this accelerates the power sequence of the
/// same start vector. Stops when the Ritz residual is below [`RITZ_TOL`]
/// relative to the Ritz value.
pub fn top_eigenvalue(len: usize, start: Option<&[C64]>, a: impl Fn(&[C64]) -> Vec<C64>) -> Result<f64> {
    let v0 = match start {
        Some(s) if norm(s) > 0.0 => {
            let ns = norm(s);
            s.iter().map(|z| z / ns).collect()
        }
        _ => random_unit(len, START_SEED),
    };
    let mut basis: Vec<Vec<C64>> = vec![v0];
    let (mut alpha, mut beta): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut theta = 0.0;
    let steps = POWER_MAX_ITER.min(len.max(1));
    for j in 0..steps {
        let mut w = a(&basis[j]);
        alpha.push(dot(&basis[j], &w).re);
        for _ in 0..2 {
            for b in &basis {
                let p = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let bj = norm(&w);
        let dim = j + 1;
        let check = dim <= 60 || dim % 10 == 0 || dim == steps || bj == 0.0;
        if check {
            let t = Mat::<f64>::from_fn(dim, dim, |r, col| {
                if r == col {
                    alpha[r]
                } else if r == col + 1 || col == r + 1 {
                    beta[r.min(col)]
                } else {
                    0.0
                }
            });
            let eig = t
                .self_adjoint_eigen(faer::Side::Lower)
                .map_err(|e| Error::Convergence(format!("tridiagonal eigensolver: {e:?}")))?;
            let (u, sv) = (eig.U(), eig.S());
            let top = (0..dim).max_by(|&x, &y| sv[x].total_cmp(&sv[y])).unwrap_or(0);
            theta = sv[top].max(0.0);
            let resid = bj * u[(dim - 1, top)].abs();
            if theta == 0.0 || resid <= RITZ_TOL * theta {
                return Ok(theta);
            }
        }
        if bj == 0.0 {
            return Ok(theta);
        }
        beta.push(bj);
        basis.push(w.into_iter().map(|x| x / bj).collect());
    }
    if steps == len {
        return Ok(theta);
    }
    Err(Error::Convergence(format!("Lanczos reached {steps} steps; last estimate {theta:.9e}")))
}

/// `‖X‖` from the Gram operator `X*X`.
fn gram_norm(
    len: usize,
    start: Option<&[C64]>,
    x: impl Fn(&[C64]) -> Vec<C64>,
    xa: impl Fn(&[C64]) -> Vec<C64>,
) -> Result<f64> {
    top_eigenvalue(len, start, |v| xa(&x(v))).map(f64::sqrt)
}

pub fn bs_norm(op: &DiscreteOperator, k: C64) -> Result<f64> {
    BsFactors::new(op).norm(op, k, None)
}

/// [`bs_norm`] started from a given vector instead of a seeded random one.
pub fn bs_norm_with_start(op: &DiscreteOperator, k: C64, start: &[C64]) -> Result<f64> {
    BsFactors::new(op).norm(op, k, Some(start))
}

pub fn bs_residual(op: &DiscreteOperator, k: C64) -> Result<f64> {
    BsFactors::new(op).residual(op, k, None)
}

pub fn bs_residual_with_hint(op: &DiscreteOperator, k: C64, hint: &[C64]) -> Result<f64> {
    BsFactors::new(op).residual(op, k, Some(hint))
}

/// `‖W(D_m − k)⁻¹W‖` with `W = |V|`.
pub fn sandwich_norm(op: &DiscreteOperator, k: C64) -> Result<f64> {
    let f = BsFactors::new(op);
    let rk = op.resolvent_symbols(k)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let rkc = op.resolvent_symbols(k.conj())?;
    let w = &f.abs;
    gram_norm(
        op.len(),
        None,
        |v| apply_pointwise(w, &op.apply_multiplier(&rk, &apply_pointwise(w, v))),
        |y| apply_pointwise(w, &op.apply_multiplier(&rkc, &apply_pointwise(w, y))),
    )
}

/// `‖W Im(D₀ − k)⁻¹ W‖` for a Hermitian weight field `W` and `Im k > 0`.
pub fn im_resolvent_norm(grid: GridSpec, weight: &[Mat2C], k: C64) -> Result<f64> {
    if !(k.im > 0.0) {
        return Err(Error::InvalidArgument(format!("need Im k > 0, got {k}")));
    }
    if weight.len() != grid.sites() {
        return Err(Error::InvalidArgument("weight field does not match the grid".into()));
    }
    let op = DiscreteOperator::free(grid, 0.0)?;
    let rk = op.resolvent_symbols(k)?;
    let rkc = op.resolvent_symbols(k.conj())?;
    // Im A = (A − A*)/2i with A* = R(k̄)
    let im: Vec<Mat2C> = rk.iter().zip(&rkc).map(|(a, b)| (*a - *b).scale(-I * 0.5)).collect();
    if weight.iter().all(|w| *w == Mat2C::ZERO) {
        return Ok(0.0);
    }
    let a = |v: &[C64]| apply_pointwise(weight, &op.apply_multiplier(&im, &apply_pointwise(weight, v)));
    top_eigenvalue(op.len(), None, a)
}

/// `(2π)⁻²·2π·½·∫_ℝ Im k/(t² + (Im k)²) dt` by adaptive quadrature on
/// `t = s/(1 − s²)`.
pub fn lorentzian_constant(im_k: f64) -> Result<f64> {
    if !(im_k > 0.0) {
        return Err(Error::InvalidArgument(format!("need Im k > 0, got {im_k}")));
    }
    let integral = integrate_real(
        |s| {
            let d = 1.0 - s * s;
            if d <= 0.0 {
                return 0.0;
            }
            let t = s / d;
            let jac = (1.0 + s * s) / (d * d);
            im_k / (t * t + im_k * im_k) * jac
        },
        -1.0,
        1.0,
        1e-14,
        1e-13,
    )?;
    Ok(integral / (2.0 * PI) * 0.5)
}

/// `(mγ₀ + k − μ)(|ξ|⁴ − μ²)⁻¹ + (d0 − μ)⁻¹` at one symbol point.
pub fn resolvent_split(sp: &SymbolPoint, k: C64, m: f64) -> Result<Mat2C> {
    let mu = mu_branch(k, m)?;
    let x4 = sp.xi_sq() * sp.xi_sq();
    let a = (Mat2C::GAMMA0.scale_re(m) + Mat2C::scalar(k - mu)).scale(1.0 / (x4 - mu * mu));
    let b = (sp.d0 - Mat2C::scalar(mu))
        .inverse()
        .ok_or_else(|| Error::NearSpectrum { distance: 0.0 })?;
    Ok(a + b)
}

/// `(d0 + μ)(|ξ|⁴ − μ²)⁻¹`.
pub fn d0_resolvent_rewritten(sp: &SymbolPoint, mu: C64) -> Mat2C {
    let x4 = sp.xi_sq() * sp.xi_sq();
    (sp.d0 + Mat2C::scalar(mu)).scale(1.0 / (x4 - mu * mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_examples() {
        let s = symbol_at(0.0, 0.0, 1.5);
        assert_eq!(s.dm, Mat2C::diag(c(1.5, 0.0), c(-1.5, 0.0)));
        let e = symbol_at(1.0, 0.0, 0.0).d0.eigenvalues();
        let mut re = [e[0].re, e[1].re];
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 1.0).abs() < 1e-15 && (re[1] - 1.0).abs() < 1e-15);
        let s = symbol_at(1.0, 1.0, 0.0);
        assert!((s.dm * s.dm).max_abs_diff(&Mat2C::scalar(c(4.0, 0.0))) < 1e-15);
    }

    #[test]
    fn lorentzian_is_a_quarter() {
        for b in [0.1, 1.0, 10.0] {
            assert!((lorentzian_constant(b).unwrap() - 0.25).abs() < 1e-8);
        }
        assert!(lorentzian_constant(0.0).is_err());
    }

    #[test]
    fn threshold_matches_grid() {
        assert!((outlier_threshold(24) - 10.0 / 576.0).abs() < 1e-18);
    }
}
