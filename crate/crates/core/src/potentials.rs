//! Matrix-valued potentials sampled on the torus `[−L, L)²` and the potential
//! functionals entering the enclosure theorems.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{c, frobenius_norm, matrix_abs_polar, Mat2C, C64, I};
use crate::error::{Error, Result};
use crate::fft2::Fft2;

const TAIL_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub l: f64,
}

impl GridSpec {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        let g = GridSpec { n, l };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("grid needs n >= 1".into()));
        }
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(Error::InvalidArgument(format!("grid half-side must be positive, got {}", self.l)));
        }
        if self.h() >= 1.0 {
            return Err(Error::InvalidArgument(format!("grid spacing {} must be below 1", self.h())));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    pub fn sites(&self) -> usize {
        self.n * self.n
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.l + j as f64 * self.h()
    }

    /// Position of site `i2·n + i1`.
    pub fn point(&self, site: usize) -> [f64; 2] {
        [self.coord(site % self.n), self.coord(site / self.n)]
    }

    /// Signed integer frequency of FFT index `j`, in `{−⌊n/2⌋, …, ⌈n/2⌉−1}`.
    pub fn freq_index(&self, j: usize) -> i64 {
        if 2 * j < self.n {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Angular frequency of FFT index `j`.
    pub fn xi(&self, j: usize) -> f64 {
        self.freq_index(j) as f64 * PI / self.l
    }

    pub fn cell_area(&self) -> f64 {
        self.h() * self.h()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBump {
    pub amplitude: Mat2C,
    #[serde(default)]
    pub center: [f64; 2],
    pub width: f64,
}

impl GaussianBump {
    fn at(&self, x: [f64; 2]) -> Mat2C {
        let d2 = (x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2);
        self.amplitude.scale_re((-d2 / (self.width * self.width)).exp())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BuilderSpec {
    Zero,
    Gaussian(GaussianBump),
    MultiGaussian {
        bumps: Vec<GaussianBump>,
    },
    BandLimitedRandom {
        seed: u64,
        cutoff: f64,
        amplitude: f64,
        #[serde(default)]
        hermitian: bool,
        #[serde(default)]
        i_times_square: bool,
        /// Gaussian envelope width; defaults to `L/5`.
        #[serde(default)]
        envelope: Option<f64>,
    },
    File {
        path: PathBuf,
    },
    Scaled {
        factor: f64,
        inner: Box<BuilderSpec>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub grid: GridSpec,
    pub samples: Vec<Mat2C>,
    pub builder: BuilderSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileHeader {
    n: usize,
    l: f64,
    builder: BuilderSpec,
}

fn band_limited(
    grid: &GridSpec,
    seed: u64,
    cutoff: f64,
    amplitude: f64,
    hermitian: bool,
    i_times_square: bool,
    envelope: Option<f64>,
) -> Result<Vec<Mat2C>> {
    if !(cutoff > 0.0) || !(amplitude >= 0.0) {
        return Err(Error::InvalidArgument("band-limited builder needs cutoff > 0 and amplitude >= 0".into()));
    }
    let env = envelope.unwrap_or(grid.l / 5.0);
    if !(env > 0.0) {
        return Err(Error::InvalidArgument("envelope width must be positive".into()));
    }
    let kmax = (cutoff * grid.l / PI).floor() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for q2 in -kmax..=kmax {
        for q1 in -kmax..=kmax {
            let xi = [q1 as f64 * PI / grid.l, q2 as f64 * PI / grid.l];
            if xi[0].hypot(xi[1]) > cutoff {
                continue;
            }
            let mut coef = [C64::default(); 4];
            for v in coef.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *v = c(re, im);
            }
            modes.push((xi, coef));
        }
    }
    let hermitian = hermitian || i_times_square;
    let mut w: Vec<Mat2C> = (0..grid.sites())
        .into_par_iter()
        .map(|site| {
            let x = grid.point(site);
            let mut e = [C64::default(); 4];
            for (xi, coef) in &modes {
                let ph = C64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1]);
                for k in 0..4 {
                    e[k] += coef[k] * ph;
                }
            }
            let mut m = Mat2C::new(e[0], e[1], e[2], e[3]);
            if hermitian {
                m = (m + m.adjoint()).scale_re(0.5);
            }
            m.scale_re((-(x[0] * x[0] + x[1] * x[1]) / (env * env)).exp())
        })
        .collect();
    let peak = w.iter().map(frobenius_norm).fold(0.0, f64::max);
    if peak > 0.0 {
        let s = amplitude / peak;
        w.iter_mut().for_each(|m| *m = m.scale_re(s));
    }
    if i_times_square {
        w.iter_mut().for_each(|m| *m = (*m * *m).scale(I));
    }
    Ok(w)
}

fn sample(spec: &BuilderSpec, grid: &GridSpec) -> Result<(Vec<Mat2C>, BuilderSpec)> {
    let pointwise = |f: &(dyn Fn([f64; 2]) -> Mat2C + Sync)| -> Vec<Mat2C> {
        (0..grid.sites()).into_par_iter().map(|s| f(grid.point(s))).collect()
    };
    let check_width = |w: f64| {
        if w > 0.0 && w.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("gaussian width must be positive, got {w}")))
        }
    };
    match spec {
        BuilderSpec::Zero => Ok((vec![Mat2C::ZERO; grid.sites()], spec.clone())),
        BuilderSpec::Gaussian(b) => {
            check_width(b.width)?;
            Ok((pointwise(&|x| b.at(x)), spec.clone()))
        }
        BuilderSpec::MultiGaussian { bumps } => {
            for b in bumps {
                check_width(b.width)?;
            }
            let f = |x| bumps.iter().fold(Mat2C::ZERO, |acc, b| acc + b.at(x));
            Ok((pointwise(&f), spec.clone()))
        }
        BuilderSpec::BandLimitedRandom { seed, cutoff, amplitude, hermitian, i_times_square, envelope } => Ok((
            band_limited(grid, *seed, *cutoff, *amplitude, *hermitian, *i_times_square, *envelope)?,
            spec.clone(),
        )),
        BuilderSpec::File { path } => {
            let f = read_potential(path)?;
            if f.grid != *grid {
                return Err(Error::InvalidArgument(format!(
                    "potential file grid (n = {}, l = {}) does not match the requested grid (n = {}, l = {})",
                    f.grid.n, f.grid.l, grid.n, grid.l
                )));
            }
            Ok((f.samples, f.builder))
        }
        BuilderSpec::Scaled { factor, inner } => {
            let (s, b) = sample(inner, grid)?;
            let spec = BuilderSpec::Scaled { factor: *factor, inner: Box::new(b) };
            Ok((s.into_iter().map(|m| m.scale_re(*factor)).collect(), spec))
        }
    }
}

/// Sample a builder on `grid` and enforce finiteness and boundary decay.
pub fn build_potential(spec: &BuilderSpec, grid: &GridSpec) -> Result<PotentialField> {
    grid.validate()?;
    let (samples, builder) = sample(spec, grid)?;
    let field = PotentialField { grid: *grid, samples, builder };
    field.check()?;
    Ok(field)
}

impl PotentialField {
    pub fn zero(grid: GridSpec) -> Self {
        PotentialField { grid, samples: vec![Mat2C::ZERO; grid.sites()], builder: BuilderSpec::Zero }
    }

    /// Finiteness and the boundary-ring decay condition (skipped for `n < 3`,
    /// where every site is on the ring).
    pub fn check(&self) -> Result<()> {
        if self.samples.len() != self.grid.sites() {
            return Err(Error::InvalidArgument("sample count does not match the grid".into()));
        }
        if let Some(s) = self.samples.iter().position(|m| !m.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite potential sample at site {s}")));
        }
        let n = self.grid.n;
        if n < 3 {
            return Ok(());
        }
        let max = self.abs_values().into_iter().fold(0.0, f64::max);
        let ring = (0..self.grid.sites())
            .filter(|s| {
                let (i1, i2) = (s % n, s / n);
                i1 == 0 || i2 == 0 || i1 == n - 1 || i2 == n - 1
            })
            .map(|s| frobenius_norm(&self.samples[s]))
            .fold(0.0, f64::max);
        if ring > TAIL_RATIO * max {
            return Err(Error::Tail { ring, max });
        }
        Ok(())
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.samples.iter().map(frobenius_norm).collect()
    }

    pub fn scaled(&self, t: f64) -> Self {
        PotentialField {
            grid: self.grid,
            samples: self.samples.iter().map(|m| m.scale_re(t)).collect(),
            builder: BuilderSpec::Scaled { factor: t, inner: Box::new(self.builder.clone()) },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|m| *m == Mat2C::ZERO)
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        let header = FileHeader { n: self.grid.n, l: self.grid.l, builder: self.builder.clone() };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        let mut buf = Vec::with_capacity(64 * self.samples.len());
        for m in &self.samples {
            for e in m.entries() {
                buf.extend_from_slice(&e.re.to_le_bytes());
                buf.extend_from_slice(&e.im.to_le_bytes());
            }
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "x1,x2,abs_v")?;
        for (s, m) in self.samples.iter().enumerate() {
            let x = self.grid.point(s);
            writeln!(out, "{},{},{:e}", x[0], x[1], frobenius_norm(m))?;
        }
        Ok(())
    }
}

pub fn write_potential(field: &PotentialField, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    field.write_to(&mut f)?;
    f.flush()?;
    Ok(())
}

pub fn read_potential(path: &Path) -> Result<PotentialField> {
    let mut r = BufReader::new(fs::File::open(path)?);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: FileHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Format(format!("bad header: {e}")))?;
    let grid = GridSpec { n: header.n, l: header.l };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 64 * grid.sites() {
        return Err(Error::Format(format!(
            "expected {} payload bytes for n = {}, found {}",
            64 * grid.sites(),
            grid.n,
            bytes.len()
        )));
    }
    let f = |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    let samples = (0..grid.sites())
        .map(|s| {
            let e = |k: usize| c(f(8 * s + 2 * k), f(8 * s + 2 * k + 1));
            Mat2C::new(e(0), e(1), e(2), e(3))
        })
        .collect();
    Ok(PotentialField { grid, samples, builder: header.builder })
}

/// `∫|V|^p dx` by the equal-weight torus rule.
pub fn lp_integral(v: &PotentialField, p: f64) -> f64 {
    v.samples.iter().map(|m| frobenius_norm(m).powf(p)).sum::<f64>() * v.grid.cell_area()
}

/// `∫ tr|V| dx`.
pub fn trace_abs_integral(v: &PotentialField) -> f64 {
    v.samples
        .iter()
        .map(|m| {
            let s = matrix_abs_polar(m).singular_values();
            s[0] + s[1]
        })
        .sum::<f64>()
        * v.grid.cell_area()
}

/// Zero-padded (non-periodic) convolution of `|V|` with kernels on the
/// `(2n−1)²` lattice of site offsets. `|V|` is transformed once.
pub struct OffsetConvolver {
    n: usize,
    fft: Fft2,
    abs_hat: Vec<C64>,
}

impl OffsetConvolver {
    pub fn new(v: &PotentialField) -> Self {
        let n = v.grid.n;
        let m = 2 * n;
        let fft = Fft2::new(m);
        let mut abs_hat = vec![C64::default(); m * m];
        for (s, a) in v.abs_values().into_iter().enumerate() {
            abs_hat[(s / n) * m + s % n] = c(a, 0.0);
        }
        fft.forward(&mut abs_hat);
        OffsetConvolver { n, fft, abs_hat }
    }

    /// `out[x] = Σ_y k(x − y)|V(y)|` over grid sites, `k` given per offset
    /// `(d1, d2)` in cells.
    pub fn apply(&self, k: impl Fn(i64, i64) -> f64 + Sync) -> Vec<f64> {
        let (n, m) = (self.n as i64, 2 * self.n);
        let mut buf: Vec<C64> = (0..m * m)
            .into_par_iter()
            .map(|idx| {
                let (r, col) = ((idx / m) as i64, (idx % m) as i64);
                let d2 = if r < n { r } else { r - 2 * n };
                let d1 = if col < n { col } else { col - 2 * n };
                if d1.abs() >= n || d2.abs() >= n {
                    C64::default()
                } else {
                    c(k(d1, d2), 0.0)
                }
            })
            .collect();
        self.fft.forward(&mut buf);
        buf.iter_mut().zip(&self.abs_hat).for_each(|(a, b)| *a *= b);
        self.fft.inverse(&mut buf);
        let n = self.n;
        (0..n * n).map(|s| buf[(s / n) * m + s % n].re).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Fraction of the cell centred at offset `(d1, d2)` (in units of `h`) lying
/// in the disk of radius `rad` (also in units of `h`); boundary cells by 4×4
/// subsampling.
fn disk_weight(d1: i64, d2: i64, rad: f64) -> f64 {
    let (x, y) = (d1.abs() as f64, d2.abs() as f64);
    let near = (x - 0.5).max(0.0).hypot((y - 0.5).max(0.0));
    let far = (x + 0.5).hypot(y + 0.5);
    if far < rad {
        1.0
    } else if near >= rad {
        0.0
    } else {
        let mut hits = 0;
        for a in 0..4 {
            for b in 0..4 {
                let px = x - 0.5 + (a as f64 + 0.5) / 4.0;
                let py = y - 0.5 + (b as f64 + 0.5) / 4.0;
                if px.hypot(py) < rad {
                    hits += 1;
                }
            }
        }
        f64::from(hits) / 16.0
    }
}

/// `sup_x ∫_{|x−y|<s} |V(y)| dy` over grid points, reusing a prepared convolver.
pub fn local_sup_with(conv: &OffsetConvolver, h: f64, s: f64) -> f64 {
    let rad = s / h;
    let vals = conv.apply(|d1, d2| disk_weight(d1, d2, rad));
    vals.into_iter().fold(0.0, f64::max).max(0.0) * h * h
}

pub fn local_sup_integral(v: &PotentialField, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("disk radius must be positive, got {s}")));
    }
    if v.is_zero() {
        return Ok(0.0);
    }
    Ok(local_sup_with(&OffsetConvolver::new(v), v.grid.h(), s))
}

/// `∫_{[−h/2,h/2]²} (1 + |ln|y||) dy` for `h < 1`.
fn log_self_cell(h: f64) -> f64 {
    let a = 0.5 * h;
    let unit = 2f64.ln() - 3.0 + PI / 2.0; // ∫_{[0,1]²} ln(x² + y²)
    h * h - 2.0 * a * a * (unit + 2.0 * a.ln())
}

/// Values of `∫(1 + |ln|x−y||)|V(y)| dy` at every grid point, with its argmax.
pub fn log_conv_field(v: &PotentialField) -> (Vec<f64>, usize) {
    let h = v.grid.h();
    let self_w = log_self_cell(h) / (h * h);
    let vals = OffsetConvolver::new(v).apply(|d1, d2| {
        if d1 == 0 && d2 == 0 {
            self_w
        } else {
            1.0 + (h * (d1 as f64).hypot(d2 as f64)).ln().abs()
        }
    });
    let vals: Vec<f64> = vals.into_iter().map(|x| x * h * h).collect();
    let arg = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|p| p.0).unwrap_or(0);
    (vals, arg)
}

/// `sup_x ∫(1 + |ln|x−y||)|V(y)| dy` over grid points.
pub fn log_conv_sup(v: &PotentialField) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let (vals, arg) = log_conv_field(v);
    vals[arg].max(0.0)
}
