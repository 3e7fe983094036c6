//! Verification campaigns over seeded random potentials: enclosure checks at
//! complex outliers, constant calibration, the small-coupling radius fit and
//! the reality check for `V = iW²`.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{c, Mat2C, SpectralPoint, C64};
use crate::discrete::{complex_spectrum_with, DiscreteOperator, EigReport, SpectrumOptions};
use crate::enclosure::{thm11_value, thm31_value, Provenance, TheoremConstants, TheoremId, Thm12Lhs};
use crate::error::{Error, Result};
use crate::potentials::{
    build_potential, lp_integral, trace_abs_integral, BuilderSpec, GaussianBump, GridSpec, PotentialField,
};

pub const SAFETY_FACTOR: f64 = 1.25;

/// How each trial draws its potential from the trial seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialFamily {
    /// The same potential in every trial.
    Fixed { builder: BuilderSpec },
    /// Gaussian bumps with complex normal amplitude matrices.
    RandomGaussians {
        #[serde(default = "one_bump")]
        bumps: usize,
        width_min: f64,
        width_max: f64,
        /// Centres are uniform in `[−spread, spread]²`.
        #[serde(default)]
        spread: f64,
    },
    /// Band-limited random field; see [`BuilderSpec::BandLimitedRandom`].
    BandLimited {
        cutoff: f64,
        #[serde(default)]
        hermitian: bool,
        #[serde(default)]
        i_times_square: bool,
        #[serde(default)]
        envelope: Option<f64>,
    },
}

fn one_bump() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// `∫|V|`.
    L1,
    /// `∫tr|V|`.
    Trace,
}

/// Rescale each potential so the chosen measure equals `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Normalization {
    pub measure: Measure,
    pub value: f64,
}

impl PotentialFamily {
    pub fn build(&self, grid: &GridSpec, seed: u64, norm: Option<Normalization>) -> Result<PotentialField> {
        let spec = match self {
            PotentialFamily::Fixed { builder } => builder.clone(),
            PotentialFamily::RandomGaussians { bumps, width_min, width_max, spread } => {
                if !(*width_min > 0.0 && width_min <= width_max) {
                    return Err(Error::InvalidArgument("need 0 < width_min <= width_max".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let z = |rng: &mut ChaCha8Rng| c(StandardNormal.sample(rng), StandardNormal.sample(rng));
                let bumps = (0..*bumps)
                    .map(|_| {
                        let amplitude = Mat2C::new(z(&mut rng), z(&mut rng), z(&mut rng), z(&mut rng));
                        let width = if width_max > width_min { rng.random_range(*width_min..*width_max) } else { *width_min };
                        let center = if *spread > 0.0 {
                            [rng.random_range(-spread..*spread), rng.random_range(-spread..*spread)]
                        } else {
                            [0.0, 0.0]
                        };
                        GaussianBump { amplitude, center, width }
                    })
                    .collect();
                BuilderSpec::MultiGaussian { bumps }
            }
            PotentialFamily::BandLimited { cutoff, hermitian, i_times_square, envelope } => BuilderSpec::BandLimitedRandom {
                seed,
                cutoff: *cutoff,
                amplitude: 1.0,
                hermitian: *hermitian,
                i_times_square: *i_times_square,
                envelope: *envelope,
            },
        };
        let v = build_potential(&spec, grid)?;
        match norm {
            None => Ok(v),
            Some(nm) => normalize(v, nm),
        }
    }
}

pub fn normalize(v: PotentialField, nm: Normalization) -> Result<PotentialField> {
    if !(nm.value >= 0.0) || !nm.value.is_finite() {
        return Err(Error::InvalidArgument(format!("coupling must be finite and >= 0, got {}", nm.value)));
    }
    let current = match nm.measure {
        Measure::L1 => lp_integral(&v, 1.0),
        Measure::Trace => trace_abs_integral(&v),
    };
    if current == 0.0 {
        return Ok(v);
    }
    let builder = BuilderSpec::Scaled { factor: nm.value / current, inner: Box::new(v.builder.clone()) };
    let mut out = v.scaled(nm.value / current);
    out.builder = builder;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub grid: GridSpec,
    pub m: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    pub family: PotentialFamily,
    #[serde(default)]
    pub normalization: Option<Normalization>,
    pub theorem: TheoremId,
    #[serde(default)]
    pub constants: TheoremConstants,
    pub seed: u64,
    pub trials: usize,
    /// Birman–Schwinger diagnostics at every outlier.
    #[serde(default = "yes")]
    pub diagnostics: bool,
}

fn yes() -> bool {
    true
}

fn default_p() -> f64 {
    1.2
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.constants.validate()?;
        if !(self.m >= 0.0) || !self.m.is_finite() {
            return Err(Error::InvalidArgument(format!("mass must be finite and >= 0, got {}", self.m)));
        }
        if !(self.p > 1.0 && self.p < 4.0 / 3.0) {
            return Err(Error::InvalidArgument(format!("p must lie in (1, 4/3), got {}", self.p)));
        }
        Ok(())
    }

    pub fn trial_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    pub l1: f64,
    pub lp: f64,
    pub trace: f64,
    pub log_conv: f64,
}

/// Left-hand sides with all constants set to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitLhs {
    pub thm11: f64,
    pub thm12: f64,
    pub thm31: f64,
    /// `(a + b)` and `¼∫tr|V|` of the reality bound, kept for calibration.
    pub thm31_slope: f64,
    pub thm31_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierRecord {
    pub k: C64,
    pub residual: f64,
    pub bs_norm: Option<f64>,
    pub bs_residual: Option<f64>,
    pub sandwich: Option<f64>,
    pub unit: UnitLhs,
    pub lhs: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub functionals: Option<Functionals>,
    pub outliers: Vec<OutlierRecord>,
    pub error: Option<String>,
    #[serde(skip)]
    pub spectrum: Option<EigReport>,
}

impl TrialRecord {
    pub fn violations(&self) -> usize {
        self.outliers.iter().filter(|o| o.violation).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub config: TrialConfig,
    pub trials: Vec<TrialRecord>,
    pub outliers: usize,
    pub violations: usize,
    pub failed_trials: usize,
    /// `max(1 − LHS)` over all outliers; positive iff some outlier violates.
    pub max_lhs_deficit: Option<f64>,
    pub calibration: Option<TheoremConstants>,
}

fn lhs_with(theorem: TheoremId, unit: &UnitLhs, consts: &TheoremConstants) -> f64 {
    match theorem {
        TheoremId::Thm11 => consts.c_p * unit.thm11,
        TheoremId::Thm12 => consts.c_12 * unit.thm12,
        TheoremId::Thm31 => (consts.c_31 * unit.thm31_slope + 1.0) * unit.thm31_offset,
    }
}

fn run_one(cfg: &TrialConfig, index: usize) -> Result<TrialRecord> {
    let seed = cfg.trial_seed(index);
    let v = cfg.family.build(&cfg.grid, seed, cfg.normalization)?;
    let unit_consts = TheoremConstants::default();
    let thm12 = Thm12Lhs::new(&v, unit_consts);
    let functionals = Functionals {
        l1: lp_integral(&v, 1.0),
        lp: lp_integral(&v, cfg.p),
        trace: trace_abs_integral(&v),
        log_conv: thm12.f_log,
    };
    let op = DiscreteOperator::new(cfg.grid, cfg.m, Some(v))?;
    let spectrum = complex_spectrum_with(&op, SpectrumOptions { diagnostics: cfg.diagnostics })?;
    let mut outliers = Vec::new();
    for e in spectrum.outliers() {
        let pt = SpectralPoint::new(e.k, cfg.m)?;
        let thm31_offset = 0.25 * functionals.trace;
        let slope = if thm31_offset > 0.0 {
            thm31_value(&pt, &TheoremConstants { c_31: 1.0, ..unit_consts }, functionals.trace)? / thm31_offset - 1.0
        } else {
            0.0
        };
        let unit = UnitLhs {
            thm11: thm11_value(&pt, cfg.p, &unit_consts, functionals.lp)?,
            thm12: crate::enclosure::LhsEvaluator::lhs(&thm12, &pt)?,
            thm31: thm31_value(&pt, &unit_consts, functionals.trace)?,
            thm31_slope: slope,
            thm31_offset,
        };
        let lhs = lhs_with(cfg.theorem, &unit, &cfg.constants);
        outliers.push(OutlierRecord {
            k: e.k,
            residual: e.residual,
            bs_norm: e.bs_norm,
            bs_residual: e.bs_residual,
            sandwich: e.sandwich,
            unit,
            lhs,
            violation: lhs < 1.0,
        });
    }
    Ok(TrialRecord { index, seed, functionals: Some(functionals), outliers, error: None, spectrum: Some(spectrum) })
}

/// Run every trial of the configuration; failing trials are recorded, not fatal.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialReport> {
    cfg.validate()?;
    let trials: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            run_one(cfg, i).unwrap_or_else(|e| TrialRecord {
                index: i,
                seed: cfg.trial_seed(i),
                functionals: None,
                outliers: Vec::new(),
                error: Some(e.to_string()),
                spectrum: None,
            })
        })
        .collect();
    let outliers = trials.iter().map(|t| t.outliers.len()).sum();
    let violations = trials.iter().map(TrialRecord::violations).sum();
    let failed_trials = trials.iter().filter(|t| t.error.is_some()).count();
    let max_lhs_deficit =
        trials.iter().flat_map(|t| &t.outliers).map(|o| 1.0 - o.lhs).reduce(f64::max);
    let calibration = calibrate(std::slice::from_ref(&trials)).ok();
    Ok(TrialReport { config: cfg.clone(), trials, outliers, violations, failed_trials, max_lhs_deficit, calibration })
}

impl TrialReport {
    /// Trial CSVs in the spectrum schema plus `summary.json`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for t in &self.trials {
            if let Some(s) = &t.spectrum {
                let mut f = fs::File::create(dir.join(format!("trial_{:03}.csv", t.index)))?;
                s.write_csv(&mut f)?;
            }
        }
        let mut f = fs::File::create(dir.join("summary.json"))?;
        f.write_all(serde_json::to_string_pretty(&self.summary())?.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "outliers": self.outliers,
            "violations": self.violations,
            "failed_trials": self.failed_trials,
            "max_lhs_deficit": self.max_lhs_deficit,
            "calibrated_constants": self.calibration,
            "trials": self.trials,
        })
    }
}

/// Smallest constants with `LHS ≥ 1` at every recorded outlier, times
/// [`SAFETY_FACTOR`].
pub fn calibrate(families: &[Vec<TrialRecord>]) -> Result<TheoremConstants> {
    let outliers: Vec<&OutlierRecord> = families.iter().flatten().flat_map(|t| &t.outliers).collect();
    if outliers.is_empty() {
        return Err(Error::NoOutliers);
    }
    let need = |f: &dyn Fn(&UnitLhs) -> f64| outliers.iter().map(|o| f(&o.unit)).fold(f64::NEG_INFINITY, f64::max);
    let c_p = need(&|u| 1.0 / u.thm11);
    let c_12 = need(&|u| 1.0 / u.thm12);
    let c_31 = need(&|u| {
        if u.thm31_slope > 0.0 {
            (1.0 / u.thm31_offset - 1.0) / u.thm31_slope
        } else if u.thm31_offset >= 1.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    });
    // a non-positive requirement is met by every positive constant
    let finish = |x: f64| SAFETY_FACTOR * x.max(f64::EPSILON);
    let consts = TheoremConstants {
        c_p: finish(c_p),
        c_12: finish(c_12),
        c_31: finish(c_31),
        provenance: Provenance::Calibrated,
    };
    if !(consts.c_p.is_finite() && consts.c_12.is_finite() && consts.c_31.is_finite()) {
        return Err(Error::InsufficientData(
            "an outlier has a left-hand side below 1 that no constant can raise".into(),
        ));
    }
    Ok(consts)
}

/// Calibrate from fresh campaigns of the given configurations.
pub fn calibrate_family(cfgs: &[TrialConfig]) -> Result<TheoremConstants> {
    let families = cfgs.iter().map(|c| run_trial(c).map(|r| r.trials)).collect::<Result<Vec<_>>>()?;
    calibrate(&families)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusFit {
    /// `(t_j, r_j)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
    /// Slope of `ln r` against `1/t`, an estimate of `−C`.
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
}

/// Least-squares fit of `ln r_j` against `1/t_j`.
pub fn radius_fit(points: &[(f64, f64)]) -> Result<RadiusFit> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(t, r)| t > 0.0 && r > 0.0).collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!("radius fit needs 3 couplings with outliers, got {}", pts.len())));
    }
    let xs: Vec<f64> = pts.iter().map(|p| 1.0 / p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let nf = pts.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / nf, ys.iter().sum::<f64>() / nf);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("radius fit needs distinct couplings".into()));
    }
    let slope = sxy / sxx;
    let correlation = if syy == 0.0 { 0.0 } else { sxy / (sxx * syy).sqrt() };
    Ok(RadiusFit { points: pts, slope, intercept: my - slope * mx, correlation })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusCampaign {
    /// Per coupling: `max |k|` over the outliers of all trials, if any.
    pub radii: Vec<(f64, Option<f64>)>,
    pub fit: Result<RadiusFit, String>,
}

/// Run `base` (with `m = 0`) at each `∫|V|` coupling and fit the outlier radii.
pub fn radius_campaign(base: &TrialConfig, couplings: &[f64]) -> Result<RadiusCampaign> {
    if base.m != 0.0 {
        return Err(Error::InvalidArgument("the radius asymptotic is for m = 0".into()));
    }
    let mut radii = Vec::with_capacity(couplings.len());
    for &t in couplings {
        let cfg = TrialConfig { normalization: Some(Normalization { measure: Measure::L1, value: t }), ..base.clone() };
        let rep = run_trial(&cfg)?;
        let r = rep.trials.iter().flat_map(|t| &t.outliers).map(|o| o.k.norm()).reduce(f64::max);
        radii.push((t, r));
    }
    let pts: Vec<(f64, f64)> = radii.iter().filter_map(|&(t, r)| r.map(|r| (t, r))).collect();
    Ok(RadiusCampaign { radii, fit: radius_fit(&pts).map_err(|e| e.to_string()) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealityTrial {
    pub seed: u64,
    pub outliers: usize,
    pub max_abs_im: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealityReport {
    pub coupling: f64,
    pub threshold: f64,
    pub pass: bool,
    pub trials: Vec<RealityTrial>,
}

/// Shape of the Hermitian `W` in [`corollary32_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealityFamily {
    pub cutoff: f64,
    #[serde(default)]
    pub envelope: Option<f64>,
}

impl Default for RealityFamily {
    fn default() -> Self {
        RealityFamily { cutoff: 1.0, envelope: None }
    }
}

/// `m = 0`, `V = iW²` with random Hermitian `W` scaled to `∫tr|V| = coupling`;
/// passes iff no trial has a complex outlier.
pub fn corollary32_suite(seeds: &[u64], coupling: f64, grid: GridSpec, family: RealityFamily) -> Result<RealityReport> {
    grid.validate()?;
    let fam = PotentialFamily::BandLimited {
        cutoff: family.cutoff,
        hermitian: true,
        i_times_square: true,
        envelope: family.envelope,
    };
    let norm = Normalization { measure: Measure::Trace, value: coupling };
    let trials: Vec<RealityTrial> = seeds
        .par_iter()
        .map(|&seed| {
            let run = || -> Result<RealityTrial> {
                let v = if coupling == 0.0 { PotentialField::zero(grid) } else { fam.build(&grid, seed, Some(norm))? };
                let op = DiscreteOperator::new(grid, 0.0, Some(v))?;
                let rep = complex_spectrum_with(&op, SpectrumOptions { diagnostics: false })?;
                Ok(RealityTrial {
                    seed,
                    outliers: rep.outlier_count(),
                    max_abs_im: rep.entries.iter().map(|e| e.k.im.abs()).fold(0.0, f64::max),
                    error: None,
                })
            };
            run().unwrap_or_else(|e| RealityTrial { seed, outliers: 0, max_abs_im: f64::NAN, error: Some(e.to_string()) })
        })
        .collect();
    let pass = trials.iter().all(|t| t.error.is_none() && t.outliers == 0);
    Ok(RealityReport { coupling, threshold: crate::discrete::outlier_threshold(grid.n), pass, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_radius_fit_is_exact() {
        let pts: Vec<(f64, f64)> = [0.8f64, 0.4, 0.2, 0.1].iter().map(|&t| (t, (-2.0 / t).exp())).collect();
        let fit = radius_fit(&pts).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!((fit.correlation + 1.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!(matches!(radius_fit(&[]), Err(Error::InsufficientData(_))));
        assert!(matches!(radius_fit(&pts[..2]), Err(Error::InsufficientData(_))));
    }

    fn record(unit: UnitLhs) -> TrialRecord {
        TrialRecord {
            index: 0,
            seed: 0,
            functionals: None,
            outliers: vec![OutlierRecord {
                k: c(0.0, 1.0),
                residual: 0.0,
                bs_norm: None,
                bs_residual: None,
                sandwich: None,
                unit,
                lhs: 0.0,
                violation: false,
            }],
            error: None,
            spectrum: None,
        }
    }

    #[test]
    fn one_point_calibration() {
        let unit = UnitLhs { thm11: 0.5, thm12: 0.25, thm31: 0.5, thm31_slope: 1.0, thm31_offset: 0.25 };
        let c = calibrate(&[vec![record(unit)]]).unwrap();
        assert!((c.c_p - 2.5).abs() < 1e-15);
        assert!((c.c_12 - 5.0).abs() < 1e-15);
        assert!((c.c_31 - 3.75).abs() < 1e-15);
        assert_eq!(c.provenance, Provenance::Calibrated);
        assert!(matches!(calibrate(&[vec![]]), Err(Error::NoOutliers)));
    }

    #[test]
    fn calibration_is_monotone_in_the_family() {
        let a = UnitLhs { thm11: 0.5, thm12: 0.5, thm31: 0.5, thm31_slope: 1.0, thm31_offset: 0.25 };
        let b = UnitLhs { thm11: 0.2, thm12: 0.9, thm31: 0.5, thm31_slope: 2.0, thm31_offset: 0.1 };
        let small = calibrate(&[vec![record(a)]]).unwrap();
        let big = calibrate(&[vec![record(a), record(b)]]).unwrap();
        assert!(big.c_p >= small.c_p && big.c_12 >= small.c_12 && big.c_31 >= small.c_31);
    }
}
