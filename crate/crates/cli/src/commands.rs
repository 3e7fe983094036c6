use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bilayer_core::discrete::{bs_norm, complex_spectrum_with, SpectrumOptions};
use bilayer_core::enclosure::{LhsEvaluator, Thm11Lhs, Thm12Lhs, Thm31Lhs};
use bilayer_core::harness::{calibrate, normalize, radius_fit, run_trial, Normalization, TrialRecord};
use bilayer_core::kernels::{kernel_bound_probe, log_grid, rho_theta_norm};
use bilayer_core::potentials::{build_potential, lp_integral, trace_abs_integral};
use bilayer_core::{
    region_scan, DiscreteOperator, EnclosureRegion, PotentialFamily, PotentialField, TheoremConstants, TheoremId,
    TrialConfig,
};
use serde_json::json;

use crate::config::{normalization, Format, RunConfig};

/// Exit code 2 for `Config`, 3 for `Compute`.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Compute(String),
}

impl From<bilayer_core::Error> for Failure {
    fn from(e: bilayer_core::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn cfg_err<T>(r: Result<T, String>) -> Result<T, Failure> {
    r.map_err(Failure::Config)
}

fn create(dir: &Path, name: &str) -> Result<fs::File, Failure> {
    fs::create_dir_all(dir)?;
    Ok(fs::File::create(dir.join(name))?)
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Outcome {
    let mut f = create(dir, name)?;
    f.write_all(serde_json::to_string_pretty(value).map_err(|e| Failure::Compute(e.to_string()))?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

fn build(cfg: &RunConfig) -> Result<PotentialField, Failure> {
    let grid = cfg_err(cfg.grid())?;
    Ok(build_potential(&cfg.potential_spec(), &grid)?)
}

fn evaluator(
    id: TheoremId,
    p: f64,
    consts: TheoremConstants,
    v: &PotentialField,
) -> Box<dyn LhsEvaluator> {
    match id {
        TheoremId::Thm11 => Box::new(Thm11Lhs { p, consts, vp_integral: lp_integral(v, p) }),
        TheoremId::Thm12 => Box::new(Thm12Lhs::new(v, consts)),
        TheoremId::Thm31 => Box::new(Thm31Lhs { consts, tr_integral: trace_abs_integral(v) }),
    }
}

fn write_region(cfg: &RunConfig, dir: &Path, r: &EnclosureRegion) -> Outcome {
    let out = &cfg.output;
    if out.wants(Format::Pgm) {
        r.write_pgm(create(dir, "region.pgm")?)?;
    }
    if out.wants(Format::Csv) {
        r.write_boundary_csv(create(dir, "boundary.csv")?)?;
    }
    if out.wants(Format::Json) {
        write_json(dir, "region.json", &r.metadata())?;
    }
    Ok(())
}

pub fn region(cfg: &RunConfig) -> Outcome {
    let m = cfg_err(cfg.check_mass())?;
    let (thm, consts) = cfg_err(cfg.theorem())?;
    let window = cfg_err(cfg.window())?;
    let (couplings, measure) = cfg_err(cfg.sweep())?;
    let v = build(cfg)?;
    let dir = &cfg.output.directory;
    if couplings.is_empty() {
        let r = region_scan(&window, m, evaluator(thm.id, thm.p, consts, &v).as_mut())?;
        return write_region(cfg, dir, &r);
    }
    let mut regions = Vec::new();
    for &t in &couplings {
        let vt = normalize(v.clone(), Normalization { measure, value: t })?;
        regions.push(region_scan(&window, m, evaluator(thm.id, thm.p, consts, &vt).as_mut())?);
    }
    let mut index = Vec::new();
    for (i, (t, r)) in couplings.iter().zip(&regions).enumerate() {
        let name = format!("coupling_{i:02}");
        write_region(cfg, &dir.join(&name), r)?;
        index.push(json!({
            "coupling": t,
            "directory": name,
            "admissible_cells": r.admissible_count(),
            "components": r.components().0,
        }));
    }
    if cfg.output.wants(Format::Json) {
        write_json(dir, "sweep.json", &json!({ "measure": measure, "regions": index }))?;
    }
    Ok(())
}

fn operator(cfg: &RunConfig) -> Result<DiscreteOperator, Failure> {
    let m = cfg_err(cfg.check_mass())?;
    let v = build(cfg)?;
    Ok(DiscreteOperator::new(v.grid, m, Some(v))?)
}

pub fn eigs(cfg: &RunConfig) -> Outcome {
    let diagnostics = cfg.campaign.as_ref().is_none_or(|c| c.diagnostics);
    let op = operator(cfg)?;
    let rep = complex_spectrum_with(&op, SpectrumOptions { diagnostics })?;
    let dir = &cfg.output.directory;
    if cfg.output.wants(Format::Csv) {
        rep.write_csv(create(dir, "eigs.csv")?)?;
    }
    if cfg.output.wants(Format::Json) {
        let outliers: Vec<_> = rep.outliers().collect();
        write_json(
            dir,
            "eigs.json",
            &json!({
                "n": rep.n,
                "m": cfg.operator.m,
                "threshold": rep.threshold,
                "eigenvalues": rep.entries.len(),
                "max_residual": rep.max_residual(),
                "outliers": outliers,
            }),
        )?;
    }
    Ok(())
}

pub fn bsnorm(cfg: &RunConfig) -> Outcome {
    let window = cfg_err(cfg.window())?;
    let op = operator(cfg)?;
    let mut values = Vec::with_capacity(window.nx * window.ny);
    for j in 0..window.ny {
        for i in 0..window.nx {
            let k = window.k_at(i, j);
            // points on the discrete free spectrum have no resolvent
            values.push((k, bs_norm(&op, k).ok()));
        }
    }
    let dir = &cfg.output.directory;
    if cfg.output.wants(Format::Csv) {
        let mut f = create(dir, "bsnorm.csv")?;
        writeln!(f, "re_k,im_k,bs_norm")?;
        for (k, x) in &values {
            writeln!(f, "{},{},{}", k.re, k.im, x.map(|x| format!("{x:e}")).unwrap_or_default())?;
        }
    }
    if cfg.output.wants(Format::Pgm) {
        let mut f = create(dir, "bsnorm.pgm")?;
        writeln!(f, "P2\n{} {}\n255", window.nx, window.ny)?;
        for j in (0..window.ny).rev() {
            let row: Vec<&str> = (0..window.nx)
                .map(|i| match values[j * window.nx + i].1 {
                    Some(x) if x < 1.0 => "0",
                    _ => "255",
                })
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
    }
    if cfg.output.wants(Format::Json) {
        let ok: Vec<f64> = values.iter().filter_map(|v| v.1).collect();
        write_json(
            dir,
            "bsnorm.json",
            &json!({
                "window": window,
                "m": cfg.operator.m,
                "cells": values.len(),
                "undefined_cells": values.len() - ok.len(),
                "cells_at_least_one": ok.iter().filter(|x| **x >= 1.0).count(),
                "max": ok.iter().copied().reduce(f64::max),
                "min": ok.iter().copied().reduce(f64::min),
            }),
        )?;
    }
    Ok(())
}

struct Run {
    seed: u64,
    coupling: Option<f64>,
    dir: PathBuf,
    trials: Vec<TrialRecord>,
    summary: serde_json::Value,
}

fn campaign_runs(cfg: &RunConfig, need_theorem: bool) -> Result<(Vec<Run>, f64), Failure> {
    let grid = cfg_err(cfg.grid())?;
    let m = cfg_err(cfg.check_mass())?;
    let camp = cfg_err(cfg.campaign())?;
    let (theorem, p, constants) = match (&cfg.theorem, need_theorem) {
        (None, false) => (TheoremId::Thm11, 1.2, TheoremConstants::default()),
        _ => {
            let (t, c) = cfg_err(cfg.theorem())?;
            (t.id, t.p, c)
        }
    };
    let family = camp.family.clone().unwrap_or(PotentialFamily::Fixed { builder: cfg.potential_spec() });
    let couplings: Vec<Option<f64>> =
        if camp.couplings.is_empty() { vec![None] } else { camp.couplings.iter().map(|&t| Some(t)).collect() };
    let base = TrialConfig {
        grid,
        m,
        p,
        family,
        normalization: None,
        theorem,
        constants,
        seed: 0,
        trials: camp.trials,
        diagnostics: camp.diagnostics,
    };
    cfg_err(base.validate().map_err(|e| e.to_string()))?;
    let mut runs = Vec::new();
    for &seed in &camp.seeds {
        for (i, &t) in couplings.iter().enumerate() {
            let tc = TrialConfig { seed, normalization: normalization(camp.measure, t), ..base.clone() };
            let rep = run_trial(&tc)?;
            let summary = json!({
                "seed": seed,
                "coupling": t,
                "outliers": rep.outliers,
                "violations": rep.violations,
                "failed_trials": rep.failed_trials,
                "max_lhs_deficit": rep.max_lhs_deficit,
                "max_abs_k": rep.trials.iter().flat_map(|t| &t.outliers).map(|o| o.k.norm()).reduce(f64::max),
            });
            let dir = cfg.output.directory.join(format!("seed_{seed}")).join(format!("coupling_{i:02}"));
            if cfg.output.wants(Format::Csv) || cfg.output.wants(Format::Json) {
                rep.write_to_dir(&dir)?;
            }
            runs.push(Run { seed, coupling: t, dir, trials: rep.trials, summary });
        }
    }
    Ok((runs, m))
}

pub fn verify(cfg: &RunConfig) -> Outcome {
    let (runs, m) = campaign_runs(cfg, true)?;
    let families: Vec<Vec<TrialRecord>> = runs.iter().map(|r| r.trials.clone()).collect();
    let sum = |key: &str| runs.iter().map(|r| r.summary[key].as_u64().unwrap_or(0)).sum::<u64>();
    // radius fit over couplings, using the largest outlier modulus across seeds
    let fit = if m == 0.0 {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for r in &runs {
            let (Some(t), Some(k)) = (r.coupling, r.summary["max_abs_k"].as_f64()) else { continue };
            match pts.iter_mut().find(|p| p.0 == t) {
                Some(p) => p.1 = p.1.max(k),
                None => pts.push((t, k)),
            }
        }
        radius_fit(&pts).ok()
    } else {
        None
    };
    let runs_json: Vec<_> = runs
        .iter()
        .map(|r| {
            let mut s = r.summary.clone();
            s["directory"] = json!(r.dir.strip_prefix(&cfg.output.directory).unwrap_or(&r.dir));
            s
        })
        .collect();
    if cfg.output.wants(Format::Json) {
        write_json(
            &cfg.output.directory,
            "summary.json",
            &json!({
                "outliers": sum("outliers"),
                "violations": sum("violations"),
                "failed_trials": sum("failed_trials"),
                "calibrated_constants": calibrate(&families).ok(),
                "fit_slope": fit.as_ref().map(|f| f.slope),
                "fit_correlation": fit.as_ref().map(|f| f.correlation),
                "runs": runs_json,
            }),
        )?;
    }
    Ok(())
}

pub fn calibrate_cmd(cfg: &RunConfig) -> Outcome {
    let (runs, _) = campaign_runs(cfg, false)?;
    let families: Vec<Vec<TrialRecord>> = runs.iter().map(|r| r.trials.clone()).collect();
    let consts = calibrate(&families)?;
    let dir = &cfg.output.directory;
    write_json(dir, "constants.json", &serde_json::to_value(consts).map_err(|e| Failure::Compute(e.to_string()))?)?;
    if cfg.output.wants(Format::Json) {
        let outliers: usize = families.iter().flatten().map(|t| t.outliers.len()).sum();
        let seeds: Vec<u64> = runs.iter().map(|r| r.seed).collect();
        write_json(
            dir,
            "calibration.json",
            &json!({ "constants": consts, "outliers": outliers, "families": runs.len(), "seeds": seeds }),
        )?;
    }
    Ok(())
}

pub fn kernel_probe(cfg: &RunConfig) -> Outcome {
    let probe = cfg.probe.clone().unwrap_or_default();
    if !(probe.r_min > 0.0 && probe.r_min < probe.r_max && probe.r_points >= 2 && probe.q > 4.0) {
        return Err(Failure::Config("probe needs 0 < r_min < r_max, r_points >= 2 and q > 4".into()));
    }
    let r = log_grid(probe.r_min, probe.r_max, probe.r_points);
    let rep = kernel_bound_probe(&probe.thetas, &r, probe.q)?;
    let dir = &cfg.output.directory;
    if cfg.output.wants(Format::Json) {
        write_json(dir, "probe.json", &serde_json::to_value(&rep).map_err(|e| Failure::Compute(e.to_string()))?)?;
    }
    if cfg.output.wants(Format::Csv) {
        let mut f = create(dir, "kernel.csv")?;
        writeln!(f, "theta,r,rho_norm")?;
        for &th in &probe.thetas {
            for &x in &r {
                writeln!(f, "{th},{x},{:e}", rho_theta_norm(th, x)?)?;
            }
        }
    }
    Ok(())
}
