//! Left-hand sides of the eigenvalue enclosure inequalities and complex-plane
//! region scans.
//!
//! A point `k` off the free spectrum is *excluded* (cannot be an eigenvalue)
//! when the selected left-hand side is below 1.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{c, mu_branch, SpectralPoint, C64};
use crate::error::{Error, Result};
use crate::potentials::{local_sup_with, OffsetConvolver, PotentialField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    #[default]
    User,
    Calibrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremConstants {
    #[serde(default = "one")]
    pub c_p: f64,
    #[serde(default = "one")]
    pub c_12: f64,
    #[serde(default = "one")]
    pub c_31: f64,
    #[serde(default)]
    pub provenance: Provenance,
}

fn one() -> f64 {
    1.0
}

impl Default for TheoremConstants {
    fn default() -> Self {
        TheoremConstants { c_p: 1.0, c_12: 1.0, c_31: 1.0, provenance: Provenance::User }
    }
}

impl TheoremConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c_p", self.c_p), ("c_12", self.c_12), ("c_31", self.c_31)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("constant {name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub enum TheoremId {
    #[serde(rename = "1.1")]
    Thm11,
    #[serde(rename = "1.2")]
    Thm12,
    #[serde(rename = "3.1")]
    Thm31,
}

impl TheoremId {
    pub fn label(&self) -> &'static str {
        match self {
            TheoremId::Thm11 => "1.1",
            TheoremId::Thm12 => "1.2",
            TheoremId::Thm31 => "3.1",
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p < 4.0 / 3.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("p must lie in (1, 4/3), got {p}")))
    }
}

/// `√|(k−m)/(k+m)| + √|(k+m)/(k−m)| + 1`; exactly 3 when `m = 0`.
pub fn bracket(pt: &SpectralPoint) -> f64 {
    if pt.m == 0.0 {
        return 3.0;
    }
    let ratio = ((pt.k - pt.m) / (pt.k + pt.m)).norm();
    ratio.sqrt() + ratio.recip().sqrt() + 1.0
}

pub fn thm11_value(pt: &SpectralPoint, p: f64, consts: &TheoremConstants, vp_integral: f64) -> Result<f64> {
    check_p(p)?;
    Ok(consts.c_p * vp_integral / pt.mu.norm().powf(p - 1.0) * bracket(pt).powf(p))
}

pub fn thm12_value(
    pt: &SpectralPoint,
    consts: &TheoremConstants,
    f_local: f64,
    f_log: f64,
    f_l1: f64,
) -> Result<f64> {
    let c12 = consts.c_12;
    Ok(c12 * (pt.mu.norm().ln().abs() * f_local + f_log) + c12 * f_l1 * bracket(pt))
}

/// Branch used by the reality bound: the upper root for `Im k ≥ 0` and its
/// mirror image below the axis, so that `μ = k` whenever `m = 0`.
pub fn reflected_mu(k: C64, m: f64) -> Result<C64> {
    if k.im < 0.0 {
        Ok(mu_branch(k.conj(), m)?.conj())
    } else {
        mu_branch(k, m)
    }
}

pub fn thm31_value(pt: &SpectralPoint, consts: &TheoremConstants, tr_integral: f64) -> Result<f64> {
    let mu = reflected_mu(pt.k, pt.m)?;
    let a = ((pt.k + pt.m) / mu - 1.0).norm();
    let b = ((pt.k - pt.m) / mu - 1.0).norm();
    Ok((consts.c_31 * (a + b) + 1.0) * 0.25 * tr_integral)
}

/// Radius of the disk containing every eigenvalue when `m = 0`.
pub fn m0_radius_bound(p: f64, consts: &TheoremConstants, vp_integral: f64) -> Result<f64> {
    check_p(p)?;
    Ok((3f64.powf(p) * consts.c_p * vp_integral).powf(1.0 / (p - 1.0)))
}

/// A left-hand side that can be scanned over the complex plane.
pub trait LhsEvaluator: Sync {
    fn theorem_id(&self) -> String;
    /// Inputs recorded in the region metadata and digest.
    fn inputs(&self) -> serde_json::Value;
    /// Called once, serially, with every point the scan will evaluate.
    fn prepare(&mut self, _points: &[SpectralPoint]) -> Result<()> {
        Ok(())
    }
    fn lhs(&self, pt: &SpectralPoint) -> Result<f64>;
}

pub struct Thm11Lhs {
    pub p: f64,
    pub consts: TheoremConstants,
    pub vp_integral: f64,
}

impl LhsEvaluator for Thm11Lhs {
    fn theorem_id(&self) -> String {
        "1.1".into()
    }
    fn inputs(&self) -> serde_json::Value {
        serde_json::json!({ "p": self.p, "constants": self.consts, "vp_integral": self.vp_integral })
    }
    fn lhs(&self, pt: &SpectralPoint) -> Result<f64> {
        thm11_value(pt, self.p, &self.consts, self.vp_integral)
    }
}

pub struct Thm31Lhs {
    pub consts: TheoremConstants,
    pub tr_integral: f64,
}

impl LhsEvaluator for Thm31Lhs {
    fn theorem_id(&self) -> String {
        "3.1".into()
    }
    fn inputs(&self) -> serde_json::Value {
        serde_json::json!({ "constants": self.consts, "tr_integral": self.tr_integral })
    }
    fn lhs(&self, pt: &SpectralPoint) -> Result<f64> {
        thm31_value(pt, &self.consts, self.tr_integral)
    }
}

/// Steps of the logarithmic disk-radius quantisation (1 % in radius).
const RADIUS_STEPS_PER_E: f64 = 100.0;

/// Theorem 1.2 needs `sup_x ∫_{|x−y|<1/(2|μ|)}|V|`, which depends on `|μ|`;
/// values are cached by quantised disk radius.
pub struct Thm12Lhs {
    pub consts: TheoremConstants,
    pub f_log: f64,
    pub f_l1: f64,
    h: f64,
    max_rad: f64,
    conv: Option<OffsetConvolver>,
    cache: HashMap<i64, f64>,
}

impl Thm12Lhs {
    pub fn new(v: &PotentialField, consts: TheoremConstants) -> Self {
        let zero = v.is_zero();
        Thm12Lhs {
            consts,
            f_log: crate::potentials::log_conv_sup(v),
            f_l1: crate::potentials::lp_integral(v, 1.0),
            h: v.grid.h(),
            max_rad: 2.0 * v.grid.n as f64,
            conv: if zero { None } else { Some(OffsetConvolver::new(v)) },
            cache: HashMap::new(),
        }
    }

    fn key(&self, mu: C64) -> i64 {
        let rad = (0.5 / mu.norm() / self.h).min(self.max_rad);
        (rad.ln() * RADIUS_STEPS_PER_E).round() as i64
    }

    fn local_at_key(&self, key: i64) -> f64 {
        match &self.conv {
            None => 0.0,
            Some(conv) => local_sup_with(conv, self.h, (key as f64 / RADIUS_STEPS_PER_E).exp() * self.h),
        }
    }

    /// Cached local supremum for the point; computed on a miss.
    pub fn f_local(&self, pt: &SpectralPoint) -> f64 {
        let key = self.key(pt.mu);
        self.cache.get(&key).copied().unwrap_or_else(|| self.local_at_key(key))
    }
}

impl LhsEvaluator for Thm12Lhs {
    fn theorem_id(&self) -> String {
        "1.2".into()
    }
    fn inputs(&self) -> serde_json::Value {
        serde_json::json!({
            "constants": self.consts,
            "f_log": self.f_log,
            "f_l1": self.f_l1,
            "h": self.h,
            "radius_steps_per_e": RADIUS_STEPS_PER_E,
        })
    }
    fn prepare(&mut self, points: &[SpectralPoint]) -> Result<()> {
        let mut keys: Vec<i64> = points.iter().map(|p| self.key(p.mu)).collect();
        keys.sort_unstable();
        keys.dedup();
        keys.retain(|k| !self.cache.contains_key(k));
        let this = &*self;
        let vals: Vec<(i64, f64)> = keys.par_iter().map(|&k| (k, this.local_at_key(k))).collect();
        self.cache.extend(vals);
        Ok(())
    }
    fn lhs(&self, pt: &SpectralPoint) -> Result<f64> {
        thm12_value(pt, &self.consts, self.f_local(pt), self.f_log, self.f_l1)
    }
}

/// Any closure as an evaluator (mainly for tests).
pub struct FnLhs<F: Fn(&SpectralPoint) -> f64 + Sync>(pub F);

impl<F: Fn(&SpectralPoint) -> f64 + Sync> LhsEvaluator for FnLhs<F> {
    fn theorem_id(&self) -> String {
        "custom".into()
    }
    fn inputs(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
    fn lhs(&self, pt: &SpectralPoint) -> Result<f64> {
        Ok((self.0)(pt))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

fn centre(i: usize, n: usize, lo: f64, hi: f64) -> f64 {
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    (2.0 * i as f64 + 1.0 - n as f64) * half / n as f64 + mid
}

impl Window {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidArgument("scan window needs nx, ny >= 2".into()));
        }
        let ok = |a: f64, b: f64| a.is_finite() && b.is_finite() && a < b;
        if !ok(self.re_min, self.re_max) || !ok(self.im_min, self.im_max) {
            return Err(Error::InvalidArgument("scan window bounds must be finite and increasing".into()));
        }
        Ok(())
    }

    pub fn re_at(&self, i: usize) -> f64 {
        centre(i, self.nx, self.re_min, self.re_max)
    }

    pub fn im_at(&self, j: usize) -> f64 {
        centre(j, self.ny, self.im_min, self.im_max)
    }

    pub fn k_at(&self, i: usize, j: usize) -> C64 {
        c(self.re_at(i), self.im_at(j))
    }
}

/// Admissibility mask over a window; index `j·nx + i`, `j` increasing with `Im k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnclosureRegion {
    pub window: Window,
    pub m: f64,
    pub theorem_id: String,
    pub inputs: serde_json::Value,
    pub digest: String,
    pub mask: Vec<bool>,
    pub values: Vec<f64>,
    pub boundary: Vec<Vec<[f64; 2]>>,
}

/// Evaluate the left-hand side at every cell centre and extract the `LHS = 1`
/// boundary. Points on the free spectrum and branch points stay admissible.
pub fn region_scan(window: &Window, m: f64, eval: &mut dyn LhsEvaluator) -> Result<EnclosureRegion> {
    window.validate()?;
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::InvalidArgument(format!("mass must be finite and >= 0, got {m}")));
    }
    let (nx, ny) = (window.nx, window.ny);
    let points: Vec<Option<SpectralPoint>> =
        (0..nx * ny).map(|idx| SpectralPoint::new(window.k_at(idx % nx, idx / nx), m).ok()).collect();
    let valid: Vec<SpectralPoint> = points.iter().flatten().copied().collect();
    eval.prepare(&valid)?;
    let eval = &*eval;
    let cells: Vec<(bool, f64)> = points
        .par_iter()
        .map(|pt| match pt {
            None => (true, f64::NAN),
            Some(pt) => {
                let v = eval.lhs(pt).unwrap_or(f64::NAN);
                let forced = pt.on_free_spectrum() || !v.is_finite();
                (forced || v >= 1.0, v)
            }
        })
        .collect();
    let mask: Vec<bool> = cells.iter().map(|c| c.0).collect();
    let values: Vec<f64> = cells.iter().map(|c| c.1).collect();
    // level function consistent with the mask
    let level: Vec<f64> = cells
        .iter()
        .map(|&(adm, v)| {
            let f = if v.is_finite() { v - 1.0 } else { 0.0 };
            if adm {
                f.max(0.0)
            } else {
                f.min(-f64::MIN_POSITIVE)
            }
        })
        .collect();
    let boundary = marching_squares(window, &level);
    let inputs = eval.inputs();
    let digest = {
        let doc = serde_json::json!({ "window": window, "m": m, "theorem": eval.theorem_id(), "inputs": inputs });
        hex(&Sha256::digest(serde_json::to_vec(&doc)?))
    };
    Ok(EnclosureRegion { window: *window, m, theorem_id: eval.theorem_id(), inputs, digest, mask, values, boundary })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum EdgeId {
    // between (i, j) and (i + 1, j)
    H(usize, usize),
    // between (i, j) and (i, j + 1)
    V(usize, usize),
}

/// Boundary polylines of `{level >= 0}` on the cell-centre lattice.
fn marching_squares(window: &Window, level: &[f64]) -> Vec<Vec<[f64; 2]>> {
    let (nx, ny) = (window.nx, window.ny);
    let f = |i: usize, j: usize| level[j * nx + i];
    let point = |e: EdgeId| -> [f64; 2] {
        let (a, b, pa, pb) = match e {
            EdgeId::H(i, j) => (f(i, j), f(i + 1, j), window.k_at(i, j), window.k_at(i + 1, j)),
            EdgeId::V(i, j) => (f(i, j), f(i, j + 1), window.k_at(i, j), window.k_at(i, j + 1)),
        };
        let t = a / (a - b);
        let p = pa + (pb - pa) * t;
        [p.re, p.im]
    };
    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            // corners counter-clockwise from bottom-left
            let v = [f(i, j), f(i + 1, j), f(i + 1, j + 1), f(i, j + 1)];
            let inside: Vec<bool> = v.iter().map(|x| *x >= 0.0).collect();
            let edges = [EdgeId::H(i, j), EdgeId::V(i + 1, j), EdgeId::H(i, j + 1), EdgeId::V(i, j)];
            // edge e joins corners e and e+1
            let crossing: Vec<usize> = (0..4).filter(|&e| inside[e] != inside[(e + 1) % 4]).collect();
            match crossing.len() {
                2 => segments.push((edges[crossing[0]], edges[crossing[1]])),
                4 => {
                    let centre_in = v.iter().sum::<f64>() >= 0.0;
                    // pair each edge with the neighbour that keeps the centre's side connected
                    if centre_in == inside[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    join_segments(&segments).into_iter().map(|chain| chain.into_iter().map(point).collect()).collect()
}

fn join_segments(segments: &[(EdgeId, EdgeId)]) -> Vec<Vec<EdgeId>> {
    let mut adj: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
    for (s, (a, b)) in segments.iter().enumerate() {
        adj.entry(*a).or_default().push(s);
        adj.entry(*b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let other = |s: usize, e: EdgeId| if segments[s].0 == e { segments[s].1 } else { segments[s].0 };
    let walk = |start: EdgeId, used: &mut Vec<bool>| {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(&s) = adj[&cur].iter().find(|&&s| !used[s]) {
            used[s] = true;
            cur = other(s, cur);
            chain.push(cur);
        }
        chain
    };
    // open chains start at edges used once
    let ends: Vec<EdgeId> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(e, _)| *e).collect();
    for e in ends {
        if adj[&e].iter().any(|&s| !used[s]) {
            out.push(walk(e, &mut used));
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            out.push(walk(segments[s].0, &mut used));
        }
    }
    out
}

impl EnclosureRegion {
    pub fn admissible(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.window.nx + i]
    }

    pub fn admissible_count(&self) -> usize {
        self.mask.iter().filter(|b| **b).count()
    }

    /// 4-connected components of the admissible set; labels are `usize::MAX`
    /// on excluded cells.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let (nx, ny) = (self.window.nx, self.window.ny);
        let mut label = vec![usize::MAX; nx * ny];
        let mut count = 0;
        for start in 0..nx * ny {
            if !self.mask[start] || label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = count;
            while let Some(idx) = stack.pop() {
                let (i, j) = (idx % nx, idx / nx);
                let mut nb = Vec::with_capacity(4);
                if i > 0 {
                    nb.push(idx - 1);
                }
                if i + 1 < nx {
                    nb.push(idx + 1);
                }
                if j > 0 {
                    nb.push(idx - nx);
                }
                if j + 1 < ny {
                    nb.push(idx + nx);
                }
                for q in nb {
                    if self.mask[q] && label[q] == usize::MAX {
                        label[q] = count;
                        stack.push(q);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// PGM (P2): admissible 255, excluded 0, top row is the largest `Im k`.
    pub fn write_pgm(&self, mut out: impl Write) -> Result<()> {
        let (nx, ny) = (self.window.nx, self.window.ny);
        writeln!(out, "P2\n{nx} {ny}\n255")?;
        for j in (0..ny).rev() {
            let row: Vec<&str> = (0..nx).map(|i| if self.admissible(i, j) { "255" } else { "0" }).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn write_boundary_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "polyline_id,re_k,im_k")?;
        for (id, line) in self.boundary.iter().enumerate() {
            for p in line {
                writeln!(out, "{id},{},{}", p[0], p[1])?;
            }
        }
        Ok(())
    }

    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "theorem": self.theorem_id,
            "m": self.m,
            "window": self.window,
            "inputs": self.inputs,
            "digest": self.digest,
            "admissible_cells": self.admissible_count(),
            "components": self.components().0,
            "polylines": self.boundary.len(),
        })
    }
}
