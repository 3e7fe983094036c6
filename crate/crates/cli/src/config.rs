use std::path::{Path, PathBuf};

use bilayer_core::harness::{Measure, Normalization};
use bilayer_core::{BuilderSpec, GridSpec, PotentialFamily, TheoremConstants, TheoremId};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub operator: OperatorSection,
    #[serde(default)]
    pub potential: Option<BuilderSpec>,
    #[serde(default)]
    pub theorem: Option<TheoremSection>,
    #[serde(default)]
    pub scan: Option<ScanSection>,
    #[serde(default)]
    pub campaign: Option<CampaignSection>,
    #[serde(default)]
    pub probe: Option<ProbeSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    #[serde(default)]
    pub m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremSection {
    pub id: TheoremId,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub constants: ConstantsSource,
}

fn default_p() -> f64 {
    1.2
}

/// Inline constants or the path of a constants file written by `calibrate`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ConstantsSource {
    Inline(TheoremConstants),
    File(PathBuf),
}

impl Default for ConstantsSource {
    fn default() -> Self {
        ConstantsSource::Inline(TheoremConstants::default())
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowBounds {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub window: WindowBounds,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "one")]
    pub trials: usize,
    /// Values of the normalising measure; empty keeps the raw potential.
    #[serde(default)]
    pub couplings: Vec<f64>,
    #[serde(default = "default_measure")]
    pub measure: Measure,
    /// Defaults to the fixed `potential` section.
    #[serde(default)]
    pub family: Option<PotentialFamily>,
    #[serde(default = "yes")]
    pub diagnostics: bool,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_measure() -> Measure {
    Measure::L1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_r_points")]
    pub r_points: usize,
    #[serde(default = "default_q")]
    pub q: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection {
            thetas: default_thetas(),
            r_min: default_r_min(),
            r_max: default_r_max(),
            r_points: default_r_points(),
            q: default_q(),
        }
    }
}

fn default_thetas() -> Vec<f64> {
    (0..5).map(|i| i as f64 * std::f64::consts::FRAC_PI_4).collect()
}

fn default_r_min() -> f64 {
    1e-6
}

fn default_r_max() -> f64 {
    1e3
}

fn default_r_points() -> usize {
    181
}

fn default_q() -> f64 {
    4.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Pgm,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: default_dir(), formats: all_formats() }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Pgm]
}

impl OutputSection {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(spec) = cfg.potential.as_mut() {
            rebase(spec, base);
        }
        if let Some(PotentialFamily::Fixed { builder }) = cfg.campaign.as_mut().and_then(|c| c.family.as_mut()) {
            rebase(builder, base);
        }
        if let Some(TheoremSection { constants: ConstantsSource::File(p), .. }) = cfg.theorem.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<GridSpec, String> {
        let g = self.grid.ok_or("missing section: grid")?;
        g.validate().map_err(|e| format!("grid: {e}"))?;
        Ok(g)
    }

    pub fn potential_spec(&self) -> BuilderSpec {
        self.potential.clone().unwrap_or(BuilderSpec::Zero)
    }

    pub fn check_mass(&self) -> Result<f64, String> {
        let m = self.operator.m;
        if m >= 0.0 && m.is_finite() {
            Ok(m)
        } else {
            Err(format!("operator.m must be finite and >= 0, got {m}"))
        }
    }

    pub fn theorem(&self) -> Result<(&TheoremSection, TheoremConstants), String> {
        let t = self.theorem.as_ref().ok_or("missing section: theorem")?;
        if t.id == TheoremId::Thm11 && !(t.p > 1.0 && t.p < 4.0 / 3.0) {
            return Err(format!("theorem.p must lie in (1, 4/3), got {}", t.p));
        }
        let consts = match &t.constants {
            ConstantsSource::Inline(c) => *c,
            ConstantsSource::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?
            }
        };
        consts.validate().map_err(|e| format!("theorem.constants: {e}"))?;
        Ok((t, consts))
    }

    pub fn window(&self) -> Result<bilayer_core::Window, String> {
        let s = self.scan.as_ref().ok_or("missing section: scan")?;
        let w = bilayer_core::Window {
            re_min: s.window.re_min,
            re_max: s.window.re_max,
            im_min: s.window.im_min,
            im_max: s.window.im_max,
            nx: s.nx,
            ny: s.ny,
        };
        w.validate().map_err(|e| format!("scan: {e}"))?;
        Ok(w)
    }

    pub fn campaign(&self) -> Result<&CampaignSection, String> {
        let c = self.campaign.as_ref().ok_or("missing section: campaign")?;
        if c.seeds.is_empty() {
            return Err("campaign.seeds must not be empty".into());
        }
        if c.trials == 0 {
            return Err("campaign.trials must be positive".into());
        }
        check_couplings(&c.couplings)?;
        Ok(c)
    }

    /// Couplings for a region sweep; empty when no campaign section is given.
    pub fn sweep(&self) -> Result<(Vec<f64>, Measure), String> {
        match &self.campaign {
            None => Ok((Vec::new(), Measure::L1)),
            Some(c) => {
                check_couplings(&c.couplings)?;
                Ok((c.couplings.clone(), c.measure))
            }
        }
    }
}

fn check_couplings(cs: &[f64]) -> Result<(), String> {
    match cs.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        Some(t) => Err(format!("campaign.couplings must be finite and >= 0, got {t}")),
        None => Ok(()),
    }
}

fn rebase(spec: &mut BuilderSpec, base: &Path) {
    match spec {
        BuilderSpec::File { path } if path.is_relative() => *path = base.join(&*path),
        BuilderSpec::Scaled { inner, .. } => rebase(inner, base),
        _ => {}
    }
}

pub fn normalization(measure: Measure, value: Option<f64>) -> Option<Normalization> {
    value.map(|value| Normalization { measure, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn defaults_fill_optional_sections() {
        let cfg = parse(r#"{ "grid": { "n": 8, "l": 3.0 } }"#);
        assert_eq!(cfg.operator.m, 0.0);
        assert!(matches!(cfg.potential_spec(), BuilderSpec::Zero));
        assert!(cfg.output.wants(Format::Pgm));
        assert_eq!(cfg.sweep().unwrap().0, Vec::<f64>::new());
        assert!(cfg.theorem().is_err() && cfg.window().is_err() && cfg.campaign().is_err());
    }

    #[test]
    fn constants_accept_inline_or_path() {
        let inline = parse(r#"{ "theorem": { "id": "1.1", "constants": { "c_p": 2.0, "c_12": 1.0, "c_31": 1.0 } } }"#);
        assert!(matches!(inline.theorem.unwrap().constants, ConstantsSource::Inline(c) if c.c_p == 2.0));
        let file = parse(r#"{ "theorem": { "id": "1.1", "constants": "c.json" } }"#);
        assert!(matches!(file.theorem.unwrap().constants, ConstantsSource::File(_)));
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{ "potential": { "kind": "file", "path": "v.json" }, "theorem": { "id": "1.1", "constants": "c.json" } }"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert!(matches!(cfg.potential, Some(BuilderSpec::File { ref path }) if path == &dir.path().join("v.json")));
        assert!(matches!(cfg.theorem.unwrap().constants, ConstantsSource::File(ref p) if p == &dir.path().join("c.json")));
    }

    #[test]
    fn invalid_values_are_reported() {
        let cfg = parse(r#"{ "operator": { "m": -1 }, "theorem": { "id": "1.1", "p": 1.4 },
            "campaign": { "seeds": [], "couplings": [-1] } }"#);
        assert!(cfg.check_mass().is_err());
        assert!(cfg.theorem().unwrap_err().contains("(1, 4/3)"));
        assert!(cfg.campaign().is_err());
        assert!(cfg.sweep().is_err());
        assert!(cfg.grid().unwrap_err().contains("missing"));
    }
}
