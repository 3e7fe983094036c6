use bilayer_core::harness::{
    calibrate, corollary32_suite, radius_campaign, run_trial, Measure, Normalization, RealityFamily,
};
use bilayer_core::{BuilderSpec, GridSpec, PotentialFamily, Provenance, TheoremConstants, TheoremId, TrialConfig};

fn gaussian_cfg(m: f64, seed: u64, trials: usize) -> TrialConfig {
    TrialConfig {
        grid: GridSpec::new(12, 3.0).unwrap(),
        m,
        p: 1.2,
        family: PotentialFamily::RandomGaussians { bumps: 1, width_min: 0.35, width_max: 0.5, spread: 0.0 },
        normalization: Some(Normalization { measure: Measure::L1, value: 10.0 }),
        theorem: TheoremId::Thm11,
        constants: TheoremConstants::default(),
        seed,
        trials,
        diagnostics: false,
    }
}

#[test]
fn zero_potential_has_no_outliers() {
    for m in [0.0, 1.0] {
        let cfg = TrialConfig {
            grid: GridSpec::new(8, 3.0).unwrap(),
            family: PotentialFamily::Fixed { builder: BuilderSpec::Zero },
            normalization: None,
            diagnostics: true,
            ..gaussian_cfg(m, 3, 3)
        };
        let rep = run_trial(&cfg).unwrap();
        assert_eq!(rep.outliers, 0);
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.failed_trials, 0);
        assert_eq!(rep.max_lhs_deficit, None);
        assert!(rep.calibration.is_none());
    }
}

#[test]
fn violation_flag_matches_lhs() {
    let rep = run_trial(&gaussian_cfg(1.0, 7, 3)).unwrap();
    assert!(rep.outliers > 0);
    let mut violations = 0;
    for o in rep.trials.iter().flat_map(|t| &t.outliers) {
        assert_eq!(o.violation, o.lhs < 1.0);
        violations += o.violation as usize;
    }
    assert_eq!(violations, rep.violations);
    let deficit = rep.max_lhs_deficit.unwrap();
    assert_eq!(deficit > 0.0, rep.violations > 0);
}

fn dir_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn identical_config_gives_identical_files() {
    let cfg = TrialConfig { diagnostics: true, ..gaussian_cfg(0.0, 11, 2) };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_trial(&cfg).unwrap().write_to_dir(a.path()).unwrap();
    run_trial(&cfg).unwrap().write_to_dir(b.path()).unwrap();
    let (fa, fb) = (dir_bytes(a.path()), dir_bytes(b.path()));
    assert_eq!(fa.len(), 3);
    assert!(fa.iter().any(|(n, _)| n == "summary.json"));
    assert_eq!(fa, fb);
}

#[test]
fn calibration_is_stable_and_holds_out() {
    let a = run_trial(&gaussian_cfg(0.0, 0, 25)).unwrap();
    let b = run_trial(&gaussian_cfg(0.0, 1000, 25)).unwrap();
    let ca = calibrate(&[a.trials.clone()]).unwrap();
    let cb = calibrate(&[b.trials]).unwrap();
    assert_eq!(ca.provenance, Provenance::Calibrated);
    for (x, y) in [(ca.c_p, cb.c_p), (ca.c_12, cb.c_12), (ca.c_31, cb.c_31)] {
        assert!(x.max(y) < 2.0 * x.min(y), "{x} vs {y}");
    }
    let held = run_trial(&TrialConfig { constants: ca, ..gaussian_cfg(0.0, 5000, 25) }).unwrap();
    assert!(held.outliers > 0);
    assert_eq!(held.violations, 0);
    // the calibrating family itself passes with margin 1.25
    let own = run_trial(&TrialConfig { constants: ca, ..gaussian_cfg(0.0, 0, 25) }).unwrap();
    assert_eq!(own.violations, 0);
    assert!(own.max_lhs_deficit.unwrap() <= 1.0 - 1.25 + 1e-12);
}

#[test]
fn failed_trials_are_recorded_not_fatal() {
    let cfg = TrialConfig {
        family: PotentialFamily::RandomGaussians { bumps: 1, width_min: 2.0, width_max: 2.0, spread: 0.0 },
        ..gaussian_cfg(0.0, 0, 2)
    };
    let rep = run_trial(&cfg).unwrap();
    assert_eq!(rep.failed_trials, 2);
    assert!(rep.trials.iter().all(|t| t.error.as_deref().unwrap_or("").contains("does not decay")));
}

#[test]
fn invalid_config_is_rejected() {
    assert!(run_trial(&TrialConfig { p: 1.5, ..gaussian_cfg(0.0, 0, 1) }).is_err());
    assert!(run_trial(&TrialConfig { m: -1.0, ..gaussian_cfg(0.0, 0, 1) }).is_err());
    let bad = TrialConfig { constants: TheoremConstants { c_p: 0.0, ..Default::default() }, ..gaussian_cfg(0.0, 0, 1) };
    assert!(run_trial(&bad).is_err());
}

#[test]
fn config_round_trips_through_json() {
    let cfg = gaussian_cfg(1.0, 9, 4);
    let text = serde_json::to_string(&cfg).unwrap();
    let back: TrialConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["bogus"] = serde_json::json!(1);
    assert!(serde_json::from_value::<TrialConfig>(v).is_err());
}

#[test]
fn reality_suite_at_zero_coupling_passes() {
    let rep = corollary32_suite(&[1, 2, 3], 0.0, GridSpec::new(8, 3.0).unwrap(), RealityFamily::default()).unwrap();
    assert!(rep.pass);
    assert!(rep.trials.iter().all(|t| t.outliers == 0 && t.max_abs_im < 1e-10));
}

#[test]
fn reality_suite_far_above_threshold_is_only_recorded() {
    let rep = corollary32_suite(&[1, 2], 400.0, GridSpec::new(12, 5.0).unwrap(), RealityFamily::default()).unwrap();
    assert_eq!(rep.trials.len(), 2);
    assert!(rep.trials.iter().all(|t| t.error.is_none()));
    println!("coupling 400: pass = {}, outliers = {:?}", rep.pass, rep.trials.iter().map(|t| t.outliers).collect::<Vec<_>>());
}

#[test]
fn radius_campaign_requires_zero_mass() {
    assert!(radius_campaign(&gaussian_cfg(1.0, 0, 1), &[1.0, 2.0, 3.0]).is_err());
}

#[test]
fn radius_campaign_skips_empty_couplings() {
    let cfg = TrialConfig { trials: 1, ..gaussian_cfg(0.0, 0, 1) };
    let camp = radius_campaign(&cfg, &[20.0, 10.0, 1e-6]).unwrap();
    assert_eq!(camp.radii.len(), 3);
    assert!(camp.radii[2].1.is_none());
    assert!(camp.fit.is_err(), "two usable couplings cannot be fitted");
}
