use bilayer_core::enclosure::{
    bracket, m0_radius_bound, region_scan, thm11_value, thm12_value, thm31_value, Thm11Lhs, Thm12Lhs, Window,
};
use bilayer_core::potentials::{GridSpec, PotentialField};
use bilayer_core::{c, SpectralPoint, TheoremConstants};
use proptest::prelude::*;

fn consts() -> impl Strategy<Value = TheoremConstants> {
    (0.1..10.0f64, 0.1..10.0f64, 0.1..10.0f64).prop_map(|(a, b, d)| TheoremConstants {
        c_p: a,
        c_12: b,
        c_31: d,
        ..Default::default()
    })
}

fn off_axis() -> impl Strategy<Value = (f64, f64)> {
    (-20.0..20.0f64, 0.01..20.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn thm11_scaling_invariance((re, im) in off_axis(), m in 0.0..5.0f64, p in 1.01..1.33f64,
                                cs in consts(), vp in 0.0..10.0f64) {
        let lam: f64 = 2.0;
        let a = thm11_value(&SpectralPoint::new(c(re, im), m).unwrap(), p, &cs, vp).unwrap();
        let scaled = SpectralPoint::new(c(re, im) * lam * lam, lam * lam * m).unwrap();
        let b = thm11_value(&scaled, p, &cs, lam.powf(2.0 * p - 2.0) * vp).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(f64::MIN_POSITIVE), "{a} vs {b}");
    }

    #[test]
    fn conjugation_symmetry((re, im) in off_axis(), m in 0.0..5.0f64, cs in consts(),
                            vp in 0.0..10.0f64, fl in 0.0..5.0f64, fg in 0.0..5.0f64) {
        let k = c(re, im);
        let (a, b) = (SpectralPoint::new(k, m).unwrap(), SpectralPoint::new(k.conj(), m).unwrap());
        prop_assert_eq!(thm11_value(&a, 1.2, &cs, vp).unwrap(), thm11_value(&b, 1.2, &cs, vp).unwrap());
        prop_assert_eq!(thm12_value(&a, &cs, fl, fg, vp).unwrap(), thm12_value(&b, &cs, fl, fg, vp).unwrap());
        prop_assert_eq!(thm31_value(&a, &cs, vp).unwrap(), thm31_value(&b, &cs, vp).unwrap());
    }

    #[test]
    fn lhs_nondecreasing_in_functionals((re, im) in off_axis(), m in 0.0..5.0f64, cs in consts(),
                                        x in 0.0..10.0f64, dx in 0.0..10.0f64, f in 0.0..5.0f64) {
        let pt = SpectralPoint::new(c(re, im), m).unwrap();
        prop_assert!(thm11_value(&pt, 1.2, &cs, x + dx).unwrap() >= thm11_value(&pt, 1.2, &cs, x).unwrap());
        prop_assert!(thm31_value(&pt, &cs, x + dx).unwrap() >= thm31_value(&pt, &cs, x).unwrap());
        let base = thm12_value(&pt, &cs, x, f, f).unwrap();
        prop_assert!(thm12_value(&pt, &cs, x + dx, f, f).unwrap() >= base);
        prop_assert!(thm12_value(&pt, &cs, x, f + dx, f).unwrap() >= base);
        prop_assert!(thm12_value(&pt, &cs, x, f, f + dx).unwrap() >= base);
    }

    #[test]
    fn m0_reduction_is_exact((re, im) in off_axis(), p in 1.01..1.33f64, cs in consts(), vp in 0.0..10.0f64) {
        let k = c(re, im);
        let pt = SpectralPoint::new(k, 0.0).unwrap();
        prop_assert_eq!(bracket(&pt), 3.0);
        prop_assert_eq!(thm11_value(&pt, p, &cs, vp).unwrap(), cs.c_p * vp / k.norm().powf(p - 1.0) * 3f64.powf(p));
        prop_assert_eq!(thm31_value(&pt, &cs, vp).unwrap(), 0.25 * vp);
    }

    #[test]
    fn radius_bound_inverts_thm11(p in 1.01..1.33f64, cs in consts(), vp in 0.01..10.0f64, arg in 0.01..3.1f64) {
        let r = m0_radius_bound(p, &cs, vp).unwrap();
        let pt = SpectralPoint::new(c(r * arg.cos(), r * arg.sin()), 0.0).unwrap();
        let v = thm11_value(&pt, p, &cs, vp).unwrap();
        prop_assert!((v - 1.0).abs() < 1e-12, "{v}");
    }
}

#[test]
fn zero_functionals_give_zero() {
    let pt = SpectralPoint::new(c(0.4, 1.3), 1.0).unwrap();
    let cs = TheoremConstants::default();
    assert_eq!(thm11_value(&pt, 1.2, &cs, 0.0).unwrap(), 0.0);
    assert_eq!(thm12_value(&pt, &cs, 0.0, 0.0, 0.0).unwrap(), 0.0);
    assert_eq!(thm31_value(&pt, &cs, 0.0).unwrap(), 0.0);
}

fn figure_window(nx: usize, ny: usize) -> Window {
    Window { re_min: -2.0, re_max: 2.0, im_min: -1.0, im_max: 1.0, nx, ny }
}

fn figure_region(vp: f64, nx: usize, ny: usize) -> bilayer_core::EnclosureRegion {
    let mut eval = Thm11Lhs { p: 1.2, consts: TheoremConstants::default(), vp_integral: vp };
    region_scan(&figure_window(nx, ny), 1.0, &mut eval).unwrap()
}

fn nearest(w: &Window, re: f64, im: f64) -> (usize, usize) {
    let i = (0..w.nx).min_by(|&a, &b| (w.re_at(a) - re).abs().total_cmp(&(w.re_at(b) - re).abs())).unwrap();
    let j = (0..w.ny).min_by(|&a, &b| (w.im_at(a) - im).abs().total_cmp(&(w.im_at(b) - im).abs())).unwrap();
    (i, j)
}

#[test]
fn figure_masks_have_two_symmetric_lobes_and_grow_with_coupling() {
    let (nx, ny) = (160, 80);
    let mut prev: Option<bilayer_core::EnclosureRegion> = None;
    for vp in [0.08, 0.12, 0.16, 0.2] {
        let r = figure_region(vp, nx, ny);
        let (count, labels) = r.components();
        assert_eq!(count, 2, "coupling {vp}");
        let (ip, jp) = nearest(&r.window, 1.0, 0.0);
        let (im, jm) = nearest(&r.window, -1.0, 0.0);
        assert!(r.admissible(ip, jp) && r.admissible(im, jm));
        assert_ne!(labels[jp * nx + ip], labels[jm * nx + im]);
        for j in 0..ny {
            for i in 0..nx {
                assert_eq!(r.admissible(i, j), r.admissible(nx - 1 - i, j), "k -> -k at ({i}, {j})");
                assert_eq!(r.admissible(i, j), r.admissible(i, ny - 1 - j), "conjugation at ({i}, {j})");
            }
        }
        if let Some(p) = &prev {
            assert!(p.mask.iter().zip(&r.mask).all(|(a, b)| !a || *b), "not monotone at {vp}");
            assert!(r.admissible_count() > p.admissible_count());
        }
        prev = Some(r);
    }
}

#[test]
fn refinement_only_flips_cells_next_to_the_level_set() {
    let coarse = figure_region(0.1, 80, 40);
    let fine = figure_region(0.1, 160, 80);
    let w = coarse.window;
    let (dx, dy) = ((w.re_max - w.re_min) / w.nx as f64, (w.im_max - w.im_min) / w.ny as f64);
    let eval = Thm11Lhs { p: 1.2, consts: TheoremConstants::default(), vp_integral: 0.1 };
    let lhs = |re: f64, im: f64| {
        use bilayer_core::enclosure::LhsEvaluator;
        eval.lhs(&SpectralPoint::new(c(re, im), 1.0).unwrap()).unwrap()
    };
    for j in 0..fine.window.ny {
        for i in 0..fine.window.nx {
            let (ci, cj) = (i / 2, j / 2);
            if fine.admissible(i, j) == coarse.admissible(ci, cj) {
                continue;
            }
            // the coarse cell must straddle LHS = 1
            let (x0, y0) = (w.re_at(ci), w.im_at(cj));
            let corners = [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
                .map(|(sx, sy)| lhs(x0 + sx * dx, y0 + sy * dy) - 1.0);
            let straddles = corners.iter().any(|v| *v >= 0.0) && corners.iter().any(|v| *v < 0.0);
            assert!(straddles, "isolated flip at fine cell ({i}, {j})");
        }
    }
}

#[test]
fn zero_potential_excludes_everything_off_the_axis() {
    let grid = GridSpec::new(16, 4.0).unwrap();
    let v = PotentialField::zero(grid);
    let mut eval = Thm12Lhs::new(&v, TheoremConstants::default());
    let r = region_scan(&figure_window(30, 20), 1.0, &mut eval).unwrap();
    assert_eq!(r.admissible_count(), 0);
    assert!(r.boundary.is_empty());
    let mut eval = Thm11Lhs { p: 1.2, consts: TheoremConstants::default(), vp_integral: 0.0 };
    assert_eq!(region_scan(&figure_window(30, 20), 1.0, &mut eval).unwrap().admissible_count(), 0);
}

#[test]
fn boundary_segments_separate_admissible_from_excluded() {
    let r = figure_region(0.1, 80, 40);
    let w = r.window;
    let (dx, dy) = ((w.re_max - w.re_min) / w.nx as f64, (w.im_max - w.im_min) / w.ny as f64);
    assert!(!r.boundary.is_empty());
    for line in &r.boundary {
        for q in line {
            // a vertex lies on an edge between two cell centres of different status
            let fi = (q[0] - w.re_min) / dx - 0.5;
            let fj = (q[1] - w.im_min) / dy - 0.5;
            let (i0, j0) = (fi.floor().max(0.0) as usize, fj.floor().max(0.0) as usize);
            let (i1, j1) = ((i0 + 1).min(w.nx - 1), (j0 + 1).min(w.ny - 1));
            let on_row = (fj - fj.round()).abs() < 1e-9;
            let (a, b) = if on_row {
                let j = fj.round() as usize;
                (r.admissible(i0, j), r.admissible(i1, j))
            } else {
                let i = fi.round() as usize;
                (r.admissible(i, j0), r.admissible(i, j1))
            };
            assert_ne!(a, b, "vertex {q:?} not between admissible and excluded cells");
        }
    }
}
