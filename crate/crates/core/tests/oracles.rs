//! Comparisons against independent closed forms and alternative routes.

use cbs_core::atom::{build_scheme, SchemeKind};
use cbs_core::cbs::{cbs_components, detected_intensity, CbsOptions, Orientation, Route};
use cbs_core::liouvillian::{tensor_weight, PhysicalParams};
use cbs_core::atom::Polarization;

fn vtype() -> cbs_core::atom::LevelScheme {
    build_scheme(SchemeKind::VType)
}

// Weak drive: linear response of the first atom re-radiated onto the second
// atom's sigma-minus transition, summed over both scattering orders.
#[test]
fn weak_field_background_matches_linear_response() {
    for det in [0.0, 1.5, 20.0] {
        let s = 1e-6;
        let p = PhysicalParams::from_saturation(s, det).unwrap();
        let c = cbs_components(&vtype(), &p, &CbsOptions::default()).unwrap();
        let t = tensor_weight(&p, Polarization::SigmaMinus, Polarization::SigmaPlus).norm_sqr();
        let want = t * s / (1.0 + det * det);
        assert!((c.l2_el / want - 1.0).abs() < 1e-4, "det {det}: {} vs {want}", c.l2_el);
        // The inelastic share vanishes with the drive amplitude.
        assert!(c.l2_inel / c.l2_el < 10.0 * s * (1.0 + det * det), "det {det}");
        assert!((c.alpha - 2.0).abs() < 10.0 * s * (1.0 + det * det));
    }
}

#[test]
fn direct_solution_converges_to_leading_order() {
    let scheme = vtype();
    for (s, det) in [(0.3, 0.0), (2.0, 5.0), (50.0, 0.0)] {
        let p = PhysicalParams::from_saturation(s, det).unwrap();
        let lead = cbs_components(&scheme, &p, &CbsOptions::default()).unwrap();
        let direct = cbs_components(
            &scheme,
            &p.with_kr(1e4),
            &CbsOptions {
                route: Route::Direct,
                ..CbsOptions::default()
            },
        )
        .unwrap();
        assert!((direct.l2() / lead.l2() - 1.0).abs() < 1e-5, "{direct:?} vs {lead:?}");
        assert!((direct.c2() - lead.c2()).abs() < 1e-5 * lead.l2());
    }
}

// The raw detected intensity of the full model, averaged by brute force over
// a fine phase grid, reproduces the background and interference terms.
#[test]
fn brute_force_phase_average() {
    let scheme = vtype();
    let base = PhysicalParams::from_saturation(1.0, 0.0).unwrap().with_kr(2000.0);
    let g2 = (1.5f64 / 2000.0).powi(2);
    let n = 8;
    let mut ladder = 0.0;
    let mut crossed = 0.0;
    let mut baseline = 0.0;
    for ia in 0..n {
        for ip in 0..n {
            let a = std::f64::consts::TAU * ia as f64 / n as f64;
            let p = std::f64::consts::TAU * ip as f64 / n as f64;
            // Backscattering (b = -a) and a direction away from it (b = a + pi/2)
            // picks out both harmonics once averaged over a.
            let back = detected_intensity(&scheme, &base.with_phases(a, -a, p)).unwrap();
            let side = detected_intensity(&scheme, &base.with_phases(a, a + 1.0, p)).unwrap();
            crossed += back;
            ladder += side;
            baseline += detected_intensity(&scheme, &base.without_exchange().with_phases(a, -a, p)).unwrap();
        }
    }
    let m = (n * n) as f64;
    let lead = cbs_components(&scheme, &base, &CbsOptions::default()).unwrap();
    let l2 = (ladder - baseline) / m / g2;
    let total_back = (crossed - baseline) / m / g2;
    assert!((l2 / lead.l2() - 1.0).abs() < 1e-3, "{l2} vs {}", lead.l2());
    assert!((total_back / (lead.l2() + lead.c2()) - 1.0).abs() < 1e-3);
}

#[test]
fn alpha_does_not_depend_on_axis() {
    let scheme = vtype();
    let p = PhysicalParams::from_saturation(0.7, 3.0).unwrap();
    let fixed = cbs_components(&scheme, &p, &CbsOptions::default()).unwrap();
    let tilted = cbs_components(&scheme, &p.with_orientation([0.3, 0.5, 0.81f64.sqrt()]), &CbsOptions::default()).unwrap();
    let iso = cbs_components(
        &scheme,
        &p,
        &CbsOptions {
            orientation: Orientation::Isotropic { samples: 16, seed: 5 },
            ..CbsOptions::default()
        },
    )
    .unwrap();
    assert!((tilted.alpha - fixed.alpha).abs() < 1e-10);
    assert!((iso.alpha - fixed.alpha).abs() < 1e-10);
    // Along the quantization axis nothing reaches the sigma-minus transition.
    assert!(cbs_components(&scheme, &p.with_orientation([0.0, 0.0, 1.0]), &CbsOptions::default()).is_err());
}

#[test]
fn full_level_scheme_matches_v_type_at_leading_order() {
    // The pi transition is neither driven nor detected, so at second order it
    // only matters through the exchange, which cannot populate it from sigma+.
    let v = vtype();
    let full = build_scheme(SchemeKind::FullJ0J1);
    for (s, det) in [(0.05, 0.0), (3.0, 20.0)] {
        let p = PhysicalParams::from_saturation(s, det).unwrap();
        let a = cbs_components(&v, &p, &CbsOptions::default()).unwrap();
        let b = cbs_components(&full, &p, &CbsOptions::default()).unwrap();
        assert!((a.alpha - b.alpha).abs() < 1e-9, "{a:?} vs {b:?}");
    }
}
