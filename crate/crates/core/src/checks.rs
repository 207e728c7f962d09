//! Invariant suite run by `cbs check`.

use crate::atom::{build_scheme, SchemeKind};
use crate::cbs::{cbs_components, cbs_spectrum, CbsOptions, GridSize, Orientation, Route};
use crate::config::{parse_config, parse_sweep};
use crate::error::Result;
use crate::liouvillian::{assemble, PhysicalParams};
use crate::run::alpha_sweep;
use crate::solver::steady_state;
use crate::spectra::{single_atom_intensity, single_atom_spectrum, uniform_grid};

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

pub const STATE_TOL: f64 = 1e-10;
pub const RECIPROCITY_TOL: f64 = 0.01;
pub const SCALING_TOL: f64 = 0.01;
pub const SUM_RULE_TOL: f64 = 0.02;
pub const GRID_TOL: f64 = 1e-6;

fn outcome(name: &'static str, r: Result<(bool, String)>) -> CheckOutcome {
    match r {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Trace, Hermiticity and positivity of steady states across schemes and drives.
pub fn steady_states() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for kind in [SchemeKind::TwoLevel, SchemeKind::VType, SchemeKind::FullJ0J1] {
        let scheme = build_scheme(kind);
        for (rabi, det, kr) in [(0.1, 0.0, 10.0), (1.4, 0.0, 12.0), (10.0, 5.0, 30.0), (100.0, 20.0, 100.0)] {
            let p = PhysicalParams::new(rabi, det).with_kr(kr).with_phases(0.7, 0.0, 2.1);
            let rho = steady_state(&assemble(&scheme, &p)?)?;
            rho.check(STATE_TOL, STATE_TOL)?;
            worst = worst
                .max((rho.matrix().trace().re - 1.0).abs())
                .max(rho.hermiticity_defect())
                .max(-rho.min_eigenvalue());
        }
    }
    Ok((worst <= STATE_TOL, format!("worst defect {worst:.2e} (tol {STATE_TOL:.0e})")))
}

/// Elastic interference equals the elastic background over the full sweep.
pub fn reciprocity() -> Result<(bool, String)> {
    let scheme = build_scheme(SchemeKind::VType);
    let s = parse_sweep("logspace(0.01, 1000, 25)").map_err(crate::Error::Config)?;
    let mut worst = 0.0f64;
    for det in [0.0, 20.0] {
        for &si in &s {
            let p = PhysicalParams::from_saturation(si, det)?;
            let c = cbs_components(&scheme, &p, &CbsOptions::default())?;
            worst = worst.max(rel(c.c2_el, c.l2_el));
        }
    }
    Ok((worst <= RECIPROCITY_TOL, format!("max |c2_el/l2_el - 1| = {worst:.2e}")))
}

/// Full solutions at kr = 100 and kr = 200 scale as `1/kr^2`.
pub fn coupling_scaling() -> Result<(bool, String)> {
    let scheme = build_scheme(SchemeKind::VType);
    let opts = CbsOptions {
        route: Route::Direct,
        ..CbsOptions::default()
    };
    let mut worst = 0.0f64;
    for (s, det) in [(0.1, 0.0), (1.0, 0.0), (5.0, 20.0), (100.0, 0.0)] {
        let p = PhysicalParams::from_saturation(s, det)?;
        let a = cbs_components(&scheme, &p.with_kr(100.0), &opts)?;
        let b = cbs_components(&scheme, &p.with_kr(200.0), &opts)?;
        worst = worst.max(rel(a.l2(), b.l2())).max(rel(a.c2(), b.c2()));
    }
    Ok((worst <= SCALING_TOL, format!("max relative deviation {worst:.2e}")))
}

/// Spectral areas plus elastic weights reproduce the total intensities.
pub fn sum_rules() -> Result<(bool, String)> {
    let omega = uniform_grid(-80.0, 80.0, 0.05)?;
    let single = build_scheme(SchemeKind::TwoLevel);
    let p1 = PhysicalParams::new(5.0, 1.0);
    let sp = single_atom_spectrum(&single, &p1, &omega)?;
    let i1 = single_atom_intensity(&single, &p1)?;
    let e1 = rel(sp.total(), i1);

    let scheme = build_scheme(SchemeKind::VType);
    let p2 = PhysicalParams::new(5.0, 0.0);
    let cbs = cbs_spectrum(&scheme, &p2, &omega, &CbsOptions::default())?;
    let c = cbs.components;
    let e2 = rel(cbs.background.total(), c.l2());
    let e3 = (cbs.interference.total() - c.c2()).abs() / c.l2();
    let worst = e1.max(e2).max(e3);
    Ok((
        worst <= SUM_RULE_TOL,
        format!("single atom {e1:.2e}, background {e2:.2e}, interference {e3:.2e}"),
    ))
}

/// Four and eight phase samples give the same components.
pub fn grid_refinement() -> Result<(bool, String)> {
    let scheme = build_scheme(SchemeKind::VType);
    let coarse = CbsOptions::default();
    let fine = CbsOptions {
        grid: GridSize::uniform(8),
        ..coarse
    };
    let mut worst = 0.0f64;
    for (s, det) in [(1e-3, 0.0), (0.5, 20.0), (1e3, 0.0)] {
        let p = PhysicalParams::from_saturation(s, det)?;
        let a = cbs_components(&scheme, &p, &coarse)?;
        let b = cbs_components(&scheme, &p, &fine)?;
        let scale = b.l2();
        for (x, y) in [(a.l2_el, b.l2_el), (a.l2_inel, b.l2_inel), (a.c2_el, b.c2_el), (a.c2_inel, b.c2_inel)] {
            worst = worst.max((x - y).abs() / scale);
        }
    }
    Ok((worst <= GRID_TOL, format!("max relative deviation {worst:.2e}")))
}

/// Identical configuration and seed give identical bytes.
pub fn determinism() -> Result<(bool, String)> {
    let cfg = parse_config("sweep_s = logspace(0.01, 100, 5)\norientation = isotropic\norientation_samples = 4\nseed = 11")?;
    let a = alpha_sweep(&cfg)?.csv;
    let b = alpha_sweep(&cfg)?.csv;
    let scheme = build_scheme(SchemeKind::VType);
    let opts = CbsOptions {
        orientation: Orientation::Isotropic { samples: 4, seed: 11 },
        ..CbsOptions::default()
    };
    let p = PhysicalParams::from_saturation(0.3, 2.0)?;
    let x = cbs_components(&scheme, &p, &opts)?;
    let y = cbs_components(&scheme, &p, &opts)?;
    let same = a == b && x.alpha.to_bits() == y.alpha.to_bits();
    Ok((same, format!("{} bytes compared", a.len())))
}

pub fn run_checks() -> Vec<CheckOutcome> {
    vec![
        outcome("steady_state", steady_states()),
        outcome("reciprocity", reciprocity()),
        outcome("coupling_scaling", coupling_scaling()),
        outcome("sum_rules", sum_rules()),
        outcome("grid_refinement", grid_refinement()),
        outcome("determinism", determinism()),
    ]
}
