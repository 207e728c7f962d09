//! Dressed-state picture of a strongly driven transition: predicted spectral
//! line positions and their comparison with computed spectra.

use crate::error::{Error, Result};
use crate::spectra::{refine_grid, uniform_grid, SpectrumKind, SpectrumSeries};

pub fn generalized_rabi(rabi: f64, detuning: f64) -> f64 {
    rabi.hypot(detuning)
}

/// Splitting of the two dressed states of the driven transition and the
/// weight of the bare excited state in each of them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedEnergies {
    /// Energy difference `Omega'` between the dressed states.
    pub splitting: f64,
    /// Energies of the upper and lower dressed state in the rotating frame.
    pub energies: [f64; 2],
    /// Excited-state population of the upper and lower dressed state.
    pub weights: [f64; 2],
}

/// Eigen-decomposition of `[[0, Omega/2], [Omega/2, -delta]]`.
pub fn dressed_energies(rabi: f64, detuning: f64) -> DressedEnergies {
    let w = generalized_rabi(rabi, detuning);
    let energies = [(-detuning + w) / 2.0, (-detuning - w) / 2.0];
    if w == 0.0 {
        return DressedEnergies {
            splitting: 0.0,
            energies,
            weights: [1.0, 0.0],
        };
    }
    // Excited-level amplitude squared of each eigenvector.
    let upper = 0.5 * (1.0 - detuning / w);
    DressedEnergies {
        splitting: w,
        energies,
        weights: [upper, 1.0 - upper],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeakLabel {
    MollowCentral,
    MollowPlus,
    MollowMinus,
    AutlerTownesPlus,
    AutlerTownesMinus,
    HyperRamanPlus,
    HyperRamanMinus,
}

impl PeakLabel {
    pub fn name(self) -> &'static str {
        match self {
            PeakLabel::MollowCentral => "mollow_central",
            PeakLabel::MollowPlus => "mollow_plus",
            PeakLabel::MollowMinus => "mollow_minus",
            PeakLabel::AutlerTownesPlus => "autler_townes_plus",
            PeakLabel::AutlerTownesMinus => "autler_townes_minus",
            PeakLabel::HyperRamanPlus => "hyper_raman_plus",
            PeakLabel::HyperRamanMinus => "hyper_raman_minus",
        }
    }
}

impl std::fmt::Display for PeakLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub label: PeakLabel,
    /// Offset from the laser frequency in units of gamma.
    pub position: f64,
}

/// Line positions of the double-scattering spectrum relative to the laser:
/// the Mollow triplet of the driven transition, the Autler-Townes doublet of
/// the probed transition and the hyper-Raman lines at twice the splitting.
pub fn peak_positions(rabi: f64, detuning: f64) -> Vec<Peak> {
    let w = generalized_rabi(rabi, detuning);
    let peak = |label, position| Peak { label, position };
    vec![
        peak(PeakLabel::MollowCentral, 0.0),
        peak(PeakLabel::MollowPlus, w),
        peak(PeakLabel::MollowMinus, -w),
        peak(PeakLabel::AutlerTownesPlus, (w - detuning) / 2.0),
        peak(PeakLabel::AutlerTownesMinus, -(w + detuning) / 2.0),
        peak(PeakLabel::HyperRamanPlus, 2.0 * w),
        peak(PeakLabel::HyperRamanMinus, -2.0 * w),
    ]
}

/// Spacing of the default frequency grid.
pub const GRID_STEP: f64 = 0.1;
/// Spacing of the refined windows around predicted lines.
pub const REFINED_STEP: f64 = 0.02;
/// Half width of the refined windows.
pub const REFINED_HALFWIDTH: f64 = 5.0;

/// Default frequency grid: `[-W, W]` with `W = max(2.5 Omega', 10)`, refined
/// around every predicted line.
pub fn default_grid(rabi: f64, detuning: f64) -> Result<Vec<f64>> {
    let span = (2.5 * generalized_rabi(rabi, detuning)).max(10.0);
    let base = uniform_grid(-span, span, GRID_STEP)?;
    let centers: Vec<f64> = peak_positions(rabi, detuning).iter().map(|p| p.position).collect();
    Ok(refine_grid(&base, &centers, REFINED_HALFWIDTH, REFINED_STEP))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakMatch {
    pub label: PeakLabel,
    pub predicted: f64,
    /// Position of the nearest local extremum, if any exists.
    pub found: Option<f64>,
    pub height: f64,
    pub within_tolerance: bool,
}

impl PeakMatch {
    pub fn deviation(&self) -> Option<f64> {
        self.found.map(|f| f - self.predicted)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeakReport {
    pub matches: Vec<PeakMatch>,
    /// Every local extremum above the floor, in increasing frequency.
    pub extrema: Vec<f64>,
    pub tolerance: f64,
}

impl PeakReport {
    pub fn all_matched(&self) -> bool {
        self.matches.iter().all(|m| m.within_tolerance)
    }
}

/// Relative height below which local extrema are treated as numerical ripple.
pub const EXTREMUM_FLOOR: f64 = 1e-4;

/// Checks that each predicted line has a local maximum (background) or a
/// local extremum of `|density|` (interference) within `tolerance`.
///
/// Predicted lines that fall outside the frequency grid are a coverage error.
pub fn validate_spectrum(
    spectrum: &SpectrumSeries,
    rabi: f64,
    detuning: f64,
    tolerance: f64,
) -> Result<PeakReport> {
    let (lo, hi) = match (spectrum.omega.first(), spectrum.omega.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::Config("empty spectrum".into())),
    };
    let predicted = peak_positions(rabi, detuning);
    if let Some(p) = predicted.iter().find(|p| p.position < lo || p.position > hi) {
        return Err(Error::Coverage {
            position: p.position,
            min: lo,
            max: hi,
        });
    }
    let idx = match spectrum.kind {
        SpectrumKind::Background => spectrum.local_maxima(EXTREMUM_FLOOR),
        SpectrumKind::Interference => spectrum.local_extrema(EXTREMUM_FLOOR),
    };
    let extrema: Vec<f64> = idx.iter().map(|&k| spectrum.omega[k]).collect();
    let matches = predicted
        .iter()
        .map(|p| {
            let best = idx
                .iter()
                .min_by(|&&x, &&y| {
                    (spectrum.omega[x] - p.position)
                        .abs()
                        .total_cmp(&(spectrum.omega[y] - p.position).abs())
                })
                .copied();
            let found = best.map(|k| spectrum.omega[k]);
            PeakMatch {
                label: p.label,
                predicted: p.position,
                found,
                height: best.map_or(0.0, |k| spectrum.density[k]),
                within_tolerance: found.is_some_and(|f| (f - p.position).abs() <= tolerance),
            }
        })
        .collect();
    Ok(PeakReport {
        matches,
        extrema,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonant_positions() {
        let p: Vec<f64> = peak_positions(100.0, 0.0).iter().map(|p| p.position).collect();
        assert_eq!(p, vec![0.0, 100.0, -100.0, 50.0, -50.0, 200.0, -200.0]);
    }

    #[test]
    fn detuned_positions() {
        let p = peak_positions(100.0, 20.0);
        let w = 10400f64.sqrt();
        let want = [0.0, w, -w, (w - 20.0) / 2.0, -(w + 20.0) / 2.0, 2.0 * w, -2.0 * w];
        for (p, w) in p.iter().zip(want) {
            assert!((p.position - w).abs() < 1e-12);
        }
        assert!((p[3].position - 40.99).abs() < 5e-3);
        assert!((p[4].position + 60.99).abs() < 5e-3);
        assert!((p[5].position - 203.96).abs() < 5e-3);
    }

    #[test]
    fn dressed_limits() {
        let d = dressed_energies(3.0, 0.0);
        assert_eq!(d.splitting, 3.0);
        assert!((d.weights[0] - 0.5).abs() < 1e-15 && (d.weights[1] - 0.5).abs() < 1e-15);
        let d = dressed_energies(0.0, 2.0);
        assert_eq!(d.weights, [0.0, 1.0]);
        assert_eq!(d.energies, [0.0, -2.0]);
        assert_eq!(dressed_energies(0.0, 0.0).weights, [1.0, 0.0]);
    }

    #[test]
    fn dressed_energies_diagonalize() {
        for (om, d) in [(1.0, 0.5), (100.0, 20.0), (2.0, -3.0)] {
            let e = dressed_energies(om, d);
            // Trace and determinant of the two-level Hamiltonian.
            assert!((e.energies[0] + e.energies[1] + d).abs() < 1e-12);
            assert!((e.energies[0] * e.energies[1] + om * om / 4.0).abs() < 1e-9);
            assert!((e.weights[0] + e.weights[1] - 1.0).abs() < 1e-15);
        }
    }

    fn lorentzians(omega: &[f64], centers: &[(f64, f64)]) -> Vec<f64> {
        omega
            .iter()
            .map(|w| centers.iter().map(|(c, h)| h / (1.0 + (w - c).powi(2))).sum())
            .collect()
    }

    #[test]
    fn finds_planted_peaks() {
        let omega: Vec<f64> = (0..=4000).map(|k| -250.0 + 0.125 * k as f64).collect();
        let centers: Vec<(f64, f64)> =
            peak_positions(100.0, 0.0).iter().map(|p| (p.position + 0.1, 1.0)).collect();
        let s = SpectrumSeries {
            density: lorentzians(&omega, &centers),
            omega,
            elastic_weight: 0.0,
            kind: SpectrumKind::Background,
        };
        let r = validate_spectrum(&s, 100.0, 0.0, 0.5).unwrap();
        assert!(r.all_matched());
        assert_eq!(r.extrema.len(), 7);
        let strict = validate_spectrum(&s, 100.0, 0.0, 0.01).unwrap();
        assert!(!strict.all_matched());
    }

    #[test]
    fn interference_dips_count() {
        let omega: Vec<f64> = (0..=4000).map(|k| -250.0 + 0.125 * k as f64).collect();
        let centers: Vec<(f64, f64)> = peak_positions(100.0, 0.0)
            .iter()
            .enumerate()
            .map(|(k, p)| (p.position, if k % 2 == 0 { 1.0 } else { -0.5 }))
            .collect();
        let s = SpectrumSeries {
            density: lorentzians(&omega, &centers),
            omega,
            elastic_weight: 0.0,
            kind: SpectrumKind::Interference,
        };
        assert!(validate_spectrum(&s, 100.0, 0.0, 0.5).unwrap().all_matched());
    }

    #[test]
    fn default_grid_covers_all_lines() {
        let g = default_grid(100.0, 20.0).unwrap();
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        for p in peak_positions(100.0, 20.0) {
            assert!(p.position > g[0] && p.position < g[g.len() - 1]);
            let near = g.iter().filter(|w| (**w - p.position).abs() <= 0.5).count();
            assert!(near >= 40, "{} has {near} points", p.label);
        }
        let small = default_grid(0.1, 0.0).unwrap();
        assert!((small[0] + 10.0).abs() < 1e-12);
    }

    #[test]
    fn uncovered_peak_rejected() {
        let omega: Vec<f64> = (0..=100).map(|k| -150.0 + 3.0 * k as f64).collect();
        let s = SpectrumSeries {
            density: vec![0.0; omega.len()],
            omega,
            elastic_weight: 0.0,
            kind: SpectrumKind::Background,
        };
        assert!(matches!(
            validate_spectrum(&s, 100.0, 0.0, 0.5),
            Err(Error::Coverage { .. })
        ));
    }
}
