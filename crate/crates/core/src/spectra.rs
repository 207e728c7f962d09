//! Two-time dipole correlations from the quantum regression theorem and the
//! resulting elastic and inelastic spectra.
//!
//! The one-sided transform `int_0^inf e^{i w t} <A(0) B(t)> dt` equals
//! `tr[B (-i w - L)^{-1} (rho A)]`; spectra use the connected correlator so the
//! coherent part appears only as a separate delta weight at the laser frequency.

use std::f64::consts::PI;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::atom::{lowering_operator, LevelScheme, CMatrix, C64, I};
use crate::error::{Error, Result};
use crate::liouvillian::{assemble_single, unvectorize, vectorize, Liouvillian, PhysicalParams};
use crate::solver::{resolvent_solve, steady_state, DeflatedResolvent, DensityOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Phase-insensitive intensity, non-negative.
    Background,
    /// Interference term, real but of either sign.
    Interference,
}

/// Inelastic spectral density on a frequency grid plus the elastic delta weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSeries {
    /// `omega - omega_L` in units of gamma, strictly increasing.
    pub omega: Vec<f64>,
    pub density: Vec<f64>,
    pub elastic_weight: f64,
    pub kind: SpectrumKind,
}

impl SpectrumSeries {
    /// Trapezoidal integral of the inelastic density.
    pub fn inelastic_area(&self) -> f64 {
        trapezoid(&self.omega, &self.density)
    }

    /// Inelastic area plus elastic weight.
    pub fn total(&self) -> f64 {
        self.inelastic_area() + self.elastic_weight
    }

    pub fn scaled(&self, factor: f64) -> SpectrumSeries {
        SpectrumSeries {
            omega: self.omega.clone(),
            density: self.density.iter().map(|d| d * factor).collect(),
            elastic_weight: self.elastic_weight * factor,
            kind: self.kind,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.density.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Area of the density over `[lo, hi]`.
    pub fn area_between(&self, lo: f64, hi: f64) -> f64 {
        let (w, d): (Vec<f64>, Vec<f64>) = self
            .omega
            .iter()
            .zip(&self.density)
            .filter(|(w, _)| **w >= lo && **w <= hi)
            .map(|(w, d)| (*w, *d))
            .unzip();
        trapezoid(&w, &d)
    }

    /// Value at the grid point nearest to `omega`.
    pub fn value_near(&self, omega: f64) -> f64 {
        let k = nearest_index(&self.omega, omega);
        self.density[k]
    }

    /// Indices of strict local maxima whose height exceeds `floor * max|density|`.
    pub fn local_maxima(&self, floor: f64) -> Vec<usize> {
        let cut = floor * self.max_abs();
        (1..self.density.len().saturating_sub(1))
            .filter(|&k| {
                let d = &self.density;
                d[k] > d[k - 1] && d[k] >= d[k + 1] && d[k] > cut
            })
            .collect()
    }

    /// Indices of strict local extrema of `|density|` above the floor.
    pub fn local_extrema(&self, floor: f64) -> Vec<usize> {
        let cut = floor * self.max_abs();
        let d: Vec<f64> = self.density.iter().map(|x| x.abs()).collect();
        (1..d.len().saturating_sub(1))
            .filter(|&k| d[k] > d[k - 1] && d[k] >= d[k + 1] && d[k] > cut)
            .collect()
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

pub(crate) fn nearest_index(grid: &[f64], x: f64) -> usize {
    grid.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(k, _)| k)
        .unwrap_or(0)
}

/// Uniform grid over `[min, max]` with the given spacing (endpoints included).
pub fn uniform_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(max > min) || !(step > 0.0) {
        return Err(Error::Config(format!(
            "invalid frequency grid [{min}, {max}] with step {step}"
        )));
    }
    let n = ((max - min) / step).round() as usize;
    Ok((0..=n).map(|k| min + (max - min) * k as f64 / n as f64).collect())
}

/// Adds points with spacing `step` within `halfwidth` of each center, keeping
/// the grid sorted and free of near-duplicates.
pub fn refine_grid(base: &[f64], centers: &[f64], halfwidth: f64, step: f64) -> Vec<f64> {
    let (lo, hi) = (base[0], base[base.len() - 1]);
    let mut pts: Vec<f64> = base.to_vec();
    for &c in centers {
        let n = (halfwidth / step).round() as i64;
        for k in -n..=n {
            let w = c + k as f64 * step;
            if w >= lo && w <= hi {
                pts.push(w);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    let tol = 1e-3 * step;
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for w in pts {
        if out.last().map_or(true, |&last| w - last > tol) {
            out.push(w);
        }
    }
    out
}

fn check_square(op: &CMatrix, dim: usize) -> Result<()> {
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: op.nrows(),
        });
    }
    Ok(())
}

/// `int_0^inf e^{i omega t} <A(0) B(t)>_ss dt` (full, not connected).
pub fn correlation(
    l: &Liouvillian,
    rho_ss: &DensityOperator,
    a: &CMatrix,
    b: &CMatrix,
    omega: f64,
) -> Result<C64> {
    check_square(a, l.hilbert_dim())?;
    check_square(b, l.hilbert_dim())?;
    let x = vectorize(&(rho_ss.matrix() * a));
    let y = resolvent_solve(l, &x, -omega)?;
    Ok((b * unvectorize(&y)).trace())
}

/// Regression operator for connected correlations at many frequencies.
pub struct Regression<'a> {
    l: &'a Liouvillian,
    rho: DVector<C64>,
    initial: DVector<C64>,
    closing: CMatrix,
}

impl<'a> Regression<'a> {
    pub fn new(l: &'a Liouvillian, rho_ss: &DensityOperator, a: &CMatrix, b: &CMatrix) -> Result<Self> {
        check_square(a, l.hilbert_dim())?;
        check_square(b, l.hilbert_dim())?;
        let mean_a = rho_ss.expect(a);
        let x = rho_ss.matrix() * a - rho_ss.matrix() * mean_a;
        Ok(Self {
            l,
            rho: rho_ss.vectorized(),
            initial: vectorize(&x),
            closing: b.clone(),
        })
    }

    /// `int_0^inf e^{i omega t} <dA(0) dB(t)>_ss dt` with `dX = X - <X>`.
    pub fn at(&self, omega: f64) -> Result<C64> {
        let r = DeflatedResolvent::new(self.l.matrix(), &self.rho, -I * omega);
        let y = r.solve(&self.initial)?;
        Ok((&self.closing * unvectorize(&y)).trace())
    }
}

/// Connected one-sided correlation transform.
pub fn connected_correlation(
    l: &Liouvillian,
    rho_ss: &DensityOperator,
    a: &CMatrix,
    b: &CMatrix,
    omega: f64,
) -> Result<C64> {
    Regression::new(l, rho_ss, a, b)?.at(omega)
}

/// Factorized part `<A> <B>` whose spectrum is the delta at the laser frequency.
pub fn elastic_weight(rho_ss: &DensityOperator, a: &CMatrix, b: &CMatrix) -> C64 {
    rho_ss.expect(a) * rho_ss.expect(b)
}

/// Resonance-fluorescence spectrum of the driven transition of one atom.
pub fn single_atom_spectrum(
    scheme: &LevelScheme,
    params: &PhysicalParams,
    omega: &[f64],
) -> Result<SpectrumSeries> {
    let driven = scheme
        .driven_transition()
        .ok_or_else(|| Error::Config("level scheme has no driven transition".into()))?;
    let l = assemble_single(scheme, params)?;
    let rho = steady_state(&l)?;
    let lower = lowering_operator(scheme, driven)?.into_matrix();
    let raise = lower.adjoint();
    let reg = Regression::new(&l, &rho, &raise, &lower)?;
    let density = omega
        .par_iter()
        .map(|&w| reg.at(w).map(|c| c.re / PI))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SpectrumSeries {
        omega: omega.to_vec(),
        density,
        elastic_weight: elastic_weight(&rho, &raise, &lower).re,
        kind: SpectrumKind::Background,
    })
}

/// Steady-state `<s^dag s>` of the driven transition of one atom.
pub fn single_atom_intensity(scheme: &LevelScheme, params: &PhysicalParams) -> Result<f64> {
    let driven = scheme
        .driven_transition()
        .ok_or_else(|| Error::Config("level scheme has no driven transition".into()))?;
    let l = assemble_single(scheme, params)?;
    let rho = steady_state(&l)?;
    let lower = lowering_operator(scheme, driven)?.into_matrix();
    Ok(rho.expect(&(lower.adjoint() * &lower)).re)
}
