//! Double-scattering background and interference intensities, their
//! elastic/inelastic split, the enhancement factor and the CBS spectrum.
//!
//! The configuration average is carried out as a discrete Fourier analysis
//! over three independent phases: the laser phase `a = k_L.(r2 - r1)`, the
//! detection phase `b = k.(r2 - r1)` and the phase `p` of the exchanged photon.
//! The background is the zeroth harmonic in `(a, b)`; the interference term is
//! the `e^{-i(a+b)}` harmonic, which survives at exact backscattering `b = -a`.
//!
//! Double scattering is the second-order term of the steady state (and of the
//! regression resolvent) in the exchange amplitude `G`. It is computed exactly
//! by expanding around the uncoupled, independently driven pair:
//! `L0 rho_1 = -V rho_0`, `L0 rho_2 = -V rho_1` with `V = e^{ip} X + e^{-ip} X'`.
//! Intensities are therefore reported in units of `(3 gamma / 2 kr)^2`.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::atom::{embed, lowering_operator, LevelScheme, CMatrix, C64, I, ZERO};
use crate::error::{Error, Result};
use crate::liouvillian::{
    assemble, assemble_local, exchange_parts, unvectorize, vectorize, Atoms, CouplingMode,
    ExchangeParts, PhysicalParams,
};
use crate::solver::{steady_state, DeflatedResolvent};
use crate::spectra::{SpectrumKind, SpectrumSeries};

/// Fewest samples per phase that separate harmonics of order 0, +-1 and 2.
pub const MIN_PHASE_SAMPLES: usize = 4;

/// Sizes of the laser, detection and propagation phase grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSize {
    pub a: usize,
    pub b: usize,
    pub p: usize,
}

impl GridSize {
    pub fn uniform(n: usize) -> Self {
        Self { a: n, b: n, p: n }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a < MIN_PHASE_SAMPLES || self.b < MIN_PHASE_SAMPLES || self.p < MIN_PHASE_SAMPLES {
            return Err(Error::Config(format!(
                "phase grid {}x{}x{} too small: at least {MIN_PHASE_SAMPLES} samples per phase are needed",
                self.a, self.b, self.p
            )));
        }
        Ok(())
    }
}

impl Default for GridSize {
    fn default() -> Self {
        Self::uniform(MIN_PHASE_SAMPLES)
    }
}

/// Samples of a phase-dependent quantity on the full `(a, b, p)` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    size: GridSize,
    samples: Vec<f64>,
}

pub fn phase(n: usize, k: usize) -> f64 {
    TAU * k as f64 / n as f64
}

impl PhaseGrid {
    pub fn from_fn(size: GridSize, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut samples = Vec::with_capacity(size.a * size.b * size.p);
        for ia in 0..size.a {
            for ib in 0..size.b {
                for ip in 0..size.p {
                    samples.push(f(phase(size.a, ia), phase(size.b, ib), phase(size.p, ip)));
                }
            }
        }
        Self { size, samples }
    }

    pub fn size(&self) -> GridSize {
        self.size
    }

    pub fn get(&self, ia: usize, ib: usize, ip: usize) -> f64 {
        self.samples[(ia * self.size.b + ib) * self.size.p + ip]
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

/// Phase harmonics relevant for backscattering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonics {
    /// Zeroth harmonic in `(a, b)`, averaged over `p`.
    pub ladder: f64,
    /// Coefficient of `e^{-i(a+b)}`, averaged over `p`.
    pub crossed_coefficient: C64,
}

impl Harmonics {
    /// Interference at exact backscattering: twice the real part of the
    /// reversed-path harmonic.
    pub fn crossed(&self) -> f64 {
        2.0 * self.crossed_coefficient.re
    }
}

pub fn harmonic_extract(grid: &PhaseGrid) -> Result<Harmonics> {
    let size = grid.size();
    size.validate()?;
    let mut ladder = 0.0;
    let mut crossed = ZERO;
    for ia in 0..size.a {
        for ib in 0..size.b {
            let w = C64::from_polar(1.0, phase(size.a, ia) + phase(size.b, ib));
            for ip in 0..size.p {
                let v = grid.get(ia, ib, ip);
                ladder += v;
                crossed += w * v;
            }
        }
    }
    let n = (size.a * size.b * size.p) as f64;
    Ok(Harmonics {
        ladder: ladder / n,
        crossed_coefficient: crossed / n,
    })
}

/// Background (`l2`) and interference (`c2`) intensities split into elastic and
/// inelastic parts, with the enhancement factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CbsComponents {
    pub l2_el: f64,
    pub l2_inel: f64,
    pub c2_el: f64,
    pub c2_inel: f64,
    pub alpha: f64,
}

impl CbsComponents {
    pub fn from_parts(l2_el: f64, l2_inel: f64, c2_el: f64, c2_inel: f64) -> Self {
        let l2 = l2_el + l2_inel;
        Self {
            l2_el,
            l2_inel,
            c2_el,
            c2_inel,
            alpha: (l2 + c2_el + c2_inel) / l2,
        }
    }

    pub fn l2(&self) -> f64 {
        self.l2_el + self.l2_inel
    }

    pub fn c2(&self) -> f64 {
        self.c2_el + self.c2_inel
    }
}

/// How the double-scattering contribution is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Exact second-order coefficient in the exchange amplitude.
    LeadingOrder,
    /// Full steady state at the configured `kr`, minus the uncoupled baseline,
    /// divided by `(3 gamma / 2 kr)^2`.
    Direct,
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "leading" | "leading_order" => Ok(Route::LeadingOrder),
            "direct" => Ok(Route::Direct),
            other => Err(Error::Config(format!(
                "unknown route `{other}` (expected leading or direct)"
            ))),
        }
    }
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::LeadingOrder => "leading",
            Route::Direct => "direct",
        })
    }
}

/// Orientation of the interatomic axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Orientation {
    /// Use `PhysicalParams::orientation` as given.
    Fixed,
    /// Average the intensities over isotropically distributed axes.
    Isotropic { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CbsOptions {
    pub grid: GridSize,
    pub route: Route,
    pub orientation: Orientation,
}

impl Default for CbsOptions {
    fn default() -> Self {
        Self {
            grid: GridSize::default(),
            route: Route::LeadingOrder,
            orientation: Orientation::Fixed,
        }
    }
}

/// Unit vectors drawn uniformly from the sphere.
pub fn isotropic_axes(samples: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let phi: f64 = rng.gen_range(0.0..TAU);
            let r = (1.0 - z * z).max(0.0).sqrt();
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Detected sigma-minus lowering operators of atoms 1 and 2 on the pair space.
struct Detection {
    lower: [CMatrix; 2],
    /// `vec(O^T)` so that `tr(O rho) = w . vec(rho)`.
    mean_w: [DVector<C64>; 2],
    pop_w: [[DVector<C64>; 2]; 2],
}

fn trace_weights(op: &CMatrix) -> DVector<C64> {
    vectorize(&op.transpose())
}

impl Detection {
    fn new(scheme: &LevelScheme) -> Result<Self> {
        let k = scheme.detected_transition().ok_or_else(|| {
            Error::Config("level scheme has no sigma-minus transition to detect".into())
        })?;
        let s = lowering_operator(scheme, k)?;
        let lower = [embed(&s, 1)?.into_matrix(), embed(&s, 2)?.into_matrix()];
        let mean_w = [trace_weights(&lower[0]), trace_weights(&lower[1])];
        let pop = |i: usize, j: usize| trace_weights(&(lower[i].adjoint() * &lower[j]));
        let pop_w = [[pop(0, 0), pop(0, 1)], [pop(1, 0), pop(1, 1)]];
        Ok(Self {
            lower,
            mean_w,
            pop_w,
        })
    }
}

/// Detection-phase factor `e^{i(b_i - b_j)}` with `b_1 = 0`, `b_2 = b`.
fn detection_factor(i: usize, j: usize, b: f64) -> C64 {
    let bi = if i == 0 { 0.0 } else { b };
    let bj = if j == 0 { 0.0 } else { b };
    C64::from_polar(1.0, bi - bj)
}

/// Atom-resolved normally ordered moments `<s_i^dag s_j>` and the factorized
/// products `<s_i>^* <s_j>`.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    total: [[C64; 2]; 2],
    elastic: [[C64; 2]; 2],
}

impl Moments {
    fn intensity(&self, b: f64) -> f64 {
        sum_pairs(&self.total, b)
    }

    fn elastic_intensity(&self, b: f64) -> f64 {
        sum_pairs(&self.elastic, b)
    }

    fn sub(&self, other: &Moments) -> Moments {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.total[i][j] -= other.total[i][j];
                out.elastic[i][j] -= other.elastic[i][j];
            }
        }
        out
    }

    fn scale(&self, f: f64) -> Moments {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.total[i][j] *= f;
                out.elastic[i][j] *= f;
            }
        }
        out
    }
}

fn sum_pairs(m: &[[C64; 2]; 2], b: f64) -> f64 {
    let mut acc = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            acc += detection_factor(i, j, b) * m[i][j];
        }
    }
    acc.re
}

fn moments_of(det: &Detection, rho: &DVector<C64>) -> Moments {
    let mut m = Moments::default();
    let means = [det.mean_w[0].dot(rho), det.mean_w[1].dot(rho)];
    for i in 0..2 {
        for j in 0..2 {
            m.total[i][j] = det.pop_w[i][j].dot(rho);
            m.elastic[i][j] = means[i].conj() * means[j];
        }
    }
    m
}

/// Second-order moments from the perturbative orders `rho_0, rho_1, rho_2`.
fn second_order_moments(det: &Detection, rho: &[DVector<C64>; 3]) -> Moments {
    let mut m = Moments::default();
    let means: Vec<[C64; 2]> = rho
        .iter()
        .map(|r| [det.mean_w[0].dot(r), det.mean_w[1].dot(r)])
        .collect();
    for i in 0..2 {
        for j in 0..2 {
            m.total[i][j] = det.pop_w[i][j].dot(&rho[2]);
            let mut e = ZERO;
            for k in 0..3 {
                e += means[k][i].conj() * means[2 - k][j];
            }
            m.elastic[i][j] = e;
        }
    }
    m
}

/// The uncoupled pair at one laser phase plus its perturbative orders for
/// every propagation phase of the grid.
struct Expansion {
    l0: CMatrix,
    rho0: DVector<C64>,
    /// `(V, [rho_0, rho_1, rho_2])` per propagation phase sample.
    orders: Vec<(CMatrix, [DVector<C64>; 3])>,
}

impl Expansion {
    fn new(
        scheme: &LevelScheme,
        params: &PhysicalParams,
        parts: &ExchangeParts,
        laser_phase: f64,
        n_p: usize,
    ) -> Result<Self> {
        let local = assemble_local(scheme, &PhysicalParams { laser_phase, ..*params }, Atoms::Two)?;
        let rho0 = steady_state(&local)?.vectorized();
        let l0 = local.matrix().clone();
        let k0 = DeflatedResolvent::new(&l0, &rho0, ZERO);
        let orders = (0..n_p)
            .map(|ip| {
                let e = C64::from_polar(1.0, phase(n_p, ip));
                let v = &parts.forward * e + &parts.backward * e.conj();
                let rho1 = k0.solve(&(&v * &rho0))?;
                let rho2 = k0.solve(&(&v * &rho1))?;
                Ok((v, [rho0.clone(), rho1, rho2]))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { l0, rho0, orders })
    }
}

fn check_model(scheme: &LevelScheme, params: &PhysicalParams) -> Result<()> {
    params.validate()?;
    if scheme.driven_transition().is_none() {
        return Err(Error::Config("level scheme has no sigma-plus transition to drive".into()));
    }
    if scheme.detected_transition().is_none() {
        return Err(Error::Config(
            "level scheme has no sigma-minus transition: nothing is detected in the helicity-preserving channel"
                .into(),
        ));
    }
    if params.coupling == CouplingMode::Scalar {
        return Err(Error::Config(
            "scalar coupling never converts sigma-plus into sigma-minus light; use vector coupling".into(),
        ));
    }
    Ok(())
}

/// Normally ordered detected intensity `<D^- D^+>` of the full steady state,
/// with `D^+ = s_1 + e^{-ib} s_2` built from the sigma-minus lowering operators.
pub fn detected_intensity(scheme: &LevelScheme, params: &PhysicalParams) -> Result<f64> {
    let det = Detection::new(scheme)?;
    let l = assemble(scheme, params)?;
    let rho = steady_state(&l)?;
    let d = &det.lower[0] + &det.lower[1] * C64::from_polar(1.0, -params.detection_phase);
    Ok(rho.expect(&(d.adjoint() * d)).re)
}

/// Second-order moments sampled over `(a, p)` for one orientation.
fn moment_table(
    scheme: &LevelScheme,
    params: &PhysicalParams,
    options: &CbsOptions,
) -> Result<Vec<Vec<Moments>>> {
    let det = Detection::new(scheme)?;
    let parts = exchange_parts(scheme, params)?;
    let size = options.grid;
    (0..size.a)
        .map(|ia| {
            let a = phase(size.a, ia);
            match options.route {
                Route::LeadingOrder => {
                    let exp = Expansion::new(scheme, params, &parts, a, size.p)?;
                    Ok(exp
                        .orders
                        .iter()
                        .map(|(_, rho)| second_order_moments(&det, rho))
                        .collect())
                }
                Route::Direct => {
                    if params.kr.is_infinite() {
                        return Err(Error::Config("direct route needs a finite kr".into()));
                    }
                    let local =
                        assemble_local(scheme, &PhysicalParams { laser_phase: a, ..*params }, Atoms::Two)?;
                    let base = moments_of(&det, &steady_state(&local)?.vectorized());
                    let g = 1.5 / params.kr;
                    (0..size.p)
                        .map(|ip| {
                            let e = C64::from_polar(g, phase(size.p, ip));
                            let full = local.matrix() + &parts.forward * e + &parts.backward * e.conj();
                            let l = crate::liouvillian::Liouvillian::from_matrix(local.hilbert_dim(), full)?;
                            let rho = steady_state(&l)?.vectorized();
                            Ok(moments_of(&det, &rho).sub(&base).scale(1.0 / (g * g)))
                        })
                        .collect()
                }
            }
        })
        .collect()
}

fn components_from_table(table: &[Vec<Moments>], size: GridSize) -> Result<CbsComponents> {
    let total = PhaseGrid::from_fn(size, |a, b, p| {
        let (ia, ip) = (index_of(a, size.a), index_of(p, size.p));
        table[ia][ip].intensity(b)
    });
    let elastic = PhaseGrid::from_fn(size, |a, b, p| {
        let (ia, ip) = (index_of(a, size.a), index_of(p, size.p));
        table[ia][ip].elastic_intensity(b)
    });
    let t = harmonic_extract(&total)?;
    let e = harmonic_extract(&elastic)?;
    Ok(CbsComponents::from_parts(
        e.ladder,
        t.ladder - e.ladder,
        e.crossed(),
        t.crossed() - e.crossed(),
    ))
}

fn index_of(phase_value: f64, n: usize) -> usize {
    ((phase_value / TAU * n as f64).round() as usize) % n
}

/// Raw phase-resolved double-scattering intensities (total and elastic).
pub fn intensity_grids(
    scheme: &LevelScheme,
    params: &PhysicalParams,
    options: &CbsOptions,
) -> Result<(PhaseGrid, PhaseGrid)> {
    check_model(scheme, params)?;
    options.grid.validate()?;
    let size = options.grid;
    let table = moment_table(scheme, params, options)?;
    let at = |a: f64, p: f64| &table[index_of(a, size.a)][index_of(p, size.p)];
    Ok((
        PhaseGrid::from_fn(size, |a, b, p| at(a, p).intensity(b)),
        PhaseGrid::from_fn(size, |a, b, p| at(a, p).elastic_intensity(b)),
    ))
}

fn orientations(params: &PhysicalParams, options: &CbsOptions) -> Vec<[f64; 3]> {
    match options.orientation {
        Orientation::Fixed => vec![params.orientation],
        Orientation::Isotropic { samples, seed } => isotropic_axes(samples.max(1), seed),
    }
}

fn add_components(acc: &mut [f64; 4], c: &CbsComponents, w: f64) {
    acc[0] += w * c.l2_el;
    acc[1] += w * c.l2_inel;
    acc[2] += w * c.c2_el;
    acc[3] += w * c.c2_inel;
}

/// Double-scattering components and enhancement factor at one drive setting.
pub fn cbs_components(
    scheme: &LevelScheme,
    params: &PhysicalParams,
    options: &CbsOptions,
) -> Result<CbsComponents> {
    check_model(scheme, params)?;
    options.grid.validate()?;
    let axes = orientations(params, options);
    let per_axis = axes
        .par_iter()
        .map(|n| {
            let p = params.with_orientation(*n);
            let table = moment_table(scheme, &p, options)?;
            components_from_table(&table, options.grid)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = [0.0; 4];
    let w = 1.0 / per_axis.len() as f64;
    for c in &per_axis {
        add_components(&mut acc, c, w);
    }
    let out = CbsComponents::from_parts(acc[0], acc[1], acc[2], acc[3]);
    if !(out.l2() > 0.0) {
        return Err(Error::Domain(
            "no double-scattering background: the exchange never reaches the detected transition".into(),
        ));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub s: f64,
    pub rabi: f64,
    pub result: std::result::Result<CbsComponents, String>,
}

/// Enhancement factor and components over a list of saturation parameters.
///
/// `base` supplies everything except the Rabi frequency and detuning.
pub fn sweep_alpha(
    scheme: &LevelScheme,
    base: &PhysicalParams,
    detuning: f64,
    s_values: &[f64],
    options: &CbsOptions,
) -> Result<Vec<SweepPoint>> {
    if s_values.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::Domain("saturation values must be positive".into()));
    }
    if s_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("saturation values must be sorted".into()));
    }
    Ok(s_values
        .par_iter()
        .map(|&s| {
            let rabi = crate::liouvillian::rabi_for_saturation(s, detuning).unwrap_or(f64::NAN);
            let p = PhysicalParams {
                rabi,
                detuning,
                ..*base
            };
            SweepPoint {
                s,
                rabi,
                result: cbs_components(scheme, &p, options).map_err(|e| format!("s = {s}: {e}")),
            }
        })
        .collect())
}

/// Background and interference spectra of the backscattered light.
#[derive(Clone, Debug)]
pub struct CbsSpectrum {
    pub background: SpectrumSeries,
    pub interference: SpectrumSeries,
    pub components: CbsComponents,
}

impl CbsSpectrum {
    /// Spectra divided by the inelastic background area, so the background
    /// integrates to one and the interference to `c2_inel / l2_inel`.
    pub fn normalized(&self) -> CbsSpectrum {
        let f = 1.0 / self.background.inelastic_area();
        CbsSpectrum {
            background: self.background.scaled(f),
            interference: self.interference.scaled(f),
            components: self.components,
        }
    }

    pub fn area_ratio(&self) -> f64 {
        self.interference.inelastic_area() / self.background.inelastic_area()
    }

    /// Enhancement factor implied by the spectral areas and elastic weights.
    pub fn implied_alpha(&self) -> f64 {
        1.0 + self.interference.total() / self.background.total()
    }
}

/// Second-order connected correlation transforms `F_ij(omega)` for every
/// `(a, p)` of the grid.
fn spectral_table(
    det: &Detection,
    expansions: &[Expansion],
    omega: f64,
) -> Result<Vec<Vec<[[C64; 2]; 2]>>> {
    let z = -I * omega;
    expansions
        .iter()
        .map(|exp| {
            let r = DeflatedResolvent::new(&exp.l0, &exp.rho0, z);
            exp.orders
                .iter()
                .map(|(v, rho)| {
                    let mut out = [[ZERO; 2]; 2];
                    let mats: Vec<CMatrix> = rho.iter().map(unvectorize).collect();
                    for i in 0..2 {
                        let a = det.lower[i].adjoint();
                        let means: Vec<C64> =
                            mats.iter().map(|m| (&a * m).trace()).collect();
                        let mut prev: Option<DVector<C64>> = None;
                        for n in 0..3 {
                            let mut x = &mats[n] * &a;
                            for k in 0..=n {
                                x -= &mats[n - k] * means[k];
                            }
                            let mut rhs = vectorize(&x);
                            if let Some(y) = &prev {
                                rhs += v * y;
                            }
                            r.solve_in_place(&mut rhs)?;
                            prev = Some(rhs);
                        }
                        let y2 = prev.expect("three orders computed");
                        for j in 0..2 {
                            out[i][j] = det.mean_w[j].dot(&y2);
                        }
                    }
                    Ok(out)
                })
                .collect()
        })
        .collect()
}

/// Frequency-resolved background and interference of the backscattered light
/// (double scattering, leading order).
pub fn cbs_spectrum(
    scheme: &LevelScheme,
    params: &PhysicalParams,
    omega: &[f64],
    options: &CbsOptions,
) -> Result<CbsSpectrum> {
    check_model(scheme, params)?;
    options.grid.validate()?;
    if omega.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("frequency grid must be strictly increasing".into()));
    }
    let leading = CbsOptions {
        route: Route::LeadingOrder,
        orientation: Orientation::Fixed,
        ..*options
    };
    let components = cbs_components(scheme, params, &leading)?;
    let det = Detection::new(scheme)?;
    let parts = exchange_parts(scheme, params)?;
    let size = options.grid;
    let expansions = (0..size.a)
        .map(|ia| Expansion::new(scheme, params, &parts, phase(size.a, ia), size.p))
        .collect::<Result<Vec<_>>>()?;

    let per_omega = omega
        .par_iter()
        .map(|&w| {
            let table = spectral_table(&det, &expansions, w)?;
            let grid = PhaseGrid::from_fn(size, |a, b, p| {
                let f = &table[index_of(a, size.a)][index_of(p, size.p)];
                sum_pairs(f, b) / PI
            });
            let h = harmonic_extract(&grid)?;
            Ok((h.ladder, h.crossed()))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;

    let (bg, inter): (Vec<f64>, Vec<f64>) = per_omega.into_iter().unzip();
    Ok(CbsSpectrum {
        background: SpectrumSeries {
            omega: omega.to_vec(),
            density: bg,
            elastic_weight: components.l2_el,
            kind: SpectrumKind::Background,
        },
        interference: SpectrumSeries {
            omega: omega.to_vec(),
            density: inter,
            elastic_weight: components.c2_el,
            kind: SpectrumKind::Interference,
        },
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{build_scheme, SchemeKind};

    #[test]
    fn constant_grid_has_no_interference() {
        let g = PhaseGrid::from_fn(GridSize::uniform(4), |_, _, _| 3.5);
        let h = harmonic_extract(&g).unwrap();
        assert!((h.ladder - 3.5).abs() < 1e-15);
        assert!(h.crossed().abs() < 1e-15);
    }

    #[test]
    fn planted_harmonic_recovered() {
        let g = PhaseGrid::from_fn(GridSize::uniform(4), |a, b, _| 1.0 + (a + b).cos());
        let h = harmonic_extract(&g).unwrap();
        assert!((h.ladder - 1.0).abs() < 1e-15);
        assert!((h.crossed() - 1.0).abs() < 1e-15);
        // The co-propagating combination a - b and p harmonics are rejected.
        let g = PhaseGrid::from_fn(GridSize::uniform(4), |a, b, p| {
            2.0 + 0.3 * (a - b).cos() + 0.7 * (2.0 * p).sin() + 0.5 * (a + b + 2.0 * p).cos()
        });
        let h = harmonic_extract(&g).unwrap();
        assert!((h.ladder - 2.0).abs() < 1e-15);
        assert!(h.crossed().abs() < 1e-15);
    }

    #[test]
    fn small_grid_rejected() {
        let g = PhaseGrid::from_fn(GridSize { a: 4, b: 3, p: 4 }, |_, _, _| 1.0);
        assert!(matches!(harmonic_extract(&g), Err(Error::Config(_))));
    }

    #[test]
    fn detected_intensity_vanishes_without_exchange() {
        let s = build_scheme(SchemeKind::VType);
        let p = PhysicalParams::new(3.0, 0.0).without_exchange().with_phases(1.0, 2.0, 0.5);
        assert!(detected_intensity(&s, &p).unwrap().abs() < 1e-14);
    }

    #[test]
    fn detected_intensity_is_non_negative() {
        let s = build_scheme(SchemeKind::VType);
        for (a, b, p) in [(0.0, 0.0, 0.0), (1.0, 2.0, 3.0), (4.0, 0.3, 5.5), (3.1, 3.1, 1.2)] {
            let params = PhysicalParams::new(2.0, 1.0).with_kr(10.0).with_phases(a, b, p);
            let i = detected_intensity(&s, &params).unwrap();
            assert!(i >= 0.0 && i.is_finite());
        }
    }

    #[test]
    fn scalar_coupling_and_two_level_are_rejected() {
        let p = PhysicalParams::new(1.0, 0.0);
        let v = build_scheme(SchemeKind::VType);
        let scalar = p.with_coupling(CouplingMode::Scalar);
        assert!(matches!(cbs_components(&v, &scalar, &CbsOptions::default()), Err(Error::Config(_))));
        let two = build_scheme(SchemeKind::TwoLevel);
        assert!(matches!(cbs_components(&two, &p, &CbsOptions::default()), Err(Error::Config(_))));
        assert!(matches!(detected_intensity(&two, &p), Err(Error::Config(_))));
    }

    #[test]
    fn isotropic_axes_are_unit_and_seeded() {
        let a = isotropic_axes(16, 7);
        let b = isotropic_axes(16, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|n| ((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) - 1.0).abs() < 1e-12));
        assert_ne!(a, isotropic_axes(16, 8));
    }

    #[test]
    fn sweep_rejects_unsorted_or_nonpositive() {
        let s = build_scheme(SchemeKind::VType);
        let base = PhysicalParams::default();
        let o = CbsOptions::default();
        assert!(sweep_alpha(&s, &base, 0.0, &[0.1, 0.05], &o).is_err());
        assert!(sweep_alpha(&s, &base, 0.0, &[0.0, 0.05], &o).is_err());
    }
}
