//! Generator of the two-atom master equation.
//!
//! Density operators are vectorized column-major (`vec(rho)[i + n*j] = rho[i, j]`),
//! so `a * rho * b` acts as `b^T (x) a` on the vector. All frequencies are in
//! units of gamma and the frame rotates at the laser frequency.

use std::f64::consts::TAU;

use nalgebra::DVector;

use crate::atom::{
    embed, lowering_operator, LevelScheme, Operator, Polarization, CMatrix, C64, I, ONE, ZERO,
};
use crate::error::{Error, Result};

/// Smallest admissible `k r` (far-field, weak-coupling regime).
pub const MIN_KR: f64 = 10.0;

/// How the exchanged photon's polarization couples the two atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingMode {
    /// Transition q of one atom couples only to the same q of the other, unit weight.
    Scalar,
    /// Transverse projector `e_q^* . (1 - n n^T) . e_q'` along the interatomic axis.
    Vector,
}

impl std::str::FromStr for CouplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scalar" => Ok(CouplingMode::Scalar),
            "vector" => Ok(CouplingMode::Vector),
            other => Err(Error::Config(format!(
                "unknown coupling mode `{other}` (expected scalar or vector)"
            ))),
        }
    }
}

impl std::fmt::Display for CouplingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CouplingMode::Scalar => "scalar",
            CouplingMode::Vector => "vector",
        })
    }
}

/// Physical parameters of the driven atom pair, in units of gamma.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub rabi: f64,
    pub detuning: f64,
    /// Half the excited-state population decay rate; the unit of frequency.
    pub gamma: f64,
    /// Interatomic distance times wavenumber. `f64::INFINITY` switches the exchange off.
    pub kr: f64,
    /// `k_L . (r2 - r1)`.
    pub laser_phase: f64,
    /// `k . (r2 - r1)`.
    pub detection_phase: f64,
    /// Phase of the exchanged photon, `e^{i p}`.
    pub propagation_phase: f64,
    /// Unit vector along the interatomic axis (vector mode only).
    pub orientation: [f64; 3],
    pub coupling: CouplingMode,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            rabi: 0.0,
            detuning: 0.0,
            gamma: 1.0,
            kr: 100.0,
            laser_phase: 0.0,
            detection_phase: 0.0,
            propagation_phase: 0.0,
            orientation: [1.0, 0.0, 0.0],
            coupling: CouplingMode::Vector,
        }
    }
}

fn reduce_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl PhysicalParams {
    pub fn new(rabi: f64, detuning: f64) -> Self {
        Self {
            rabi,
            detuning,
            ..Self::default()
        }
    }

    /// Parameters with the Rabi frequency chosen to reach saturation `s`.
    pub fn from_saturation(s: f64, detuning: f64) -> Result<Self> {
        Ok(Self::new(rabi_for_saturation(s, detuning)?, detuning))
    }

    pub fn with_kr(mut self, kr: f64) -> Self {
        self.kr = kr;
        self
    }

    pub fn without_exchange(self) -> Self {
        self.with_kr(f64::INFINITY)
    }

    pub fn with_phases(mut self, laser: f64, detection: f64, propagation: f64) -> Self {
        self.laser_phase = reduce_phase(laser);
        self.detection_phase = reduce_phase(detection);
        self.propagation_phase = reduce_phase(propagation);
        self
    }

    pub fn with_coupling(mut self, coupling: CouplingMode) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_orientation(mut self, n: [f64; 3]) -> Self {
        self.orientation = n;
        self
    }

    pub fn saturation(&self) -> f64 {
        saturation(self.rabi, self.detuning)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi.is_finite() && self.rabi >= 0.0) {
            return Err(Error::Domain(format!("Rabi frequency must be >= 0, got {}", self.rabi)));
        }
        if !self.detuning.is_finite() {
            return Err(Error::Domain("detuning must be finite".into()));
        }
        if self.gamma != 1.0 {
            return Err(Error::Domain("gamma is the frequency unit and must equal 1".into()));
        }
        if self.kr.is_nan() || self.kr < MIN_KR {
            return Err(Error::Domain(format!(
                "kr = {} is outside the weak-localization regime kr >> 1 (kr >= {MIN_KR} required)",
                self.kr
            )));
        }
        let norm = self.orientation.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Domain("orientation must be a non-zero vector".into()));
        }
        Ok(())
    }

    /// Complex far-field exchange amplitude `G = (3 gamma / 2) e^{i p} / kr`.
    pub fn exchange_amplitude(&self) -> C64 {
        if self.kr.is_infinite() {
            return ZERO;
        }
        C64::from_polar(1.5 * self.gamma / self.kr, self.propagation_phase)
    }

    fn unit_orientation(&self) -> [f64; 3] {
        let n = self.orientation;
        let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        [n[0] / norm, n[1] / norm, n[2] / norm]
    }
}

/// Saturation parameter `s = Omega^2 / (2 (gamma^2 + delta^2))` with gamma = 1.
pub fn saturation(rabi: f64, detuning: f64) -> f64 {
    rabi * rabi / (2.0 * (1.0 + detuning * detuning))
}

/// Inverse of [`saturation`].
pub fn rabi_for_saturation(s: f64, detuning: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("saturation must be >= 0, got {s}")));
    }
    Ok((2.0 * s * (1.0 + detuning * detuning)).sqrt())
}

/// Polarization weight of the exchanged photon between transitions `q` and `q'`.
pub fn tensor_weight(params: &PhysicalParams, q: Polarization, q2: Polarization) -> C64 {
    match params.coupling {
        CouplingMode::Scalar => {
            if q == q2 {
                ONE
            } else {
                ZERO
            }
        }
        CouplingMode::Vector => {
            let n = params.unit_orientation();
            let (u, v) = (q.unit_vector(), q2.unit_vector());
            let mut acc = ZERO;
            for a in 0..3 {
                for b in 0..3 {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    acc += u[a].conj() * (delta - n[a] * n[b]) * v[b];
                }
            }
            acc
        }
    }
}

// ---- superoperators ---------------------------------------------------------

pub fn vectorize(rho: &CMatrix) -> DVector<C64> {
    DVector::from_column_slice(rho.as_slice())
}

pub fn unvectorize(v: &DVector<C64>) -> CMatrix {
    let n = (v.len() as f64).sqrt().round() as usize;
    CMatrix::from_column_slice(n, n, v.as_slice())
}

/// `rho -> a rho`.
pub fn left(a: &CMatrix) -> CMatrix {
    CMatrix::identity(a.nrows(), a.nrows()).kronecker(a)
}

/// `rho -> rho b`.
pub fn right(b: &CMatrix) -> CMatrix {
    b.transpose().kronecker(&CMatrix::identity(b.nrows(), b.nrows()))
}

/// `rho -> a rho b`.
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    b.transpose().kronecker(a)
}

/// `rho -> -i [h, rho]`.
pub fn commutator_generator(h: &CMatrix) -> CMatrix {
    (left(h) - right(h)) * (-I)
}

/// `rho -> c rho c^dag - {c^dag c, rho} / 2`.
pub fn dissipator(c: &CMatrix) -> CMatrix {
    let cd = c.adjoint();
    let cdc = &cd * c;
    sandwich(c, &cd) - (left(&cdc) + right(&cdc)) * C64::new(0.5, 0.0)
}

/// Linear generator acting on vectorized density operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Liouvillian {
    hilbert_dim: usize,
    matrix: CMatrix,
}

impl Liouvillian {
    pub fn from_matrix(hilbert_dim: usize, matrix: CMatrix) -> Result<Self> {
        let d = hilbert_dim * hilbert_dim;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                found: matrix.nrows(),
            });
        }
        Ok(Self {
            hilbert_dim,
            matrix,
        })
    }

    pub fn zeros(hilbert_dim: usize) -> Self {
        let d = hilbert_dim * hilbert_dim;
        Self {
            hilbert_dim,
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    /// Liouville-space dimension.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(rho)))
    }

    pub fn add(&self, other: &Liouvillian) -> Liouvillian {
        Liouvillian {
            hilbert_dim: self.hilbert_dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn scale(&self, factor: C64) -> Liouvillian {
        Liouvillian {
            hilbert_dim: self.hilbert_dim,
            matrix: &self.matrix * factor,
        }
    }

    /// Row functional `vec(rho) -> tr(rho)`.
    pub fn trace_row(&self) -> DVector<C64> {
        trace_functional(self.hilbert_dim)
    }

    /// Largest `|tr(L(B))|` over the matrix-unit basis.
    pub fn trace_defect(&self) -> f64 {
        let n = self.hilbert_dim;
        let mut worst: f64 = 0.0;
        for col in 0..self.dim() {
            let t: C64 = (0..n).map(|i| self.matrix[(i + n * i, col)]).sum();
            worst = worst.max(t.norm());
        }
        worst
    }
}

pub fn trace_functional(n: usize) -> DVector<C64> {
    let mut v = DVector::zeros(n * n);
    for i in 0..n {
        v[i + n * i] = ONE;
    }
    v
}

/// Number of atoms a generator describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atoms {
    One,
    Two,
}

impl Atoms {
    fn count(self) -> usize {
        match self {
            Atoms::One => 1,
            Atoms::Two => 2,
        }
    }
}

fn site_operator(op: &Operator, atoms: Atoms, atom: usize) -> Result<Operator> {
    match atoms {
        Atoms::One => Ok(op.clone()),
        Atoms::Two => embed(op, atom),
    }
}

/// Single-atom drive Hamiltonian with laser phase `phase`:
/// `-delta * (excited projectors) + (Omega/2) (e^{i phase} s^dag + h.c.)` on the sigma-plus transition.
pub fn site_hamiltonian(scheme: &LevelScheme, params: &PhysicalParams, phase: f64) -> Result<Operator> {
    let driven = scheme
        .driven_transition()
        .ok_or_else(|| Error::Config("level scheme has no sigma-plus transition to drive".into()))?;
    let n = scheme.dim();
    let excited = scheme.excited_levels();
    let mut h = CMatrix::zeros(n, n);
    for (k, level) in scheme.levels().iter().enumerate() {
        let shift = if excited.contains(&k) { -params.detuning } else { 0.0 };
        h[(k, k)] = C64::new(level.energy_offset + shift, 0.0);
    }
    let lower = lowering_operator(scheme, driven)?;
    let e = C64::from_polar(0.5 * params.rabi, phase);
    h += lower.matrix().adjoint() * e + lower.matrix() * e.conj();
    Operator::from_matrix(1, n, h)
}

/// Rotating-frame drive Hamiltonian with laser phase 0 on atom 1 and
/// `laser_phase` on atom 2. Only the sigma-plus transition is driven.
pub fn drive_hamiltonian(scheme: &LevelScheme, params: &PhysicalParams, atoms: Atoms) -> Result<Operator> {
    let mut h = Operator::zeros(atoms.count(), scheme.dim());
    for atom in 1..=atoms.count() {
        let phase = if atom == 1 { 0.0 } else { params.laser_phase };
        let single = site_hamiltonian(scheme, params, phase)?;
        h = h.add(&site_operator(&single, atoms, atom)?);
    }
    Ok(h)
}

/// Spontaneous decay of every transition of every atom at population rate `2 gamma`.
pub fn decay_dissipator(scheme: &LevelScheme, atoms: Atoms) -> Result<Liouvillian> {
    let dim = scheme.dim().pow(atoms.count() as u32);
    let rate = C64::new(2.0, 0.0);
    let mut out = Liouvillian::zeros(dim);
    for atom in 1..=atoms.count() {
        for k in 0..scheme.transitions().len() {
            let c = site_operator(&lowering_operator(scheme, k)?, atoms, atom)?;
            out.matrix += dissipator(c.matrix()) * rate;
        }
    }
    Ok(out)
}

/// The exchange superoperator split by its dependence on the complex amplitude:
/// `exchange = G * forward + conj(G) * backward`.
#[derive(Clone, Debug)]
pub struct ExchangeParts {
    pub forward: CMatrix,
    pub backward: CMatrix,
}

/// Far-field photon exchange per unit amplitude `G`.
///
/// For ordered pairs of distinct atoms `(i, t)`, `(j, t')` with weight `W`:
/// `forward  += W  (s_jt' rho s_it^dag - s_it^dag s_jt' rho)` and
/// `backward += W* (s_it rho s_jt'^dag - rho s_jt'^dag s_it)`.
/// The Hermitian part of `G W` gives a coherent exchange Hamiltonian, the
/// anti-Hermitian part the cross-atom damping.
pub fn exchange_parts(scheme: &LevelScheme, params: &PhysicalParams) -> Result<ExchangeParts> {
    let n = scheme.dim();
    let d = n * n * n * n;
    let mut forward = CMatrix::zeros(d, d);
    let mut backward = CMatrix::zeros(d, d);
    let mut lowers = Vec::new();
    for atom in 1..=2 {
        for (k, t) in scheme.transitions().iter().enumerate() {
            lowers.push((atom, t.polarization, embed(&lowering_operator(scheme, k)?, atom)?));
        }
    }
    for (ai, qi, si) in &lowers {
        for (aj, qj, sj) in &lowers {
            if ai == aj {
                continue;
            }
            let w = tensor_weight(params, *qi, *qj);
            if w.norm() == 0.0 {
                continue;
            }
            let (si, sj) = (si.matrix(), sj.matrix());
            let sid = si.adjoint();
            let sjd = sj.adjoint();
            forward += (sandwich(sj, &sid) - left(&(&sid * sj))) * w;
            backward += (sandwich(si, &sjd) - right(&(&sjd * si))) * w.conj();
        }
    }
    Ok(ExchangeParts { forward, backward })
}

/// Photon-exchange contribution to the two-atom generator.
pub fn exchange_term(scheme: &LevelScheme, params: &PhysicalParams) -> Result<Liouvillian> {
    params.validate()?;
    let dim = scheme.dim() * scheme.dim();
    let g = params.exchange_amplitude();
    if g == ZERO {
        return Ok(Liouvillian::zeros(dim));
    }
    let parts = exchange_parts(scheme, params)?;
    Liouvillian::from_matrix(dim, parts.forward * g + parts.backward * g.conj())
}

/// Drive and decay only: the generator of two independent atoms.
pub fn assemble_local(scheme: &LevelScheme, params: &PhysicalParams, atoms: Atoms) -> Result<Liouvillian> {
    params.validate()?;
    let h = drive_hamiltonian(scheme, params, atoms)?;
    let mut l = decay_dissipator(scheme, atoms)?;
    l.matrix += commutator_generator(h.matrix());
    Ok(l)
}

/// Full two-atom generator `-i[H, .] + decay + exchange`.
pub fn assemble(scheme: &LevelScheme, params: &PhysicalParams) -> Result<Liouvillian> {
    let local = assemble_local(scheme, params, Atoms::Two)?;
    Ok(local.add(&exchange_term(scheme, params)?))
}

/// Generator of a single driven atom (drive phase 0, no exchange).
pub fn assemble_single(scheme: &LevelScheme, params: &PhysicalParams) -> Result<Liouvillian> {
    assemble_local(scheme, params, Atoms::One)
}
