//! Atomic level schemes and their dipole operators.
//!
//! Levels are labelled after the J=0 -> J=1 transition of a strontium-like
//! atom: `|1>` is the ground state, `|2>`, `|3>`, `|4>` are the excited
//! sublevels reached by sigma-minus, pi and sigma-plus light respectively.
//! Two-atom operators live on `H_1 (x) H_2` with atom 1 as the left factor.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Circular or linear polarization of a dipole transition, relative to the
/// laser propagation axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarization {
    SigmaPlus,
    SigmaMinus,
    Pi,
}

impl Polarization {
    /// Magnetic quantum number carried by the transition.
    pub fn q(self) -> i32 {
        match self {
            Polarization::SigmaPlus => 1,
            Polarization::SigmaMinus => -1,
            Polarization::Pi => 0,
        }
    }

    /// Spherical unit vector `e_q` in Cartesian components.
    pub fn unit_vector(self) -> [C64; 3] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Polarization::SigmaPlus => [C64::new(-h, 0.0), C64::new(0.0, -h), ZERO],
            Polarization::SigmaMinus => [C64::new(h, 0.0), C64::new(0.0, -h), ZERO],
            Polarization::Pi => [ZERO, ZERO, ONE],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub label: String,
    /// Bare energy offset in units of gamma, excluding the laser detuning.
    pub energy_offset: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transition {
    pub lower: usize,
    pub upper: usize,
    pub polarization: Polarization,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    TwoLevel,
    VType,
    FullJ0J1,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::TwoLevel => "two_level",
            SchemeKind::VType => "v_type",
            SchemeKind::FullJ0J1 => "full_j0_j1",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "two_level" => Ok(SchemeKind::TwoLevel),
            "v_type" => Ok(SchemeKind::VType),
            "full_j0_j1" => Ok(SchemeKind::FullJ0J1),
            other => Err(Error::Config(format!(
                "unknown level scheme `{other}` (expected two_level, v_type or full_j0_j1)"
            ))),
        }
    }
}

/// Internal structure of a single atom.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelScheme {
    kind: Option<SchemeKind>,
    levels: Vec<Level>,
    transitions: Vec<Transition>,
}

impl LevelScheme {
    pub fn new(levels: Vec<Level>, transitions: Vec<Transition>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Config("level scheme has no levels".into()));
        }
        for (i, a) in levels.iter().enumerate() {
            if levels[..i].iter().any(|b| b.label == a.label) {
                return Err(Error::Config(format!("duplicate level label `{}`", a.label)));
            }
        }
        for t in &transitions {
            if t.lower >= levels.len() || t.upper >= levels.len() {
                return Err(Error::Config(format!(
                    "transition {}->{} references a missing level",
                    t.lower, t.upper
                )));
            }
            if t.lower == t.upper {
                return Err(Error::Config("transition connects a level to itself".into()));
            }
        }
        Ok(Self {
            kind: None,
            levels,
            transitions,
        })
    }

    pub fn kind(&self) -> Option<SchemeKind> {
        self.kind
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Hilbert-space dimension of one atom.
    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// Levels that appear as the upper end of some transition.
    pub fn excited_levels(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.transitions.iter().map(|t| t.upper).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn find(&self, pol: Polarization) -> Option<usize> {
        self.transitions.iter().position(|t| t.polarization == pol)
    }

    /// The laser-driven sigma-plus transition.
    pub fn driven_transition(&self) -> Option<usize> {
        self.find(Polarization::SigmaPlus)
    }

    /// The sigma-minus transition observed in the helicity-preserving channel.
    pub fn detected_transition(&self) -> Option<usize> {
        self.find(Polarization::SigmaMinus)
    }

    pub fn level_index(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.label == label)
    }
}

fn level(label: &str) -> Level {
    Level {
        label: label.to_string(),
        energy_offset: 0.0,
    }
}

/// Builds one of the predefined level schemes.
pub fn build_scheme(kind: SchemeKind) -> LevelScheme {
    use Polarization::*;
    let (levels, transitions) = match kind {
        SchemeKind::TwoLevel => (
            vec![level("1"), level("4")],
            vec![Transition { lower: 0, upper: 1, polarization: SigmaPlus }],
        ),
        SchemeKind::VType => (
            vec![level("1"), level("2"), level("4")],
            vec![
                Transition { lower: 0, upper: 2, polarization: SigmaPlus },
                Transition { lower: 0, upper: 1, polarization: SigmaMinus },
            ],
        ),
        SchemeKind::FullJ0J1 => (
            vec![level("1"), level("2"), level("3"), level("4")],
            vec![
                Transition { lower: 0, upper: 3, polarization: SigmaPlus },
                Transition { lower: 0, upper: 1, polarization: SigmaMinus },
                Transition { lower: 0, upper: 2, polarization: Pi },
            ],
        ),
    };
    let mut scheme = LevelScheme::new(levels, transitions).expect("predefined schemes are valid");
    scheme.kind = Some(kind);
    scheme
}

/// Dense operator on the Hilbert space of one atom or of the atom pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    atoms: usize,
    site_dim: usize,
    matrix: CMatrix,
}

impl Operator {
    pub fn from_matrix(atoms: usize, site_dim: usize, matrix: CMatrix) -> Result<Self> {
        let dim = site_dim.pow(atoms as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self {
            atoms,
            site_dim,
            matrix,
        })
    }

    pub fn identity(atoms: usize, site_dim: usize) -> Self {
        let dim = site_dim.pow(atoms as u32);
        Self {
            atoms,
            site_dim,
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(atoms: usize, site_dim: usize) -> Self {
        let dim = site_dim.pow(atoms as u32);
        Self {
            atoms,
            site_dim,
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            ..*self
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            matrix: &self.matrix * factor,
            ..*self
        }
    }

    pub fn mul(&self, other: &Operator) -> Self {
        assert_eq!(self.dim(), other.dim(), "operator dimensions differ");
        Self {
            matrix: &self.matrix * &other.matrix,
            ..*self
        }
    }

    pub fn add(&self, other: &Operator) -> Self {
        assert_eq!(self.dim(), other.dim(), "operator dimensions differ");
        Self {
            matrix: &self.matrix + &other.matrix,
            ..*self
        }
    }

    /// Projector `|level><level|` on a single atom.
    pub fn projector(site_dim: usize, level: usize) -> Self {
        let mut m = CMatrix::zeros(site_dim, site_dim);
        m[(level, level)] = ONE;
        Self {
            atoms: 1,
            site_dim,
            matrix: m,
        }
    }
}

/// Single-atom lowering operator `|lower><upper|` of a transition.
pub fn lowering_operator(scheme: &LevelScheme, transition: usize) -> Result<Operator> {
    let t = scheme.transitions().get(transition).ok_or_else(|| {
        Error::Config(format!(
            "transition index {transition} out of range ({} transitions)",
            scheme.transitions().len()
        ))
    })?;
    let n = scheme.dim();
    let mut m = CMatrix::zeros(n, n);
    m[(t.lower, t.upper)] = ONE;
    Ok(Operator {
        atoms: 1,
        site_dim: n,
        matrix: m,
    })
}

/// Embeds a single-atom operator into the two-atom space (`atom` is 1 or 2).
pub fn embed(op: &Operator, atom: usize) -> Result<Operator> {
    if op.atoms != 1 {
        return Err(Error::Dimension {
            expected: op.site_dim,
            found: op.dim(),
        });
    }
    let id = CMatrix::identity(op.site_dim, op.site_dim);
    let matrix = match atom {
        1 => op.matrix.kronecker(&id),
        2 => id.kronecker(&op.matrix),
        other => {
            return Err(Error::Config(format!(
                "atom index must be 1 or 2, got {other}"
            )))
        }
    };
    Ok(Operator {
        atoms: 2,
        site_dim: op.site_dim,
        matrix,
    })
}

/// Tensor product of two single-atom operators.
pub fn tensor(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.atoms != 1 || b.atoms != 1 || a.site_dim != b.site_dim {
        return Err(Error::Dimension {
            expected: a.site_dim,
            found: b.dim(),
        });
    }
    Ok(Operator {
        atoms: 2,
        site_dim: a.site_dim,
        matrix: a.matrix.kronecker(&b.matrix),
    })
}
