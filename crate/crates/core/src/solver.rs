//! Steady states, time evolution and resolvent solves for assembled generators.

use nalgebra::{DVector, LU};
use nalgebra::Dyn;

use crate::atom::{CMatrix, C64, I, ONE};
use crate::error::{Error, Result};
use crate::liouvillian::{trace_functional, unvectorize, vectorize, Liouvillian};

/// Singular values below this fraction of the largest count towards the nullity.
pub const NULLITY_RATIO: f64 = 1e-6;
/// Resolvent systems with a larger 1-norm condition estimate are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// A density operator (Hermitian, unit trace, positive semidefinite).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self { matrix })
    }

    /// Pure state `|k><k|` of dimension `dim`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = ONE;
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn vectorized(&self) -> DVector<C64> {
        vectorize(&self.matrix)
    }

    /// `tr(rho * op)`.
    pub fn expect(&self, op: &CMatrix) -> C64 {
        (op * &self.matrix).trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity, unit trace and positivity at the given tolerances.
    pub fn check(&self, tol: f64, positivity_tol: f64) -> Result<()> {
        let herm = self.hermiticity_defect();
        let tr = (self.matrix.trace() - ONE).norm();
        let min = self.min_eigenvalue();
        if herm > tol || tr > tol || min < -positivity_tol {
            return Err(Error::Domain(format!(
                "invalid density operator: hermiticity {herm:.2e}, trace error {tr:.2e}, min eigenvalue {min:.2e}"
            )));
        }
        Ok(())
    }
}

/// Number of singular values of `m` below `NULLITY_RATIO * max`.
pub fn nullity(m: &CMatrix) -> usize {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s <= NULLITY_RATIO * max).count()
}

/// Solves `L rho = 0` with one row replaced by the trace constraint.
pub fn steady_state(l: &Liouvillian) -> Result<DensityOperator> {
    let k = nullity(l.matrix());
    if k > 1 {
        return Err(Error::Multiplicity { nullity: k });
    }
    steady_state_unchecked(l)
}

/// Same as [`steady_state`] without the singular-value uniqueness check.
pub fn steady_state_unchecked(l: &Liouvillian) -> Result<DensityOperator> {
    let n = l.hilbert_dim();
    let mut a = l.matrix().clone();
    let tr = trace_functional(n);
    a.row_mut(0).copy_from(&tr.transpose());
    let mut rhs = DVector::zeros(l.dim());
    rhs[0] = ONE;
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or(Error::Conditioning { estimate: f64::INFINITY })?;
    let m = unvectorize(&x);
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let t = m.trace();
    DensityOperator::new(m / t)
}

/// `exp(L t) rho0` by scaling and squaring.
pub fn evolve(l: &Liouvillian, rho0: &DensityOperator, t: f64) -> Result<DensityOperator> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("evolution time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let prop = (l.matrix() * C64::new(t, 0.0)).exp();
    DensityOperator::new(unvectorize(&(prop * rho0.vectorized())))
}

/// Propagator `exp(L t)` applied to an arbitrary vectorized operator.
pub fn propagate(l: &Liouvillian, x: &DVector<C64>, t: f64) -> DVector<C64> {
    (l.matrix() * C64::new(t, 0.0)).exp() * x
}

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager's estimate of `||A^{-1}||_1` from factorizations of `A` and `A^H`.
fn inverse_one_norm(lu: &LU<C64, Dyn, Dyn>, lu_h: &LU<C64, Dyn, Dyn>, n: usize) -> Option<f64> {
    let mut x = DVector::from_element(n, C64::new(1.0 / n as f64, 0.0));
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = lu.solve(&x)?;
        estimate = y.iter().map(|z| z.norm()).sum::<f64>();
        let xi = y.map(|z| if z.norm() > 0.0 { z / z.norm() } else { ONE });
        let z = lu_h.solve(&xi)?;
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.norm()))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        if zmax <= z.dotc(&x).re {
            break;
        }
        x.fill(C64::new(0.0, 0.0));
        x[j] = ONE;
    }
    Some(estimate)
}

/// Factorized `(i omega - L)` for repeated solves at one frequency.
pub struct Resolvent {
    lu: LU<C64, Dyn, Dyn>,
    condition: f64,
}

impl Resolvent {
    pub fn new(l: &Liouvillian, omega: f64) -> Result<Self> {
        let n = l.dim();
        let a = CMatrix::identity(n, n) * (I * omega) - l.matrix();
        let norm = one_norm(&a);
        let lu_h = a.adjoint().lu();
        let lu = a.lu();
        let condition = inverse_one_norm(&lu, &lu_h, n)
            .map(|inv| inv * norm)
            .unwrap_or(f64::INFINITY);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::Conditioning { estimate: condition });
        }
        Ok(Self { lu, condition })
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, rhs: &DVector<C64>) -> Result<DVector<C64>> {
        self.lu
            .solve(rhs)
            .ok_or(Error::Conditioning { estimate: f64::INFINITY })
    }
}

/// Solves `(i omega - L) x = rhs`.
pub fn resolvent_solve(l: &Liouvillian, rhs: &DVector<C64>, omega: f64) -> Result<DVector<C64>> {
    if rhs.len() != l.dim() {
        return Err(Error::Dimension {
            expected: l.dim(),
            found: rhs.len(),
        });
    }
    Resolvent::new(l, omega)?.solve(rhs)
}

/// `(z - L + |rho_ss><1|)` factorized.
///
/// On traceless right-hand sides this returns the traceless solution of
/// `(z - L) y = x`, which stays well defined at `z = 0` because the
/// stationary direction is shifted away from the origin.
pub struct DeflatedResolvent {
    lu: LU<C64, Dyn, Dyn>,
}

impl DeflatedResolvent {
    pub fn new(l: &CMatrix, stationary: &DVector<C64>, z: C64) -> Self {
        let n = l.nrows();
        let hilbert = (n as f64).sqrt().round() as usize;
        let tr = trace_functional(hilbert);
        let mut a = CMatrix::identity(n, n) * z - l;
        a += stationary * tr.transpose();
        Self { lu: a.lu() }
    }

    pub fn solve(&self, rhs: &DVector<C64>) -> Result<DVector<C64>> {
        self.lu
            .solve(rhs)
            .ok_or(Error::Conditioning { estimate: f64::INFINITY })
    }

    pub fn solve_in_place(&self, rhs: &mut DVector<C64>) -> Result<()> {
        if self.lu.solve_mut(rhs) {
            Ok(())
        } else {
            Err(Error::Conditioning { estimate: f64::INFINITY })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{build_scheme, SchemeKind};
    use crate::liouvillian::{assemble, assemble_single, PhysicalParams};

    /// Optical Bloch steady-state excited population for a two-level atom.
    fn bloch_excited(rabi: f64, detuning: f64) -> f64 {
        let s = rabi * rabi / (2.0 * (1.0 + detuning * detuning));
        0.5 * s / (1.0 + s)
    }

    fn two_level(rabi: f64, detuning: f64) -> Liouvillian {
        assemble_single(&build_scheme(SchemeKind::TwoLevel), &PhysicalParams::new(rabi, detuning)).unwrap()
    }

    #[test]
    fn undriven_pair_relaxes_to_ground() {
        let s = build_scheme(SchemeKind::VType);
        let l = assemble(&s, &PhysicalParams::new(0.0, 0.0)).unwrap();
        let rho = steady_state(&l).unwrap();
        assert!((rho.matrix() - DensityOperator::basis_state(9, 0).matrix()).norm() < 1e-12);
    }

    #[test]
    fn two_level_steady_state_matches_bloch() {
        for &(om, d) in &[(2f64.sqrt(), 0.0), (0.3, 0.0), (5.0, 2.0), (100.0, 20.0)] {
            let rho = steady_state(&two_level(om, d)).unwrap();
            let pe = rho.matrix()[(1, 1)].re;
            assert!((pe - bloch_excited(om, d)).abs() < 1e-12, "{om} {d}");
        }
        let rho = steady_state(&two_level(2f64.sqrt(), 0.0)).unwrap();
        assert!((rho.matrix()[(1, 1)].re - 0.25).abs() < 1e-12);
        let rho = steady_state(&two_level(1e4, 0.0)).unwrap();
        assert!((rho.matrix()[(1, 1)].re - 0.5).abs() < 1e-6);
    }

    #[test]
    fn steady_state_residual_and_invariants() {
        let s = build_scheme(SchemeKind::VType);
        let p = PhysicalParams::new(7.0, 3.0).with_kr(10.0).with_phases(0.4, 0.0, 1.0);
        let l = assemble(&s, &p).unwrap();
        let rho = steady_state(&l).unwrap();
        let r = (l.matrix() * rho.vectorized()).norm();
        assert!(r <= 1e-10 * l.matrix().norm());
        rho.check(1e-10, 1e-8).unwrap();
    }

    #[test]
    fn degenerate_generator_reports_nullity() {
        let l = Liouvillian::zeros(2);
        assert!(matches!(steady_state(&l), Err(Error::Multiplicity { nullity: 4 })));
    }

    #[test]
    fn evolve_identity_and_decay_law() {
        let l = two_level(0.0, 0.0);
        let excited = DensityOperator::basis_state(2, 1);
        assert_eq!(evolve(&l, &excited, 0.0).unwrap(), excited);
        let rho = evolve(&l, &excited, 0.5).unwrap();
        assert!((rho.matrix()[(1, 1)].re - (-1.0f64).exp()).abs() < 1e-12);
        assert!(evolve(&l, &excited, -1.0).is_err());
    }

    #[test]
    fn evolve_converges_and_composes() {
        let s = build_scheme(SchemeKind::VType);
        let l = assemble(&s, &PhysicalParams::new(3.0, 1.0).with_kr(10.0).with_phases(1.0, 0.0, 2.0)).unwrap();
        let rho0 = DensityOperator::basis_state(9, 0);
        let a = evolve(&l, &evolve(&l, &rho0, 0.7).unwrap(), 1.1).unwrap();
        let b = evolve(&l, &rho0, 1.8).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-9);
        assert!((b.matrix().trace() - ONE).norm() < 1e-9);
        assert!(b.hermiticity_defect() < 1e-9);
        let late = evolve(&l, &rho0, 40.0).unwrap();
        let ss = steady_state(&l).unwrap();
        assert!((late.matrix() - ss.matrix()).norm() < 1e-8);
    }

    #[test]
    fn resolvent_trivial_cases() {
        let l = Liouvillian::zeros(2);
        let rhs = DVector::from_fn(4, |i, _| C64::new(i as f64 + 1.0, -0.5));
        let x = resolvent_solve(&l, &rhs, 1.0).unwrap();
        assert!((x - &rhs / I).norm() < 1e-14);
        let zero = DVector::zeros(4);
        assert_eq!(resolvent_solve(&l, &zero, 1.0).unwrap().norm(), 0.0);
        assert!(matches!(resolvent_solve(&l, &rhs, 0.0), Err(Error::Conditioning { .. })));
        assert!(matches!(resolvent_solve(&l, &DVector::zeros(3), 1.0), Err(Error::Dimension { .. })));
    }

    #[test]
    fn resolvent_residual() {
        let l = two_level(4.0, 1.0);
        let rhs = DVector::from_fn(4, |i, _| C64::new(1.0, i as f64));
        for &w in &[-6.0, 0.3, 2.0] {
            let x = resolvent_solve(&l, &rhs, w).unwrap();
            let a = CMatrix::identity(4, 4) * (I * w) - l.matrix();
            assert!((a * x - &rhs).norm() <= 1e-9 * rhs.norm());
        }
    }

    #[test]
    fn deflated_matches_plain_away_from_zero() {
        let l = two_level(4.0, 1.0);
        let rho = steady_state(&l).unwrap().vectorized();
        // Traceless right-hand side.
        let rhs = DVector::from_vec(vec![ONE, C64::new(0.2, 0.1), C64::new(-0.3, 0.0), -ONE]);
        let w = 1.7;
        let plain = resolvent_solve(&l, &rhs, w).unwrap();
        let defl = DeflatedResolvent::new(l.matrix(), &rho, I * w).solve(&rhs).unwrap();
        assert!((plain - &defl).norm() < 1e-12);
        let at_zero = DeflatedResolvent::new(l.matrix(), &rho, C64::new(0.0, 0.0)).solve(&rhs).unwrap();
        assert!((l.matrix() * &at_zero + &rhs).norm() < 1e-12);
        assert!((at_zero[0] + at_zero[3]).norm() < 1e-12);
    }
}
