use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;
use num_complex::Complex64;

use super::{all_finite, spectral_norm, CMatrix, Tolerances};
use crate::{Error, Result};

/// Hermitian operator on `C^dim`.
///
/// The stored matrix is always `(A + A†)/2` of the constructor input, so
/// downstream eigensolvers see an exactly Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermOp {
    mat: CMatrix,
}

impl HermOp {
    /// Hermitian part of a square matrix. Panics if `m` is not square.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        assert!(m.is_square(), "Hermitian part of a {}x{} matrix", m.nrows(), m.ncols());
        Self { mat: (m + m.adjoint()) * Complex64::new(0.5, 0.0) }
    }

    /// Checked constructor: the input must be square, finite, and Hermitian
    /// up to `tol.herm · (1 + ‖m‖_∞)`.
    pub fn try_new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !all_finite(&m) {
            return Err(Error::Schema("matrix has non-finite entries".into()));
        }
        let defect = spectral_norm(&(&m - m.adjoint()));
        let scale = 1.0 + spectral_norm(&m);
        if defect > tol.herm * scale {
            return Err(Error::Schema(format!("matrix is not Hermitian (defect {defect:e})")));
        }
        Ok(Self::hermitian_part(&m))
    }

    pub fn zeros(d: usize) -> Self {
        Self { mat: CMatrix::zeros(d, d) }
    }

    pub fn identity(d: usize) -> Self {
        Self { mat: CMatrix::identity(d, d) }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut mat = CMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            mat[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { mat }
    }

    /// Rank-one projector-like operator `ψψ†` (not normalised).
    pub fn outer(psi: &DVector<Complex64>) -> Self {
        Self::hermitian_part(&(psi * psi.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// Real Frobenius inner product `Re Tr(A B)`.
    pub fn inner(&self, other: &HermOp) -> f64 {
        super::inner(&self.mat, &other.mat).re
    }

    /// Standard-basis transpose, equal to the entrywise conjugate.
    pub fn transpose(&self) -> Self {
        Self { mat: self.mat.transpose() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { mat: &self.mat * Complex64::new(s, 0.0) }
    }

    /// `B† A B` for a (possibly rectangular) `B`.
    pub fn congruence(&self, b: &CMatrix) -> Self {
        Self::hermitian_part(&(b.adjoint() * &self.mat * b))
    }

    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.mat)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }
}

impl Add for &HermOp {
    type Output = HermOp;
    fn add(self, rhs: &HermOp) -> HermOp {
        HermOp { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &HermOp {
    type Output = HermOp;
    fn sub(self, rhs: &HermOp) -> HermOp {
        HermOp { mat: &self.mat - &rhs.mat }
    }
}

impl Neg for &HermOp {
    type Output = HermOp;
    fn neg(self) -> HermOp {
        HermOp { mat: -&self.mat }
    }
}

impl Mul<f64> for &HermOp {
    type Output = HermOp;
    fn mul(self, rhs: f64) -> HermOp {
        self.scale(rhs)
    }
}

impl Add for HermOp {
    type Output = HermOp;
    fn add(self, rhs: HermOp) -> HermOp {
        &self + &rhs
    }
}

impl Sub for HermOp {
    type Output = HermOp;
    fn sub(self, rhs: HermOp) -> HermOp {
        &self - &rhs
    }
}
