//! Dense complex linear algebra on small operator spaces.
//!
//! Everything here works on `nalgebra` dense matrices with `Complex64`
//! entries. Hermitian operators are carried by [`HermOp`], which always
//! stores the exact Hermitian part of whatever it was built from.

mod calculus;
mod herm;
mod metrics;
mod spectral;
mod tensor;

pub use calculus::{dlog, mat_func_deriv, Log, ScalarFunction, Sqrt, Square};
pub use herm::HermOp;
pub use metrics::{
    dist_to_psd, fidelity, image_inclusion, inclusion_defect, rel_entropy, spectral_norm,
    trace_norm, RelEntropy,
};
pub use spectral::{eig_herm, mat_sqrt, pinv_psd, SpectralDecomp};
pub(crate) use spectral::{pinv_sqrt_psd, require_psd};
pub use tensor::{embed_left, kron, partial_trace, Factor};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Dense complex matrix, row/column indices in the standard basis.
pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Numerical tolerances. All of them are relative cutoffs; callers multiply
/// by a scale of the form `1 + ‖A‖_∞` (or `λ_max` for rank decisions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity defects.
    pub herm: f64,
    /// Acceptable negative eigenvalues for positive semidefiniteness.
    pub psd: f64,
    /// Rank / eigenvalue-cluster cutoff.
    pub rank: f64,
    /// Generic equality-constraint residuals.
    pub num: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { herm: 1e-9, psd: 1e-8, rank: 1e-10, num: 1e-9 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> crate::Result<()> {
        for (name, v) in [("herm", self.herm), ("psd", self.psd), ("rank", self.rank), ("num", self.num)] {
            if !(0.0..1.0).contains(&v) {
                return Err(crate::Error::Schema(format!("tolerance {name}={v} outside [0, 1)")));
            }
        }
        Ok(())
    }
}

/// `d × d` identity.
pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Matrix unit `E_{j,k}` of size `d × d`.
pub fn matrix_unit(d: usize, j: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(j, k)] = ONE;
    m
}

/// Frobenius inner product `⟨A, B⟩ = Tr(A† B)`.
pub fn inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
