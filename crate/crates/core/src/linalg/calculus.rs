//! Fréchet derivatives of spectral matrix functions via first divided
//! differences: `Df(A)(Z) = Σ_{j,k} h(λ_j, λ_k) Π_j Z Π_k`.

use num_complex::Complex64;

use super::{eig_herm, HermOp, SpectralDecomp, Tolerances};
use crate::{Error, Result};

/// A real scalar function lifted to Hermitian operators through the
/// spectral decomposition.
pub trait ScalarFunction {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    /// Whether the function is differentiable at `x`.
    fn in_domain(&self, x: f64) -> bool;

    /// `(f(a) - f(b)) / (a - b)`, or `f'(a)` when `a == b`.
    fn divided_difference(&self, a: f64, b: f64) -> f64 {
        if a == b {
            self.derivative(a)
        } else {
            (self.value(a) - self.value(b)) / (a - b)
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Square;

impl ScalarFunction for Square {
    fn value(&self, x: f64) -> f64 {
        x * x
    }
    fn derivative(&self, x: f64) -> f64 {
        2.0 * x
    }
    fn in_domain(&self, _x: f64) -> bool {
        true
    }
    fn divided_difference(&self, a: f64, b: f64) -> f64 {
        a + b
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sqrt;

impl ScalarFunction for Sqrt {
    fn value(&self, x: f64) -> f64 {
        x.sqrt()
    }
    fn derivative(&self, x: f64) -> f64 {
        0.5 / x.sqrt()
    }
    fn in_domain(&self, x: f64) -> bool {
        x > 0.0
    }
    fn divided_difference(&self, a: f64, b: f64) -> f64 {
        1.0 / (a.sqrt() + b.sqrt())
    }
}

/// Natural logarithm.
#[derive(Debug, Clone, Copy, Default)]
pub struct Log;

impl ScalarFunction for Log {
    fn value(&self, x: f64) -> f64 {
        x.ln()
    }
    fn derivative(&self, x: f64) -> f64 {
        1.0 / x
    }
    fn in_domain(&self, x: f64) -> bool {
        x > 0.0
    }
    fn divided_difference(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 1.0 / a;
        }
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        // log(hi/lo) / (hi - lo), computed without cancellation when hi ≈ lo
        let r = (hi - lo) / lo;
        if r < 1e-3 {
            r.ln_1p() / (hi - lo)
        } else {
            (hi.ln() - lo.ln()) / (hi - lo)
        }
    }
}

fn deriv_from_decomp<F: ScalarFunction + ?Sized>(f: &F, s: &SpectralDecomp, z: &HermOp) -> HermOp {
    let v = &s.eigenvectors;
    let mut zt = v.adjoint() * z.matrix() * v;
    let d = s.dim();
    for i in 0..d {
        for j in 0..d {
            let h = if s.cluster_of[i] == s.cluster_of[j] {
                f.derivative(s.clustered(i))
            } else {
                f.divided_difference(s.clustered(i), s.clustered(j))
            };
            zt[(i, j)] *= Complex64::new(h, 0.0);
        }
    }
    HermOp::hermitian_part(&(v * zt * v.adjoint()))
}

/// Directional derivative `Df(A)(Z)` of the spectral extension of `f`.
pub fn mat_func_deriv<F: ScalarFunction + ?Sized>(
    f: &F,
    a: &HermOp,
    z: &HermOp,
    tol: &Tolerances,
) -> Result<HermOp> {
    if a.dim() != z.dim() {
        return Err(Error::DimensionMismatch(format!("A is {}-dim, Z is {}-dim", a.dim(), z.dim())));
    }
    let s = eig_herm(a, tol)?;
    if let Some(&bad) = s.eigenvalues.iter().find(|&&l| !f.in_domain(l)) {
        return Err(Error::Domain { eigenvalue: bad });
    }
    Ok(deriv_from_decomp(f, &s, z))
}

/// `D log(Y)(Z)`; `Y` must be positive definite above the rank cutoff.
pub fn dlog(y: &HermOp, z: &HermOp, tol: &Tolerances) -> Result<HermOp> {
    if y.dim() != z.dim() {
        return Err(Error::DimensionMismatch(format!("Y is {}-dim, Z is {}-dim", y.dim(), z.dim())));
    }
    let s = eig_herm(y, tol)?;
    let cut = s.support_cutoff(tol);
    if s.min() <= cut || s.min() <= 0.0 {
        return Err(Error::SingularLog { eigenvalue: s.min() });
    }
    Ok(deriv_from_decomp(&Log, &s, z))
}
