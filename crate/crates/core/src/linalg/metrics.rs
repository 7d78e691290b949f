use super::spectral::{require_psd, SpectralDecomp};
use super::{eig_herm, CMatrix, HermOp, Tolerances};
use crate::Result;

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().fold(0.0f64, |m, &s| m.max(s))
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(a: &HermOp, tol: &Tolerances) -> Result<f64> {
    Ok(eig_herm(a, tol)?.raw_eigenvalues.iter().map(|l| l.abs()).sum())
}

fn psd_decomp(a: &HermOp, tol: &Tolerances) -> Result<SpectralDecomp> {
    let s = eig_herm(a, tol)?;
    require_psd(&s, tol)?;
    Ok(s)
}

/// `F(P, Q) = ‖√P √Q‖₁ = Tr √(√P Q √P)`.
pub fn fidelity(p: &HermOp, q: &HermOp, tol: &Tolerances) -> Result<f64> {
    let sp = psd_decomp(p, tol)?;
    let sq = psd_decomp(q, tol)?;
    let rp = sp.apply(|l| l.max(0.0).sqrt());
    let rq = sq.apply(|l| l.max(0.0).sqrt());
    Ok((rp.matrix() * rq.matrix()).singular_values().iter().sum())
}

/// Value of the quantum relative entropy. `Infinite` is a tagged sentinel
/// and never enters floating-point arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelEntropy {
    Finite(f64),
    /// `im(P) ⊄ im(Q)`; carries the relative image-inclusion defect.
    Infinite { inclusion_defect: f64 },
}

impl RelEntropy {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            RelEntropy::Finite(v) => Some(v),
            RelEntropy::Infinite { .. } => None,
        }
    }
}

fn defect_from(p: &HermOp, sq: &SpectralDecomp, tol: &Tolerances) -> f64 {
    let d = p.dim();
    let support = sq.support(tol);
    let complement = CMatrix::identity(d, d) - &support * support.adjoint();
    let leak = &complement * p.matrix() * &complement;
    let pn = p.spectral_norm();
    if pn == 0.0 {
        0.0
    } else {
        spectral_norm(&leak) / pn
    }
}

/// Relative defect `‖(1 − Π_Q) P (1 − Π_Q)‖_∞ / ‖P‖_∞` of `im(P) ⊆ im(Q)`.
pub fn inclusion_defect(p: &HermOp, q: &HermOp, tol: &Tolerances) -> Result<f64> {
    psd_decomp(p, tol)?;
    let sq = psd_decomp(q, tol)?;
    Ok(defect_from(p, &sq, tol))
}

/// `im(P) ⊆ im(Q)` up to `τ_rank`.
pub fn image_inclusion(p: &HermOp, q: &HermOp, tol: &Tolerances) -> Result<bool> {
    Ok(inclusion_defect(p, q, tol)? <= tol.rank)
}

/// `D(P‖Q) = Tr P log P − Tr P log Q` with `0 log 0 = 0`.
pub fn rel_entropy(p: &HermOp, q: &HermOp, tol: &Tolerances) -> Result<RelEntropy> {
    let sp = psd_decomp(p, tol)?;
    let sq = psd_decomp(q, tol)?;
    let defect = defect_from(p, &sq, tol);
    if defect > tol.rank {
        return Ok(RelEntropy::Infinite { inclusion_defect: defect });
    }
    let cut_p = sp.support_cutoff(tol);
    let p_log_p: f64 = sp
        .raw_eigenvalues
        .iter()
        .filter(|&&l| l > cut_p && l > 0.0)
        .map(|&l| l * l.ln())
        .sum();
    let cut_q = sq.support_cutoff(tol);
    let log_q = sq.apply(|l| if l > cut_q && l > 0.0 { l.ln() } else { 0.0 });
    Ok(RelEntropy::Finite(p_log_p - p.inner(&log_q)))
}

/// Distance-to-PSD witness for Theorem-style approximate certificates.
///
/// Returns `P = (Herm A)_+` and `ε = ‖A − P‖_∞`. For exactly Hermitian `A`
/// this is `max(0, −λ_min(A))`, the true distance; otherwise it is an upper
/// bound on `inf_{P ⪰ 0} ‖A − P‖_∞`.
pub fn dist_to_psd(a: &CMatrix, tol: &Tolerances) -> Result<(f64, HermOp)> {
    let h = HermOp::hermitian_part(a);
    let s = eig_herm(&h, tol)?;
    let pos = s.apply(|l| l.max(0.0));
    let eps = if a == &a.adjoint() {
        (-s.min()).max(0.0)
    } else {
        spectral_norm(&(a - pos.matrix()))
    };
    Ok((eps, pos))
}
