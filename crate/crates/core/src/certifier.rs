//! Optimality certificates for channel optimization.
//!
//! Given `H ∈ ∂f(J)`, the channel `J` is optimal iff `Z = Tr_Y(HJ)` is
//! Hermitian and `H ⪰ 1_Y ⊗ Z`. When the second condition fails by `ε`
//! (distance of `H − 1_Y ⊗ Z` to the PSD cone in operator norm), `J` is
//! within `ε·d_X` of the optimum.
//!
//! For minimum-error discrimination with `H₀ = Σ_k E_{k,k} ⊗ (ρ − p_kρ_k)ᵀ`
//! and `J = Σ_k E_{k,k} ⊗ P_kᵀ` one gets `Z = ρᵀ − Rᵀ` with
//! `R = Σ_k p_k P_k ρ_k`, and the diagonal blocks of `H₀ − 1 ⊗ Herm(Z)` are
//! `(Herm(R) − p_kρ_k)ᵀ`. [`hykl_check`] evaluates exactly those quantities
//! on `X`, so its defects coincide with the Choi-side ones.

use serde::{Deserialize, Serialize};

use crate::choi::{ChoiOp, Ensemble, Povm};
use crate::linalg::{dist_to_psd, eig_herm, embed_left, partial_trace, spectral_norm, CMatrix, Factor, HermOp, Tolerances};
use crate::objectives::{support_condition, ObjectiveSpec, SubgradResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedOptimal,
    CertifiedNearOptimal,
    NotCertified,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    /// Hermitian part of `Tr_Y(HJ)`.
    pub z: HermOp,
    pub herm_defect: f64,
    /// `λ_min(H − 1_Y ⊗ Z)`.
    pub min_eig: f64,
    pub epsilon: f64,
    /// `ε · d_X`.
    pub bound: f64,
    /// `1 + ‖H‖_∞`, the factor applied to the tolerances.
    pub scale: f64,
    pub verdict: Verdict,
    /// Why the verdict was downgraded to `NotCertified`, if it was.
    pub reason: Option<String>,
}

impl Certificate {
    fn refuse(mut self, reason: String) -> Self {
        self.verdict = Verdict::NotCertified;
        self.reason = Some(reason);
        self
    }
}

/// Checks both optimality conditions for a caller-supplied `H ∈ ∂f(J)`.
/// The optimality verdict assumes `dom f` meets the relative interior of the
/// channel set, which the caller must ensure for hand-derived `H`.
pub fn certify(h: &HermOp, j: &ChoiOp, tol: &Tolerances) -> Result<Certificate> {
    if h.dim() != j.op().dim() {
        return Err(Error::DimensionMismatch(format!("H is {}-dim, J is {}-dim", h.dim(), j.op().dim())));
    }
    let (dy, dx) = (j.dim_out(), j.dim_in());
    let z_raw = partial_trace(&(h.matrix() * j.matrix()), (dy, dx), Factor::First)?;
    let herm_defect = spectral_norm(&(&z_raw - z_raw.adjoint()));
    let z = HermOp::hermitian_part(&z_raw);
    let slack = h - &HermOp::hermitian_part(&embed_left(dy, z.matrix()));
    let min_eig = eig_herm(&slack, tol)?.min();
    let (epsilon, _) = dist_to_psd(&(h.matrix() - embed_left(dy, &z_raw)), tol)?;
    let scale = 1.0 + h.spectral_norm();
    let verdict = if herm_defect <= tol.herm * scale && min_eig >= -tol.psd * scale {
        Verdict::CertifiedOptimal
    } else {
        Verdict::CertifiedNearOptimal
    };
    Ok(Certificate { z, herm_defect, min_eig, epsilon, bound: epsilon * dx as f64, scale, verdict, reason: None })
}

/// Suboptimality bound `ε · d_X`.
pub fn subopt_bound(h: &HermOp, j: &ChoiOp, tol: &Tolerances) -> Result<f64> {
    Ok(certify(h, j, tol)?.bound)
}

/// Evaluates the objective's subgradient at `j` and certifies it. State
/// transformation families additionally require `im σ ⊆ im (Φ⊗1)(ρ)`.
pub fn certify_objective(spec: &ObjectiveSpec, j: &ChoiOp, tol: &Tolerances) -> Result<(SubgradResult, Certificate)> {
    let sub = spec.evaluate(j, tol)?;
    let mut cert = certify(&sub.h, j, tol)?;
    if !sub.value.is_finite() {
        cert = cert.refuse("objective is infinite at this channel".into());
    } else if !sub.is_subgradient() {
        let why = sub.degeneracy.clone().unwrap_or_else(|| "no subgradient available".into());
        cert = cert.refuse(why);
    } else if let ObjectiveSpec::Fidelity { rho, sigma } | ObjectiveSpec::RelativeEntropy { rho, sigma } = spec {
        let defect = support_condition(rho, sigma, j, tol)?;
        if defect > tol.rank {
            cert = cert.refuse(format!("im(sigma) not contained in im(M), defect {defect:e}"));
        }
    }
    Ok((sub, cert))
}

#[derive(Debug, Clone)]
pub struct HyklReport {
    /// `Σ_k p_k P_k ρ_k`.
    pub r: CMatrix,
    pub herm_defect: f64,
    /// `λ_min(Herm(R) − p_jρ_j)` per outcome.
    pub min_eigs: Vec<f64>,
    pub scale: f64,
    pub optimal: bool,
}

impl HyklReport {
    pub fn min_eig(&self) -> f64 {
        self.min_eigs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Measurement optimality conditions `R = R*` and `R ⪰ p_jρ_j` for all `j`.
pub fn hykl_check(ens: &Ensemble, povm: &Povm, tol: &Tolerances) -> Result<HyklReport> {
    if ens.len() != povm.outcomes() || ens.dim() != povm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "ensemble has {} states on C^{}, measurement has {} outcomes on C^{}",
            ens.len(),
            ens.dim(),
            povm.outcomes(),
            povm.dim()
        )));
    }
    let d = ens.dim();
    let mut r = CMatrix::zeros(d, d);
    for ((&p, rho), e) in ens.probs().iter().zip(ens.states()).zip(povm.elements()) {
        r += e.matrix() * rho.matrix() * num_complex::Complex64::new(p, 0.0);
    }
    let herm_defect = spectral_norm(&(&r - r.adjoint()));
    let rh = HermOp::hermitian_part(&r);
    let avg = ens.average();
    let mut min_eigs = Vec::with_capacity(ens.len());
    let mut h0_norm = 0.0f64;
    for (&p, rho) in ens.probs().iter().zip(ens.states()) {
        let weighted = rho.scale(p);
        min_eigs.push(eig_herm(&(&rh - &weighted), tol)?.min());
        h0_norm = h0_norm.max((&avg - &weighted).spectral_norm());
    }
    let scale = 1.0 + h0_norm;
    let optimal = herm_defect <= tol.herm * scale && min_eigs.iter().all(|&l| l >= -tol.psd * scale);
    Ok(HyklReport { r, herm_defect, min_eigs, scale, optimal })
}

/// Lagrange dual value `Tr Z` of the linear objective `⟨H₀, ·⟩` at the dual
/// point `(Y, Z)`, or `-∞` when `H₀ ≠ Y + 1_Y ⊗ Z`.
pub fn linear_dual_value(h0: &HermOp, y: &HermOp, z: &HermOp, tol: &Tolerances) -> Result<f64> {
    if h0.dim() != y.dim() || z.dim() == 0 || !h0.dim().is_multiple_of(z.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "H0 is {}-dim, Y {}-dim, Z {}-dim",
            h0.dim(),
            y.dim(),
            z.dim()
        )));
    }
    let sy = eig_herm(y, tol)?;
    if sy.min() < -tol.psd * (1.0 + sy.spectral_norm()) {
        return Err(Error::NotPsd { min_eig: sy.min() });
    }
    let dy = h0.dim() / z.dim();
    let residual = h0.matrix() - y.matrix() - embed_left(dy, z.matrix());
    if spectral_norm(&residual) <= tol.num * (1.0 + h0.spectral_norm()) {
        Ok(z.trace())
    } else {
        Ok(f64::NEG_INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choi::{q2c_choi, BipartiteState};
    use crate::objectives::discrimination_objective;
    use nalgebra::DVector;
    use num_complex::Complex64;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn ket(v: &[(f64, f64)]) -> HermOp {
        HermOp::outer(&DVector::from_iterator(v.len(), v.iter().map(|&(a, b)| Complex64::new(a, b))))
    }

    fn helstrom_ensemble() -> Ensemble {
        let s = 0.5f64.sqrt();
        Ensemble::new(vec![0.5, 0.5], vec![ket(&[(1.0, 0.0), (0.0, 0.0)]), ket(&[(s, 0.0), (s, 0.0)])], &tol()).unwrap()
    }

    fn projective(theta: f64) -> Povm {
        let v = ket(&[((theta / 2.0).cos(), 0.0), ((theta / 2.0).sin(), 0.0)]);
        Povm::new(vec![v.clone(), &HermOp::identity(2) - &v], &tol()).unwrap()
    }

    #[test]
    fn constant_objectives_certify_everything() {
        let t = tol();
        for j in [ChoiOp::identity_channel(2), ChoiOp::depolarizing(3, 2)] {
            let dim = j.op().dim();
            let c = certify(&HermOp::zeros(dim), &j, &t).unwrap();
            assert_eq!(c.verdict, Verdict::CertifiedOptimal);
            assert_eq!(c.bound, 0.0);
            let c = certify(&HermOp::identity(dim), &j, &t).unwrap();
            assert_eq!(c.verdict, Verdict::CertifiedOptimal);
            assert!(c.epsilon < 1e-14);
            assert!((c.z.matrix() - crate::linalg::identity(j.dim_in())).norm() < 1e-14);
        }
    }

    #[test]
    fn helstrom_measurement_certifies() {
        let t = tol();
        let ens = helstrom_ensemble();
        let h0 = discrimination_objective(&ens);
        // positive part of ρ_0 − ρ_+ points at angle θ = −π/4 on the Bloch circle
        let best = projective(-std::f64::consts::FRAC_PI_4);
        let j = q2c_choi(&best);
        let c = certify(&h0, &j, &t).unwrap();
        assert_eq!(c.verdict, Verdict::CertifiedOptimal);
        assert!(c.epsilon < 1e-12);
        let err = h0.inner(j.op());
        assert!((err - (1.0 - 0.5f64.sqrt()) / 2.0).abs() < 1e-12);

        let rotated = projective(-std::f64::consts::FRAC_PI_4 + 0.9);
        let jr = q2c_choi(&rotated);
        let c = certify(&h0, &jr, &t).unwrap();
        assert_eq!(c.verdict, Verdict::CertifiedNearOptimal);
        assert!(c.bound >= h0.inner(jr.op()) - err);
        assert!(h0.inner(jr.op()) - err > 0.05);

        let r = hykl_check(&ens, &best, &t).unwrap();
        assert!(r.optimal);
        assert!(!hykl_check(&ens, &rotated, &t).unwrap().optimal);
    }

    #[test]
    fn hykl_small_cases() {
        let t = tol();
        let ens = Ensemble::new(
            vec![0.5, 0.5],
            vec![HermOp::from_real_diag(&[1.0, 0.0]), HermOp::from_real_diag(&[0.0, 1.0])],
            &t,
        )
        .unwrap();
        let povm = Povm::new(vec![HermOp::from_real_diag(&[1.0, 0.0]), HermOp::from_real_diag(&[0.0, 1.0])], &t).unwrap();
        let r = hykl_check(&ens, &povm, &t).unwrap();
        assert!(r.optimal);
        assert!((r.r - crate::linalg::identity(2) * Complex64::new(0.5, 0.0)).norm() < 1e-15);

        let rho = ket(&[(0.6, 0.0), (0.0, 0.8)]);
        let single = Ensemble::new(vec![1.0], vec![rho], &t).unwrap();
        let r = hykl_check(&single, &Povm::new(vec![HermOp::identity(2)], &t).unwrap(), &t).unwrap();
        assert!(r.optimal);
        assert!(discrimination_objective(&single).frobenius_norm() < 1e-15);
    }

    #[test]
    fn dual_values() {
        let t = tol();
        let h0 = HermOp::identity(4);
        let v = linear_dual_value(&h0, &HermOp::zeros(4), &HermOp::identity(2), &t).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
        let v = linear_dual_value(&h0, &HermOp::zeros(4), &HermOp::zeros(2), &t).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
        assert!(linear_dual_value(&h0, &HermOp::from_real_diag(&[-1.0, 0.0, 0.0, 0.0]), &HermOp::zeros(2), &t).is_err());
    }

    #[test]
    fn dual_value_matches_primal_at_helstrom_optimum() {
        let t = tol();
        let ens = helstrom_ensemble();
        let h0 = discrimination_objective(&ens);
        let j = q2c_choi(&projective(-std::f64::consts::FRAC_PI_4));
        let c = certify(&h0, &j, &t).unwrap();
        let y = &h0 - &HermOp::hermitian_part(&embed_left(2, c.z.matrix()));
        let dual = linear_dual_value(&h0, &y, &c.z, &t).unwrap();
        assert!((dual - h0.inner(j.op())).abs() < 1e-12);
    }

    #[test]
    fn infinite_relative_entropy_is_refused() {
        let t = tol();
        let rho = BipartiteState::new(HermOp::from_real_diag(&[1.0, 0.0]), (2, 1), &t).unwrap();
        let sigma = BipartiteState::new(HermOp::from_real_diag(&[0.0, 1.0]), (2, 1), &t).unwrap();
        let spec = ObjectiveSpec::relative_entropy(rho, sigma, &t).unwrap();
        let (sub, cert) = certify_objective(&spec, &ChoiOp::identity_channel(2), &t).unwrap();
        assert!(!sub.value.is_finite());
        assert_eq!(cert.verdict, Verdict::NotCertified);
    }
}
