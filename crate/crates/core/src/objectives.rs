//! Objective families over the channel set and a subgradient element at a
//! given Choi operator for each.

use crate::choi::{
    compress_environment, eval_map_adjoint, eval_map_apply, BipartiteState, ChoiOp, Ensemble,
};
use crate::linalg::{
    dlog, eig_herm, embed_left, fidelity, inclusion_defect, kron, rel_entropy, CMatrix, HermOp,
    RelEntropy, SpectralDecomp, Tolerances,
};
use crate::linalg::{pinv_sqrt_psd, require_psd};
use crate::{Error, Result};

/// Objective value; `Infinite` is a sentinel that never enters arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveValue {
    Finite(f64),
    Infinite { inclusion_defect: f64 },
}

impl ObjectiveValue {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            ObjectiveValue::Finite(v) => Some(v),
            ObjectiveValue::Infinite { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.finite().is_some()
    }
}

/// How much the returned `H` can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgradientKind {
    /// `f` is differentiable and `H = ∇f(J)`.
    Gradient,
    /// `H ∈ ∂f(J)` but `f` may not be differentiable there.
    Element,
    /// No subgradient is known to exist; `H` is only a search direction.
    Heuristic,
}

#[derive(Debug, Clone)]
pub struct SubgradResult {
    pub value: ObjectiveValue,
    pub h: HermOp,
    /// Trace-distance dual witness on `Y ⊗ Z`.
    pub witness: Option<HermOp>,
    pub kind: SubgradientKind,
    pub degeneracy: Option<String>,
}

impl SubgradResult {
    pub fn exact_gradient(&self) -> bool {
        self.kind == SubgradientKind::Gradient
    }

    /// True when `h` is usable in an optimality certificate.
    pub fn is_subgradient(&self) -> bool {
        self.kind != SubgradientKind::Heuristic
    }
}

/// Weighted pair `(p_k, ρ_k, σ_k)` with `ρ_k` on `X` and `σ_k` on `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityPair {
    pub weight: f64,
    pub rho: HermOp,
    pub sigma: HermOp,
}

#[derive(Debug, Clone)]
pub enum ObjectiveSpec {
    Linear { h0: HermOp, dim_out: usize, dim_in: usize },
    Fidelity { rho: BipartiteState, sigma: BipartiteState },
    FidelitySquaredEnsemble { pairs: Vec<FidelityPair> },
    TraceDistance { rho: BipartiteState, sigma: BipartiteState },
    RelativeEntropy { rho: BipartiteState, sigma: BipartiteState },
}

fn check_pair(rho: &BipartiteState, sigma: &BipartiteState) -> Result<()> {
    if rho.dims().1 != sigma.dims().1 {
        return Err(Error::DimensionMismatch(format!(
            "environment of rho is {}-dim, of sigma {}-dim",
            rho.dims().1,
            sigma.dims().1
        )));
    }
    Ok(())
}

impl ObjectiveSpec {
    pub fn linear(h0: HermOp, dim_out: usize, dim_in: usize) -> Result<Self> {
        if h0.dim() != dim_out * dim_in {
            return Err(Error::DimensionMismatch(format!(
                "H0 is {}-dim, expected {dim_out}x{dim_in}",
                h0.dim()
            )));
        }
        Ok(Self::Linear { h0, dim_out, dim_in })
    }

    /// Error probability of minimum-error discrimination of `ens`.
    pub fn discrimination(ens: &Ensemble) -> Self {
        Self::Linear { h0: discrimination_objective(ens), dim_out: ens.len(), dim_in: ens.dim() }
    }

    /// `−F(σ, (Φ⊗1)(ρ))`, with the environment compressed onto the image of
    /// `Tr_X(ρ)`.
    pub fn fidelity(rho: BipartiteState, sigma: BipartiteState, tol: &Tolerances) -> Result<Self> {
        check_pair(&rho, &sigma)?;
        let c = compress_environment(&rho, &sigma, tol)?;
        Ok(Self::Fidelity { rho: c.rho, sigma: c.sigma })
    }

    pub fn fidelity_squared(pairs: Vec<FidelityPair>, tol: &Tolerances) -> Result<Self> {
        let first = pairs
            .first()
            .ok_or_else(|| Error::InvalidEnsemble("no fidelity pairs".into()))?;
        let (dx, dy) = (first.rho.dim(), first.sigma.dim());
        let mut total = 0.0;
        for (k, p) in pairs.iter().enumerate() {
            if p.rho.dim() != dx || p.sigma.dim() != dy {
                return Err(Error::DimensionMismatch(format!("pair {k} has inconsistent dimensions")));
            }
            if !(p.weight >= 0.0) || !p.weight.is_finite() {
                return Err(Error::InvalidEnsemble(format!("weight {k} is {}", p.weight)));
            }
            for op in [&p.rho, &p.sigma] {
                let s = eig_herm(op, tol)?;
                require_psd(&s, tol)?;
            }
            total += p.weight;
        }
        if (total - 1.0).abs() > 2.0 * tol.num {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        Ok(Self::FidelitySquaredEnsemble { pairs })
    }

    pub fn trace_distance(rho: BipartiteState, sigma: BipartiteState) -> Result<Self> {
        check_pair(&rho, &sigma)?;
        Ok(Self::TraceDistance { rho, sigma })
    }

    /// `D(σ ‖ (Φ⊗1)(ρ))`, compressed like [`ObjectiveSpec::fidelity`]. If `σ`
    /// has support outside `Y ⊗ im(Tr_X ρ)` the objective is infinite on
    /// every channel and the instance is rejected.
    pub fn relative_entropy(rho: BipartiteState, sigma: BipartiteState, tol: &Tolerances) -> Result<Self> {
        check_pair(&rho, &sigma)?;
        let c = compress_environment(&rho, &sigma, tol)?;
        let dy = sigma.dims().0;
        let p = embed_left(dy, &(&c.isometry * c.isometry.adjoint()));
        let inside = sigma.op().congruence(&p);
        let leak = (sigma.op() - &inside).spectral_norm();
        let norm = sigma.op().spectral_norm();
        if norm > 0.0 && leak > tol.rank * norm {
            return Err(Error::DegenerateInput(format!(
                "sigma has weight {leak:e} outside Y ⊗ im(Tr_X rho); the objective is infinite on every channel"
            )));
        }
        Ok(Self::RelativeEntropy { rho: c.rho, sigma: c.sigma })
    }

    /// `(d_Y, d_X)` of the channels this objective takes.
    pub fn channel_dims(&self) -> (usize, usize) {
        match self {
            Self::Linear { dim_out, dim_in, .. } => (*dim_out, *dim_in),
            Self::Fidelity { rho, sigma } | Self::TraceDistance { rho, sigma } | Self::RelativeEntropy { rho, sigma } => {
                (sigma.dims().0, rho.dims().0)
            }
            Self::FidelitySquaredEnsemble { pairs } => (pairs[0].sigma.dim(), pairs[0].rho.dim()),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Linear { .. } => "linear",
            Self::Fidelity { .. } => "fidelity",
            Self::FidelitySquaredEnsemble { .. } => "fidelity_squared_ensemble",
            Self::TraceDistance { .. } => "trace_distance",
            Self::RelativeEntropy { .. } => "relative_entropy",
        }
    }

    fn check_channel(&self, j: &ChoiOp) -> Result<()> {
        let dims = self.channel_dims();
        if (j.dim_out(), j.dim_in()) != dims {
            return Err(Error::DimensionMismatch(format!(
                "objective takes {}x{} channels, got {}x{}",
                dims.0,
                dims.1,
                j.dim_out(),
                j.dim_in()
            )));
        }
        Ok(())
    }

    /// Value and a subgradient element at `j`.
    pub fn evaluate(&self, j: &ChoiOp, tol: &Tolerances) -> Result<SubgradResult> {
        self.check_channel(j)?;
        match self {
            Self::Linear { h0, .. } => linear_eval(h0, j),
            Self::Fidelity { rho, sigma } => fidelity_objective(rho, sigma, j, tol),
            Self::FidelitySquaredEnsemble { pairs } => fidelity_sq_objective(pairs, j, tol),
            Self::TraceDistance { rho, sigma } => trace_dist_objective(rho, sigma, j, tol),
            Self::RelativeEntropy { rho, sigma } => rel_entropy_objective(rho, sigma, j, tol),
        }
    }

    /// Objective value only.
    pub fn value(&self, j: &ChoiOp, tol: &Tolerances) -> Result<ObjectiveValue> {
        self.check_channel(j)?;
        Ok(match self {
            Self::Linear { h0, .. } => ObjectiveValue::Finite(h0.inner(j.op())),
            Self::Fidelity { rho, sigma } => ObjectiveValue::Finite(-fidelity(sigma.op(), &eval_map_apply(rho, j)?, tol)?),
            Self::FidelitySquaredEnsemble { pairs } => {
                let mut v = 0.0;
                for p in pairs {
                    let out = HermOp::hermitian_part(&j.apply_matrix(p.rho.matrix())?);
                    v -= p.weight * fidelity(&p.sigma, &out, tol)?.powi(2);
                }
                ObjectiveValue::Finite(v)
            }
            Self::TraceDistance { rho, sigma } => {
                let d = sigma.op() - &eval_map_apply(rho, j)?;
                ObjectiveValue::Finite(crate::linalg::trace_norm(&d, tol)?)
            }
            Self::RelativeEntropy { rho, sigma } => match rel_entropy(sigma.op(), &eval_map_apply(rho, j)?, tol)? {
                RelEntropy::Finite(v) => ObjectiveValue::Finite(v),
                RelEntropy::Infinite { inclusion_defect } => ObjectiveValue::Infinite { inclusion_defect },
            },
        })
    }
}

/// `⟨H₀, J⟩` with gradient `H₀`.
pub fn linear_eval(h0: &HermOp, j: &ChoiOp) -> Result<SubgradResult> {
    if h0.dim() != j.op().dim() {
        return Err(Error::DimensionMismatch(format!("H0 is {}-dim, J is {}-dim", h0.dim(), j.op().dim())));
    }
    Ok(SubgradResult {
        value: ObjectiveValue::Finite(h0.inner(j.op())),
        h: h0.clone(),
        witness: None,
        kind: SubgradientKind::Gradient,
        degeneracy: None,
    })
}

/// `H₀ = Σ_k E_{k,k} ⊗ (ρ − p_k ρ_k)ᵀ`, so that `⟨H₀, J(Φ_P)⟩` is the error
/// probability of the measurement `P`.
pub fn discrimination_objective(ens: &Ensemble) -> HermOp {
    let m = ens.len();
    let d = ens.dim();
    let avg = ens.average();
    let mut h = CMatrix::zeros(m * d, m * d);
    for (k, (&p, rho)) in ens.probs().iter().zip(ens.states()).enumerate() {
        let block = (&avg - &rho.scale(p)).transpose();
        h.view_mut((k * d, k * d), (d, d)).copy_from(block.matrix());
    }
    HermOp::hermitian_part(&h)
}

struct FidelityParts {
    value: f64,
    /// `√σ K^{+1/2} √σ` with `K = √σ M √σ`.
    kernel: HermOp,
    regular: bool,
}

fn fidelity_parts(sigma: &HermOp, m: &HermOp, tol: &Tolerances) -> Result<FidelityParts> {
    let ss = eig_herm(sigma, tol)?;
    require_psd(&ss, tol)?;
    let root = ss.apply(|l| l.max(0.0).sqrt());
    let k = m.congruence(root.matrix());
    let sk = eig_herm(&k, tol)?;
    require_psd(&sk, tol)?;
    let value = sk.raw_eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    let kernel = pinv_sqrt_psd(&sk, tol).congruence(root.matrix());
    Ok(FidelityParts { value, kernel, regular: sk.rank(tol) == ss.rank(tol) })
}

/// `−F(σ, (Φ⊗1)(ρ))` and `H = −½ (1⊗Ψ_ρ*)(√σ (√σ M √σ)^{+1/2} √σ)`.
pub fn fidelity_objective(rho: &BipartiteState, sigma: &BipartiteState, j: &ChoiOp, tol: &Tolerances) -> Result<SubgradResult> {
    check_pair(rho, sigma)?;
    if sigma.dims().0 != j.dim_out() {
        return Err(Error::DimensionMismatch("sigma output factor does not match the channel".into()));
    }
    let m = eval_map_apply(rho, j)?;
    let parts = fidelity_parts(sigma.op(), &m, tol)?;
    let h = eval_map_adjoint(rho, &parts.kernel, j.dim_out())?.scale(-0.5);
    let (kind, degeneracy) = if parts.regular {
        (SubgradientKind::Gradient, None)
    } else {
        (
            SubgradientKind::Heuristic,
            Some("sqrt(sigma) M sqrt(sigma) is singular on im(sigma); the subdifferential is empty".to_string()),
        )
    };
    Ok(SubgradResult { value: ObjectiveValue::Finite(-parts.value), h, witness: None, kind, degeneracy })
}

/// `−Σ_k p_k F(σ_k, Φ(ρ_k))²` and
/// `H = −Σ_k p_k F_k √σ_k (√σ_k Φ(ρ_k) √σ_k)^{+1/2} √σ_k ⊗ ρ_kᵀ`.
pub fn fidelity_sq_objective(pairs: &[FidelityPair], j: &ChoiOp, tol: &Tolerances) -> Result<SubgradResult> {
    let d = j.op().dim();
    let mut value = 0.0;
    let mut h = CMatrix::zeros(d, d);
    let mut regular = true;
    for p in pairs {
        if p.rho.dim() != j.dim_in() || p.sigma.dim() != j.dim_out() {
            return Err(Error::DimensionMismatch("fidelity pair does not match the channel".into()));
        }
        let out = HermOp::hermitian_part(&j.apply_matrix(p.rho.matrix())?);
        let parts = fidelity_parts(&p.sigma, &out, tol)?;
        value -= p.weight * parts.value * parts.value;
        if p.weight > 0.0 {
            regular &= parts.regular;
        }
        let block = kron(parts.kernel.matrix(), &p.rho.matrix().transpose());
        h -= block * num_complex::Complex64::new(p.weight * parts.value, 0.0);
    }
    let (kind, degeneracy) = if regular {
        (SubgradientKind::Gradient, None)
    } else {
        (SubgradientKind::Heuristic, Some("a weighted pair is at a singular point of the fidelity".to_string()))
    };
    Ok(SubgradResult { value: ObjectiveValue::Finite(value), h: HermOp::hermitian_part(&h), witness: None, kind, degeneracy })
}

/// `Σ sign(λ) Π_λ` with `sign = 0` on eigenvalues within `τ_rank · ‖D‖` of
/// zero. Returns the witness and whether such eigenvalues were present.
pub fn sign_witness(s: &SpectralDecomp, tol: &Tolerances) -> (HermOp, bool) {
    let cut = tol.rank * s.spectral_norm();
    let zero = s.raw_eigenvalues.iter().any(|l| l.abs() <= cut);
    let w = s.apply(|l| {
        if l > cut {
            1.0
        } else if l < -cut {
            -1.0
        } else {
            0.0
        }
    });
    (w, zero)
}

/// `‖σ − (Φ⊗1)(ρ)‖₁` and `H = −(1⊗Ψ_ρ*)(Y_w)` with `Y_w` the sign witness
/// of the difference.
pub fn trace_dist_objective(rho: &BipartiteState, sigma: &BipartiteState, j: &ChoiOp, tol: &Tolerances) -> Result<SubgradResult> {
    check_pair(rho, sigma)?;
    if sigma.dims().0 != j.dim_out() {
        return Err(Error::DimensionMismatch("sigma output factor does not match the channel".into()));
    }
    let diff = sigma.op() - &eval_map_apply(rho, j)?;
    let s = eig_herm(&diff, tol)?;
    let value = s.raw_eigenvalues.iter().map(|l| l.abs()).sum();
    let (w, degenerate) = sign_witness(&s, tol);
    let h = -&eval_map_adjoint(rho, &w, j.dim_out())?;
    let (kind, degeneracy) = if degenerate {
        (SubgradientKind::Element, Some("difference has a zero eigenvalue; sign(0) = 0 was used".to_string()))
    } else {
        (SubgradientKind::Gradient, None)
    };
    Ok(SubgradResult { value: ObjectiveValue::Finite(value), h, witness: Some(w), kind, degeneracy })
}

/// `D(σ ‖ (Φ⊗1)(ρ))` and `H = −(1⊗Ψ_ρ*)(D log(M)(σ))`. When `M` is singular
/// but contains `im σ`, the derivative is taken on `im M` and embedded.
pub fn rel_entropy_objective(rho: &BipartiteState, sigma: &BipartiteState, j: &ChoiOp, tol: &Tolerances) -> Result<SubgradResult> {
    check_pair(rho, sigma)?;
    if sigma.dims().0 != j.dim_out() {
        return Err(Error::DimensionMismatch("sigma output factor does not match the channel".into()));
    }
    let m = eval_map_apply(rho, j)?;
    let d = m.dim();
    let value = match rel_entropy(sigma.op(), &m, tol)? {
        RelEntropy::Finite(v) => v,
        RelEntropy::Infinite { inclusion_defect } => {
            return Ok(SubgradResult {
                value: ObjectiveValue::Infinite { inclusion_defect },
                h: HermOp::zeros(j.op().dim()),
                witness: None,
                kind: SubgradientKind::Heuristic,
                degeneracy: Some("im(sigma) is not contained in im(M)".to_string()),
            })
        }
    };
    let sm = eig_herm(&m, tol)?;
    let (g, kind, degeneracy) = if sm.rank(tol) == d {
        (dlog(&m, sigma.op(), tol)?, SubgradientKind::Gradient, None)
    } else {
        let b = sm.support(tol);
        let inner = dlog(&m.congruence(&b), &sigma.op().congruence(&b), tol)?;
        (
            inner.congruence(&b.adjoint()),
            SubgradientKind::Element,
            Some("M is singular; derivative restricted to im(M)".to_string()),
        )
    };
    let h = -&eval_map_adjoint(rho, &g, j.dim_out())?;
    Ok(SubgradResult { value: ObjectiveValue::Finite(value), h, witness: None, kind, degeneracy })
}

/// Condition `im σ ⊆ im (Φ⊗1)(ρ)` shared by the fidelity and relative
/// entropy optimality criteria. Returns the relative inclusion defect.
pub fn support_condition(rho: &BipartiteState, sigma: &BipartiteState, j: &ChoiOp, tol: &Tolerances) -> Result<f64> {
    inclusion_defect(sigma.op(), &eval_map_apply(rho, j)?, tol)
}
