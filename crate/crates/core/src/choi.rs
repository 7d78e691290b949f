//! Choi representations of channels, measurements as quantum-to-classical
//! channels, and the evaluation map of a bipartite state.
//!
//! Index convention: a Choi operator lives on `Y ⊗ X` (output factor first,
//! slow index), so `J[(y·d_X + j), (y'·d_X + k)] = Φ(E_{j,k})[y, y']`.
//! A bipartite input state lives on `X ⊗ Z` and a target on `Y ⊗ Z`.
//! Transposes are taken in the standard basis.

use num_complex::Complex64;

use crate::linalg::{
    eig_herm, embed_left, identity, partial_trace, spectral_norm, CMatrix, Factor, HermOp,
    Tolerances, ZERO,
};
use crate::{Error, Result};

/// Choi operator `J(Φ) ∈ Pos(Y ⊗ X)` of a channel `Φ: L(X) → L(Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiOp {
    op: HermOp,
    dim_out: usize,
    dim_in: usize,
}

/// Outcome of [`is_channel_choi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCheck {
    pub min_eig: f64,
    pub tp_defect: f64,
    pub valid: bool,
    /// Positive definite, i.e. in the relative interior of the channel set.
    pub interior: bool,
}

/// Checks `X ⪰ 0` and `Tr_Y(X) = 1_X` for an operator on `Y ⊗ X`.
pub fn is_channel_choi(x: &HermOp, dim_out: usize, dim_in: usize, tol: &Tolerances) -> Result<ChannelCheck> {
    if x.dim() != dim_out * dim_in {
        return Err(Error::DimensionMismatch(format!(
            "{}-dim operator cannot live on a {dim_out}x{dim_in} space",
            x.dim()
        )));
    }
    let s = eig_herm(x, tol)?;
    let reduced = partial_trace(x.matrix(), (dim_out, dim_in), Factor::First)?;
    let tp_defect = spectral_norm(&(reduced - identity(dim_in)));
    let scale = 1.0 + s.spectral_norm();
    let min_eig = s.min();
    Ok(ChannelCheck {
        min_eig,
        tp_defect,
        valid: min_eig >= -tol.psd * scale && tp_defect <= tol.num * scale,
        interior: min_eig > tol.psd * scale,
    })
}

impl ChoiOp {
    /// Validated constructor.
    pub fn new(op: HermOp, dim_out: usize, dim_in: usize, tol: &Tolerances) -> Result<Self> {
        let check = is_channel_choi(&op, dim_out, dim_in, tol)?;
        if !check.valid {
            return Err(Error::InvalidChoi { min_eig: check.min_eig, tp_defect: check.tp_defect });
        }
        Ok(Self { op, dim_out, dim_in })
    }

    /// Wraps an operator without checking the channel constraints. Used for
    /// solver iterates and perturbations that are feasible by construction.
    pub fn new_unchecked(op: HermOp, dim_out: usize, dim_in: usize) -> Self {
        assert_eq!(op.dim(), dim_out * dim_in, "Choi operator size");
        Self { op, dim_out, dim_in }
    }

    /// `J(id) = Σ_{j,k} E_{j,k} ⊗ E_{j,k}` on `C^d`.
    pub fn identity_channel(d: usize) -> Self {
        let mut m = CMatrix::zeros(d * d, d * d);
        for j in 0..d {
            for k in 0..d {
                m[(j * d + j, k * d + k)] = Complex64::new(1.0, 0.0);
            }
        }
        Self { op: HermOp::hermitian_part(&m), dim_out: d, dim_in: d }
    }

    /// Completely depolarizing channel `X ↦ Tr(X) 1_Y / d_Y`, Choi `1/d_Y`.
    pub fn depolarizing(dim_out: usize, dim_in: usize) -> Self {
        Self {
            op: HermOp::identity(dim_out * dim_in).scale(1.0 / dim_out as f64),
            dim_out,
            dim_in,
        }
    }

    /// `(1 − w)·self + w·other`.
    pub fn mix(&self, other: &ChoiOp, w: f64) -> Self {
        assert_eq!((self.dim_out, self.dim_in), (other.dim_out, other.dim_in));
        Self {
            op: &self.op.scale(1.0 - w) + &other.op.scale(w),
            dim_out: self.dim_out,
            dim_in: self.dim_in,
        }
    }

    pub fn op(&self) -> &HermOp {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn check(&self, tol: &Tolerances) -> Result<ChannelCheck> {
        is_channel_choi(&self.op, self.dim_out, self.dim_in, tol)
    }

    /// `Φ(X) = Tr_X((1_Y ⊗ Xᵀ) J)` for an arbitrary `X ∈ L(X)`.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        let (dy, dx) = (self.dim_out, self.dim_in);
        if x.nrows() != dx || x.ncols() != dx {
            return Err(Error::DimensionMismatch(format!(
                "channel input is {dx}-dim, operator is {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        let j = self.op.matrix();
        let mut out = CMatrix::zeros(dy, dy);
        for y in 0..dy {
            for yp in 0..dy {
                let mut s = ZERO;
                for a in 0..dx {
                    for b in 0..dx {
                        s += x[(a, b)] * j[(y * dx + a, yp * dx + b)];
                    }
                }
                out[(y, yp)] = s;
            }
        }
        Ok(out)
    }
}

/// `J(Φ)` for `Φ(X) = Σ_a K_a X K_a†`.
pub fn choi_from_kraus(kraus: &[CMatrix], tol: &Tolerances) -> Result<ChoiOp> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty Kraus list".into()))?;
    let (dy, dx) = first.shape();
    if let Some(k) = kraus.iter().find(|k| k.shape() != (dy, dx)) {
        return Err(Error::DimensionMismatch(format!(
            "Kraus operators of shapes {dy}x{dx} and {}x{}",
            k.nrows(),
            k.ncols()
        )));
    }
    let gram: CMatrix = kraus.iter().map(|k| k.adjoint() * k).fold(CMatrix::zeros(dx, dx), |a, b| a + b);
    let defect = spectral_norm(&(gram - identity(dx)));
    // scale is 1 + ‖1_X‖
    if defect > tol.num * 2.0 {
        return Err(Error::NotTracePreserving { defect });
    }
    let mut j = CMatrix::zeros(dy * dx, dy * dx);
    for k in kraus {
        // v[(y, x)] = K[y, x]; J = Σ_a v_a v_a†
        let v = CMatrix::from_fn(dy * dx, 1, |r, _| k[(r / dx, r % dx)]);
        j += &v * v.adjoint();
    }
    Ok(ChoiOp { op: HermOp::hermitian_part(&j), dim_out: dy, dim_in: dx })
}

/// `Φ(X)` recovered from the Choi operator.
pub fn apply_from_choi(j: &ChoiOp, x: &HermOp) -> Result<HermOp> {
    Ok(HermOp::hermitian_part(&j.apply_matrix(x.matrix())?))
}

/// Measurement `{P_1, …, P_m}` on `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<HermOp>,
}

impl Povm {
    pub fn new(elements: Vec<HermOp>, tol: &Tolerances) -> Result<Self> {
        let d = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?
            .dim();
        let mut total = HermOp::zeros(d);
        for (k, p) in elements.iter().enumerate() {
            if p.dim() != d {
                return Err(Error::InvalidPovm(format!("element {k} has dimension {} != {d}", p.dim())));
            }
            let s = eig_herm(p, tol)?;
            if s.min() < -tol.psd * (1.0 + s.spectral_norm()) {
                return Err(Error::InvalidPovm(format!("element {k} has eigenvalue {:e}", s.min())));
            }
            total = &total + p;
        }
        let defect = spectral_norm(&(total.matrix() - identity(d)));
        if defect > tol.num * 2.0 {
            return Err(Error::InvalidPovm(format!("elements sum to identity only up to {defect:e}")));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[HermOp] {
        &self.elements
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    /// Outcome probabilities `⟨P_k, ρ⟩`.
    pub fn probabilities(&self, rho: &HermOp) -> Vec<f64> {
        self.elements.iter().map(|p| p.inner(rho)).collect()
    }
}

/// Ensemble `{(p_k, ρ_k)}` of density operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    probs: Vec<f64>,
    states: Vec<HermOp>,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<HermOp>, tol: &Tolerances) -> Result<Self> {
        if probs.is_empty() || probs.len() != states.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} probabilities for {} states",
                probs.len(),
                states.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidEnsemble("probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol.num * 2.0 {
            return Err(Error::InvalidEnsemble(format!("probabilities sum to {total}")));
        }
        let d = states[0].dim();
        for (k, rho) in states.iter().enumerate() {
            if rho.dim() != d {
                return Err(Error::InvalidEnsemble(format!("state {k} has dimension {}", rho.dim())));
            }
            let s = eig_herm(rho, tol)?;
            if s.min() < -tol.psd * (1.0 + s.spectral_norm()) || (rho.trace() - 1.0).abs() > tol.num * 2.0 {
                return Err(Error::InvalidEnsemble(format!("state {k} is not a density operator")));
            }
        }
        Ok(Self { probs, states })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[HermOp] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `ρ = Σ_k p_k ρ_k`.
    pub fn average(&self) -> HermOp {
        self.probs
            .iter()
            .zip(&self.states)
            .fold(HermOp::zeros(self.dim()), |acc, (&p, rho)| &acc + &rho.scale(p))
    }

    /// Error probability `Σ_k ⟨ρ − p_k ρ_k, P_k⟩` of a measurement.
    pub fn error_probability(&self, povm: &Povm) -> f64 {
        let avg = self.average();
        self.probs
            .iter()
            .zip(&self.states)
            .zip(povm.elements())
            .map(|((&p, rho), e)| (&avg - &rho.scale(p)).inner(e))
            .sum()
    }
}

/// `J(Φ) = Σ_k E_{k,k} ⊗ P_kᵀ` of the quantum-to-classical channel of a measurement.
pub fn q2c_choi(povm: &Povm) -> ChoiOp {
    let m = povm.outcomes();
    let d = povm.dim();
    let mut j = CMatrix::zeros(m * d, m * d);
    for (k, p) in povm.elements().iter().enumerate() {
        j.view_mut((k * d, k * d), (d, d)).copy_from(&p.matrix().transpose());
    }
    ChoiOp { op: HermOp::hermitian_part(&j), dim_out: m, dim_in: d }
}

/// `P_k = ((e_k† ⊗ 1_X) J (e_k ⊗ 1_X))ᵀ`. Always a valid measurement when
/// `J` is the Choi operator of a channel.
pub fn povm_from_choi(j: &ChoiOp) -> Povm {
    let d = j.dim_in();
    let elements = (0..j.dim_out())
        .map(|k| HermOp::hermitian_part(&j.matrix().view((k * d, k * d), (d, d)).transpose()))
        .collect();
    Povm { elements }
}

/// PSD operator on a bipartite space `A ⊗ Z`; unit trace is not required.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    op: HermOp,
    dims: (usize, usize),
}

impl BipartiteState {
    pub fn new(op: HermOp, dims: (usize, usize), tol: &Tolerances) -> Result<Self> {
        if op.dim() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "{}-dim operator on a {}x{} space",
                op.dim(),
                dims.0,
                dims.1
            )));
        }
        let s = eig_herm(&op, tol)?;
        if s.min() < -tol.psd * (1.0 + s.spectral_norm()) {
            return Err(Error::NotPsd { min_eig: s.min() });
        }
        Ok(Self { op, dims })
    }

    /// `ρ_A ⊗ ρ_Z`.
    pub fn product(a: &HermOp, z: &HermOp, tol: &Tolerances) -> Result<Self> {
        Self::new(HermOp::hermitian_part(&a.matrix().kronecker(z.matrix())), (a.dim(), z.dim()), tol)
    }

    pub fn op(&self) -> &HermOp {
        &self.op
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Reduced operator on the `Z` factor.
    pub fn reduced_env(&self) -> HermOp {
        HermOp::hermitian_part(&partial_trace(self.op.matrix(), self.dims, Factor::First).expect("dims checked"))
    }
}

/// `(1 ⊗ Ψ_ρ)(J) = (Φ ⊗ 1_Z)(ρ)` for an arbitrary (not necessarily
/// Hermitian) `J` on `Y ⊗ X`.
pub fn eval_map_apply_general(rho: &BipartiteState, j: &CMatrix, dim_out: usize) -> Result<CMatrix> {
    let (dx, dz) = rho.dims();
    let dy = dim_out;
    if j.nrows() != dy * dx || j.ncols() != dy * dx {
        return Err(Error::DimensionMismatch(format!(
            "Choi operator {}x{} does not match Y={dy}, X={dx}",
            j.nrows(),
            j.ncols()
        )));
    }
    let r = rho.op().matrix();
    let mut out = CMatrix::zeros(dy * dz, dy * dz);
    for y in 0..dy {
        for yp in 0..dy {
            for a in 0..dx {
                for b in 0..dx {
                    let c = j[(y * dx + a, yp * dx + b)];
                    if c == ZERO {
                        continue;
                    }
                    let block = r.view((a * dz, b * dz), (dz, dz));
                    let mut target = out.view_mut((y * dz, yp * dz), (dz, dz));
                    target += block * c;
                }
            }
        }
    }
    Ok(out)
}

/// `(Φ ⊗ 1_Z)(ρ)` computed by contracting `ρ` with the Choi operator.
pub fn eval_map_apply(rho: &BipartiteState, j: &ChoiOp) -> Result<HermOp> {
    if rho.dims().0 != j.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "state input factor is {}-dim, channel input is {}-dim",
            rho.dims().0,
            j.dim_in()
        )));
    }
    Ok(HermOp::hermitian_part(&eval_map_apply_general(rho, j.matrix(), j.dim_out())?))
}

/// Adjoint `(1 ⊗ Ψ_ρ*)(W)` for an arbitrary `W` on `Y ⊗ Z`:
/// `out[(y,j),(y',k)] = Σ_{z,z'} W[(y,z),(y',z')] · conj(ρ[(j,z),(k,z')])`.
pub fn eval_map_adjoint_general(rho: &BipartiteState, w: &CMatrix, dim_out: usize) -> Result<CMatrix> {
    let (dx, dz) = rho.dims();
    let dy = dim_out;
    if w.nrows() != dy * dz || w.ncols() != dy * dz {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} does not match Y={dy}, Z={dz}",
            w.nrows(),
            w.ncols()
        )));
    }
    let r = rho.op().matrix();
    let mut out = CMatrix::zeros(dy * dx, dy * dx);
    for y in 0..dy {
        for yp in 0..dy {
            let wb = w.view((y * dz, yp * dz), (dz, dz));
            for a in 0..dx {
                for b in 0..dx {
                    let rb = r.view((a * dz, b * dz), (dz, dz));
                    let s: Complex64 = wb.iter().zip(rb.iter()).map(|(x, q)| x * q.conj()).sum();
                    out[(y * dx + a, yp * dx + b)] = s;
                }
            }
        }
    }
    Ok(out)
}

/// Hermitian adjoint of the evaluation map, from `Y ⊗ Z` back to `Y ⊗ X`.
pub fn eval_map_adjoint(rho: &BipartiteState, w: &HermOp, dim_out: usize) -> Result<HermOp> {
    Ok(HermOp::hermitian_part(&eval_map_adjoint_general(rho, w.matrix(), dim_out)?))
}

/// Result of [`compress_environment`].
#[derive(Debug, Clone)]
pub struct Compressed {
    pub rho: BipartiteState,
    pub sigma: BipartiteState,
    /// Isometry `B: V → Z` with `BB*` the projection onto `im(Tr_X ρ)`.
    pub isometry: CMatrix,
}

/// Restricts the environment `Z` to the image of `Tr_X(ρ)`.
pub fn compress_environment(rho: &BipartiteState, sigma: &BipartiteState, tol: &Tolerances) -> Result<Compressed> {
    let (dx, dz) = rho.dims();
    let (dy, dz2) = sigma.dims();
    if dz != dz2 {
        return Err(Error::DimensionMismatch(format!("environment dims {dz} and {dz2} differ")));
    }
    let reduced = rho.reduced_env();
    let s = eig_herm(&reduced, tol)?;
    let b = s.support(tol);
    if b.ncols() == 0 {
        return Err(Error::DegenerateInput("Tr_X(rho) is zero".into()));
    }
    let v = b.ncols();
    let rho_c = rho.op().congruence(&embed_left(dx, &b));
    let sigma_c = sigma.op().congruence(&embed_left(dy, &b));
    Ok(Compressed {
        rho: BipartiteState::new(rho_c, (dx, v), tol)?,
        sigma: BipartiteState::new(sigma_c, (dy, v), tol)?,
        isometry: b,
    })
}
