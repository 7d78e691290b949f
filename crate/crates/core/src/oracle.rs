//! Reference solvers and random instances: projection onto the
//! channel set, projected subgradient descent, grid search over qubit
//! measurements, and the Helstrom measurement.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::certifier::{certify, certify_objective};
use crate::choi::{choi_from_kraus, BipartiteState, ChoiOp, Ensemble, Povm};
use crate::linalg::{eig_herm, embed_left, identity, partial_trace, spectral_norm, CMatrix, Factor, HermOp, Tolerances};
use crate::objectives::ObjectiveSpec;
use crate::{Error, Result};

pub const DIM_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Constant(f64),
    /// `c / √t`.
    Diminishing(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub step: StepRule,
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub seed: u64,
    /// Dykstra iterations per projection when the Newton projection fails.
    pub projection_iters: usize,
    /// Iterations without improving the incumbent that count as a stall.
    pub stall_window: usize,
    /// On a stall, restart from the incumbent with the step scaled by
    /// `restart_factor`, at most this many times.
    pub restarts: usize,
    pub restart_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            step: StepRule::Constant(1.0),
            tol_gap: 1e-7,
            tol_feas: 1e-9,
            seed: 0,
            projection_iters: 20000,
            stall_window: 200,
            restarts: 30,
            restart_factor: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let c = match self.step {
            StepRule::Constant(c) | StepRule::Diminishing(c) => c,
        };
        if self.max_iters == 0 || self.projection_iters == 0 {
            return Err(Error::Schema("iteration limits must be at least 1".into()));
        }
        if !(self.tol_gap > 0.0 && self.tol_feas > 0.0 && c > 0.0 && self.restart_factor > 0.0 && self.restart_factor <= 1.0) {
            return Err(Error::Schema("step size and tolerances must be positive".into()));
        }
        Ok(())
    }
}

fn clip_psd(x: &HermOp, tol: &Tolerances) -> Result<(HermOp, f64)> {
    let s = eig_herm(x, tol)?;
    Ok((s.apply(|l| l.max(0.0)), s.min()))
}

/// `X + 1_Y ⊗ (1_X − Tr_Y X) / d_Y`, the Frobenius projection onto
/// `{X : Tr_Y X = 1_X}`.
fn project_affine(x: &HermOp, dims: (usize, usize)) -> HermOp {
    let (dy, dx) = dims;
    let reduced = partial_trace(x.matrix(), dims, Factor::First).expect("dims checked by caller");
    let fix = (identity(dx) - reduced) * Complex64::new(1.0 / dy as f64, 0.0);
    HermOp::hermitian_part(&(x.matrix() + embed_left(dy, &fix)))
}

/// Congruence by `1 ⊗ S^{-1/2}` with `S = Tr_Y J`, removing the residual
/// trace-preservation defect of a nearly feasible `J` without leaving the
/// PSD cone.
fn exact_trace_preserving(j: HermOp, dims: (usize, usize), tol: &Tolerances) -> Result<ChoiOp> {
    let s = HermOp::hermitian_part(&partial_trace(j.matrix(), dims, Factor::First)?);
    // raw eigenpairs: clustering would reintroduce a defect of order τ_rank
    let e = eig_herm(&s, tol)?;
    let inv_sqrt = CMatrix::from_diagonal(&DVector::from_iterator(
        e.raw_eigenvalues.len(),
        e.raw_eigenvalues.iter().map(|&l| Complex64::new(1.0 / l.max(f64::MIN_POSITIVE).sqrt(), 0.0)),
    ));
    let a = embed_left(dims.0, &(&e.eigenvectors * inv_sqrt * e.eigenvectors.adjoint()));
    Ok(ChoiOp::new_unchecked(j.congruence(&a), dims.0, dims.1))
}

/// Orthonormal basis of the real space of Hermitian `d × d` matrices.
fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let s = Complex64::new(0.5f64.sqrt(), 0.0);
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        out.push(crate::linalg::matrix_unit(d, k, k));
        for l in k + 1..d {
            let (a, b) = (crate::linalg::matrix_unit(d, k, l), crate::linalg::matrix_unit(d, l, k));
            out.push((&a + &b) * s);
            out.push((a - b) * Complex64::new(0.0, 0.5f64.sqrt()));
        }
    }
    out
}

/// Semismooth Newton ascent on the dual `ψ(Z) = −½‖(X − 1⊗Z)₊‖² − Tr Z`,
/// whose maximizer gives the projection `(X − 1⊗Z)₊`. Returns `None` if it
/// fails to reach `tol_feas` within the iteration budget.
fn project_dual_newton(x: &HermOp, dims: (usize, usize), cfg: &SolverConfig, tol: &Tolerances) -> Result<Option<ChoiOp>> {
    let (dy, dx) = dims;
    let n = dy * dx;
    let basis = hermitian_basis(dx);
    let lifted: Vec<CMatrix> = basis.iter().map(|b| embed_left(dy, b)).collect();
    let coords = |m: &CMatrix| nalgebra::DVector::from_iterator(basis.len(), basis.iter().map(|b| crate::linalg::inner(b, m).re));
    let from_coords = |v: &nalgebra::DVector<f64>| {
        let mut out = CMatrix::zeros(dx, dx);
        for (b, c) in basis.iter().zip(v.iter()) {
            out += b * Complex64::new(*c, 0.0);
        }
        out
    };
    let eval = |z: &CMatrix| -> Result<(crate::linalg::SpectralDecomp, HermOp, f64, CMatrix)> {
        let a = HermOp::hermitian_part(&(x.matrix() - embed_left(dy, z)));
        let s = eig_herm(&a, tol)?;
        let pos = s.apply(|l| l.max(0.0));
        let f = pos.frobenius_norm();
        let psi = -0.5 * f * f - z.trace().re;
        let grad = partial_trace(pos.matrix(), dims, Factor::First)? - identity(dx);
        Ok((s, pos, psi, grad))
    };
    let reduced = partial_trace(x.matrix(), dims, Factor::First)?;
    let mut z = (reduced - identity(dx)) * Complex64::new(1.0 / dy as f64, 0.0);
    let (mut s, mut pos, mut psi, mut grad) = eval(&z)?;
    for _ in 0..100 {
        if spectral_norm(&grad) <= cfg.tol_feas {
            return Ok(Some(exact_trace_preserving(pos, dims, tol)?));
        }
        let lam = &s.raw_eigenvalues;
        let spread = 1e-14 * (1.0 + s.spectral_norm());
        let mut gamma = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                gamma[(i, k)] = if (lam[i] - lam[k]).abs() > spread {
                    (lam[i].max(0.0) - lam[k].max(0.0)) / (lam[i] - lam[k])
                } else if lam[i] > 0.0 {
                    1.0
                } else {
                    0.0
                };
            }
        }
        let u = &s.eigenvectors;
        let ud = u.adjoint();
        let m = basis.len();
        let mut jac = nalgebra::DMatrix::<f64>::zeros(m, m);
        for (c, e) in lifted.iter().enumerate() {
            let mut w = &ud * e * u;
            w.zip_apply(&gamma.map(|g| Complex64::new(g, 0.0)), |a, g| *a *= g);
            let d = partial_trace(&(u * w * &ud), dims, Factor::First)?;
            jac.set_column(c, &coords(&d));
        }
        let g = coords(&grad);
        let gnorm = g.norm();
        let reg = gnorm.clamp(1e-12, 1e-2);
        let sys = (&jac + jac.transpose()) * 0.5 + nalgebra::DMatrix::<f64>::identity(m, m) * reg;
        let Some(chol) = sys.cholesky() else { return Ok(None) };
        let step = chol.solve(&g);
        let slope = g.dot(&step);
        let dz = from_coords(&step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial_z = &z + &dz * Complex64::new(t, 0.0);
            let trial = eval(&trial_z)?;
            // ψ stalls at rounding level near the solution, where the
            // residual still decreases
            if trial.2 >= psi + 1e-4 * t * slope || spectral_norm(&trial.3) <= (1.0 - 1e-4 * t) * spectral_norm(&grad) {
                z = trial_z;
                (s, pos, psi, grad) = trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Frobenius-nearest Choi operator of a channel `C^{d_X} → C^{d_Y}`,
/// `dims = (d_Y, d_X)`.
pub fn project_channel(x: &HermOp, dims: (usize, usize), cfg: &SolverConfig, tol: &Tolerances) -> Result<ChoiOp> {
    let (dy, dx) = dims;
    if x.dim() != dy * dx {
        return Err(Error::DimensionMismatch(format!("{}-dim operator, channel dims {dy}x{dx}", x.dim())));
    }
    let tp_defect = |m: &HermOp| {
        let r = partial_trace(m.matrix(), dims, Factor::First).expect("dims checked");
        spectral_norm(&(r - identity(dx)))
    };
    let mut cur = x.clone();
    let mut corr = HermOp::zeros(x.dim());
    let mut tp = tp_defect(&cur);
    let min0 = eig_herm(&cur, tol)?.min();
    if min0 >= -cfg.tol_feas && tp <= cfg.tol_feas {
        return exact_trace_preserving(cur, dims, tol);
    }
    if let Some(j) = project_dual_newton(x, dims, cfg, tol)? {
        return Ok(j);
    }
    for _ in 0..cfg.projection_iters {
        let (pos, _) = clip_psd(&(&cur + &corr), tol)?;
        corr = &(&cur + &corr) - &pos;
        let next = project_affine(&pos, dims);
        let moved = (&next - &cur).frobenius_norm();
        cur = next;
        tp = tp_defect(&cur);
        if tp > cfg.tol_feas || moved > cfg.tol_feas {
            continue;
        }
        if eig_herm(&cur, tol)?.min() >= -cfg.tol_feas {
            return exact_trace_preserving(cur, dims, tol);
        }
    }
    let psd_defect = (-eig_herm(&cur, tol)?.min()).max(0.0);
    Err(Error::MaxItersExceeded { iters: cfg.projection_iters, psd_defect, tp_defect: tp })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    Stalled,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub best_value: f64,
    pub best_j: ChoiOp,
    pub iterations: usize,
    /// Objective value at each iterate (infinite values are skipped).
    pub values: Vec<f64>,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Certified suboptimality bound at `best_j`, infinite if no certificate
    /// is available there.
    pub final_bound: f64,
}

/// Projected subgradient descent from the depolarizing channel, restarted
/// from the incumbent with a smaller step whenever progress stalls.
pub fn solve(spec: &ObjectiveSpec, cfg: &SolverConfig, tol: &Tolerances) -> Result<SolveTrace> {
    cfg.validate()?;
    let (dy, dx) = spec.channel_dims();
    let start = ChoiOp::depolarizing(dy, dx);
    let mut j = start.clone();
    let mut best_j = start.clone();
    let mut best_value = f64::INFINITY;
    let mut values = Vec::new();
    let mut since_improvement = 0;
    let mut stop_reason = StopReason::MaxIters;
    let mut iterations = 0;
    let mut restarts = 0;
    let mut step_scale = 1.0;
    let mut t = 0usize;
    while iterations < cfg.max_iters {
        iterations += 1;
        t += 1;
        let res = spec.evaluate(&j, tol)?;
        let Some(value) = res.value.finite() else {
            // left the domain; pull back toward the interior
            j = j.mix(&start, 0.5);
            continue;
        };
        values.push(value);
        let scale = 1.0 + res.h.spectral_norm();
        if value < best_value {
            if best_value - value > cfg.tol_gap * scale {
                since_improvement = 0;
            }
            best_value = value;
            best_j = j.clone();
            if res.is_subgradient() && certify(&res.h, &j, tol)?.bound <= cfg.tol_gap * scale {
                stop_reason = StopReason::Converged;
                break;
            }
        }
        since_improvement += 1;
        if since_improvement >= cfg.stall_window {
            if restarts == cfg.restarts {
                stop_reason = StopReason::Stalled;
                break;
            }
            restarts += 1;
            step_scale *= cfg.restart_factor;
            since_improvement = 0;
            t = 0;
            j = best_j.clone();
            continue;
        }
        let norm = res.h.frobenius_norm();
        if norm == 0.0 {
            continue;
        }
        let eta = step_scale
            * match cfg.step {
                StepRule::Constant(c) => c,
                StepRule::Diminishing(c) => c / (t as f64).sqrt(),
            }
            / norm;
        j = project_channel(&(j.op() - &res.h.scale(eta)), (dy, dx), cfg, tol)?;
    }
    let final_bound = match certify_objective(spec, &best_j, tol) {
        Ok((_, c)) if c.verdict != crate::certifier::Verdict::NotCertified => c.bound,
        Ok(_) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    Ok(SolveTrace {
        best_value,
        best_j,
        iterations,
        values,
        converged: stop_reason == StopReason::Converged,
        stop_reason,
        final_bound,
    })
}

/// Qubit Bloch-sphere ket `(cos θ/2, e^{iφ} sin θ/2)`.
pub fn bloch_ket(theta: f64, phi: f64) -> DVector<Complex64> {
    DVector::from_vec(vec![
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ])
}

/// Grid search over two-outcome projective qubit measurements. A single-state
/// ensemble is padded with a zero-weight second state.
pub fn brute_force_measurement(ens: &Ensemble, grid_n: usize, tol: &Tolerances) -> Result<(Povm, f64)> {
    if ens.dim() != 2 || ens.len() > 2 {
        return Err(Error::InvalidEnsemble(format!(
            "grid search needs at most two qubit states, got {} on C^{}",
            ens.len(),
            ens.dim()
        )));
    }
    let (p, states) = if ens.len() == 1 {
        (vec![1.0, 0.0], vec![ens.states()[0].clone(), ens.states()[0].clone()])
    } else {
        (ens.probs().to_vec(), ens.states().to_vec())
    };
    let q = &states[0].scale(p[0]) - &states[1].scale(p[1]);
    // error = 1 − p_2 − ⟨p_1ρ_1 − p_2ρ_2, P_1⟩ with total weight 1
    let err = |inner: f64| 1.0 - p[1] - inner;
    let mut best = (err(0.0), HermOp::zeros(2));
    let trivial = err(q.trace());
    if trivial < best.0 {
        best = (trivial, HermOp::identity(2));
    }
    let n = grid_n.max(2);
    for i in 0..n {
        let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
        for k in 0..n {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let v = HermOp::outer(&bloch_ket(theta, phi));
            let e = err(q.inner(&v));
            if e < best.0 {
                best = (e, v);
            }
        }
    }
    let p1 = best.1;
    let povm = Povm::new(vec![p1.clone(), &HermOp::identity(2) - &p1], tol)?;
    Ok((povm, best.0))
}

/// Projector onto the positive eigenspace of `p_1ρ_1 − p_2ρ_2` and its
/// complement.
pub fn helstrom(ens: &Ensemble, tol: &Tolerances) -> Result<Povm> {
    if ens.len() != 2 {
        return Err(Error::InvalidEnsemble(format!("Helstrom measurement needs 2 states, got {}", ens.len())));
    }
    let q = &ens.states()[0].scale(ens.probs()[0]) - &ens.states()[1].scale(ens.probs()[1]);
    let s = eig_herm(&q, tol)?;
    let cut = tol.rank * s.spectral_norm();
    let p1 = s.apply(|l| if l > cut { 1.0 } else { 0.0 });
    Povm::new(vec![p1.clone(), &HermOp::identity(ens.dim()) - &p1], tol)
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::DimensionMismatch("dimension must be positive".into()));
    }
    if d > DIM_CAP {
        return Err(Error::DimsTooLarge { dim: d, cap: DIM_CAP });
    }
    Ok(())
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Seeded source of random operators.
pub struct RandomSource {
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Gaussian Hermitian operator (GUE-like).
    pub fn hermitian(&mut self, d: usize) -> HermOp {
        HermOp::hermitian_part(&gaussian(&mut self.rng, d, d))
    }

    /// `GG* / Tr(GG*)` with `G` a `d × rank` Ginibre matrix.
    pub fn density_of_rank(&mut self, d: usize, rank: usize) -> HermOp {
        let g = gaussian(&mut self.rng, d, rank.max(1));
        let m = HermOp::hermitian_part(&(&g * g.adjoint()));
        let t = m.trace();
        m.scale(1.0 / t)
    }

    pub fn density(&mut self, d: usize) -> HermOp {
        self.density_of_rank(d, d)
    }

    /// Random channel with `kraus_rank` Kraus operators (raised to the
    /// minimum `⌈d_X / d_Y⌉` if needed) from a Haar-like Stinespring isometry.
    pub fn channel(&mut self, dim_out: usize, dim_in: usize, kraus_rank: usize) -> ChoiOp {
        let r = kraus_rank.max(dim_in.div_ceil(dim_out)).max(1);
        let g = gaussian(&mut self.rng, dim_out * r, dim_in);
        let v = g.qr().q();
        let kraus: Vec<CMatrix> = (0..r).map(|a| v.view((a * dim_out, 0), (dim_out, dim_in)).into_owned()).collect();
        choi_from_kraus(&kraus, &Tolerances::default()).expect("isometry blocks are trace preserving")
    }

    /// Random channel of full Kraus rank, hence a positive definite Choi operator.
    pub fn interior_channel(&mut self, dim_out: usize, dim_in: usize) -> ChoiOp {
        self.channel(dim_out, dim_in, dim_out * dim_in)
    }

    pub fn probabilities(&mut self, m: usize) -> Vec<f64> {
        let w: Vec<f64> = (0..m).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    }

    pub fn ensemble(&mut self, d: usize, m: usize) -> Ensemble {
        let probs = self.probabilities(m);
        let states = (0..m).map(|_| self.density(d)).collect();
        Ensemble::new(probs, states, &Tolerances::default()).expect("random ensemble is valid")
    }

    /// `S^{-1/2} A_k S^{-1/2}` with `A_k` Wishart and `S = Σ A_k`.
    pub fn povm(&mut self, d: usize, m: usize) -> Povm {
        let tol = Tolerances::default();
        let parts: Vec<HermOp> = (0..m).map(|_| self.density(d)).collect();
        let total = parts.iter().fold(HermOp::zeros(d), |a, b| &a + b);
        let s = eig_herm(&total, &tol).expect("finite");
        let inv_root = s.apply(|l| 1.0 / l.sqrt());
        let elements = parts.iter().map(|a| a.congruence(inv_root.matrix())).collect();
        Povm::new(elements, &tol).expect("normalized Wishart elements form a measurement")
    }

    pub fn bipartite_density(&mut self, dims: (usize, usize)) -> BipartiteState {
        let d = dims.0 * dims.1;
        BipartiteState::new(self.density(d), dims, &Tolerances::default()).expect("density operator")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Ensemble,
    StatePair,
    Channel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDims {
    pub d_x: usize,
    pub d_y: usize,
    pub d_z: usize,
    /// Number of states for ensembles.
    pub outcomes: usize,
}

#[derive(Debug, Clone)]
pub enum Instance {
    Ensemble(Ensemble),
    /// `ρ` on `X ⊗ Z` and `σ` on `Y ⊗ Z`.
    StatePair { rho: BipartiteState, sigma: BipartiteState },
    Channel(ChoiOp),
}

/// Deterministic random instance for a seed.
pub fn random_instance(kind: InstanceKind, dims: InstanceDims, seed: u64) -> Result<Instance> {
    let mut src = RandomSource::new(seed);
    Ok(match kind {
        InstanceKind::Ensemble => {
            check_dim(dims.d_x)?;
            check_dim(dims.outcomes)?;
            Instance::Ensemble(src.ensemble(dims.d_x, dims.outcomes))
        }
        InstanceKind::StatePair => {
            for d in [dims.d_x, dims.d_y, dims.d_z] {
                check_dim(d)?;
            }
            let rho = src.bipartite_density((dims.d_x, dims.d_z));
            let sigma = src.bipartite_density((dims.d_y, dims.d_z));
            Instance::StatePair { rho, sigma }
        }
        InstanceKind::Channel => {
            check_dim(dims.d_x)?;
            check_dim(dims.d_y)?;
            Instance::Channel(src.channel(dims.d_y, dims.d_x, dims.d_x * dims.d_y))
        }
    })
}
