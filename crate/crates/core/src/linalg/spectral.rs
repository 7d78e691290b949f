use nalgebra::SymmetricEigen;

use super::{CMatrix, HermOp, Tolerances};
use crate::{Error, Result};

const EIG_MAX_ITERS: usize = 10_000;

/// Spectral decomposition `A = Σ_k λ_k Π_k` with eigenvalues grouped into
/// clusters. Eigenvalues closer than `τ_rank · max(1, ‖A‖_∞)` to their
/// neighbour share a cluster, whose value is the cluster mean.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    /// Distinct (clustered) eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// One orthogonal projector per cluster.
    pub projectors: Vec<HermOp>,
    pub multiplicities: Vec<usize>,
    /// Individual eigenvalues, ascending, as returned by the eigensolver.
    pub raw_eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `raw_eigenvalues`.
    pub eigenvectors: CMatrix,
    /// Cluster index of every raw eigenvalue.
    pub cluster_of: Vec<usize>,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.raw_eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.raw_eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.raw_eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn spectral_norm(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Clustered eigenvalue attached to the `i`-th raw eigenvector.
    pub fn clustered(&self, i: usize) -> f64 {
        self.eigenvalues[self.cluster_of[i]]
    }

    /// `Σ_i f(λ_i) v_i v_i†`, evaluated on clustered eigenvalues.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> HermOp {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for i in 0..self.dim() {
            let s = f(self.clustered(i));
            scaled.column_mut(i).iter_mut().for_each(|z| *z *= s);
        }
        HermOp::hermitian_part(&(scaled * v.adjoint()))
    }

    pub fn reconstruct(&self) -> HermOp {
        self.apply(|x| x)
    }

    /// Rank cutoff used for supports, pseudo-inverses, and images:
    /// eigenvalues strictly above `τ_rank · λ_max` count as nonzero.
    pub fn support_cutoff(&self, tol: &Tolerances) -> f64 {
        tol.rank * self.max().max(0.0)
    }

    /// Columns spanning the eigenspaces selected by `keep`, ordered by
    /// descending eigenvalue.
    pub fn eigenvectors_where<P: Fn(f64) -> bool>(&self, keep: P) -> CMatrix {
        let idx: Vec<usize> = (0..self.dim()).rev().filter(|&i| keep(self.raw_eigenvalues[i])).collect();
        let mut out = CMatrix::zeros(self.dim(), idx.len());
        for (c, &i) in idx.iter().enumerate() {
            out.set_column(c, &self.eigenvectors.column(i));
        }
        out
    }

    /// Isometry onto the support (eigenvalues above the rank cutoff),
    /// columns ordered by descending eigenvalue.
    pub fn support(&self, tol: &Tolerances) -> CMatrix {
        let cut = self.support_cutoff(tol);
        if self.max() <= 0.0 {
            return CMatrix::zeros(self.dim(), 0);
        }
        self.eigenvectors_where(|l| l > cut)
    }

    pub fn rank(&self, tol: &Tolerances) -> usize {
        self.support(tol).ncols()
    }
}

/// Hermitian eigendecomposition with eigenvalue clustering.
pub fn eig_herm(a: &HermOp, tol: &Tolerances) -> Result<SpectralDecomp> {
    let d = a.dim();
    if d == 0 {
        return Ok(SpectralDecomp {
            eigenvalues: vec![],
            projectors: vec![],
            multiplicities: vec![],
            raw_eigenvalues: vec![],
            eigenvectors: CMatrix::zeros(0, 0),
            cluster_of: vec![],
        });
    }
    let eig = SymmetricEigen::try_new(a.matrix().clone(), 1e-15, EIG_MAX_ITERS)
        .ok_or(Error::EigenNonConvergence { dim: d, norm: a.frobenius_norm() })?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let raw: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(d, d);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }

    let norm = raw[0].abs().max(raw[d - 1].abs());
    let gap = tol.rank * norm.max(1.0);
    let mut cluster_of = vec![0usize; d];
    let mut members: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..d {
        if raw[i] - raw[i - 1] > gap {
            members.push(vec![]);
        }
        members.last_mut().unwrap().push(i);
        cluster_of[i] = members.len() - 1;
    }

    let mut eigenvalues = Vec::with_capacity(members.len());
    let mut projectors = Vec::with_capacity(members.len());
    let mut multiplicities = Vec::with_capacity(members.len());
    for m in &members {
        eigenvalues.push(m.iter().map(|&i| raw[i]).sum::<f64>() / m.len() as f64);
        let mut cols = CMatrix::zeros(d, m.len());
        for (c, &i) in m.iter().enumerate() {
            cols.set_column(c, &vecs.column(i));
        }
        projectors.push(HermOp::hermitian_part(&(&cols * cols.adjoint())));
        multiplicities.push(m.len());
    }

    Ok(SpectralDecomp {
        eigenvalues,
        projectors,
        multiplicities,
        raw_eigenvalues: raw,
        eigenvectors: vecs,
        cluster_of,
    })
}

fn check_psd(s: &SpectralDecomp, tol: &Tolerances) -> Result<()> {
    let floor = -tol.psd * s.spectral_norm().max(1.0);
    if s.min() < floor {
        return Err(Error::NotPsd { min_eig: s.min() });
    }
    Ok(())
}

/// Moore–Penrose pseudo-inverse of a PSD operator: inverse on eigenspaces
/// above `τ_rank · λ_max`, zero elsewhere.
pub fn pinv_psd(a: &HermOp, tol: &Tolerances) -> Result<HermOp> {
    let s = eig_herm(a, tol)?;
    check_psd(&s, tol)?;
    let cut = s.support_cutoff(tol);
    Ok(s.apply(|l| if l > cut && l > 0.0 { 1.0 / l } else { 0.0 }))
}

/// Principal square root of a PSD operator. Eigenvalues in
/// `(-τ_psd · ‖A‖_∞, 0)` are clamped to zero.
pub fn mat_sqrt(a: &HermOp, tol: &Tolerances) -> Result<HermOp> {
    let s = eig_herm(a, tol)?;
    check_psd(&s, tol)?;
    Ok(s.apply(|l| l.max(0.0).sqrt()))
}

/// Pseudo-inverse square root `A^{+1/2}` of a PSD operator on its support.
pub(crate) fn pinv_sqrt_psd(s: &SpectralDecomp, tol: &Tolerances) -> HermOp {
    let cut = s.support_cutoff(tol);
    s.apply(|l| if l > cut && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 })
}

pub(crate) fn require_psd(s: &SpectralDecomp, tol: &Tolerances) -> Result<()> {
    check_psd(s, tol)
}
