#![allow(dead_code)]

use chancert::choi::{ChoiOp, Ensemble};
use chancert::linalg::{embed_left, partial_trace, Factor, HermOp, Tolerances};
use chancert::objectives::ObjectiveSpec;
use chancert::oracle::RandomSource;
use nalgebra::DVector;
use num_complex::Complex64;

pub const HELSTROM_ERROR: f64 = 0.146_446_609_406_726_24;

pub fn tol() -> Tolerances {
    Tolerances::default()
}

pub fn ket(v: &[(f64, f64)]) -> HermOp {
    HermOp::outer(&DVector::from_iterator(v.len(), v.iter().map(|&(a, b)| Complex64::new(a, b))))
}

/// `{(1/2, |0⟩⟨0|), (1/2, |+⟩⟨+|)}`.
pub fn helstrom_ensemble() -> Ensemble {
    let s = 0.5f64.sqrt();
    Ensemble::new(vec![0.5, 0.5], vec![ket(&[(1.0, 0.0), (0.0, 0.0)]), ket(&[(s, 0.0), (s, 0.0)])], &tol()).unwrap()
}

/// Random unit-Frobenius Hermitian `Z` on `Y ⊗ X` with `Tr_Y Z = 0`, so
/// `J ± tZ` stays trace preserving.
pub fn tangent(src: &mut RandomSource, dy: usize, dx: usize) -> HermOp {
    let z = src.hermitian(dy * dx);
    let r = partial_trace(z.matrix(), (dy, dx), Factor::First).unwrap();
    let fixed = HermOp::hermitian_part(&(z.matrix() - embed_left(dy, &r) * Complex64::new(1.0 / dy as f64, 0.0)));
    let n = fixed.frobenius_norm();
    fixed.scale(1.0 / n)
}

/// Central difference of the objective along `z` at `j`.
pub fn directional_fd(spec: &ObjectiveSpec, j: &ChoiOp, z: &HermOp, h: f64) -> f64 {
    let t = tol();
    let (dy, dx) = (j.dim_out(), j.dim_in());
    let plus = ChoiOp::new_unchecked(j.op() + &z.scale(h), dy, dx);
    let minus = ChoiOp::new_unchecked(j.op() - &z.scale(h), dy, dx);
    let fp = spec.value(&plus, &t).unwrap().finite().unwrap();
    let fm = spec.value(&minus, &t).unwrap().finite().unwrap();
    (fp - fm) / (2.0 * h)
}

/// Strictly interior channel: a random channel mixed half-and-half with the
/// depolarizing one.
pub fn interior_channel(src: &mut RandomSource, dy: usize, dx: usize, kraus_rank: usize) -> ChoiOp {
    src.channel(dy, dx, kraus_rank).mix(&ChoiOp::depolarizing(dy, dx), 0.5)
}
