//! Frobenius projection onto the set of Choi operators of channels, checked
//! against the variational inequality ⟨X − P, C − P⟩ ≤ 0 for random channels C.

use chancert::linalg::Tolerances;
use chancert::oracle::{project_channel, RandomSource, SolverConfig};

fn main() -> chancert::Result<()> {
    let tol = Tolerances::default();
    let cfg = SolverConfig::default();
    let mut src = RandomSource::new(1);
    for (dy, dx) in [(2, 2), (3, 2), (2, 4)] {
        let x = src.hermitian(dy * dx);
        let p = project_channel(&x, (dy, dx), &cfg, &tol)?;
        let check = p.check(&tol)?;
        let resid = &x - p.op();
        let worst = (0..50)
            .map(|_| resid.inner(&(src.channel(dy, dx, 2).op() - p.op())))
            .fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{dy}x{dx}: distance {:.4}, min eigenvalue {:.1e}, trace defect {:.1e}, max <X-P, C-P> {worst:.1e}",
            resid.frobenius_norm(),
            check.min_eig,
            check.tp_defect
        );
    }
    Ok(())
}
