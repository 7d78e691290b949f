//! Suboptimality bounds for measurements rotated away from the optimum. The
//! certified bound always dominates the true gap and vanishes at the optimum.

use chancert::certifier::certify;
use chancert::choi::{q2c_choi, Ensemble, Povm};
use chancert::linalg::{HermOp, Tolerances};
use chancert::objectives::discrimination_objective;
use chancert::oracle::{bloch_ket, helstrom};

fn main() -> chancert::Result<()> {
    let tol = Tolerances::default();
    let zero = HermOp::outer(&bloch_ket(0.0, 0.0));
    let plus = HermOp::outer(&bloch_ket(std::f64::consts::FRAC_PI_2, 0.0));
    let ens = Ensemble::new(vec![0.5, 0.5], vec![zero, plus], &tol)?;
    let h0 = discrimination_objective(&ens);
    let optimum = ens.error_probability(&helstrom(&ens, &tol)?);

    println!("{:>8} {:>12} {:>12} {:>12}  verdict", "angle", "error", "gap", "bound");
    for k in 0..=8 {
        let delta = 0.15 * k as f64;
        let v = HermOp::outer(&bloch_ket(-std::f64::consts::FRAC_PI_4 + delta, 0.0));
        let povm = Povm::new(vec![v.clone(), &HermOp::identity(2) - &v], &tol)?;
        let cert = certify(&h0, &q2c_choi(&povm), &tol)?;
        let err = ens.error_probability(&povm);
        println!("{delta:>8.2} {err:>12.6} {:>12.2e} {:>12.2e}  {:?}", err - optimum, cert.bound, cert.verdict);
    }
    Ok(())
}
