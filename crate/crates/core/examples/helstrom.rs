//! Minimum-error discrimination of |0⟩ and |+⟩: the Helstrom measurement,
//! a grid search, and the projected-subgradient oracle all land on the same
//! error probability, and the certifier proves the Helstrom measurement optimal.

use chancert::certifier::{certify, hykl_check};
use chancert::choi::{q2c_choi, Ensemble};
use chancert::linalg::{HermOp, Tolerances};
use chancert::objectives::{discrimination_objective, ObjectiveSpec};
use chancert::oracle::{bloch_ket, brute_force_measurement, helstrom, solve, SolverConfig};

fn main() -> chancert::Result<()> {
    let tol = Tolerances::default();
    let zero = HermOp::outer(&bloch_ket(0.0, 0.0));
    let plus = HermOp::outer(&bloch_ket(std::f64::consts::FRAC_PI_2, 0.0));
    let ens = Ensemble::new(vec![0.5, 0.5], vec![zero, plus], &tol)?;

    let best = helstrom(&ens, &tol)?;
    let (_, grid) = brute_force_measurement(&ens, 400, &tol)?;
    let trace = solve(&ObjectiveSpec::discrimination(&ens), &SolverConfig::default(), &tol)?;
    println!("exact (1 - 1/sqrt 2)/2 = {:.9}", (1.0 - 0.5f64.sqrt()) / 2.0);
    println!("helstrom               = {:.9}", ens.error_probability(&best));
    println!("grid search (400x400)  = {grid:.9}");
    println!("oracle ({} iterations)  = {:.9}", trace.iterations, trace.best_value);

    let h0 = discrimination_objective(&ens);
    let cert = certify(&h0, &q2c_choi(&best), &tol)?;
    println!("certificate: {:?}, epsilon {:.2e}", cert.verdict, cert.epsilon);
    let report = hykl_check(&ens, &best, &tol)?;
    println!("measurement conditions hold: {} (min eigenvalue {:.2e})", report.optimal, report.min_eig());
    Ok(())
}
