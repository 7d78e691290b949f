//! Fidelity of recovery: find the channel on X that best maps one half of a
//! random bipartite state to a target, then certify the result. With the
//! target equal to the input, the identity channel is certified optimal.

use chancert::certifier::certify_objective;
use chancert::choi::ChoiOp;
use chancert::linalg::Tolerances;
use chancert::objectives::ObjectiveSpec;
use chancert::oracle::{solve, RandomSource, SolverConfig};

fn main() -> chancert::Result<()> {
    let tol = Tolerances::default();
    let mut src = RandomSource::new(7);
    let rho = src.bipartite_density((2, 2));

    let spec = ObjectiveSpec::fidelity(rho.clone(), rho.clone(), &tol)?;
    let (sub, cert) = certify_objective(&spec, &ChoiOp::identity_channel(2), &tol)?;
    println!("identity channel: F = {:.12}, {:?}", -sub.value.finite().unwrap(), cert.verdict);

    let sigma = src.bipartite_density((2, 2));
    let spec = ObjectiveSpec::fidelity(rho, sigma, &tol)?;
    let trace = solve(&spec, &SolverConfig::default(), &tol)?;
    let (sub, cert) = certify_objective(&spec, &trace.best_j, &tol)?;
    println!(
        "random target: best F = {:.9} after {} iterations ({:?})",
        -trace.best_value, trace.iterations, trace.stop_reason
    );
    println!("  gradient {:?}, {:?}, bound {:.2e}", sub.kind, cert.verdict, cert.bound);
    Ok(())
}
