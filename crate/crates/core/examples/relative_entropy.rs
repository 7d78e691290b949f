//! Relative-entropy objective D(σ ‖ (Φ⊗1)(ρ)). When σ is produced by a
//! channel Φ that channel is certified optimal with value 0; the objective is
//! infinite and uncertifiable when σ escapes the image of the output.

use chancert::certifier::certify_objective;
use chancert::choi::{eval_map_apply, BipartiteState, ChoiOp};
use chancert::linalg::{HermOp, Tolerances};
use chancert::objectives::ObjectiveSpec;
use chancert::oracle::{solve, RandomSource, SolverConfig};

fn main() -> chancert::Result<()> {
    let tol = Tolerances::default();
    let mut src = RandomSource::new(3);
    let rho = src.bipartite_density((2, 2));
    for rank in [4, 2, 1] {
        let phi = src.channel(2, 2, rank);
        let sigma = BipartiteState::new(eval_map_apply(&rho, &phi)?, (2, 2), &tol)?;
        let spec = ObjectiveSpec::relative_entropy(rho.clone(), sigma, &tol)?;
        let (sub, cert) = certify_objective(&spec, &phi, &tol)?;
        println!(
            "Kraus rank {rank}: D = {:.2e}, {:?} subgradient, {:?}",
            sub.value.finite().unwrap(),
            sub.kind,
            cert.verdict
        );
    }

    let sigma = src.bipartite_density((2, 2));
    let spec = ObjectiveSpec::relative_entropy(rho, sigma, &tol)?;
    let trace = solve(&spec, &SolverConfig::default(), &tol)?;
    println!("random target: min D = {:.9}, bound {:.2e}", trace.best_value, trace.final_bound);

    let pure = BipartiteState::new(HermOp::from_real_diag(&[1.0, 0.0]), (2, 1), &tol)?;
    let other = BipartiteState::new(HermOp::from_real_diag(&[0.0, 1.0]), (2, 1), &tol)?;
    let spec = ObjectiveSpec::relative_entropy(pure, other, &tol)?;
    let (sub, cert) = certify_objective(&spec, &ChoiOp::identity_channel(2), &tol)?;
    println!("disjoint supports: value {:?}, {:?}: {}", sub.value, cert.verdict, cert.reason.unwrap_or_default());
    Ok(())
}
