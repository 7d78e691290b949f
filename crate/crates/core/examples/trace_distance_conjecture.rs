//! Sign-witness experiment for trace-distance channel optimization on qubits.
//! Each trial solves a random instance and tests whether sign(σ − (Φ⊗1)(ρ))
//! already certifies the solver's channel.

use chancert::conjecture::{run_conjecture, Classification, ConjectureConfig};
use chancert::linalg::Tolerances;

fn main() {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let cfg = ConjectureConfig { trials, ..ConjectureConfig::default() };
    let (records, summary) = run_conjecture(&cfg, &Tolerances::default());
    for r in &records {
        let tag = match r.classification {
            Classification::Supports => "supports",
            Classification::Undecided => "undecided",
            Classification::CounterexampleCandidate => "CANDIDATE",
            Classification::FullRankFailure => "FULL-RANK FAILURE",
        };
        println!(
            "trial {:>3}: value {:.6} solver bound {:.1e} zero eigenvalues {} -> {tag}",
            r.trial, r.best_value, r.solver_bound, r.zero_eigenvalues
        );
    }
    println!("{summary:?}");
}
