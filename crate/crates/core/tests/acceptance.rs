//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use chancert::certifier::{certify, certify_objective, hykl_check, subopt_bound, Verdict};
use chancert::choi::{eval_map_apply, povm_from_choi, q2c_choi, BipartiteState, ChoiOp, Povm};
use chancert::conjecture::{run_conjecture, ConjectureConfig};
use chancert::linalg::{dist_to_psd, eig_herm, embed_left, inner, partial_trace, pinv_psd, spectral_norm, Factor};
use chancert::objectives::{discrimination_objective, FidelityPair, ObjectiveSpec};
use chancert::oracle::{brute_force_measurement, helstrom, solve, RandomSource, SolverConfig};
use common::{directional_fd, helstrom_ensemble, interior_channel, tangent, tol, HELSTROM_ERROR};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mix_povm(a: &Povm, b: &Povm, w: f64) -> Povm {
    let elems = a.elements().iter().zip(b.elements()).map(|(x, y)| &x.scale(1.0 - w) + &y.scale(w)).collect();
    Povm::new(elems, &tol()).unwrap()
}

fn hykl_equivalence() -> Outcome {
    let t = tol();
    let cfg = SolverConfig::default();
    let (mut agree, mut total, mut optimal, mut worst) = (0, 0, 0, 0.0f64);
    for seed in 0..200u64 {
        let mut src = RandomSource::new(seed);
        let d = 2 + seed as usize % 2;
        let m = 2 + (seed as usize / 2) % 2;
        let ens = src.ensemble(d, m);
        let best = if m == 2 {
            helstrom(&ens, &t).unwrap()
        } else {
            povm_from_choi(&solve(&ObjectiveSpec::discrimination(&ens), &cfg, &t).unwrap().best_j)
        };
        let perturbed = mix_povm(&best, &src.povm(d, m), 0.2);
        let h0 = discrimination_objective(&ens);
        for p in [&best, &perturbed] {
            let c = certify(&h0, &q2c_choi(p), &t).unwrap();
            let r = hykl_check(&ens, p, &t).unwrap();
            total += 1;
            if r.optimal == (c.verdict == Verdict::CertifiedOptimal) {
                agree += 1;
            }
            optimal += r.optimal as usize;
            worst = worst
                .max((r.herm_defect - c.herm_defect).abs())
                .max((r.min_eig() - c.min_eig).abs())
                .max((r.scale - c.scale).abs());
        }
    }
    outcome(
        agree == total && worst <= 1e-10,
        format!("{agree}/{total} verdicts agree ({optimal} optimal), max defect mismatch {worst:.2e}"),
    )
}

fn helstrom_reproduction() -> Outcome {
    let t = tol();
    let ens = helstrom_ensemble();
    let (_, grid) = brute_force_measurement(&ens, 400, &t).unwrap();
    let trace = solve(&ObjectiveSpec::discrimination(&ens), &SolverConfig::default(), &t).unwrap();
    let best = helstrom(&ens, &t).unwrap();
    let cert = certify(&discrimination_objective(&ens), &q2c_choi(&best), &t).unwrap();
    let certified = ens.error_probability(&best);
    let values = [grid, trace.best_value, certified];
    let close = values.iter().all(|v| (v - HELSTROM_ERROR).abs() <= 1e-3);
    outcome(
        close && cert.verdict == Verdict::CertifiedOptimal && cert.epsilon <= 1e-6,
        format!(
            "grid {grid:.6} solve {:.6} certified {certified:.6}, epsilon {:.2e}",
            trace.best_value, cert.epsilon
        ),
    )
}

fn gradient_fidelity() -> Outcome {
    let t = tol();
    let (mut worst, mut checks) = (0.0f64, 0);
    for seed in 0..50u64 {
        let mut src = RandomSource::new(10_000 + seed);
        let dx = 1 + seed as usize % 4;
        let dy = 2 + (seed as usize / 4) % 3;
        let dz = 1 + (seed as usize / 12) % 2;
        let rho = src.bipartite_density((dx, dz));
        let sigma = src.bipartite_density((dy, dz));
        let pairs = (0..2).map(|_| FidelityPair { weight: 0.5, rho: src.density(dx), sigma: src.density(dy) }).collect();
        let specs = [
            ObjectiveSpec::fidelity(rho.clone(), sigma.clone(), &t).unwrap(),
            ObjectiveSpec::fidelity_squared(pairs, &t).unwrap(),
            ObjectiveSpec::relative_entropy(rho, sigma, &t).unwrap(),
        ];
        let j = interior_channel(&mut src, dy, dx, dx * dy);
        for spec in &specs {
            let h = spec.evaluate(&j, &t).unwrap().h;
            for _ in 0..5 {
                let z = tangent(&mut src, dy, dx);
                let fd = directional_fd(spec, &j, &z, 1e-5);
                let an = h.inner(&z);
                worst = worst.max((fd - an).abs() / an.abs().max(1e-300));
                checks += 1;
            }
        }
    }
    outcome(worst <= 1e-5, format!("{checks} directional derivatives, max relative error {worst:.2e}"))
}

fn soundness() -> Outcome {
    let t = tol();
    let cfg = SolverConfig::default();
    let (mut ok, mut converged, mut slack) = (0, 0, f64::INFINITY);
    for seed in 0..50u64 {
        let mut src = RandomSource::new(20_000 + seed);
        let dy = 2 + seed as usize % 2;
        let dx = 2 + (seed as usize / 2) % 2;
        let h0 = src.hermitian(dy * dx);
        let trace = solve(&ObjectiveSpec::linear(h0.clone(), dy, dx).unwrap(), &cfg, &t).unwrap();
        converged += trace.converged as usize;
        let rank = 1 + seed as usize % (dy * dx);
        let j = src.channel(dy, dx, rank);
        let bound = subopt_bound(&h0, &j, &t).unwrap();
        let margin = bound + 1e-6 * (1.0 + h0.spectral_norm()) - (h0.inner(j.op()) - trace.best_value);
        slack = slack.min(margin);
        ok += (margin >= 0.0) as usize;
    }
    outcome(ok == 50, format!("{ok}/50 within bound ({converged} oracle runs converged), min margin {slack:.2e}"))
}

fn self_transformations() -> Outcome {
    let t = tol();
    let (mut fid_ok, mut re_ok, mut worst) = (0, 0, 0.0f64);
    for seed in 0..20u64 {
        let mut src = RandomSource::new(30_000 + seed);
        let d = 2 + seed as usize % 2;
        let dz = 1 + (seed as usize / 2) % 2;
        let rho = src.bipartite_density((d, dz));
        let id = ChoiOp::identity_channel(d);
        let sigma = BipartiteState::new(eval_map_apply(&rho, &id).unwrap(), (d, dz), &t).unwrap();
        let (sub, c) = certify_objective(&ObjectiveSpec::fidelity(rho.clone(), sigma, &t).unwrap(), &id, &t).unwrap();
        let v = sub.value.finite().unwrap();
        worst = worst.max((v + 1.0).abs());
        fid_ok += (c.verdict == Verdict::CertifiedOptimal && (v + 1.0).abs() <= 1e-8) as usize;

        let dy = 2 + (seed as usize / 4) % 2;
        let rank = 1 + seed as usize % (d * dy);
        let phi = src.channel(dy, d, rank);
        let sigma = BipartiteState::new(eval_map_apply(&rho, &phi).unwrap(), (dy, dz), &t).unwrap();
        let (sub, c) = certify_objective(&ObjectiveSpec::relative_entropy(rho, sigma, &t).unwrap(), &phi, &t).unwrap();
        let v = sub.value.finite().unwrap_or(f64::INFINITY);
        worst = worst.max(v.abs());
        re_ok += (c.verdict == Verdict::CertifiedOptimal && v.abs() <= 1e-8) as usize;
    }
    outcome(
        fid_ok + re_ok == 40,
        format!("fidelity {fid_ok}/20, relative entropy {re_ok}/20 certified optimal, max value error {worst:.2e}"),
    )
}

fn subgradient_inequality() -> Outcome {
    let t = tol();
    let mut lines = Vec::new();
    let mut pass = true;
    let families = ["linear", "fidelity", "fidelity_squared_ensemble", "trace_distance", "relative_entropy"];
    for (fi, family) in families.iter().enumerate() {
        let mut src = RandomSource::new(40_000 + fi as u64);
        let (mut checked, mut violations, mut attempts, mut worst) = (0, 0, 0, f64::INFINITY);
        while checked < 100 && attempts < 1000 {
            attempts += 1;
            let dx = 1 + src.uniform().mul_add(2.0, 0.0) as usize;
            let dy = 1 + src.uniform().mul_add(2.0, 0.0) as usize;
            let dz = 1 + src.uniform().mul_add(2.0, 0.0) as usize;
            let spec = match *family {
                "linear" => ObjectiveSpec::linear(src.hermitian(dx * dy), dy, dx).unwrap(),
                "fidelity" => ObjectiveSpec::fidelity(src.bipartite_density((dx, dz)), src.bipartite_density((dy, dz)), &t).unwrap(),
                "fidelity_squared_ensemble" => {
                    let pairs = (0..3)
                        .map(|_| FidelityPair { weight: 1.0 / 3.0, rho: src.density(dx), sigma: src.density(dy) })
                        .collect();
                    ObjectiveSpec::fidelity_squared(pairs, &t).unwrap()
                }
                "trace_distance" => {
                    ObjectiveSpec::trace_distance(src.bipartite_density((dx, dz)), src.bipartite_density((dy, dz))).unwrap()
                }
                _ => ObjectiveSpec::relative_entropy(src.bipartite_density((dx, dz)), src.bipartite_density((dy, dz)), &t)
                    .unwrap(),
            };
            let n = dx * dy;
            let r1 = 1 + (src.uniform() * n as f64) as usize;
            let r2 = 1 + (src.uniform() * n as f64) as usize;
            let j = src.channel(dy, dx, r1.min(n));
            let jp = src.channel(dy, dx, r2.min(n));
            let res = spec.evaluate(&j, &t).unwrap();
            let (Some(f), true) = (res.value.finite(), res.is_subgradient()) else { continue };
            checked += 1;
            let Some(fp) = spec.value(&jp, &t).unwrap().finite() else { continue };
            let scale = 1.0 + res.h.spectral_norm();
            let margin = (fp - f) - res.h.inner(&(jp.op() - j.op())) + 1e-8 * scale;
            worst = worst.min(margin);
            violations += (margin < 0.0) as usize;
        }
        pass &= checked == 100 && violations == 0;
        lines.push(format!("{family} {}/{checked} (min margin {worst:.1e})", checked - violations));
    }
    outcome(pass, lines.join(", "))
}

fn conjecture_harness() -> Outcome {
    let (records, s) = run_conjecture(&ConjectureConfig::default(), &tol());
    outcome(
        records.len() == 100 && s.full_rank_failures == 0 && s.errors == 0,
        format!(
            "{} trials: {} supports, {} undecided, {} counterexample candidates, {} full-rank failures, {} errors",
            s.trials, s.supports, s.undecided, s.counterexample_candidates, s.full_rank_failures, s.errors
        ),
    )
}

fn linalg_properties() -> Outcome {
    let t = tol();
    let (mut recon, mut pinv, mut adj, mut dist) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for seed in 0..100u64 {
        let mut src = RandomSource::new(50_000 + seed);
        let d = 1 + seed as usize % 8;
        let a = src.hermitian(d);
        let s = eig_herm(&a, &t).unwrap();
        recon = recon.max((&s.reconstruct() - &a).spectral_norm() / a.spectral_norm());
        let (eps, _) = dist_to_psd(a.matrix(), &t).unwrap();
        dist = dist.max((eps - (-s.min()).max(0.0)).abs());

        let dp = 2 + seed as usize % 6;
        let rank = (dp - 1).max(1);
        let p = src.density_of_rank(dp, rank);
        let pi = pinv_psd(&p, &t).unwrap();
        let (pm, im) = (p.matrix(), pi.matrix());
        pinv = pinv.max(spectral_norm(&(pm * im * pm - pm))).max(spectral_norm(&(im * pm * im - im)));

        let (dy, dx) = (1 + seed as usize % 3, 1 + (seed as usize / 3) % 3);
        let big = src.hermitian(dy * dx);
        let small = src.hermitian(dx);
        let lhs = inner(&partial_trace(big.matrix(), (dy, dx), Factor::First).unwrap(), small.matrix());
        let rhs = inner(big.matrix(), &embed_left(dy, small.matrix()));
        adj = adj.max((lhs - rhs).norm() / (1.0 + big.frobenius_norm() * small.frobenius_norm()));
    }
    outcome(
        recon <= 1e-10 && pinv <= 1e-9 && adj <= 1e-12 && dist == 0.0,
        format!("reconstruction {recon:.1e}, pinv {pinv:.1e}, partial-trace adjoint {adj:.1e}, dist_to_psd {dist:.1e}"),
    )
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("1 hykl-equivalence", Duration::from_secs(30), hykl_equivalence),
        ("2 helstrom-reproduction", Duration::from_secs(10), helstrom_reproduction),
        ("3 gradient-fidelity", Duration::from_secs(60), gradient_fidelity),
        ("4 bound-soundness", Duration::from_secs(60), soundness),
        ("5 self-transformations", Duration::from_secs(30), self_transformations),
        ("6 subgradient-inequality", Duration::from_secs(60), subgradient_inequality),
        ("7 conjecture-harness", Duration::from_secs(300), conjecture_harness),
        ("8 linalg-properties", Duration::from_secs(30), linalg_properties),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, limit, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= limit;
        failed += !pass as usize;
        println!(
            "{} {name}: {} [{:.2}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
