mod common;

use chancert::certifier::{certify, certify_objective, hykl_check, linear_dual_value, subopt_bound, Verdict};
use chancert::choi::{eval_map_apply, q2c_choi, BipartiteState, ChoiOp, Ensemble, Povm};
use chancert::linalg::{embed_left, HermOp};
use chancert::objectives::{discrimination_objective, FidelityPair, ObjectiveSpec};
use chancert::oracle::{helstrom, solve, RandomSource, SolverConfig};
use common::{helstrom_ensemble, tol};

fn mix_povm(a: &Povm, b: &Povm, w: f64) -> Povm {
    let elems = a.elements().iter().zip(b.elements()).map(|(x, y)| &x.scale(1.0 - w) + &y.scale(w)).collect();
    Povm::new(elems, &tol()).unwrap()
}

fn dual_pair(h0: &HermOp, j: &ChoiOp) -> (HermOp, HermOp, f64) {
    let t = tol();
    let c = certify(h0, j, &t).unwrap();
    let dx = j.dim_in();
    let shift = c.min_eig.min(0.0);
    let z = &c.z + &HermOp::identity(dx).scale(shift);
    let y = h0 - &HermOp::hermitian_part(&embed_left(j.dim_out(), z.matrix()));
    let v = linear_dual_value(h0, &y, &z, &t).unwrap();
    (y, z, v)
}

#[test]
fn soundness_against_solver() {
    let t = tol();
    let cfg = SolverConfig::default();
    for seed in 0..15u64 {
        let mut src = RandomSource::new(seed);
        let (dy, dx) = (2 + seed as usize % 2, 2);
        let h0 = src.hermitian(dy * dx);
        let spec = ObjectiveSpec::linear(h0.clone(), dy, dx).unwrap();
        let best = solve(&spec, &cfg, &t).unwrap().best_value;
        for _ in 0..5 {
            let rank = 1 + (src.uniform() * (dx * dy) as f64) as usize;
            let j = src.channel(dy, dx, rank.min(dx * dy));
            let bound = subopt_bound(&h0, &j, &t).unwrap();
            let scale = 1.0 + h0.spectral_norm();
            assert!(h0.inner(j.op()) - best <= bound + 1e-6 * scale);
        }
    }
}

#[test]
fn weak_duality() {
    let t = tol();
    for seed in 0..20u64 {
        let mut src = RandomSource::new(50 + seed);
        let (dy, dx) = (2, 2 + seed as usize % 2);
        let h0 = src.hermitian(dy * dx);
        let j = src.channel(dy, dx, 2);
        let (_, _, dual) = dual_pair(&h0, &j);
        assert!(dual.is_finite());
        for _ in 0..10 {
            let other = src.channel(dy, dx, 1 + seed as usize % 4);
            assert!(dual <= h0.inner(other.op()) + 1e-9);
        }
        // the certified gap is never smaller than what the dual pair proves
        assert!(h0.inner(j.op()) - dual <= subopt_bound(&h0, &j, &t).unwrap() + 1e-9);
    }
}

#[test]
fn strong_duality_at_helstrom_optimum() {
    let t = tol();
    let ens = helstrom_ensemble();
    let h0 = discrimination_objective(&ens);
    let j = q2c_choi(&helstrom(&ens, &t).unwrap());
    let (_, _, dual) = dual_pair(&h0, &j);
    assert!((dual - h0.inner(j.op())).abs() < 1e-12);
}

#[test]
fn hykl_matches_choi_certificate() {
    let t = tol();
    for seed in 0..60u64 {
        let mut src = RandomSource::new(seed);
        let d = 2 + seed as usize % 2;
        let m = 2 + (seed as usize / 2) % 2;
        let ens = src.ensemble(d, m);
        let povm = if m == 2 && seed % 3 != 0 {
            helstrom(&ens, &t).unwrap()
        } else {
            src.povm(d, m)
        };
        let h0 = discrimination_objective(&ens);
        let c = certify(&h0, &q2c_choi(&povm), &t).unwrap();
        let r = hykl_check(&ens, &povm, &t).unwrap();
        assert_eq!(r.optimal, c.verdict == Verdict::CertifiedOptimal, "seed {seed}");
        assert!((r.herm_defect - c.herm_defect).abs() <= 1e-10);
        assert!((r.min_eig() - c.min_eig).abs() <= 1e-10);
        assert!((r.scale - c.scale).abs() <= 1e-10);
    }
}

#[test]
fn exact_at_optimum() {
    let t = tol();
    for seed in 0..30u64 {
        let ens = RandomSource::new(seed).ensemble(2 + seed as usize % 2, 2);
        let p = helstrom(&ens, &t).unwrap();
        let c = certify(&discrimination_objective(&ens), &q2c_choi(&p), &t).unwrap();
        assert_eq!(c.verdict, Verdict::CertifiedOptimal);
        assert!(c.epsilon <= 1e-9);
        assert!(hykl_check(&ens, &p, &t).unwrap().optimal);
    }
}

#[test]
fn near_optimal_bound_covers_the_gap() {
    let t = tol();
    for seed in 0..30u64 {
        let mut src = RandomSource::new(seed);
        let ens = src.ensemble(2, 2);
        let best = helstrom(&ens, &t).unwrap();
        let other = src.povm(2, 2);
        let pert = mix_povm(&best, &other, 0.3);
        let h0 = discrimination_objective(&ens);
        let gap = ens.error_probability(&pert) - ens.error_probability(&best);
        let c = certify(&h0, &q2c_choi(&pert), &t).unwrap();
        assert!(gap <= c.bound + 1e-12);
        if gap > 1e-6 {
            assert_eq!(c.verdict, Verdict::CertifiedNearOptimal);
        }
    }
}

#[test]
fn dual_is_stable_across_optimal_channels() {
    let t = tol();
    let cfg = SolverConfig::default();
    for seed in 0..10u64 {
        let ens = if seed == 0 { helstrom_ensemble() } else { RandomSource::new(seed).ensemble(2, 2) };
        let h0 = discrimination_objective(&ens);
        let exact = q2c_choi(&helstrom(&ens, &t).unwrap());
        let spec = ObjectiveSpec::discrimination(&ens);
        let solved = solve(&spec, &cfg, &t).unwrap();
        let z_exact = certify(&h0, &exact, &t).unwrap().z;
        let z_solved = certify(&h0, &solved.best_j, &t).unwrap().z;
        assert!((&z_exact - &z_solved).spectral_norm() <= 1e-4, "seed {seed}");
    }
}

#[test]
fn self_transformations_certify() {
    let t = tol();
    for seed in 0..5u64 {
        let mut src = RandomSource::new(seed);
        let rho = src.bipartite_density((2, 2));
        let id = ChoiOp::identity_channel(2);
        let sigma = BipartiteState::new(eval_map_apply(&rho, &id).unwrap(), (2, 2), &t).unwrap();
        let spec = ObjectiveSpec::fidelity(rho.clone(), sigma, &t).unwrap();
        let (sub, c) = certify_objective(&spec, &id, &t).unwrap();
        assert!((sub.value.finite().unwrap() + 1.0).abs() < 1e-9);
        assert_eq!(c.verdict, Verdict::CertifiedOptimal);

        let phi = src.channel(2, 2, 2);
        let sigma = BipartiteState::new(eval_map_apply(&rho, &phi).unwrap(), (2, 2), &t).unwrap();
        let spec = ObjectiveSpec::relative_entropy(rho, sigma, &t).unwrap();
        let (sub, c) = certify_objective(&spec, &phi, &t).unwrap();
        assert!(sub.value.finite().unwrap().abs() < 1e-9);
        assert_eq!(c.verdict, Verdict::CertifiedOptimal);
    }
}

#[test]
fn subgradient_inequality_all_families() {
    let t = tol();
    for seed in 0..20u64 {
        let mut src = RandomSource::new(700 + seed);
        let (dx, dy, dz) = (2, 2, 1 + seed as usize % 2);
        let rho = src.bipartite_density((dx, dz));
        let sigma = src.bipartite_density((dy, dz));
        let pairs = vec![
            FidelityPair { weight: 0.4, rho: src.density(dx), sigma: src.density(dy) },
            FidelityPair { weight: 0.6, rho: src.density(dx), sigma: src.density(dy) },
        ];
        let specs = [
            ObjectiveSpec::linear(src.hermitian(dx * dy), dy, dx).unwrap(),
            ObjectiveSpec::fidelity(rho.clone(), sigma.clone(), &t).unwrap(),
            ObjectiveSpec::fidelity_squared(pairs, &t).unwrap(),
            ObjectiveSpec::trace_distance(rho.clone(), sigma.clone()).unwrap(),
            ObjectiveSpec::relative_entropy(rho, sigma, &t).unwrap(),
        ];
        for spec in &specs {
            for _ in 0..5 {
                let r1 = 1 + (src.uniform() * 4.0) as usize;
                let r2 = 1 + (src.uniform() * 4.0) as usize;
                let j = src.channel(dy, dx, r1.min(4));
                let jp = src.channel(dy, dx, r2.min(4));
                let res = spec.evaluate(&j, &t).unwrap();
                let (Some(f), true) = (res.value.finite(), res.is_subgradient()) else { continue };
                let Some(fp) = spec.value(&jp, &t).unwrap().finite() else { continue };
                let scale = 1.0 + res.h.spectral_norm();
                let lin = res.h.inner(&(jp.op() - j.op()));
                assert!(fp - f >= lin - 1e-8 * scale, "{} {fp} {f} {lin}", spec.family());
            }
        }
    }
}

#[test]
fn rejects_mismatched_dimensions() {
    let t = tol();
    assert!(certify(&HermOp::identity(3), &ChoiOp::identity_channel(2), &t).is_err());
    let ens = Ensemble::new(vec![1.0], vec![HermOp::identity(2).scale(0.5)], &t).unwrap();
    let povm = Povm::new(vec![HermOp::identity(2).scale(0.5); 2], &t).unwrap();
    assert!(hykl_check(&ens, &povm, &t).is_err());
}

#[test]
fn converged_linear_solutions_are_nearly_exact() {
    let t = tol();
    let cfg = SolverConfig::default();
    let mut converged = 0;
    for seed in 0..10u64 {
        let mut src = RandomSource::new(900 + seed);
        let h0 = src.hermitian(4);
        let trace = solve(&ObjectiveSpec::linear(h0.clone(), 2, 2).unwrap(), &cfg, &t).unwrap();
        if !trace.converged {
            continue;
        }
        converged += 1;
        let c = certify(&h0, &trace.best_j, &t).unwrap();
        assert!(c.epsilon <= 10.0 * t.psd * c.scale, "seed {seed}: {:e}", c.epsilon);
    }
    assert!(converged >= 8);
}
