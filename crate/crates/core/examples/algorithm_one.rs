//! Iterated rank-one updates towards a reachable target, with the gain
//! recovered along the way.

use krylov_feedback::driver::{AlgorithmOne, AlgorithmOneConfig, CandidateMode};
use krylov_feedback::harness::instance::{gen_instance, InstanceSpec};
use krylov_feedback::numerics::Tolerance;

fn main() -> krylov_feedback::error::Result<()> {
    let spec = InstanceSpec::new(12, 3, 3, 2);
    let tol = Tolerance::for_dim(spec.n);
    let inst = gen_instance(&spec, &tol)?;
    let sys = &inst.system;

    let cfg = AlgorithmOneConfig {
        epsilon: 1e-12,
        max_iters: 800,
        mode: CandidateMode::RandomCombinations,
        seed: 4,
        combinations_per_iter: None,
    };
    let mut alg = AlgorithmOne::with_initial_poly(sys, inst.d.clone(), inst.target.clone(), cfg, tol)?;
    let scale = inst.target.norm();
    while !alg.finished() {
        alg.step()?;
        if alg.iteration() % 100 == 0 || alg.finished() {
            let k_gap = (sys.b() * (alg.accumulated_gain() - &inst.planted_k) * sys.c()).norm() / sys.a().norm();
            println!(
                "iter {:>4}  ||b - d||/||b|| = {:.3e}  ||B (K - K*) C||/||A|| = {:.3e}",
                alg.iteration(),
                alg.distance() / scale,
                k_gap
            );
        }
    }
    let out = alg.outcome()?;
    println!(
        "success {}, stalled {}, re-extraction mismatch {:.3e}",
        out.success, out.stalled, out.verification_mismatch
    );
    Ok(())
}
