//! One least-squares rank-one feedback step on a planted instance, then an
//! independent re-check of the resulting closed loop.

use krylov_feedback::feedback::rank_one_update;
use krylov_feedback::harness::instance::{gen_instance, InstanceSpec};
use krylov_feedback::numerics::Tolerance;
use krylov_feedback::rng::{seeded, unit_vector};

fn main() -> krylov_feedback::error::Result<()> {
    let spec = InstanceSpec::new(8, 2, 2, 7);
    let tol = Tolerance::for_dim(spec.n);
    let inst = gen_instance(&spec, &tol)?;
    let sys = &inst.system;
    println!("d = {}", inst.d);
    println!("b = {}", inst.target);

    let mut rng = seeded(3);
    let mu = unit_vector(&mut rng, sys.m());
    let step = rank_one_update(sys, &mu, &inst.target, &tol)?;
    println!("K (rank one) =\n{}", step.k);
    println!("d_new = {}", step.d_new);
    println!(
        "||b - d|| = {:.3e}, ||b - d_new|| = {:.3e}, relative residual {:.3e} ({:?})",
        inst.target.distance(&inst.d),
        step.residual,
        step.relative_residual,
        step.reachability()
    );

    let mismatch = step.verify(sys, &mut rng, &tol)?;
    println!("fresh re-extraction differs by {mismatch:.3e}");
    Ok(())
}
