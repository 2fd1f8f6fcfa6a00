//! Alternating least squares over the input combination and the output
//! weights for a single bilinear reachability step.

use krylov_feedback::feedback::{mimo_bilinear_solve, rank_one_update};
use krylov_feedback::harness::instance::{gen_instance, reference_polynomial, InstanceSpec};
use krylov_feedback::numerics::{Tolerance, Vector};
use krylov_feedback::rng::{seeded, uniform_vector, unit_vector};

fn main() -> krylov_feedback::error::Result<()> {
    let spec = InstanceSpec::new(6, 3, 2, 11);
    let tol = Tolerance::for_dim(spec.n);
    let sys = gen_instance(&spec, &tol)?.system;

    // A target reachable by one gain of the form -alpha rho^T.
    let mut rng = seeded(2);
    let alpha = unit_vector(&mut rng, sys.m());
    let rho = uniform_vector(&mut rng, sys.p(), 1e-3);
    let k = -(&alpha * rho.transpose());
    let b = reference_polynomial(&sys.closed_loop(&k)?, &mut rng, &tol)?;

    let alpha0 = Vector::from_element(sys.m(), 1.0);
    let fixed = rank_one_update(&sys, &alpha0.normalize(), &b, &tol)?;
    println!("fixed combination: residual {:.3e}", fixed.residual);

    let sol = mimo_bilinear_solve(&sys, &b, &alpha0, 300, &tol)?;
    for (i, r) in sol.residual_history.iter().enumerate().step_by(20) {
        println!("  half-step {i:>2}: {r:.3e}");
    }
    println!("planted alpha = {:?}", alpha.as_slice());
    println!("found alpha   = {:?}", sol.alpha.as_slice());
    println!("converged {}, final residual {:.3e}", sol.converged, sol.residual());
    Ok(())
}
