//! Moving every root of the closed loop into the open left half plane by
//! repeatedly targeting slightly shifted copies of the current roots.

use krylov_feedback::driver::{is_hurwitz, stabilize_from, AlgorithmOneConfig, ShiftConfig};
use krylov_feedback::harness::instance::{gen_destabilized_instance, InstanceSpec};
use krylov_feedback::numerics::{eigenvalues, Tolerance};

fn main() -> krylov_feedback::error::Result<()> {
    let spec = InstanceSpec::new(10, 2, 3, 21);
    let tol = Tolerance::for_dim(spec.n);
    let inst = gen_destabilized_instance(&spec, 500, &tol)?;
    println!("bootstrap took {} iterations", inst.bootstrap_iterations);

    let one = AlgorithmOneConfig { seed: 1, ..AlgorithmOneConfig::default() };
    let out = stabilize_from(&inst.system, inst.d.clone(), &ShiftConfig::default(), &one, &tol)?;
    for p in &out.trajectory {
        let right = p.roots.iter().map(|z| z[0]).fold(f64::NEG_INFINITY, f64::max);
        println!("iter {:>3}  rightmost {:+.4e}  a {:.1e}  b {:.1e}", p.iteration, right, p.a, p.b_coef);
    }

    let closed = inst.system.closed_loop(&out.k_final)?;
    let ev = eigenvalues(&closed)?;
    println!("stabilized {}, eigenvalues of A + B K C Hurwitz {}", out.success, is_hurwitz(&ev));
    println!("K =\n{}", out.k_final);
    Ok(())
}
