//! Whether a perturbation of A can be written as B K C.

use krylov_feedback::feedback::bkc_reachability_check;
use krylov_feedback::numerics::Tolerance;
use krylov_feedback::rng::{seeded, uniform_matrix};

fn main() -> krylov_feedback::error::Result<()> {
    let (n, m, p) = (8, 2, 2);
    let tol = Tolerance::new(1e-12, 1e-8)?;
    let mut rng = seeded(5);
    let a = uniform_matrix(&mut rng, n, n, 1.0);
    let b = uniform_matrix(&mut rng, n, m, 1.0);
    let c = uniform_matrix(&mut rng, p, n, 1.0);
    let k = uniform_matrix(&mut rng, m, p, 1.0);

    let planted = &a + &b * &k * &c + uniform_matrix(&mut rng, n, n, 1e-10);
    let v = bkc_reachability_check(&a, &planted, &b, &c, &tol)?;
    println!("planted:  reachable {}, violation {:.3e}", v.is_reachable(), v.max_violation);
    if let Some(found) = &v.feedback {
        println!("recovered K differs from planted by {:.3e}", (found - &k).norm());
    }

    let generic = &a + uniform_matrix(&mut rng, n, n, 1e-2);
    let v = bkc_reachability_check(&a, &generic, &b, &c, &tol)?;
    println!(
        "generic:  reachable {}, columns in col(B) {}, zero on ker(C) {}, violation {:.3e}",
        v.is_reachable(),
        v.column_condition,
        v.kernel_condition,
        v.max_violation
    );
    Ok(())
}
