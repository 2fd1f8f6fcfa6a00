//! A full Krylov sequence determines its matrix, and the matrix's
//! annihilating polynomial is read off the last vector.

use krylov_feedback::krylov::{annihilating_from_krylov, full_krylov, matrix_from_krylov, transform_krylov};
use krylov_feedback::numerics::{poly_roots, Tolerance};
use krylov_feedback::rng::{seeded, uniform_matrix, uniform_vector};
use krylov_feedback::sigma::{sigma_times_poly, SigmaSeq};

fn main() -> krylov_feedback::error::Result<()> {
    let n = 6;
    let tol = Tolerance::for_dim(n);
    let mut rng = seeded(1);
    let a = uniform_matrix(&mut rng, n, n, 1.0);
    let w0 = uniform_vector(&mut rng, n, 1.0);

    let k = full_krylov(&a, &w0, &tol)?;
    println!("basis condition {:.3e}", k.basis_condition());

    let d = annihilating_from_krylov(&k, &tol)?;
    println!("d = {d}");
    for z in poly_roots(&d)? {
        println!("  root {:+.6} {:+.6}i", z.re, z.im);
    }

    let back = matrix_from_krylov(&k, &tol)?;
    println!("||A - matrix_from_krylov(K)|| = {:.3e}", (&back - &a).norm());

    // Transforming the sequence by sigma gives a matrix whose annihilating
    // polynomial is sigma * d.
    let sigma = SigmaSeq::from_tail(&[0.1, -0.2, 0.05, 0.0, 0.01, 0.0])?;
    let moved = transform_krylov(&k, &sigma, &tol)?;
    let d_moved = annihilating_from_krylov(&moved, &tol)?;
    let predicted = sigma_times_poly(&sigma, &d)?;
    println!("sigma * d = {predicted}");
    println!("mismatch  = {:.3e}", d_moved.relative_distance(&predicted));
    Ok(())
}
