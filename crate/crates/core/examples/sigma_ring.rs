//! Truncated power series with leading entry one, their Toeplitz matrices,
//! and how they act on a monic polynomial.

use krylov_feedback::numerics::MonicPoly;
use krylov_feedback::sigma::{
    sigma_apply_last_column, sigma_inv, sigma_mul, sigma_times_poly, sigma_to_toeplitz, SigmaSeq,
};

fn main() -> krylov_feedback::error::Result<()> {
    let a = SigmaSeq::new(vec![1.0, 2.0, -1.0, 0.5])?;
    let b = SigmaSeq::new(vec![1.0, -0.5, 0.0, 3.0])?;

    let ab = sigma_mul(&a, &b)?;
    let ba = sigma_mul(&b, &a)?;
    println!("a * b = {:?}", ab.coeffs());
    println!("b * a = {:?}", ba.coeffs());

    let inv = sigma_inv(&a);
    println!("a^-1  = {:?}", inv.coeffs());
    println!("a * a^-1 = {:?}", sigma_mul(&a, &inv)?.coeffs());

    // The Toeplitz map is a homomorphism: T(a) T(b) = T(a * b).
    let gap = (sigma_to_toeplitz(&a) * sigma_to_toeplitz(&b) - sigma_to_toeplitz(&ab)).norm();
    println!("||T(a) T(b) - T(a b)|| = {gap:.1e}");
    println!("T(a) =\n{}", sigma_to_toeplitz(&a));

    let d = MonicPoly::new(vec![1.0, 0.0, -2.0, 1.0])?;
    println!("d          = {d}");
    println!("a * d      = {}", sigma_times_poly(&a, &d)?);
    println!("T(a)^T d   = {}", sigma_apply_last_column(&a, &d)?);
    Ok(())
}
