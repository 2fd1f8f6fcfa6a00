//! Oracles shared by the integration tests. Nothing here calls the Krylov
//! code under test.

#![allow(dead_code)]

use krylov_feedback::feedback::FeedbackSystem;
use krylov_feedback::numerics::{DenseMatrix, Tolerance};
use krylov_feedback::rng::{seeded, uniform_matrix};

/// Characteristic polynomial `(1, c_1, ..., c_n)` by the Faddeev-LeVerrier
/// recursion `M_k = A M_{k-1} + c_{k-1} I`, `c_k = -tr(A M_k) / k`.
pub fn charpoly(a: &DenseMatrix) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![1.0];
    let mut m = DenseMatrix::zeros(n, n);
    for k in 1..=n {
        m = a * &m + DenseMatrix::identity(n, n) * coeffs[k - 1];
        let am = a * &m;
        coeffs.push(-am.trace() / k as f64);
    }
    coeffs
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

pub fn rel_l2(x: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = reference.iter().map(|a| a * a).sum::<f64>().sqrt();
    num / den
}

/// Random `(A, B, C)` with entries uniform on `[-1, 1]`.
pub fn random_system(n: usize, m: usize, p: usize, seed: u64) -> FeedbackSystem {
    let mut rng = seeded(seed);
    let a = uniform_matrix(&mut rng, n, n, 1.0);
    let b = uniform_matrix(&mut rng, n, m, 1.0);
    let c = uniform_matrix(&mut rng, p, n, 1.0);
    FeedbackSystem::new(a, b, c, &Tolerance::for_dim(n)).expect("random system is generic")
}
