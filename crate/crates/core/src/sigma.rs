//! Truncated power series `1 + a_1 s + ... + a_k s^k` modulo `s^{k+1}`.
//!
//! Under truncated multiplication these form a commutative group. Each
//! element is realised by the unit-diagonal upper-triangular Toeplitz matrix
//! whose first row is the sequence, and the product of sequences maps to the
//! product of matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, DenseMatrix, MonicPoly};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SigmaSeq {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for SigmaSeq {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SigmaSeq::new(v)
    }
}

impl From<SigmaSeq> for Vec<f64> {
    fn from(s: SigmaSeq) -> Self {
        s.coeffs
    }
}

impl SigmaSeq {
    /// The leading entry must be exactly 1.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.first() != Some(&1.0) {
            return Err(Error::Domain(format!("sequence must start with exactly 1, got {:?}", coeffs.first())));
        }
        ensure_finite(&coeffs, "sequence")?;
        Ok(SigmaSeq { coeffs })
    }

    /// `(1, tail[0], ..., tail[k-1])`.
    pub fn from_tail(tail: &[f64]) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(tail.len() + 1);
        coeffs.push(1.0);
        coeffs.extend_from_slice(tail);
        Self::new(coeffs)
    }

    /// `(1, 0, ..., 0)` of length `len`.
    pub fn identity(len: usize) -> Self {
        assert!(len >= 1);
        let mut coeffs = vec![0.0; len];
        coeffs[0] = 1.0;
        SigmaSeq { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn tail(&self) -> &[f64] {
        &self.coeffs[1..]
    }

    pub fn is_identity(&self) -> bool {
        self.tail().iter().all(|&c| c == 0.0)
    }
}

impl From<&MonicPoly> for SigmaSeq {
    fn from(d: &MonicPoly) -> Self {
        SigmaSeq { coeffs: d.coeffs().to_vec() }
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("sequence lengths differ: {a} vs {b}")));
    }
    Ok(())
}

/// Truncated convolution of two sequences of equal length, leaving the
/// leading 1 untouched.
fn truncated_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len();
    let mut out = vec![0.0; len];
    out[0] = 1.0;
    for i in 1..len {
        let mut acc = 0.0;
        for j in 0..=i {
            acc += a[j] * b[i - j];
        }
        out[i] = acc;
    }
    out
}

pub fn sigma_mul(a: &SigmaSeq, b: &SigmaSeq) -> Result<SigmaSeq> {
    check_len(a.len(), b.len())?;
    Ok(SigmaSeq { coeffs: truncated_product(&a.coeffs, &b.coeffs) })
}

/// Inverse under truncated multiplication via the forward recurrence
/// `inv_j = -sum_{i=1..j} a_i inv_{j-i}`.
pub fn sigma_inv(a: &SigmaSeq) -> SigmaSeq {
    let len = a.len();
    let mut inv = vec![0.0; len];
    inv[0] = 1.0;
    for j in 1..len {
        let mut acc = 0.0;
        for i in 1..=j {
            acc += a.coeffs[i] * inv[j - i];
        }
        inv[j] = -acc;
    }
    SigmaSeq { coeffs: inv }
}

/// Unit-diagonal upper-triangular Toeplitz matrix with `(i, j) = a_{j-i}`.
pub fn sigma_to_toeplitz(a: &SigmaSeq) -> DenseMatrix {
    let len = a.len();
    DenseMatrix::from_fn(len, len, |i, j| if j >= i { a.coeffs[j - i] } else { 0.0 })
}

/// The polynomial whose reversed coefficient vector is
/// `toeplitz(a) * (d_k, ..., d_0)^T`. Equal to `a * d` with `d` viewed as a
/// sequence.
pub fn sigma_apply_last_column(a: &SigmaSeq, d: &MonicPoly) -> Result<MonicPoly> {
    check_len(a.len(), d.coeffs().len())?;
    let len = a.len();
    let reversed: Vec<f64> = d.coeffs().iter().rev().cloned().collect();
    // Row r of the Toeplitz matrix against the reversed vector gives the
    // entry for power index len-1-r of the result.
    let mut out = vec![0.0; len];
    for r in 0..len {
        out[len - 1 - r] = a.coeffs.iter().zip(&reversed[r..]).map(|(x, y)| x * y).sum();
    }
    out[0] = 1.0;
    Ok(MonicPoly::from_coeffs_unchecked(out))
}

/// `sigma * d`, the annihilating polynomial reached by the transform `sigma`.
pub fn sigma_times_poly(a: &SigmaSeq, d: &MonicPoly) -> Result<MonicPoly> {
    check_len(a.len(), d.coeffs().len())?;
    Ok(MonicPoly::from_coeffs_unchecked(truncated_product(&a.coeffs, d.coeffs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn s(c: &[f64]) -> SigmaSeq {
        SigmaSeq::new(c.to_vec()).unwrap()
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(sigma_mul(&s(&[1.0, 0.0, 0.0]), &s(&[1.0, 2.0, -3.0])).unwrap(), s(&[1.0, 2.0, -3.0]));
        assert_eq!(sigma_mul(&s(&[1.0, 1.0, 0.0]), &s(&[1.0, -1.0, 0.0])).unwrap(), s(&[1.0, 0.0, -1.0]));
        assert_eq!(sigma_mul(&s(&[1.0, 2.0, 1.0]), &s(&[1.0, -2.0, 3.0])).unwrap(), s(&[1.0, 0.0, 0.0]));
        assert!(matches!(sigma_mul(&s(&[1.0]), &s(&[1.0, 0.0])), Err(Error::Shape(_))));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(sigma_inv(&s(&[1.0, 0.0, 0.0])), s(&[1.0, 0.0, 0.0]));
        assert_eq!(sigma_inv(&s(&[1.0, 2.0, 1.0])), s(&[1.0, -2.0, 3.0]));
        assert_eq!(sigma_inv(&s(&[1.0, 1.0, 1.0, 1.0])), s(&[1.0, -1.0, 0.0, 0.0]));
    }

    #[test]
    fn toeplitz_examples() {
        assert_eq!(sigma_to_toeplitz(&s(&[1.0, 0.0])), DenseMatrix::identity(2, 2));
        assert_eq!(sigma_to_toeplitz(&s(&[1.0, 5.0])), dmatrix![1.0, 5.0; 0.0, 1.0]);
        assert_eq!(sigma_to_toeplitz(&s(&[1.0, 2.0, 3.0])), dmatrix![1.0, 2.0, 3.0; 0.0, 1.0, 2.0; 0.0, 0.0, 1.0]);
    }

    #[test]
    fn last_column_examples() {
        let d = MonicPoly::new(vec![1.0, -3.0, 2.0]).unwrap();
        assert_eq!(sigma_apply_last_column(&SigmaSeq::identity(3), &d).unwrap(), d);
        let d = MonicPoly::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(sigma_apply_last_column(&s(&[1.0, 1.0, 0.0]), &d).unwrap().coeffs(), &[1.0, 1.0, 1.0]);
        assert!(sigma_apply_last_column(&s(&[1.0, 1.0]), &d).is_err());
    }

    #[test]
    fn leading_entry_must_be_one() {
        assert!(SigmaSeq::new(vec![0.5, 0.0]).is_err());
        assert!(SigmaSeq::new(vec![]).is_err());
    }
}
