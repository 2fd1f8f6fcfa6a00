use nalgebra::linalg::{balancing, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::{ensure_finite, DenseMatrix, Tolerance};
use crate::error::{Error, Result};

/// A monic real polynomial `s^n + d_1 s^{n-1} + ... + d_n`, stored as the
/// coefficient sequence `(1, d_1, ..., d_n)` in descending powers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoly", into = "RawPoly")]
pub struct MonicPoly {
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPoly {
    coeffs: Vec<f64>,
}

impl TryFrom<RawPoly> for MonicPoly {
    type Error = Error;
    fn try_from(raw: RawPoly) -> Result<Self> {
        MonicPoly::new(raw.coeffs)
    }
}

impl From<MonicPoly> for RawPoly {
    fn from(p: MonicPoly) -> Self {
        RawPoly { coeffs: p.coeffs }
    }
}

impl MonicPoly {
    /// `coeffs[0]` must be exactly 1.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.first() != Some(&1.0) {
            return Err(Error::Domain(format!(
                "monic polynomial needs leading coefficient 1, got {:?}",
                coeffs.first()
            )));
        }
        ensure_finite(&coeffs, "polynomial coefficients")?;
        Ok(MonicPoly { coeffs })
    }

    /// Builds `s^n + tail[0] s^{n-1} + ... + tail[n-1]`.
    pub fn from_tail(tail: &[f64]) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(tail.len() + 1);
        coeffs.push(1.0);
        coeffs.extend_from_slice(tail);
        Self::new(coeffs)
    }

    /// `s^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[0] = 1.0;
        MonicPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `(d_1, ..., d_n)`.
    pub fn tail(&self) -> &[f64] {
        &self.coeffs[1..]
    }

    pub(crate) fn from_coeffs_unchecked(coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.first(), Some(&1.0));
        MonicPoly { coeffs }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Euclidean distance between coefficient vectors.
    ///
    /// Panics if the degrees differ.
    pub fn distance(&self, other: &MonicPoly) -> f64 {
        assert_eq!(self.degree(), other.degree(), "distance between polynomials of different degree");
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// `distance(other) / ||self||`.
    pub fn relative_distance(&self, other: &MonicPoly) -> f64 {
        self.distance(other) / self.norm()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in &self.coeffs {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }
}

impl std::fmt::Display for MonicPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = self.degree();
        write!(f, "s^{n}")?;
        for (i, c) in self.tail().iter().enumerate() {
            let power = n - 1 - i;
            let sign = if *c < 0.0 { '-' } else { '+' };
            match power {
                0 => write!(f, " {sign} {}", c.abs())?,
                1 => write!(f, " {sign} {}s", c.abs())?,
                _ => write!(f, " {sign} {}s^{power}", c.abs())?,
            }
        }
        Ok(())
    }
}

/// Companion matrix with ones on the subdiagonal and `(-d_n, ..., -d_1)` in
/// the last column, so that `e_1, A e_1, ..., A^{n-1} e_1` is the standard
/// basis.
pub fn companion_matrix(d: &MonicPoly) -> Result<DenseMatrix> {
    let n = d.degree();
    if n == 0 {
        return Err(Error::Domain("companion matrix of a degree-0 polynomial".into()));
    }
    let mut a = DenseMatrix::zeros(n, n);
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        a[(i, n - 1)] = -d.coeffs[n - i];
    }
    Ok(a)
}

/// All `n` complex roots (with multiplicity), from the eigenvalues of the
/// balanced companion matrix followed by a guarded Newton polish. Complex
/// roots come out in exact conjugate pairs.
pub fn poly_roots(d: &MonicPoly) -> Result<Vec<Complex64>> {
    let n = d.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex64::new(-d.coeffs[1], 0.0)]);
    }
    let mut m = companion_matrix(d)?;
    balancing::balance_parlett_reinsch(&mut m);
    let schur = Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Domain("eigenvalue iteration did not converge".into()))?;
    let raw: Vec<Complex64> = schur.complex_eigenvalues().iter().cloned().collect();
    let polished: Vec<Complex64> = raw.into_iter().map(|z| polish_root(d, z)).collect();
    Ok(symmetrize_conjugates(polished))
}

fn polish_root(d: &MonicPoly, mut z: Complex64) -> Complex64 {
    let mut pz = d.eval(z).norm();
    for _ in 0..3 {
        let (p, dp) = d.eval_with_derivative(z);
        if dp.norm() == 0.0 || !dp.norm().is_finite() {
            break;
        }
        let candidate = z - p / dp;
        let pc = d.eval(candidate).norm();
        if pc.is_finite() && pc < pz {
            z = candidate;
            pz = pc;
        } else {
            break;
        }
    }
    z
}

/// Pairs each root in the upper half plane with the nearest unpaired root in
/// the lower half plane and replaces both by an exact conjugate pair. Roots
/// left without a partner are made real.
fn symmetrize_conjugates(roots: Vec<Complex64>) -> Vec<Complex64> {
    let mut upper: Vec<Complex64> = Vec::new();
    let mut lower: Vec<Complex64> = Vec::new();
    let mut out: Vec<Complex64> = Vec::with_capacity(roots.len());
    for z in roots {
        if z.im > 0.0 {
            upper.push(z);
        } else if z.im < 0.0 {
            lower.push(z);
        } else {
            out.push(z);
        }
    }
    upper.sort_by(|a, b| b.im.total_cmp(&a.im));
    for z in upper {
        let best = lower
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (**a - z.conj()).norm().total_cmp(&(**b - z.conj()).norm()))
            .map(|(i, _)| i);
        match best {
            Some(i) => {
                let w = lower.swap_remove(i);
                let re = 0.5 * (z.re + w.re);
                let im = 0.5 * (z.im - w.im);
                out.push(Complex64::new(re, im));
                out.push(Complex64::new(re, -im));
            }
            None => out.push(Complex64::new(z.re, 0.0)),
        }
    }
    out.extend(lower.into_iter().map(|w| Complex64::new(w.re, 0.0)));
    out
}

/// Real monic polynomial with the given roots. The multiset must be closed
/// under conjugation: the expanded coefficients may carry imaginary parts of
/// at most `residual_tol * max(1, max |c_k|)`.
pub fn poly_from_roots(roots: &[Complex64], tol: &Tolerance) -> Result<MonicPoly> {
    for z in roots {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain("non-finite root".into()));
        }
    }
    let mut c = vec![Complex64::new(0.0, 0.0); roots.len() + 1];
    c[0] = Complex64::new(1.0, 0.0);
    for (k, &z) in roots.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            let prev = c[j - 1];
            c[j] -= z * prev;
        }
    }
    let scale = c.iter().map(|v| v.re.abs()).fold(1.0, f64::max);
    let worst_im = c.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if worst_im > tol.residual_tol * scale {
        return Err(Error::Domain(format!(
            "roots are not closed under conjugation (imaginary coefficient {worst_im:.3e})"
        )));
    }
    MonicPoly::new(c.into_iter().map(|v| v.re).collect())
}
