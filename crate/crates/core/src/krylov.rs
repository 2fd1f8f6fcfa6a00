//! Full Krylov sequences `(w^0, A w^0, ..., A^n w^0)` whose first `n` vectors
//! are independent. Such a sequence determines both the matrix and its
//! annihilating polynomial, and the transform `W -> W * toeplitz(sigma)^{-1}`
//! moves between Krylov sequences of matrices that differ by a rank-one
//! state feedback.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{
    condition_number, ensure_finite, ensure_finite_matrix, least_squares_row, numerical_rank, scale_columns,
    solve_guarded, DenseMatrix, MonicPoly, Tolerance, Vector,
};
use crate::sigma::{sigma_inv, sigma_to_toeplitz, SigmaSeq};

/// Columns `w^0, ..., w^n` stored as an `n x (n+1)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct KrylovSeq {
    columns: DenseMatrix,
}

impl KrylovSeq {
    /// Wraps precomputed columns, checking only that the first `n` are
    /// numerically independent.
    pub fn from_columns(columns: DenseMatrix, tol: &Tolerance) -> Result<Self> {
        let n = columns.nrows();
        if columns.ncols() != n + 1 {
            return Err(Error::Shape(format!(
                "Krylov sequence needs {} columns for dimension {n}, got {}",
                n + 1,
                columns.ncols()
            )));
        }
        ensure_finite_matrix(&columns, "Krylov columns")?;
        let seq = KrylovSeq { columns };
        let rank = prefix_rank(&seq.prefix(), tol)?;
        if rank < n {
            return Err(Error::DependentPrefix { rank, n });
        }
        Ok(seq)
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn initial(&self) -> Vector {
        self.columns.column(0).into_owned()
    }

    /// All `n + 1` columns.
    pub fn columns(&self) -> &DenseMatrix {
        &self.columns
    }

    /// `(w^0 | ... | w^{n-1})`.
    pub fn prefix(&self) -> DenseMatrix {
        self.columns.columns(0, self.dim()).into_owned()
    }

    /// `(w^1 | ... | w^n)`.
    pub fn shifted(&self) -> DenseMatrix {
        self.columns.columns(1, self.dim()).into_owned()
    }

    /// Condition number of the prefix after scaling each column to unit norm.
    pub fn basis_condition(&self) -> f64 {
        condition_number(&scale_columns(&self.prefix()).0)
    }
}

// Column norms of a Krylov basis grow like the spectral radius to the power
// j; the rank decision is made on the equilibrated basis.
fn prefix_rank(prefix: &DenseMatrix, tol: &Tolerance) -> Result<usize> {
    numerical_rank(&scale_columns(prefix).0, tol)
}

pub fn full_krylov(a: &DenseMatrix, w0: &Vector, tol: &Tolerance) -> Result<KrylovSeq> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!("full_krylov needs a square matrix, got {}x{}", n, a.ncols())));
    }
    if w0.len() != n {
        return Err(Error::Shape(format!("initial vector has {} entries, matrix is {n}x{n}", w0.len())));
    }
    ensure_finite_matrix(a, "full_krylov matrix")?;
    ensure_finite(w0.as_slice(), "full_krylov initial vector")?;
    if w0.iter().all(|&x| x == 0.0) {
        return Err(Error::Domain("initial vector is zero".into()));
    }
    let mut columns = DenseMatrix::zeros(n, n + 1);
    columns.set_column(0, w0);
    for j in 1..=n {
        let next = a * columns.column(j - 1);
        columns.set_column(j, &next);
    }
    ensure_finite_matrix(&columns, "Krylov iterates")?;
    KrylovSeq::from_columns(columns, tol)
}

/// The unique monic `d` with `sum_j d_{n-j} w^j = 0`.
pub fn annihilating_from_krylov(k: &KrylovSeq, tol: &Tolerance) -> Result<MonicPoly> {
    let n = k.dim();
    let (scaled, norms) = scale_columns(&k.prefix());
    let rhs = -k.columns.column(n);
    // Solve (W_scaled) y = -w^n as y^T W_scaled^T = -w^n^T.
    let sol = least_squares_row(&scaled.transpose(), &rhs, tol)?;
    let mut coeffs = vec![0.0; n + 1];
    coeffs[0] = 1.0;
    for j in 0..n {
        // coefficient of w^j is d_{n-j}
        coeffs[n - j] = sol.x[j] / norms[j];
    }
    MonicPoly::new(coeffs)
}

/// `(w^1 | ... | w^n) (w^0 | ... | w^{n-1})^{-1}`.
pub fn matrix_from_krylov(k: &KrylovSeq, tol: &Tolerance) -> Result<DenseMatrix> {
    let (basis, norms) = scale_columns(&k.prefix());
    let mut image = k.shifted();
    for (j, s) in norms.iter().enumerate() {
        image.column_mut(j).scale_mut(1.0 / s);
    }
    // A * basis = image  <=>  basis^T A^T = image^T
    let at = solve_guarded(&basis.transpose(), &image.transpose(), tol)?;
    Ok(at.transpose())
}

/// `V = W * toeplitz(sigma)^{-1}`, the full Krylov sequence (with the same
/// initial vector) of the matrix obtained by the corresponding rank-one
/// state feedback.
pub fn transform_krylov(k: &KrylovSeq, sigma: &SigmaSeq, tol: &Tolerance) -> Result<KrylovSeq> {
    if sigma.len() != k.dim() + 1 {
        return Err(Error::Shape(format!("transform needs a sequence of length {}, got {}", k.dim() + 1, sigma.len())));
    }
    let inv = sigma_to_toeplitz(&sigma_inv(sigma));
    KrylovSeq::from_columns(&k.columns * inv, tol)
}

/// Annihilating polynomial of `a` from a full Krylov sequence with initial
/// vector drawn uniformly from `[-1, 1]^n`, redrawing up to `attempts` times
/// if the prefix is dependent.
pub fn annihilating_polynomial<R: Rng + ?Sized>(
    a: &DenseMatrix,
    rng: &mut R,
    tol: &Tolerance,
    attempts: usize,
) -> Result<MonicPoly> {
    let n = a.nrows();
    let mut last = Error::DependentPrefix { rank: 0, n };
    for _ in 0..attempts.max(1) {
        let w0 = Vector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
        match full_krylov(a, &w0, tol) {
            Ok(k) => return annihilating_from_krylov(&k, tol),
            Err(e @ Error::DependentPrefix { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Annihilating polynomial of `a` from the best conditioned of a few full
/// Krylov sequences (the first unit vector and random starts).
pub fn reference_polynomial<R: Rng + ?Sized>(a: &DenseMatrix, rng: &mut R, tol: &Tolerance) -> Result<MonicPoly> {
    let n = a.nrows();
    let mut starts = vec![Vector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 })];
    starts.extend((0..3).map(|_| Vector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0))));
    let mut best = None;
    let mut last = Error::DependentPrefix { rank: 0, n };
    for w0 in &starts {
        match full_krylov(a, w0, tol) {
            Ok(k) => {
                let cond = k.basis_condition();
                if best.as_ref().is_none_or(|(c, _)| cond < *c) {
                    best = Some((cond, k));
                }
            }
            Err(e @ Error::DependentPrefix { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    match best {
        Some((_, k)) => annihilating_from_krylov(&k, tol),
        None => Err(last),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::companion_matrix;
    use crate::sigma::sigma_to_toeplitz;
    use nalgebra::dmatrix;

    fn e(n: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        v
    }

    fn tol() -> Tolerance {
        Tolerance::for_dim(3)
    }

    #[test]
    fn companion_iteration() {
        let d = MonicPoly::new(vec![1.0, -3.0, 2.0]).unwrap();
        let a = companion_matrix(&d).unwrap();
        let k = full_krylov(&a, &e(2, 0), &tol()).unwrap();
        assert_eq!(k.columns(), &dmatrix![1.0, 0.0, -2.0; 0.0, 1.0, 3.0]);
        let ann = annihilating_from_krylov(&k, &tol()).unwrap();
        assert!(ann.distance(&d) < 1e-14);
        let back = matrix_from_krylov(&k, &tol()).unwrap();
        assert!((back - a).norm() < 1e-12);
    }

    #[test]
    fn identity_is_degenerate() {
        let a = DenseMatrix::identity(2, 2);
        let r = full_krylov(&a, &Vector::from_vec(vec![0.3, -0.7]), &tol());
        assert!(matches!(r, Err(Error::DependentPrefix { rank: 1, n: 2 })));
    }

    #[test]
    fn nilpotent_shift() {
        let d = MonicPoly::monomial(3);
        let a = companion_matrix(&d).unwrap();
        let k = full_krylov(&a, &e(3, 0), &tol()).unwrap();
        let mut expected = DenseMatrix::zeros(3, 4);
        for i in 0..3 {
            expected[(i, i)] = 1.0;
        }
        assert_eq!(k.columns(), &expected);
        assert_eq!(annihilating_from_krylov(&k, &tol()).unwrap(), d);
        assert_eq!(matrix_from_krylov(&k, &tol()).unwrap(), a);
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = DenseMatrix::identity(2, 2);
        assert!(matches!(full_krylov(&a, &Vector::zeros(3), &tol()), Err(Error::Shape(_))));
        assert!(matches!(full_krylov(&a, &Vector::zeros(2), &tol()), Err(Error::Domain(_))));
        assert!(matches!(full_krylov(&DenseMatrix::zeros(2, 3), &Vector::zeros(2), &tol()), Err(Error::Shape(_))));
    }

    #[test]
    fn transform_defining_equation() {
        let d = MonicPoly::new(vec![1.0, -3.0, 2.0]).unwrap();
        let a = companion_matrix(&d).unwrap();
        let w = full_krylov(&a, &e(2, 0), &tol()).unwrap();
        let s = SigmaSeq::new(vec![1.0, 1.0, 0.0]).unwrap();
        let v = transform_krylov(&w, &s, &tol()).unwrap();
        let back = v.columns() * sigma_to_toeplitz(&s);
        assert!((back - w.columns()).norm() < 1e-14);
        assert_eq!(v.initial(), w.initial());

        let same = transform_krylov(&w, &SigmaSeq::identity(3), &tol()).unwrap();
        assert_eq!(same, w);
    }
}
