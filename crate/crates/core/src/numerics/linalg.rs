//! Dense least squares, rank and kernel computations with an explicit
//! tolerance policy. Everything here goes through the SVD, so the minimum-norm
//! solution is returned for rank-deficient systems.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Thresholds used for rank decisions and residual checks.
///
/// `rank_tol` is relative to the largest singular value of the matrix under
/// test. `residual_tol` is an absolute bound on residual norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rank_tol: f64,
    pub residual_tol: f64,
}

impl Tolerance {
    pub const DEFAULT_RESIDUAL: f64 = 1e-9;

    pub fn new(rank_tol: f64, residual_tol: f64) -> Result<Self> {
        if !(rank_tol > 0.0 && rank_tol.is_finite()) {
            return Err(Error::Domain(format!("rank_tol must be positive, got {rank_tol}")));
        }
        if !(residual_tol > 0.0 && residual_tol.is_finite()) {
            return Err(Error::Domain(format!("residual_tol must be positive, got {residual_tol}")));
        }
        Ok(Tolerance { rank_tol, residual_tol })
    }

    /// `n * eps` relative rank threshold and the default residual bound.
    pub fn for_dim(n: usize) -> Self {
        Tolerance { rank_tol: n.max(1) as f64 * f64::EPSILON, residual_tol: Self::DEFAULT_RESIDUAL }
    }

    pub fn with_residual_tol(self, residual_tol: f64) -> Self {
        Tolerance { residual_tol, ..self }
    }
}

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Domain(format!("{what} has non-finite entry at index {i}"))),
        None => Ok(()),
    }
}

pub(crate) fn ensure_finite_matrix(m: &DenseMatrix, what: &str) -> Result<()> {
    ensure_finite(m.as_slice(), what)
}

/// Result of solving `x^T A = b^T` in the least-squares sense.
#[derive(Clone, Debug)]
pub struct LeastSquaresSolution {
    /// Minimum-norm minimizer of `||x^T A - b^T||`.
    pub x: Vector,
    /// Component of `b` in the row space of `A`, equal to `A^T x`.
    pub projected_rhs: Vector,
    /// `||b - projected_rhs||`.
    pub residual_norm: f64,
    /// `residual_norm / ||b||`, or 0 when `b = 0`.
    pub relative_residual: f64,
}

/// Solves `x^T A = b^T` for `x` in the least-squares sense, splitting `b`
/// into its row-space component and an orthogonal remainder.
pub fn least_squares_row(a: &DenseMatrix, b: &Vector, tol: &Tolerance) -> Result<LeastSquaresSolution> {
    if b.len() != a.ncols() {
        return Err(Error::Shape(format!(
            "least_squares_row: matrix is {}x{} but rhs has {} entries",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    ensure_finite_matrix(a, "least_squares_row matrix")?;
    ensure_finite(b.as_slice(), "least_squares_row rhs")?;

    let b_norm = b.norm();
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(LeastSquaresSolution {
            x: Vector::zeros(a.nrows()),
            projected_rhs: Vector::zeros(b.len()),
            residual_norm: b_norm,
            relative_residual: if b_norm > 0.0 { 1.0 } else { 0.0 },
        });
    }

    // A^T = U S V^T, so x = V S^+ U^T b and the projection of b is U_r U_r^T b.
    let svd = svd(&a.transpose())?;
    let (u, v_t, s) = (&svd.u, &svd.v_t, &svd.s);
    let cutoff = rank_cutoff(s.as_slice(), tol);

    let mut x = Vector::zeros(a.nrows());
    let mut projected = Vector::zeros(b.len());
    for (k, &sk) in s.iter().enumerate() {
        if sk <= cutoff {
            continue;
        }
        let uk = u.column(k);
        let coef = uk.dot(b);
        projected.axpy(coef, &uk, 1.0);
        x.axpy(coef / sk, &v_t.row(k).transpose(), 1.0);
    }
    let residual_norm = (b - &projected).norm();
    Ok(LeastSquaresSolution {
        x,
        projected_rhs: projected,
        residual_norm,
        relative_residual: if b_norm > 0.0 { residual_norm / b_norm } else { 0.0 },
    })
}

fn rank_cutoff(singular_values: &[f64], tol: &Tolerance) -> f64 {
    let smax = singular_values.iter().cloned().fold(0.0, f64::max);
    tol.rank_tol * smax
}

fn count_above(singular_values: &[f64], tol: &Tolerance) -> usize {
    let smax = singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let cutoff = tol.rank_tol * smax;
    singular_values.iter().filter(|&&s| s > cutoff).count()
}

/// Number of singular values above `rank_tol * sigma_max`.
pub fn numerical_rank(a: &DenseMatrix, tol: &Tolerance) -> Result<usize> {
    ensure_finite_matrix(a, "numerical_rank input")?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0);
    }
    Ok(count_above(svd(a)?.s.as_slice(), tol))
}

/// Ratio of extreme singular values of a square matrix; infinite when singular.
pub fn condition_number(a: &DenseMatrix) -> f64 {
    let Ok(Svd { s, .. }) = svd(a) else {
        return f64::INFINITY;
    };
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

pub(crate) struct Svd {
    pub u: DenseMatrix,
    pub s: Vector,
    pub v_t: DenseMatrix,
}

/// Thin SVD `a = U diag(s) V^T`, computed with faer. nalgebra's own SVD
/// loses several digits on nearly orthogonal matrices, which are exactly the
/// well-conditioned Krylov bases.
pub(crate) fn svd(a: &DenseMatrix) -> Result<Svd> {
    let (rows, cols) = a.shape();
    let m = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let svd = m.thin_svd().map_err(|e| Error::Domain(format!("SVD failed: {e:?}")))?;
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let k = s.nrows();
    Ok(Svd {
        u: DenseMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        s: Vector::from_fn(k, |i, _| s[i]),
        v_t: DenseMatrix::from_fn(k, cols, |i, j| v[(j, i)]),
    })
}

/// Eigenvalues of a square matrix, computed with faer.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<num_complex::Complex64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!("eigenvalues need a square matrix, got {}x{}", n, a.ncols())));
    }
    ensure_finite_matrix(a, "eigenvalues input")?;
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| a[(i, j)]);
    let ev = m.eigenvalues().map_err(|e| Error::Domain(format!("eigenvalue iteration failed: {e:?}")))?;
    Ok(ev.into_iter().map(|z| num_complex::Complex64::new(z.re, z.im)).collect())
}

/// Orthonormal basis of the numerical kernel of `a`, one vector per column.
pub fn kernel_basis(a: &DenseMatrix, tol: &Tolerance) -> Result<DenseMatrix> {
    ensure_finite_matrix(a, "kernel_basis input")?;
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    if rows == 0 {
        return Ok(DenseMatrix::identity(cols, cols));
    }
    // Pad with zero rows so the thin SVD yields a complete set of right
    // singular vectors.
    let padded = if rows < cols {
        let mut p = DenseMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = svd(&padded)?;
    let v_t = svd.v_t;
    let s = svd.s.as_slice();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol.rank_tol * smax;
    let null: Vec<usize> = (0..s.len()).filter(|&k| smax == 0.0 || s[k] <= cutoff).collect();
    let mut basis = DenseMatrix::zeros(cols, null.len());
    for (j, &k) in null.iter().enumerate() {
        basis.set_column(j, &v_t.row(k).transpose());
    }
    Ok(basis)
}

/// Normalises every nonzero column, returning the scaled matrix and the
/// divisors used (1 for zero columns).
pub(crate) fn scale_columns(m: &DenseMatrix) -> (DenseMatrix, Vec<f64>) {
    let mut scaled = m.clone();
    let mut norms = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let nrm = m.column(j).norm();
        let s = if nrm > 0.0 { nrm } else { 1.0 };
        scaled.column_mut(j).scale_mut(1.0 / s);
        norms.push(s);
    }
    (scaled, norms)
}

/// Solves `m x = rhs` for square `m`, refusing when the condition number
/// exceeds `1 / rank_tol`.
pub(crate) fn solve_guarded(m: &DenseMatrix, rhs: &DenseMatrix, tol: &Tolerance) -> Result<DenseMatrix> {
    let limit = 1.0 / tol.rank_tol;
    let condition = condition_number(m);
    if !(condition <= limit) {
        return Err(Error::Conditioning { condition, limit });
    }
    let lu = m.clone().lu();
    lu.solve(rhs).ok_or(Error::Conditioning { condition: f64::INFINITY, limit })
}
