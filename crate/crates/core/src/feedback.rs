//! Output-feedback solvers.
//!
//! For a full Krylov sequence `W` of `A` started at `w^0 = B mu`, every
//! rank-one output feedback `K = -mu rho^T` moves the annihilating polynomial
//! from `d` to `sigma * d` with `sigma = (1, rho^T C (w^0 | ... | w^{n-1}))`.
//! The reachable polynomials from one initial vector therefore form an
//! affine set of dimension at most `p`, and the closest point to a target is
//! a least-squares problem in `rho`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{annihilating_from_krylov, full_krylov, reference_polynomial, KrylovSeq};
use crate::numerics::{
    ensure_finite_matrix, kernel_basis, least_squares_row, numerical_rank, scale_columns, solve_guarded, DenseMatrix,
    MonicPoly, Tolerance, Vector,
};
use crate::sigma::{sigma_times_poly, sigma_to_toeplitz, SigmaSeq};

/// Relative residual at or below which a target counts as reached.
pub const REACHABLE_RELATIVE_RESIDUAL: f64 = 1e-8;
/// Relative residual at or above which a target counts as out of reach.
pub const UNREACHABLE_RELATIVE_RESIDUAL: f64 = 1e-3;
/// Relative mismatch allowed when a feedback matrix is re-checked through a
/// fresh Krylov extraction.
pub const VERIFY_RELATIVE_TOLERANCE: f64 = 1e-6;

/// The triple `(A, B, C)` of a system `w' = A w + B u`, `y = C w`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackSystem {
    a: DenseMatrix,
    b: DenseMatrix,
    c: DenseMatrix,
}

impl FeedbackSystem {
    /// Validates shapes, finiteness, independence of the columns of `B` and
    /// rows of `C`, and full controllability.
    pub fn new(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix, tol: &Tolerance) -> Result<Self> {
        let sys = Self::from_parts(a, b, c)?;
        let (n, m, p) = (sys.n(), sys.m(), sys.p());
        if numerical_rank(&sys.b, tol)? < m {
            return Err(Error::Domain("columns of B are not linearly independent".into()));
        }
        if numerical_rank(&sys.c, tol)? < p {
            return Err(Error::Domain("rows of C are not linearly independent".into()));
        }
        let ctrb = sys.controllability_matrix();
        let rank = numerical_rank(&scale_columns(&ctrb).0, tol)?;
        if rank < n {
            return Err(Error::Domain(format!("system is not controllable (rank {rank} < {n})")));
        }
        Ok(sys)
    }

    /// Shape and finiteness checks only.
    pub fn from_parts(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::Shape(format!("A must be square and nonempty, got {}x{}", n, a.ncols())));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::Shape(format!("B must be {n}xm with m >= 1, got {}x{}", b.nrows(), b.ncols())));
        }
        if c.ncols() != n || c.nrows() == 0 || c.nrows() > n {
            return Err(Error::Shape(format!("C must be pxn with 1 <= p <= {n}, got {}x{}", c.nrows(), c.ncols())));
        }
        ensure_finite_matrix(&a, "A")?;
        ensure_finite_matrix(&b, "B")?;
        ensure_finite_matrix(&c, "C")?;
        Ok(FeedbackSystem { a, b, c })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }

    /// `[B | AB | ... | A^{n-1} B]`.
    pub fn controllability_matrix(&self) -> DenseMatrix {
        let (n, m) = (self.n(), self.m());
        let mut out = DenseMatrix::zeros(n, n * m);
        let mut block = self.b.clone();
        for k in 0..n {
            out.view_mut((0, k * m), (n, m)).copy_from(&block);
            block = &self.a * block;
        }
        out
    }

    /// `A + B K C`.
    pub fn closed_loop(&self, k: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_gain(k)?;
        Ok(&self.a + &self.b * k * &self.c)
    }

    /// Same `B` and `C`, with `A` replaced by `A + B K C`.
    pub fn with_feedback(&self, k: &DenseMatrix) -> Result<FeedbackSystem> {
        Ok(FeedbackSystem { a: self.closed_loop(k)?, b: self.b.clone(), c: self.c.clone() })
    }

    fn check_gain(&self, k: &DenseMatrix) -> Result<()> {
        if k.shape() != (self.m(), self.p()) {
            return Err(Error::Shape(format!("K must be {}x{}, got {}x{}", self.m(), self.p(), k.nrows(), k.ncols())));
        }
        Ok(())
    }
}

/// How a least-squares residual classifies a target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reachability {
    Reachable,
    Unreachable,
    Indeterminate,
}

impl Reachability {
    pub fn from_relative_residual(r: f64) -> Self {
        if r <= REACHABLE_RELATIVE_RESIDUAL {
            Reachability::Reachable
        } else if r >= UNREACHABLE_RELATIVE_RESIDUAL {
            Reachability::Unreachable
        } else {
            Reachability::Indeterminate
        }
    }
}

/// One least-squares rank-one update.
#[derive(Clone, Debug)]
pub struct RankOneResult {
    pub rho: Vector,
    pub sigma: SigmaSeq,
    /// `-mu rho^T`, an `m x p` matrix of rank at most one.
    pub k: DenseMatrix,
    /// Equivalent state feedback `K C`.
    pub f: DenseMatrix,
    pub d_new: MonicPoly,
    /// `||b - d_new||`, the least-squares residual.
    pub residual: f64,
    /// `residual / ||b - d||`, 0 when the target is the starting polynomial.
    pub relative_residual: f64,
    pub mu: Vector,
}

impl RankOneResult {
    pub fn reachability(&self) -> Reachability {
        Reachability::from_relative_residual(self.relative_residual)
    }

    /// Rebuilds `A + B K C` and re-extracts its annihilating polynomial from
    /// fresh initial vectors. Returns the relative mismatch against
    /// `d_new`, or a verification error above [`VERIFY_RELATIVE_TOLERANCE`].
    pub fn verify<R: Rng + ?Sized>(&self, sys: &FeedbackSystem, rng: &mut R, tol: &Tolerance) -> Result<f64> {
        verify_feedback(sys, &self.k, &self.d_new, rng, tol)
    }
}

/// The `n x n` Toeplitz matrix with first row `(d_0, ..., d_{n-1})`.
fn leading_toeplitz(d: &MonicPoly) -> DenseMatrix {
    let n = d.degree();
    let seq = SigmaSeq::new(d.coeffs()[..n].to_vec()).expect("monic leading coefficient");
    sigma_to_toeplitz(&seq)
}

fn target_gap(d: &MonicPoly, b: &MonicPoly) -> Result<Vector> {
    if d.degree() != b.degree() {
        return Err(Error::Shape(format!(
            "target has degree {} but the system has dimension {}",
            b.degree(),
            d.degree()
        )));
    }
    Ok(Vector::from_iterator(d.degree(), b.tail().iter().zip(d.tail()).map(|(x, y)| x - y)))
}

/// Rank-one update from a given full Krylov sequence of `sys.a()` with
/// initial vector `B mu`, starting from the annihilating polynomial `d`.
pub fn rank_one_update_from(
    sys: &FeedbackSystem,
    krylov: &KrylovSeq,
    mu: &Vector,
    d: &MonicPoly,
    b: &MonicPoly,
    tol: &Tolerance,
) -> Result<RankOneResult> {
    if mu.len() != sys.m() {
        return Err(Error::Shape(format!("mu has {} entries, B has {} columns", mu.len(), sys.m())));
    }
    if krylov.dim() != sys.n() {
        return Err(Error::Shape("Krylov sequence dimension differs from the system".into()));
    }
    let gap = target_gap(d, b)?;
    let cw = sys.c() * krylov.prefix();
    let q = &cw * leading_toeplitz(d);
    let sol = least_squares_row(&q, &gap, tol)?;
    let rho = sol.x;
    let sigma_tail = cw.tr_mul(&rho);
    let sigma = SigmaSeq::from_tail(sigma_tail.as_slice())?;
    let d_new = sigma_times_poly(&sigma, d)?;
    let k = -(mu * rho.transpose());
    let f = &k * sys.c();
    Ok(RankOneResult {
        rho,
        sigma,
        k,
        f,
        d_new,
        residual: sol.residual_norm,
        relative_residual: sol.relative_residual,
        mu: mu.clone(),
    })
}

/// Least-squares rank-one update towards `b` using `w^0 = B mu`.
///
/// Fails with [`Error::DependentPrefix`] when `B mu` does not start a full
/// Krylov sequence of `A`.
pub fn rank_one_update(sys: &FeedbackSystem, mu: &Vector, b: &MonicPoly, tol: &Tolerance) -> Result<RankOneResult> {
    if mu.len() != sys.m() {
        return Err(Error::Shape(format!("mu has {} entries, B has {} columns", mu.len(), sys.m())));
    }
    let w0 = sys.b() * mu;
    let krylov = full_krylov(sys.a(), &w0, tol)?;
    let d = annihilating_from_krylov(&krylov, tol)?;
    rank_one_update_from(sys, &krylov, mu, &d, b, tol)
}

/// `F = -mu (sigma_1, ..., sigma_n) (w^0 | ... | w^{n-1})^{-1}` with
/// `w^0 = B mu`; `A + B F` has annihilating polynomial `sigma * d`.
pub fn state_feedback_from_sigma(
    sys: &FeedbackSystem,
    mu: &Vector,
    sigma: &SigmaSeq,
    tol: &Tolerance,
) -> Result<DenseMatrix> {
    let n = sys.n();
    if mu.len() != sys.m() {
        return Err(Error::Shape(format!("mu has {} entries, B has {} columns", mu.len(), sys.m())));
    }
    if sigma.len() != n + 1 {
        return Err(Error::Shape(format!("sigma must have length {}, got {}", n + 1, sigma.len())));
    }
    let krylov = full_krylov(sys.a(), &(sys.b() * mu), tol)?;
    let (basis, norms) = scale_columns(&krylov.prefix());
    // row = sigma_tail W^{-1} = (sigma_tail S^{-1}) basis^{-1}
    let scaled_sigma = DenseMatrix::from_fn(n, 1, |j, _| sigma.tail()[j] / norms[j]);
    let row = solve_guarded(&basis.transpose(), &scaled_sigma, tol)?;
    Ok(-(mu * row.transpose()))
}

/// Outcome of testing whether `A_hat - A` factors as `B K C`.
#[derive(Clone, Debug)]
pub struct ReachabilityVerdict {
    /// Every column of `A_hat - A` lies in `col(B)`.
    pub column_condition: bool,
    /// `A_hat - A` vanishes on `ker(C)`.
    pub kernel_condition: bool,
    /// Largest violation among both conditions.
    pub max_violation: f64,
    /// A factor `K` when both conditions hold.
    pub feedback: Option<DenseMatrix>,
    /// `||A_hat - (A + B K C)||_F` for the returned factor.
    pub factorization_residual: Option<f64>,
}

impl ReachabilityVerdict {
    pub fn is_reachable(&self) -> bool {
        self.column_condition && self.kernel_condition
    }
}

/// Tests whether `a_hat = a + B K C` for some `K`.
///
/// Violations are compared against `residual_tol * max(1, ||a_hat||_F)`.
pub fn bkc_reachability_check(
    a: &DenseMatrix,
    a_hat: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    tol: &Tolerance,
) -> Result<ReachabilityVerdict> {
    let n = a.nrows();
    if a.shape() != (n, n) || a_hat.shape() != (n, n) || b.nrows() != n || c.ncols() != n {
        return Err(Error::Shape(format!(
            "inconsistent shapes: A {:?}, A_hat {:?}, B {:?}, C {:?}",
            a.shape(),
            a_hat.shape(),
            b.shape(),
            c.shape()
        )));
    }
    for (m, what) in [(a, "A"), (a_hat, "A_hat"), (b, "B"), (c, "C")] {
        ensure_finite_matrix(m, what)?;
    }
    let threshold = tol.residual_tol * a_hat.norm().max(1.0);
    let e = a_hat - a;

    // Columns of E against col(B): solve B x = e_j, i.e. x^T B^T = e_j^T.
    let bt = b.transpose();
    let mut x = DenseMatrix::zeros(b.ncols(), n);
    let mut column_violation: f64 = 0.0;
    for j in 0..n {
        let sol = least_squares_row(&bt, &e.column(j).into_owned(), tol)?;
        column_violation = column_violation.max(sol.residual_norm);
        x.set_column(j, &sol.x);
    }

    let z = kernel_basis(c, tol)?;
    let kernel_violation = (0..z.ncols()).map(|j| (&e * z.column(j)).norm()).fold(0.0, f64::max);

    let column_condition = column_violation <= threshold;
    let kernel_condition = kernel_violation <= threshold;
    let max_violation = column_violation.max(kernel_violation);

    let (feedback, factorization_residual) = if column_condition && kernel_condition {
        // K C = X, one row at a time: k_i^T C = x_i^T.
        let mut k = DenseMatrix::zeros(b.ncols(), c.nrows());
        for i in 0..b.ncols() {
            let sol = least_squares_row(c, &x.row(i).transpose(), tol)?;
            k.set_row(i, &sol.x.transpose());
        }
        let resid = (a_hat - (a + b * &k * c)).norm();
        (Some(k), Some(resid))
    } else {
        (None, None)
    };
    Ok(ReachabilityVerdict { column_condition, kernel_condition, max_violation, feedback, factorization_residual })
}

/// Result of the alternating solver for `rho^T C W(alpha) D = b - d`.
#[derive(Clone, Debug)]
pub struct MimoSolution {
    /// Unit-norm combination of the columns of `B`.
    pub alpha: Vector,
    pub rho: Vector,
    /// Residual after every accepted half-step, starting with the first
    /// `rho` solve.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// `-alpha rho^T`.
    pub k: DenseMatrix,
    /// Annihilating polynomial of `A + B K C`.
    pub d_new: MonicPoly,
}

impl MimoSolution {
    pub fn residual(&self) -> f64 {
        *self.residual_history.last().expect("history is never empty")
    }
}

/// Krylov iterates `(v, A v, ..., A^n v)` without an independence check.
fn krylov_iterates(a: &DenseMatrix, v: &Vector) -> DenseMatrix {
    let n = a.nrows();
    let mut cols = DenseMatrix::zeros(n, n + 1);
    cols.set_column(0, v);
    for j in 1..=n {
        let next = a * cols.column(j - 1);
        cols.set_column(j, &next);
    }
    cols
}

const STAGNATION_IMPROVEMENT: f64 = 1e-12;
const STAGNATION_WINDOW: usize = 5;

/// Alternating least squares over `rho` (with `alpha` fixed) and `alpha`
/// (with `rho` fixed) for the bilinear reachability equation. A half-step
/// that would increase the residual is rejected, so the history never
/// increases. Stops when the residual drops to `tol.residual_tol`, when five
/// consecutive alternations improve by less than `1e-12`, or after
/// `max_iters` alternations.
pub fn mimo_bilinear_solve(
    sys: &FeedbackSystem,
    b: &MonicPoly,
    alpha0: &Vector,
    max_iters: usize,
    tol: &Tolerance,
) -> Result<MimoSolution> {
    let (n, m) = (sys.n(), sys.m());
    if alpha0.len() != m {
        return Err(Error::Shape(format!("alpha0 has {} entries, B has {} columns", alpha0.len(), m)));
    }
    let alpha_norm = alpha0.norm();
    if alpha_norm == 0.0 {
        return Err(Error::Domain("alpha0 is zero".into()));
    }
    let mut alpha = alpha0 / alpha_norm;

    let iterates: Vec<DenseMatrix> =
        (0..m).map(|i| krylov_iterates(sys.a(), &sys.b().column(i).into_owned())).collect();
    let combine = |alpha: &Vector| -> DenseMatrix {
        let mut w = DenseMatrix::zeros(n, n + 1);
        for (i, wi) in iterates.iter().enumerate() {
            w += wi * alpha[i];
        }
        w
    };

    let start = KrylovSeq::from_columns(combine(&alpha), tol)?;
    let d = annihilating_from_krylov(&start, tol)?;
    let gap = target_gap(&d, b)?;
    let toeplitz = leading_toeplitz(&d);
    // G_i = C W_i D, the per-column contribution.
    let blocks: Vec<DenseMatrix> = iterates.iter().map(|wi| sys.c() * wi.columns(0, n) * &toeplitz).collect();
    let q_of = |alpha: &Vector| -> DenseMatrix {
        let mut q = DenseMatrix::zeros(sys.p(), n);
        for (i, g) in blocks.iter().enumerate() {
            q += g * alpha[i];
        }
        q
    };

    let first = least_squares_row(&q_of(&alpha), &gap, tol)?;
    let mut rho = first.x;
    let mut residual = first.residual_norm;
    let mut history = vec![residual];
    let mut converged = residual <= tol.residual_tol;
    let mut stagnant = 0;

    let mut iter = 0;
    while !converged && iter < max_iters {
        iter += 1;
        let before = residual;

        // alpha step: rows of M are rho^T G_i
        let mut mrows = DenseMatrix::zeros(m, n);
        for (i, g) in blocks.iter().enumerate() {
            mrows.set_row(i, &g.tr_mul(&rho).transpose());
        }
        let sol = least_squares_row(&mrows, &gap, tol)?;
        let scale = sol.x.norm();
        if scale > 0.0 && sol.residual_norm <= residual {
            alpha = &sol.x / scale;
            rho *= scale;
            residual = sol.residual_norm;
            history.push(residual);
        }

        // rho step
        if KrylovSeq::from_columns(combine(&alpha), tol).is_ok() {
            let sol = least_squares_row(&q_of(&alpha), &gap, tol)?;
            if sol.residual_norm <= residual {
                rho = sol.x;
                residual = sol.residual_norm;
                history.push(residual);
            }
        }

        converged = residual <= tol.residual_tol;
        if before - residual < STAGNATION_IMPROVEMENT {
            stagnant += 1;
            if stagnant >= STAGNATION_WINDOW {
                break;
            }
        } else {
            stagnant = 0;
        }
    }

    let w = KrylovSeq::from_columns(combine(&alpha), tol)?;
    let sigma_tail = (sys.c() * w.prefix()).tr_mul(&rho);
    let sigma = SigmaSeq::from_tail(sigma_tail.as_slice())?;
    let d_new = sigma_times_poly(&sigma, &d)?;
    let k = -(&alpha * rho.transpose());
    Ok(MimoSolution { alpha, rho, residual_history: history, converged, k, d_new })
}

/// Rebuilds `A + B K C`, extracts its annihilating polynomial with
/// [`reference_polynomial`] and compares it with `claimed`. Returns the
/// relative mismatch.
pub fn verify_feedback<R: Rng + ?Sized>(
    sys: &FeedbackSystem,
    k: &DenseMatrix,
    claimed: &MonicPoly,
    rng: &mut R,
    tol: &Tolerance,
) -> Result<f64> {
    let closed = sys.closed_loop(k)?;
    let extracted = reference_polynomial(&closed, rng, tol)?;
    if extracted.degree() != claimed.degree() {
        return Err(Error::Verification("degree mismatch".into()));
    }
    let mismatch = extracted.relative_distance(claimed);
    if !(mismatch <= VERIFY_RELATIVE_TOLERANCE) {
        return Err(Error::Verification(format!(
            "recomputed annihilating polynomial differs by {mismatch:.3e} (relative)"
        )));
    }
    Ok(mismatch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::annihilating_polynomial;
    use crate::numerics::companion_matrix;
    use crate::rng::{seeded, uniform_matrix, unit_vector};
    use nalgebra::dmatrix;

    fn small_system() -> FeedbackSystem {
        let d = MonicPoly::new(vec![1.0, -1.0, 2.0, 0.5]).unwrap();
        let a = companion_matrix(&d).unwrap();
        let b = dmatrix![1.0; 0.0; 0.0];
        let c = dmatrix![1.0, 1.0, 0.0; 0.0, 1.0, -1.0];
        FeedbackSystem::new(a, b, c, &Tolerance::for_dim(3)).unwrap()
    }

    #[test]
    fn system_validation() {
        let t = Tolerance::for_dim(2);
        let a = DenseMatrix::identity(2, 2);
        // identity with a single input is not controllable
        assert!(FeedbackSystem::new(a.clone(), dmatrix![1.0; 0.0], dmatrix![1.0, 0.0], &t).is_err());
        // dependent columns of B
        assert!(FeedbackSystem::new(a.clone(), dmatrix![1.0, 2.0; 1.0, 2.0], dmatrix![1.0, 0.0], &t).is_err());
        // dependent rows of C
        assert!(FeedbackSystem::new(a.clone(), DenseMatrix::identity(2, 2), dmatrix![1.0, 1.0; 2.0, 2.0], &t).is_err());
        // bad shapes
        assert!(matches!(
            FeedbackSystem::new(a.clone(), dmatrix![1.0, 0.0, 0.0], dmatrix![1.0, 0.0], &t),
            Err(Error::Shape(_))
        ));
        assert!(FeedbackSystem::new(a, DenseMatrix::identity(2, 2), dmatrix![1.0, 0.0], &t).is_ok());
    }

    #[test]
    fn target_equal_to_current_gives_zero_update() {
        let sys = small_system();
        let t = Tolerance::for_dim(3);
        let mu = Vector::from_vec(vec![1.0]);
        let d = MonicPoly::new(vec![1.0, -1.0, 2.0, 0.5]).unwrap();
        let r = rank_one_update(&sys, &mu, &d, &t).unwrap();
        assert!(r.rho.norm() < 1e-12);
        assert!(r.k.norm() < 1e-12);
        assert!(r.residual < 1e-12);
        assert_eq!(r.relative_residual, 0.0);
        assert_eq!(r.reachability(), Reachability::Reachable);
    }

    #[test]
    fn single_input_forward_construction() {
        let sys = small_system();
        let t = Tolerance::for_dim(3);
        let k0 = dmatrix![0.3, -0.2];
        let b = annihilating_polynomial(&sys.closed_loop(&k0).unwrap(), &mut seeded(1), &t, 4).unwrap();
        let r = rank_one_update(&sys, &Vector::from_vec(vec![1.0]), &b, &t).unwrap();
        assert!(r.residual < 1e-10, "residual {}", r.residual);
        assert!(r.d_new.distance(&b) < 1e-10);
        // with p = 2 < n = 3 and a single input, K is determined uniquely
        assert!((&r.k - &k0).norm() < 1e-9);
        assert!(r.verify(&sys, &mut seeded(2), &t).unwrap() < 1e-9);
    }

    #[test]
    fn feedback_gain_has_rank_at_most_one() {
        let mut rng = seeded(5);
        let t = Tolerance::for_dim(6);
        let a = uniform_matrix(&mut rng, 6, 6, 1.0);
        let b = uniform_matrix(&mut rng, 6, 2, 1.0);
        let c = uniform_matrix(&mut rng, 3, 6, 1.0);
        let sys = FeedbackSystem::new(a, b, c, &t).unwrap();
        let target = MonicPoly::from_tail(&[0.1, 0.2, -0.3, 0.4, 0.0, 1.0]).unwrap();
        let r = rank_one_update(&sys, &unit_vector(&mut rng, 2), &target, &t).unwrap();
        assert!(numerical_rank(&r.k, &Tolerance::new(1e-10, 1e-9).unwrap()).unwrap() <= 1);
        assert!((&r.f - &r.k * sys.c()).norm() < 1e-15);
    }

    #[test]
    fn identity_sigma_gives_zero_state_feedback() {
        let sys = small_system();
        let f = state_feedback_from_sigma(
            &sys,
            &Vector::from_vec(vec![1.0]),
            &SigmaSeq::identity(4),
            &Tolerance::for_dim(3),
        )
        .unwrap();
        assert_eq!(f.shape(), (1, 3));
        assert!(f.norm() == 0.0);
    }

    #[test]
    fn reachability_bands() {
        assert_eq!(Reachability::from_relative_residual(1e-9), Reachability::Reachable);
        assert_eq!(Reachability::from_relative_residual(1e-5), Reachability::Indeterminate);
        assert_eq!(Reachability::from_relative_residual(0.5), Reachability::Unreachable);
    }

    #[test]
    fn bkc_identity_case() {
        let mut rng = seeded(9);
        let a = uniform_matrix(&mut rng, 4, 4, 1.0);
        let b = uniform_matrix(&mut rng, 4, 2, 1.0);
        let c = uniform_matrix(&mut rng, 2, 4, 1.0);
        let v = bkc_reachability_check(&a, &a, &b, &c, &Tolerance::for_dim(4)).unwrap();
        assert!(v.is_reachable());
        assert_eq!(v.max_violation, 0.0);
        assert!(v.feedback.unwrap().norm() == 0.0);
    }

    #[test]
    fn bkc_rejects_shape_mismatch() {
        let a = DenseMatrix::identity(3, 3);
        let r = bkc_reachability_check(&a, &DenseMatrix::identity(2, 2), &a, &a, &Tolerance::for_dim(3));
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn mimo_trivial_target() {
        let sys = small_system();
        let d = MonicPoly::new(vec![1.0, -1.0, 2.0, 0.5]).unwrap();
        let sol = mimo_bilinear_solve(&sys, &d, &Vector::from_vec(vec![1.0]), 10, &Tolerance::for_dim(3)).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.residual_history.len(), 1);
        assert!(sol.rho.norm() < 1e-12);
    }
}
