//! Dense real linear algebra and polynomial primitives.

mod linalg;
mod poly;

pub use linalg::{
    condition_number, eigenvalues, kernel_basis, least_squares_row, numerical_rank, DenseMatrix, LeastSquaresSolution,
    Tolerance, Vector,
};
pub(crate) use linalg::{ensure_finite, ensure_finite_matrix, scale_columns, solve_guarded};
pub use poly::{companion_matrix, poly_from_roots, poly_roots, MonicPoly};
