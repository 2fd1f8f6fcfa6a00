//! Annihilating polynomials reachable by static output feedback.
//!
//! Given a linear system `(A, B, C)`, the closed-loop matrix under static
//! output feedback `u = K y` is `A + B K C`. This crate characterises which
//! annihilating polynomials such matrices can have, using full Krylov
//! sequences and the group of unit upper-triangular Toeplitz matrices, and
//! drives iterative rank-one updates towards a target polynomial.
//!
//! The modules build on each other bottom-up:
//!
//! - [`numerics`]: least squares, rank, kernels, companion matrices, roots.
//! - [`sigma`]: truncated power series with unit constant term.
//! - [`krylov`]: full Krylov sequences and annihilating polynomials.
//! - [`feedback`]: rank-one updates, the `BKC` factorisation test and the
//!   alternating bilinear solver.
//! - [`driver`]: the iterative multi-input procedure and root shifting.
//! - [`harness`]: random instances, experiments, persistence and reports.

// NaN must fail validation, hence `!(x > 0.0)` style checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod driver;
pub mod error;
pub mod feedback;
pub mod harness;
pub mod krylov;
pub mod numerics;
pub mod rng;
pub mod sigma;

pub use error::{Error, Result};
pub use numerics::{DenseMatrix, MonicPoly, Tolerance, Vector};
