//! Dense complex linear algebra and a small simplex solver.

mod eigen;
mod matrix;
mod simplex;

pub use eigen::{
    eig_hermitian, hermitian_part, matrix_sign, max_eigenvalue, trace_norm, HermitianEigen,
    HERMITIAN_TOL, OFF_DIAGONAL_TOL,
};
pub use matrix::{
    kron, kron_vec, partial_trace, product_expectation, reduce_to_a, reduce_to_b, sigma_x, sigma_y,
    sigma_z, vec_norm, ComplexMatrix, Side, C64, I, ONE, ZERO,
};
pub use simplex::{simplex_maximize, LpProblem, LpSolution, LpStatus, PIVOT_TOL};
