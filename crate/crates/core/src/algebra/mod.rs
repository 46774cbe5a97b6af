//! Dense small-matrix and polynomial numerics.

mod eigen;
mod matrix;
mod quadratic;

pub use eigen::{
    characteristic_polynomial, durand_kerner, eigendecompose, eigenvalues, matrix_root, principal_root,
    Eigendecomposition, Eigenvalue, MatrixRoot, Spectrum, MAX_EIGEN_SIZE,
};
pub use matrix::{
    mat_product_chain, real_vector, vec_add_assign, vec_norm, vec_sub, vectors_close, Matrix, Vector, C64,
    SINGULAR_TOL,
};
pub use quadratic::{solve_quadratic, Quadratic};
