//! Dense complex linear algebra used by every other layer.

pub mod eigen;
pub mod lu;
pub mod matrix;
pub mod svd;

pub use eigen::{cluster_eigenvalues, eig_dense, eigenvalues, EigenResult};
pub use lu::{inverse, solve_dense, Lu};
pub use matrix::{vec_norm, CMatrix};
pub use svd::{operator_norm, singular_values};
