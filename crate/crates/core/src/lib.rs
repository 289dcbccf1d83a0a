pub mod bgk;
pub mod bounds;
pub mod clifford;
pub mod conformal;
pub mod contour;
pub mod detfun;
pub mod error;
pub mod ltsum;
pub mod numerics;
pub mod operators;
pub mod quadrature;
pub mod schatten;
pub mod spectra;

pub use error::{Error, Result};
pub use num_complex::Complex64;
