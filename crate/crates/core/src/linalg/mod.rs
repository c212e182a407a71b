//! Internal dense/sparse linear algebra support.
//!
//! Small, self-contained kernels the solver needs but that are not part of
//! the public problem/solver API surface: a CSR matrix for sparse operands,
//! a banded LU for large structured A(0) factorizations, a complex
//! eigenvalue wrapper around the Schur decomposition, and a dense least
//! squares solver for the shifted Hessenberg systems.

mod banded;
mod eig;
mod lstsq;
mod sparse;

pub use banded::{BandedLu, BandedMatrix};
pub use eig::{complex_eigenvalues, schur_triangular_sorted, spectral_norm};
pub use lstsq::{least_squares, LeastSquares};
pub use sparse::CsrMatrix;

use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type Cx = Complex64;

/// `Cx` zero, spelled once.
pub(crate) const C_ZERO: Cx = Cx::new(0.0, 0.0);
