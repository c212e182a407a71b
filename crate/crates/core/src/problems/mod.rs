//! Concrete problem builders.
//!
//! Three problem families implement [`TaylorProblem`](crate::linearization::TaylorProblem):
//! the time-delay transfer function ([`delay`]), the 1-D Helmholtz equation
//! with an absorbing boundary condition ([`helmholtz1d`], which is also a
//! low-rank problem), and a generic problem assembled from Matrix Market
//! coefficient files ([`generic`]).

pub mod delay;
pub mod generic;
pub mod helmholtz1d;
pub mod matrix_market;

pub use delay::{build_delay, DelayProblem, MatrixGenerator};
pub use generic::{GenericProblem, Manifest, ManifestLowRank};
pub use helmholtz1d::Helmholtz1dProblem;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{BandedLu, BandedMatrix, CsrMatrix, Cx};

/// Dense-factorization size threshold for A(0).
pub const DENSE_A0_THRESHOLD: usize = 2000;

/// A(0) factorization, computed once per problem: banded LU whenever the
/// band is narrow, dense LU otherwise (bounded by [`DENSE_A0_THRESHOLD`]).
pub(crate) enum A0Factor {
    Dense(nalgebra::linalg::LU<Cx, nalgebra::Dyn, nalgebra::Dyn>),
    Banded(BandedLu),
}

impl std::fmt::Debug for A0Factor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            A0Factor::Dense(_) => write!(f, "A0Factor::Dense"),
            A0Factor::Banded(_) => write!(f, "A0Factor::Banded"),
        }
    }
}

impl A0Factor {
    pub(crate) fn factor(a0: &CsrMatrix) -> Result<Self> {
        let n = a0.nrows();
        if n != a0.ncols() {
            return Err(Error::DimensionMismatch {
                context: "A(0) factorization",
                expected: n,
                got: a0.ncols(),
            });
        }
        let (kl, ku) = a0.bandwidths();
        let band_rows = 2 * kl + ku + 1;
        if band_rows * 4 <= n {
            return Ok(A0Factor::Banded(BandedLu::factor(BandedMatrix::from_csr(
                a0,
            )?)?));
        }
        if n > DENSE_A0_THRESHOLD {
            return Err(Error::SizeGuard {
                context: "dense A(0) factorization (matrix is neither small nor banded)",
                requested: n,
                limit: DENSE_A0_THRESHOLD,
            });
        }
        let dense: DMatrix<Cx> = a0.to_dense();
        let lu = dense.lu();
        // partial-pivot LU only reveals exact singularity; probe it
        let probe = DVector::from_element(n, Cx::new(1.0, 0.0));
        match lu.solve(&probe) {
            Some(x) if x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) => {
                Ok(A0Factor::Dense(lu))
            }
            _ => Err(Error::SingularMatrix("A(0) is singular".into())),
        }
    }

    pub(crate) fn solve(&self, y: &DVector<Cx>) -> DVector<Cx> {
        match self {
            A0Factor::Dense(lu) => lu.solve(y).expect("factorized nonsingular A(0)"),
            A0Factor::Banded(lu) => lu.solve(y),
        }
    }
}
