//! Dense complex least squares for small overdetermined systems.

use nalgebra::{DMatrix, DVector};

use super::Cx;

/// Solution of min_z ||M z - rhs||_2.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: DVector<Cx>,
    /// Attained minimum ||M z - rhs||.
    pub residual: f64,
    /// True if M was rank deficient to working precision and the
    /// minimum-norm solution was returned instead of the QR solution.
    pub rank_deficient: bool,
}

/// Householder-QR least squares with SVD fallback on rank deficiency.
///
/// Rank tolerance is relative: diagonal entries of R below
/// 1e-12 * max |r_ii| flag the system as rank deficient, in which case the
/// minimum-norm solution is computed from the SVD pseudo-inverse.
pub fn least_squares(m: &DMatrix<Cx>, rhs: &DVector<Cx>) -> LeastSquares {
    assert!(m.nrows() >= m.ncols(), "least squares expects tall matrix");
    assert_eq!(m.nrows(), rhs.len(), "least squares rhs dimension");
    let cols = m.ncols();
    if cols == 0 {
        return LeastSquares {
            solution: DVector::zeros(0),
            residual: rhs.norm(),
            rank_deficient: false,
        };
    }

    let qr = m.clone().qr();
    let r = qr.r();
    let rmax = (0..cols).map(|i| r[(i, i)].norm()).fold(0.0f64, f64::max);
    let rank_deficient = (0..cols).any(|i| r[(i, i)].norm() <= 1e-12 * rmax) || rmax == 0.0;

    let solution = if rank_deficient {
        let svd = m.clone().svd(true, true);
        let smax = svd.singular_values.max();
        svd.solve(rhs, 1e-12 * smax.max(1e-300))
            .unwrap_or_else(|_| DVector::zeros(cols))
    } else {
        let qtb = qr.q().adjoint() * rhs;
        r.solve_upper_triangular(&qtb.rows(0, cols).into_owned())
            .expect("nonsingular R")
    };

    let residual = (m * &solution - rhs).norm();
    LeastSquares {
        solution,
        residual,
        rank_deficient,
    }
}
