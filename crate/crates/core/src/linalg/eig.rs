//! Complex dense eigenvalues via the Schur decomposition.
//!
//! Wraps nalgebra's Schur iteration with a bounded iteration count and a
//! deterministic random-unitary-similarity retry (QR iteration can cycle on
//! exactly structured matrices such as nilpotent shifts; a unitary
//! similarity breaks the cycle without changing the spectrum).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Cx, C_ZERO};
use crate::error::{Error, Result};

const SCHUR_EPS: f64 = 1e-14;

fn schur_attempts(a: &DMatrix<Cx>) -> Result<DMatrix<Cx>> {
    let n = a.nrows();
    let max_iter = 40 * n.max(8) + 100;
    if let Some(s) = nalgebra::linalg::Schur::try_new(a.clone(), SCHUR_EPS, max_iter) {
        let (_, t) = s.unpack();
        return Ok(t);
    }
    for attempt in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE + attempt);
        let g = DMatrix::from_fn(n, n, |_, _| {
            Cx::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let q = g.qr().q();
        let b = q.adjoint() * a * &q;
        if let Some(s) = nalgebra::linalg::Schur::try_new(b, SCHUR_EPS, max_iter) {
            let (_, t) = s.unpack();
            return Ok(t);
        }
    }
    Err(Error::EigFailure(format!(
        "Schur iteration did not converge for {n}x{n} matrix"
    )))
}

/// Eigenvalues of a complex square matrix, unordered.
pub fn complex_eigenvalues(a: &DMatrix<Cx>) -> Result<Vec<Cx>> {
    assert_eq!(a.nrows(), a.ncols(), "eigenvalues of non-square matrix");
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    if a.nrows() == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let t = schur_attempts(a)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Upper-triangular Schur factor of `a` with the diagonal sorted by
/// descending modulus.
///
/// The returned `T` is unitarily similar to `a`, so any unitarily invariant
/// norm of a polynomial in `a` can be evaluated on `T` instead. Sorting uses
/// adjacent 2x2 unitary swaps; swapped diagonal entries are placed exactly,
/// which keeps annihilating factors (T - t_ii I) structurally zero in
/// column i.
pub fn schur_triangular_sorted(a: &DMatrix<Cx>) -> Result<DMatrix<Cx>> {
    assert_eq!(a.nrows(), a.ncols(), "schur of non-square matrix");
    let n = a.nrows();
    if n <= 1 {
        return Ok(a.clone());
    }
    let mut t = schur_attempts(a)?;
    // bubble sort by |diagonal|, descending
    loop {
        let mut swapped = false;
        for k in 0..n - 1 {
            if t[(k, k)].norm() + 1e-300 < t[(k + 1, k + 1)].norm() {
                swap_adjacent(&mut t, k);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    Ok(t)
}

/// Unitary similarity exchanging diagonal entries k and k+1 of triangular T.
fn swap_adjacent(t: &mut DMatrix<Cx>, k: usize) {
    let n = t.nrows();
    let a = t[(k, k)];
    let tt = t[(k, k + 1)];
    let c = t[(k + 1, k + 1)];
    // eigenvector of [[a, t],[0, c]] for eigenvalue c is [t, c - a]
    let w0 = tt;
    let w1 = c - a;
    let nrm = (w0.norm_sqr() + w1.norm_sqr()).sqrt();
    if nrm == 0.0 {
        return; // a == c and t == 0: nothing to swap
    }
    let u0 = w0 / nrm;
    let u1 = w1 / nrm;
    // G = [u, v] with v orthogonal to u
    let v0 = -w1.conj() / nrm;
    let v1 = w0.conj() / nrm;

    // rows k, k+1: T <- G^H T  (columns k..n)
    for j in k..n {
        let x = t[(k, j)];
        let y = t[(k + 1, j)];
        t[(k, j)] = u0.conj() * x + u1.conj() * y;
        t[(k + 1, j)] = v0.conj() * x + v1.conj() * y;
    }
    // columns k, k+1: T <- T G  (rows 0..k+2)
    for i in 0..(k + 2).min(n) {
        let x = t[(i, k)];
        let y = t[(i, k + 1)];
        t[(i, k)] = x * u0 + y * u1;
        t[(i, k + 1)] = x * v0 + y * v1;
    }
    // place the exchanged eigenvalues exactly and restore triangularity
    t[(k + 1, k)] = C_ZERO;
    t[(k, k)] = c;
    t[(k + 1, k + 1)] = a;
}

/// Largest singular value by power iteration on M^H M.
pub fn spectral_norm(m: &DMatrix<Cx>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut v = DVector::from_fn(m.ncols(), |_, _| {
        Cx::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let nv = v.norm();
    if nv == 0.0 {
        return 0.0;
    }
    v /= Cx::new(nv, 0.0);
    let mut sigma = 0.0f64;
    for _ in 0..200 {
        let w = m * &v;
        let s = w.norm();
        if s == 0.0 {
            return 0.0;
        }
        let u = m.adjoint() * w;
        let un = u.norm();
        if un == 0.0 {
            return s;
        }
        v = u / Cx::new(un, 0.0);
        if (s - sigma).abs() <= 1e-13 * s.max(1e-300) {
            return s;
        }
        sigma = s;
    }
    sigma
}
