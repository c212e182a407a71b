//! Shared fixtures: seeded random problems and an independent dense
//! Arnoldi, kept deliberately separate from the library's matrix-free path
//! so the two implementations can falsify each other.
#![allow(dead_code)] // each test target uses a different subset

use infgmres::linalg::CsrMatrix;
use infgmres::problems::GenericProblem;
use infgmres::Cx;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const C_ZERO: Cx = Cx::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

pub fn randc(rng: &mut ChaCha8Rng) -> Cx {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn rand_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<Cx> {
    DVector::from_fn(n, |_, _| randc(rng))
}

pub fn rand_matrix(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> DMatrix<Cx> {
    DMatrix::from_fn(r, cols, |_, _| randc(rng))
}

/// Random polynomial problem with a comfortably nonsingular A(0).
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, degree: usize) -> GenericProblem {
    let mut coeffs: Vec<DMatrix<Cx>> = (0..=degree)
        .map(|_| rand_matrix(rng, n, n) * c(0.5, 0.0))
        .collect();
    coeffs[0] += DMatrix::<Cx>::identity(n, n) * c(2.0, 0.0);
    let b = rand_vector(rng, n);
    GenericProblem::from_dense_coefficients(coeffs, b).expect("nonsingular by construction")
}

/// Random problem whose orders beyond `s` factor as U F^(i)(0) V^T, with
/// derivative data stored for orders s+1 ..= s+depth.
pub fn random_lowrank_problem(
    rng: &mut ChaCha8Rng,
    n: usize,
    s: usize,
    p: usize,
    depth: usize,
) -> GenericProblem {
    let mut coeffs: Vec<DMatrix<Cx>> = (0..=s).map(|_| rand_matrix(rng, n, n) * c(0.5, 0.0)).collect();
    coeffs[0] += DMatrix::<Cx>::identity(n, n) * c(2.0, 0.0);
    let b = rand_vector(rng, n);
    let u = CsrMatrix::from_dense(&rand_matrix(rng, n, p));
    let v = CsrMatrix::from_dense(&rand_matrix(rng, n, p));
    let f_derivs: Vec<DMatrix<Cx>> = (0..depth)
        .map(|k| rand_matrix(rng, p, p) * c(0.5f64.powi(k as i32), 0.0))
        .collect();
    GenericProblem::from_dense_coefficients(coeffs, b)
        .expect("nonsingular by construction")
        .with_low_rank_tail(s, u, v, f_derivs)
        .expect("consistent dimensions")
}

/// Textbook dense Arnoldi with classical Gram-Schmidt and one unconditional
/// re-orthogonalization pass (the same schedule as the library default).
/// Returns (Q, Hbar) with Q of size n x (m+1) and Hbar of size (m+1) x m.
pub fn dense_arnoldi(mat: &DMatrix<Cx>, start: &DVector<Cx>, m: usize) -> (DMatrix<Cx>, DMatrix<Cx>) {
    let n = mat.nrows();
    let mut q = vec![start / c(start.norm(), 0.0)];
    let mut h = DMatrix::from_element(m + 1, m, C_ZERO);
    for k in 0..m {
        let mut w = mat * &q[k];
        for (i, qi) in q.iter().enumerate() {
            let hik = qi.dotc(&w);
            h[(i, k)] = hik;
            w.axpy(-hik, qi, c(1.0, 0.0));
        }
        for (i, qi) in q.iter().enumerate() {
            let corr = qi.dotc(&w);
            h[(i, k)] += corr;
            w.axpy(-corr, qi, c(1.0, 0.0));
        }
        let beta = w.norm();
        h[(k + 1, k)] = c(beta, 0.0);
        if beta <= 1e-14 {
            break;
        }
        q.push(w / c(beta, 0.0));
    }
    let mut qm = DMatrix::from_element(n, q.len(), C_ZERO);
    for (j, qj) in q.iter().enumerate() {
        qm.set_column(j, qj);
    }
    (qm, h)
}

/// Smallest-singular-vector of (mat - lambda I): an eigenvector estimate.
pub fn null_vector_of_shift(mat: &DMatrix<Cx>, lambda: Cx) -> DVector<Cx> {
    let n = mat.nrows();
    let shifted = mat - DMatrix::<Cx>::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    // rows of v_t are right singular vectors; singular values are sorted
    // descending, so the last row spans the near-null space
    vt.row(vt.nrows() - 1).adjoint()
}
