//! Reference implementations used to cross-check the fast paths.
//!
//! Everything here is deliberately naive: the companion operator assembled
//! as an explicit dense matrix, a textbook dense GMRES, and direct solves
//! of A(mu). Size guards keep accidental large dense work out of test runs.
//! The solver never uses these in its hot path; the spectrum estimator uses
//! [`assemble_companion`] for small dense eigenvalue computations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{least_squares, BandedLu, BandedMatrix, CsrMatrix, Cx, C_ZERO};
use crate::linearization::{LowRankTaylorProblem, TaylorProblem};

/// Hard cap on the dense companion dimension.
pub const COMPANION_GUARD: usize = 4000;

/// Explicitly assembled companion matrix, full or low-rank layout.
#[derive(Debug, Clone)]
pub struct DenseCompanion {
    pub matrix: DMatrix<Cx>,
    /// Problem size n.
    pub n: usize,
    /// Truncation order N: the matrix has N+1 block rows.
    pub trunc_order: usize,
    /// (s, p) when the low-rank layout was assembled.
    pub low_rank: Option<(usize, usize)>,
}

impl DenseCompanion {
    /// Sizes of the N+1 blocks along one side.
    pub fn block_sizes(&self) -> Vec<usize> {
        match self.low_rank {
            None => vec![self.n; self.trunc_order + 1],
            Some((s, p)) => {
                let mut sizes = vec![self.n; s.min(self.trunc_order + 1)];
                while sizes.len() < self.trunc_order + 1 {
                    sizes.push(p);
                }
                sizes
            }
        }
    }

    /// Right-hand side c = -e1 (x) A(0)^-1 b, zero-padded to the assembled size.
    pub fn rhs_c(&self, problem: &dyn TaylorProblem) -> DVector<Cx> {
        let mut c = DVector::from_element(self.matrix.nrows(), C_ZERO);
        let mut chat = problem.solve_a0(problem.rhs());
        chat.neg_mut();
        c.rows_mut(0, self.n).copy_from(&chat);
        c
    }
}

/// Assembles the (N+1)n x (N+1)n companion matrix: block row one holds
/// B_i = -(1/(i+1)) A(0)^-1 A^(i+1)(0), the subdiagonal holds I/j.
pub fn assemble_companion(problem: &dyn TaylorProblem, trunc_order: usize) -> Result<DenseCompanion> {
    let n = problem.dim();
    let dim = (trunc_order + 1) * n;
    if dim > COMPANION_GUARD {
        return Err(Error::SizeGuard {
            context: "assemble_companion",
            requested: dim,
            limit: COMPANION_GUARD,
        });
    }
    let mut m = DMatrix::from_element(dim, dim, C_ZERO);
    let dmax = problem.max_derivative_order().unwrap_or(usize::MAX);

    // B_i column by column through the derivative actions
    let mut unit = DVector::from_element(n, C_ZERO);
    for i in 0..=trunc_order {
        if i + 1 > dmax {
            break;
        }
        for col in 0..n {
            unit[col] = Cx::new(1.0, 0.0);
            let mut bcol = problem.solve_a0(&problem.deriv_apply(i + 1, &unit)?);
            bcol *= Cx::new(-1.0 / (i + 1) as f64, 0.0);
            m.view_mut((0, i * n + col), (n, 1)).copy_from(&bcol);
            unit[col] = C_ZERO;
        }
    }
    // subdiagonal I / j
    for j in 1..=trunc_order {
        for r in 0..n {
            m[(j * n + r, (j - 1) * n + r)] = Cx::new(1.0 / j as f64, 0.0);
        }
    }
    Ok(DenseCompanion {
        matrix: m,
        n,
        trunc_order,
        low_rank: None,
    })
}

/// Assembles the low-rank companion layout: block row one is
/// [B_0 .. B_{s-1}, Utilde_s .. Utilde_N] with Utilde_i = -(1/(i+1)) A(0)^-1 U_{i+1},
/// the subdiagonal is I/1 .. I/(s-1), then (1/s) V^T, then I_p/j.
pub fn assemble_companion_low_rank(
    problem: &dyn LowRankTaylorProblem,
    trunc_order: usize,
) -> Result<DenseCompanion> {
    let n = problem.dim();
    let s = problem.split_order();
    let p = problem.rank();
    if trunc_order < s {
        return Err(Error::OutOfRange(format!(
            "low-rank companion needs N+1 > s (N = {trunc_order}, s = {s})"
        )));
    }
    let dim = s * n + (trunc_order + 1 - s) * p;
    if dim > COMPANION_GUARD {
        return Err(Error::SizeGuard {
            context: "assemble_companion_low_rank",
            requested: dim,
            limit: COMPANION_GUARD,
        });
    }
    let mut m = DMatrix::from_element(dim, dim, C_ZERO);

    // column offsets of the N+1 blocks
    let offsets: Vec<usize> = {
        let mut off = Vec::with_capacity(trunc_order + 2);
        let mut at = 0;
        for i in 0..=trunc_order {
            off.push(at);
            at += if i < s { n } else { p };
        }
        off.push(at);
        off
    };

    // block row one
    let mut unit_n = DVector::from_element(n, C_ZERO);
    #[allow(clippy::needless_range_loop)]
    for i in 0..s {
        for col in 0..n {
            unit_n[col] = Cx::new(1.0, 0.0);
            let mut bcol = problem.solve_a0(&problem.deriv_apply(i + 1, &unit_n)?);
            bcol *= Cx::new(-1.0 / (i + 1) as f64, 0.0);
            m.view_mut((0, offsets[i] + col), (n, 1)).copy_from(&bcol);
            unit_n[col] = C_ZERO;
        }
    }
    let mut unit_p = DVector::from_element(p, C_ZERO);
    #[allow(clippy::needless_range_loop)]
    for i in s..=trunc_order {
        for col in 0..p {
            unit_p[col] = Cx::new(1.0, 0.0);
            let mut ucol = problem.solve_a0(&problem.u_apply(i + 1, &unit_p)?);
            ucol *= Cx::new(-1.0 / (i + 1) as f64, 0.0);
            m.view_mut((0, offsets[i] + col), (n, 1)).copy_from(&ucol);
            unit_p[col] = C_ZERO;
        }
    }

    // subdiagonal blocks
    for j in 1..=trunc_order {
        let scale = Cx::new(1.0 / j as f64, 0.0);
        if j < s {
            for r in 0..n {
                m[(offsets[j] + r, offsets[j - 1] + r)] = scale;
            }
        } else if j == s {
            // (1/s) V^T : p x n
            for col in 0..n {
                unit_n[col] = Cx::new(1.0, 0.0);
                let vt = problem.vt_apply(&unit_n) * scale;
                m.view_mut((offsets[j], offsets[j - 1] + col), (p, 1))
                    .copy_from(&vt);
                unit_n[col] = C_ZERO;
            }
        } else {
            for r in 0..p {
                m[(offsets[j] + r, offsets[j - 1] + r)] = scale;
            }
        }
    }
    Ok(DenseCompanion {
        matrix: m,
        n,
        trunc_order,
        low_rank: Some((s, p)),
    })
}

/// Textbook GMRES iterates on a dense matrix with zero initial guess.
#[derive(Debug, Clone)]
pub struct ReferenceGmres {
    /// Iterate x_m for m = 1..=iters.
    pub iterates: Vec<DVector<Cx>>,
    /// Residual norms ||M x_m - rhs||, same indexing.
    pub residuals: Vec<f64>,
}

/// Plain dense Arnoldi + least squares GMRES, kept independent of the
/// matrix-free path so the two can falsify each other.
pub fn reference_gmres(m: &DMatrix<Cx>, rhs: &DVector<Cx>, iters: usize) -> ReferenceGmres {
    assert_eq!(m.nrows(), m.ncols(), "reference_gmres needs square matrix");
    assert_eq!(m.nrows(), rhs.len(), "reference_gmres rhs dimension");
    let beta0 = rhs.norm();
    let mut q: Vec<DVector<Cx>> = vec![rhs / Cx::new(beta0, 0.0)];
    let mut h = DMatrix::from_element(iters + 1, iters, C_ZERO);
    let mut iterates = Vec::new();
    let mut residuals = Vec::new();

    for k in 0..iters {
        let mut w = m * &q[k];
        for (i, qi) in q.iter().enumerate() {
            let hik = qi.dotc(&w);
            h[(i, k)] = hik;
            w.axpy(-hik, qi, Cx::new(1.0, 0.0));
        }
        // one re-orthogonalization pass
        for (i, qi) in q.iter().enumerate() {
            let corr = qi.dotc(&w);
            h[(i, k)] += corr;
            w.axpy(-corr, qi, Cx::new(1.0, 0.0));
        }
        let beta = w.norm();
        h[(k + 1, k)] = Cx::new(beta, 0.0);

        // solve the small least squares min || H z - beta0 e1 ||
        let hk = h.view((0, 0), (k + 2, k + 1)).into_owned();
        let mut e1 = DVector::from_element(k + 2, C_ZERO);
        e1[0] = Cx::new(beta0, 0.0);
        let ls = least_squares(&hk, &e1);
        let mut x = DVector::from_element(m.nrows(), C_ZERO);
        for (i, qi) in q.iter().enumerate() {
            x.axpy(ls.solution[i], qi, Cx::new(1.0, 0.0));
        }
        residuals.push((m * &x - rhs).norm());
        iterates.push(x);

        if beta <= 1e-14 {
            break; // exact subspace reached
        }
        q.push(&w / Cx::new(beta, 0.0));
    }
    ReferenceGmres {
        iterates,
        residuals,
    }
}

/// Dense size limit for [`direct_solve`].
pub const DIRECT_DENSE_GUARD: usize = 2000;
/// Sparse/banded size limit for [`direct_solve`].
pub const DIRECT_SPARSE_GUARD: usize = 10000;

/// Ground-truth solve of A(mu) x = b by factorizing the assembled A(mu).
///
/// Dense LU below [`DIRECT_DENSE_GUARD`]; above that the matrix is assembled
/// sparsely through unit-vector applies and factored with a banded LU, which
/// covers the structured discretizations this crate ships. Unbanded problems
/// beyond the dense guard are refused.
pub fn direct_solve(problem: &dyn TaylorProblem, mu: Cx) -> Result<DVector<Cx>> {
    let n = problem.dim();
    if n > DIRECT_SPARSE_GUARD {
        return Err(Error::SizeGuard {
            context: "direct_solve",
            requested: n,
            limit: DIRECT_SPARSE_GUARD,
        });
    }
    let b = problem.rhs();
    let mut unit = DVector::from_element(n, C_ZERO);

    if n <= DIRECT_DENSE_GUARD {
        let mut a = DMatrix::from_element(n, n, C_ZERO);
        for col in 0..n {
            unit[col] = Cx::new(1.0, 0.0);
            a.view_mut((0, col), (n, 1))
                .copy_from(&problem.eval_apply(mu, &unit));
            unit[col] = C_ZERO;
        }
        let lu = a.lu();
        lu.solve(b)
            .ok_or_else(|| Error::SingularMatrix(format!("A({mu}) is singular")))
    } else {
        let mut triplets = Vec::new();
        for col in 0..n {
            unit[col] = Cx::new(1.0, 0.0);
            let acol = problem.eval_apply(mu, &unit);
            for r in 0..n {
                if acol[r] != C_ZERO {
                    triplets.push((r, col, acol[r]));
                }
            }
            unit[col] = C_ZERO;
        }
        let csr = CsrMatrix::from_triplets(n, n, triplets)?;
        let (kl, ku) = csr.bandwidths();
        if (kl + ku + 1).saturating_mul(4) > n {
            return Err(Error::SizeGuard {
                context: "direct_solve (matrix not banded enough for the sparse path)",
                requested: n,
                limit: DIRECT_DENSE_GUARD,
            });
        }
        let lu = BandedLu::factor(BandedMatrix::from_csr(&csr)?)?;
        Ok(lu.solve(b))
    }
}
