//! Arnoldi factorization of the companion operator.
//!
//! One factorization C Q_m = Q_{m+1} Hbar_m is built per problem,
//! independent of the parameter mu; shift invariance of Krylov subspaces
//! then turns every evaluation of x(mu) into a small least squares problem
//! (module `solver`). Three interchangeable basis storage schemes are
//! provided:
//!
//! * [`BasisVariant::Full`] - block-growing storage; column j keeps its j
//!   nonzero n-blocks explicitly.
//! * [`BasisVariant::LowRank`] - for problems whose high-order Taylor
//!   coefficients factor as U_i V^T, columns grow by n rows for the first s
//!   steps and by p rows afterwards.
//! * [`BasisVariant::Tensor`] - the block-triangular basis is compressed as
//!   one orthonormal n x r matrix Z plus a small coefficient tensor; block
//!   l of column j is `Z * coeffs[j][l]`. Memory is O(n m + m^3) instead
//!   of O(n m^2), and the produced Hessenberg data is identical to the
//!   full variant up to roundoff.
//!
//! Orthogonalization is classical Gram-Schmidt with one unconditional
//! re-orthogonalization pass by default; a DGKS-style conditional second
//! pass is selectable. A subdiagonal entry below 1e-14 times the norm of
//! the unorthogonalized vector declares a lucky breakdown: the subspace is
//! exactly invariant and the factorization is returned truncated, flagged.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{Cx, C_ZERO};
use crate::linearization::{
    companion_apply, companion_apply_low_rank, BlockVector, LowRankTaylorProblem, TaylorProblem,
};

/// Relative subdiagonal threshold below which a step is a lucky breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-14;

/// Gram-Schmidt re-orthogonalization policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrthoPolicy {
    /// Classical Gram-Schmidt with one unconditional second pass.
    #[default]
    TwoPass,
    /// Second pass only when the first pass removed more than 1/sqrt(2)
    /// of the vector's norm (the DGKS criterion).
    Dgks,
}

impl OrthoPolicy {
    fn needs_second_pass(self, norm_before: f64, norm_after: f64) -> bool {
        match self {
            OrthoPolicy::TwoPass => true,
            OrthoPolicy::Dgks => norm_after < norm_before / std::f64::consts::SQRT_2,
        }
    }
}

/// Which basis storage scheme a factorization uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisVariant {
    Full,
    LowRank,
    Tensor,
}

impl std::fmt::Display for BasisVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisVariant::Full => write!(f, "full"),
            BasisVariant::LowRank => write!(f, "lowrank"),
            BasisVariant::Tensor => write!(f, "tensor"),
        }
    }
}

/// The rectangular upper-Hessenberg factor Hbar_m, stored by columns.
///
/// Column j holds the j+2 potentially nonzero entries of rows 0..=j+1; the
/// trailing entry is the real nonnegative subdiagonal beta_j.
#[derive(Debug, Clone, Default)]
pub struct Hessenberg {
    cols: Vec<Vec<Cx>>,
}

impl Hessenberg {
    /// Number of completed iterations m (columns).
    pub fn m(&self) -> usize {
        self.cols.len()
    }

    /// Entry (i, j) of the (m+1) x m matrix.
    pub fn entry(&self, i: usize, j: usize) -> Cx {
        let col = &self.cols[j];
        if i < col.len() {
            col[i]
        } else {
            C_ZERO
        }
    }

    /// Subdiagonal entry beta_j (real by construction).
    pub fn subdiag(&self, j: usize) -> f64 {
        self.cols[j].last().map(|c| c.re).unwrap_or(0.0)
    }

    /// Leading (m'+1) x m' dense view for a budget m' <= m.
    pub fn leading_matrix(&self, m: usize) -> DMatrix<Cx> {
        assert!(m <= self.m(), "budget beyond built iterations");
        DMatrix::from_fn(m + 1, m, |i, j| self.entry(i, j))
    }

    /// The square m' x m' part (the last row dropped), used for Ritz values.
    pub fn square_matrix(&self, m: usize) -> DMatrix<Cx> {
        assert!(m <= self.m(), "budget beyond built iterations");
        DMatrix::from_fn(m, m, |i, j| self.entry(i, j))
    }

    fn push_column(&mut self, mut h: Vec<Cx>, beta: f64) {
        h.push(Cx::new(beta, 0.0));
        self.cols.push(h);
    }
}

/// Orthonormal Krylov basis in one of the three storage schemes.
#[derive(Debug, Clone)]
pub enum Basis {
    Full(FullBasis),
    LowRank(LowRankBasis),
    Tensor(TensorBasis),
}

/// Block-growing storage: column j keeps exactly its j+1 nonzero n-blocks.
#[derive(Debug, Clone)]
pub struct FullBasis {
    pub(crate) columns: Vec<BlockVector>,
    n: usize,
}

/// Mixed n/p-block storage for low-rank problems.
#[derive(Debug, Clone)]
pub struct LowRankBasis {
    pub(crate) columns: Vec<BlockVector>,
    n: usize,
    s: usize,
    p: usize,
}

impl LowRankBasis {
    /// Order s after which column growth switches from n to p rows.
    pub fn split_order(&self) -> usize {
        self.s
    }

    /// Rank p of the compressed blocks.
    pub fn rank(&self) -> usize {
        self.p
    }
}

/// Tensor-compressed storage: block l of column j is `Z * coeffs[j][l]`.
///
/// Z has orthonormal columns and grows by at most one column per step, so
/// r <= m+1. Coefficient vectors keep the length they had when created;
/// entries beyond that length are structurally zero.
#[derive(Debug, Clone)]
pub struct TensorBasis {
    z_cols: Vec<DVector<Cx>>,
    coeffs: Vec<Vec<DVector<Cx>>>,
    n: usize,
}

/// Result of orthogonalizing one vector against a basis.
#[derive(Debug, Clone)]
pub struct GramSchmidt {
    /// Projection coefficients h, one per basis column.
    pub coefficients: DVector<Cx>,
    /// Norm of the orthogonal remainder.
    pub beta: f64,
    /// The normalized remainder, or `None` on (lucky) breakdown.
    pub orthonormal: Option<BlockVector>,
}

impl Basis {
    pub fn variant(&self) -> BasisVariant {
        match self {
            Basis::Full(_) => BasisVariant::Full,
            Basis::LowRank(_) => BasisVariant::LowRank,
            Basis::Tensor(_) => BasisVariant::Tensor,
        }
    }

    pub fn num_columns(&self) -> usize {
        match self {
            Basis::Full(b) => b.columns.len(),
            Basis::LowRank(b) => b.columns.len(),
            Basis::Tensor(b) => b.coeffs.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Basis::Full(b) => b.n,
            Basis::LowRank(b) => b.n,
            Basis::Tensor(b) => b.n,
        }
    }

    /// Number of complex scalars held in the basis storage.
    pub fn storage_complex_entries(&self) -> usize {
        match self {
            Basis::Full(b) => b.columns.iter().map(BlockVector::stored_len).sum(),
            Basis::LowRank(b) => b.columns.iter().map(BlockVector::stored_len).sum(),
            Basis::Tensor(b) => {
                let zc: usize = b.z_cols.iter().map(|z| z.len()).sum();
                let cc: usize = b
                    .coeffs
                    .iter()
                    .flat_map(|col| col.iter().map(|a| a.len()))
                    .sum();
                zc + cc
            }
        }
    }

    /// Column j as an explicit block vector (materialized for the tensor
    /// scheme).
    pub fn column(&self, j: usize) -> BlockVector {
        match self {
            Basis::Full(b) => b.columns[j].clone(),
            Basis::LowRank(b) => b.columns[j].clone(),
            Basis::Tensor(b) => {
                BlockVector::new(b.coeffs[j].iter().map(|a| b.reconstruct(a)).collect())
            }
        }
    }

    /// First block (rows 1..n) of column j.
    pub fn first_block(&self, j: usize) -> DVector<Cx> {
        match self {
            Basis::Full(b) => b.columns[j].block(0).clone(),
            Basis::LowRank(b) => b.columns[j].block(0).clone(),
            Basis::Tensor(b) => b.reconstruct(&b.coeffs[j][0]),
        }
    }

    /// Rows 1..n of the stacked basis matrix, columns 1..m.
    ///
    /// For the tensor scheme this is Z times the first-block coefficient
    /// slab; full columns are never materialized.
    pub fn first_block_matrix(&self, m: usize) -> DMatrix<Cx> {
        assert!(m <= self.num_columns(), "budget beyond stored columns");
        let n = self.dim();
        let mut out = DMatrix::from_element(n, m, C_ZERO);
        for j in 0..m {
            out.set_column(j, &self.first_block(j));
        }
        out
    }

    /// first_block_matrix(1:n, 1:len(z)) * z without forming the matrix.
    pub fn first_block_combine(&self, z: &DVector<Cx>) -> DVector<Cx> {
        let m = z.len();
        assert!(m <= self.num_columns(), "budget beyond stored columns");
        match self {
            Basis::Full(b) => combine_first_blocks(&b.columns, z, b.n),
            Basis::LowRank(b) => combine_first_blocks(&b.columns, z, b.n),
            Basis::Tensor(b) => {
                let r = b.z_cols.len();
                let mut w = DVector::from_element(r, C_ZERO);
                for (j, zj) in z.iter().enumerate() {
                    let a = &b.coeffs[j][0];
                    for (c, ac) in a.iter().enumerate() {
                        w[c] += zj * ac;
                    }
                }
                b.reconstruct(&w)
            }
        }
    }

    /// Orthogonalizes `y` against the stored columns without mutating the
    /// basis, returning the projection coefficients, the remainder norm,
    /// and the normalized remainder.
    pub fn gram_schmidt(&self, y: &BlockVector, policy: OrthoPolicy) -> GramSchmidt {
        match self {
            Basis::Full(b) => gram_schmidt_blocks(&b.columns, y, policy),
            Basis::LowRank(b) => gram_schmidt_blocks(&b.columns, y, policy),
            Basis::Tensor(b) => {
                // project through Z so the basis columns never materialize,
                // then form the remainder blockwise
                let m = b.coeffs.len();
                let y_norm = y.norm();
                let mut h = DVector::from_element(m, C_ZERO);
                let mut rem = y.clone();
                for pass in 0..2 {
                    let proj: Vec<DVector<Cx>> = rem
                        .blocks()
                        .iter()
                        .map(|blk| b.project(blk))
                        .collect();
                    let mut correction = DVector::from_element(m, C_ZERO);
                    for (j, col) in b.coeffs.iter().enumerate() {
                        let mut acc = C_ZERO;
                        for (l, a) in col.iter().enumerate() {
                            if l >= proj.len() {
                                break;
                            }
                            acc += coeff_dot(a, &proj[l]);
                        }
                        correction[j] = acc;
                    }
                    for (j, col) in b.coeffs.iter().enumerate() {
                        let cj = correction[j];
                        if cj == C_ZERO {
                            continue;
                        }
                        for (l, a) in col.iter().enumerate() {
                            let recon = b.reconstruct(a);
                            rem.blocks_mut()[l].axpy(-cj, &recon, Cx::new(1.0, 0.0));
                        }
                    }
                    h += correction;
                    if pass == 0 && !policy.needs_second_pass(y_norm, rem.norm()) {
                        break;
                    }
                }
                finish_gs(h, rem, y_norm)
            }
        }
    }
}

fn combine_first_blocks(columns: &[BlockVector], z: &DVector<Cx>, n: usize) -> DVector<Cx> {
    let mut out = DVector::from_element(n, C_ZERO);
    for (j, zj) in z.iter().enumerate() {
        out.axpy(*zj, columns[j].block(0), Cx::new(1.0, 0.0));
    }
    out
}

fn coeff_dot(a: &DVector<Cx>, b: &DVector<Cx>) -> Cx {
    let k = a.len().min(b.len());
    let mut acc = C_ZERO;
    for i in 0..k {
        acc += a[i].conj() * b[i];
    }
    acc
}

fn gram_schmidt_blocks(
    columns: &[BlockVector],
    y: &BlockVector,
    policy: OrthoPolicy,
) -> GramSchmidt {
    let y_norm = y.norm();
    let mut h = DVector::from_element(columns.len(), C_ZERO);
    let mut rem = y.clone();
    for pass in 0..2 {
        for (i, q) in columns.iter().enumerate() {
            let c = q.dot(&rem);
            rem.axpy(-c, q);
            h[i] += c;
        }
        if pass == 0 && !policy.needs_second_pass(y_norm, rem.norm()) {
            break;
        }
    }
    finish_gs(h, rem, y_norm)
}

fn finish_gs(h: DVector<Cx>, mut rem: BlockVector, y_norm: f64) -> GramSchmidt {
    let beta = rem.norm();
    if beta <= BREAKDOWN_TOL * y_norm {
        GramSchmidt {
            coefficients: h,
            beta: 0.0,
            orthonormal: None,
        }
    } else {
        rem.scale(Cx::new(1.0 / beta, 0.0));
        GramSchmidt {
            coefficients: h,
            beta,
            orthonormal: Some(rem),
        }
    }
}

/// Free-function form of [`Basis::gram_schmidt`].
pub fn gram_schmidt(y: &BlockVector, basis: &Basis, policy: OrthoPolicy) -> GramSchmidt {
    basis.gram_schmidt(y, policy)
}

impl TensorBasis {
    fn reconstruct(&self, a: &DVector<Cx>) -> DVector<Cx> {
        let mut out = DVector::from_element(self.n, C_ZERO);
        for (c, ac) in a.iter().enumerate() {
            if *ac != C_ZERO {
                out.axpy(*ac, &self.z_cols[c], Cx::new(1.0, 0.0));
            }
        }
        out
    }

    fn project(&self, x: &DVector<Cx>) -> DVector<Cx> {
        DVector::from_fn(self.z_cols.len(), |c, _| self.z_cols[c].dotc(x))
    }

    /// Width r of the orthonormal factor Z.
    pub fn compression_rank(&self) -> usize {
        self.z_cols.len()
    }
}

/// Completed (mu-independent) Arnoldi factorization of the companion
/// operator: basis + rectangular Hessenberg + the starting norm ||A(0)^-1 b||.
#[derive(Debug, Clone)]
pub struct ArnoldiFactorization {
    basis: Basis,
    hessenberg: Hessenberg,
    c_norm: f64,
    breakdown_at: Option<usize>,
}

impl ArnoldiFactorization {
    /// Completed iteration count m.
    pub fn m(&self) -> usize {
        self.hessenberg.m()
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn hessenberg(&self) -> &Hessenberg {
        &self.hessenberg
    }

    /// ||A(0)^-1 b||, the right-hand-side norm of the shifted least squares
    /// problems.
    pub fn c_norm(&self) -> f64 {
        self.c_norm
    }

    /// Step at which a lucky breakdown truncated the factorization, if any.
    pub fn breakdown_at(&self) -> Option<usize> {
        self.breakdown_at
    }

    /// True if the Krylov subspace is exactly invariant.
    pub fn exact_subspace(&self) -> bool {
        self.breakdown_at.is_some()
    }

    /// Q(1:n, 1:m) for a budget m <= built iterations.
    pub fn first_block_matrix(&self, m: usize) -> DMatrix<Cx> {
        self.basis.first_block_matrix(m.min(self.basis.num_columns()))
    }
}

/// Incremental Arnoldi driver; one [`step`](ArnoldiProcess::step) extends the
/// factorization by one column.
pub struct ArnoldiProcess<'a> {
    problem: &'a dyn TaylorProblem,
    low_rank: Option<&'a dyn LowRankTaylorProblem>,
    policy: OrthoPolicy,
    fac: ArnoldiFactorization,
}

/// What one Arnoldi step produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// A new basis column was added.
    Expanded,
    /// Lucky breakdown: the subspace is invariant, no column added.
    Breakdown,
}

impl<'a> ArnoldiProcess<'a> {
    pub fn new(
        problem: &'a dyn TaylorProblem,
        variant: BasisVariant,
        policy: OrthoPolicy,
    ) -> Result<Self> {
        let n = problem.dim();
        if problem.rhs().len() != n {
            return Err(Error::DimensionMismatch {
                context: "arnoldi rhs",
                expected: n,
                got: problem.rhs().len(),
            });
        }
        let mut chat = problem.solve_a0(problem.rhs());
        chat.neg_mut();
        let c_norm = chat.norm();
        if c_norm == 0.0 {
            return Err(Error::EmptyKrylov);
        }
        let q1 = &chat / Cx::new(c_norm, 0.0);

        let (basis, low_rank) = match variant {
            BasisVariant::Full => (
                Basis::Full(FullBasis {
                    columns: vec![BlockVector::from_single(q1)],
                    n,
                }),
                None,
            ),
            BasisVariant::LowRank => {
                let lr = problem.as_low_rank().ok_or_else(|| {
                    Error::ProblemDefinition(
                        "the lowrank variant requires a problem with a declared low-rank tail"
                            .into(),
                    )
                })?;
                (
                    Basis::LowRank(LowRankBasis {
                        columns: vec![BlockVector::from_single(q1)],
                        n,
                        s: lr.split_order(),
                        p: lr.rank(),
                    }),
                    Some(lr),
                )
            }
            BasisVariant::Tensor => (
                Basis::Tensor(TensorBasis {
                    z_cols: vec![q1],
                    coeffs: vec![vec![DVector::from_element(1, Cx::new(1.0, 0.0))]],
                    n,
                }),
                None,
            ),
        };

        Ok(Self {
            problem,
            low_rank,
            policy,
            fac: ArnoldiFactorization {
                basis,
                hessenberg: Hessenberg::default(),
                c_norm,
                breakdown_at: None,
            },
        })
    }

    /// The factorization built so far (valid after every step).
    pub fn factorization_ref(&self) -> &ArnoldiFactorization {
        &self.fac
    }

    pub fn m(&self) -> usize {
        self.fac.m()
    }

    pub fn finished(&self) -> bool {
        self.fac.breakdown_at.is_some()
    }

    /// Consumes the driver, returning the factorization.
    pub fn into_factorization(self) -> ArnoldiFactorization {
        self.fac
    }

    /// Runs one Arnoldi step: matvec, Gram-Schmidt, Hessenberg extension.
    pub fn step(&mut self) -> Result<StepOutcome> {
        if self.finished() {
            return Err(Error::OutOfRange(
                "factorization already hit an invariant subspace".into(),
            ));
        }
        let step_index = self.fac.m() + 1;
        match &mut self.fac.basis {
            Basis::Full(b) => {
                let y = companion_apply(self.problem, b.columns.last().expect("nonempty"))?;
                let gs = gram_schmidt_blocks(&b.columns, &y, self.policy);
                self.fac
                    .hessenberg
                    .push_column(gs.coefficients.iter().copied().collect(), gs.beta);
                match gs.orthonormal {
                    Some(q) => {
                        b.columns.push(q);
                        Ok(StepOutcome::Expanded)
                    }
                    None => {
                        self.fac.breakdown_at = Some(step_index);
                        Ok(StepOutcome::Breakdown)
                    }
                }
            }
            Basis::LowRank(b) => {
                let lr = self.low_rank.expect("lowrank engine has lowrank problem");
                let last = b.columns.last().expect("nonempty");
                let y = companion_apply_low_rank(lr, last, last.num_blocks())?;
                let gs = gram_schmidt_blocks(&b.columns, &y, self.policy);
                self.fac
                    .hessenberg
                    .push_column(gs.coefficients.iter().copied().collect(), gs.beta);
                match gs.orthonormal {
                    Some(q) => {
                        b.columns.push(q);
                        Ok(StepOutcome::Expanded)
                    }
                    None => {
                        self.fac.breakdown_at = Some(step_index);
                        Ok(StepOutcome::Breakdown)
                    }
                }
            }
            Basis::Tensor(b) => {
                let outcome = tensor_step(self.problem, b, self.policy, &mut self.fac.hessenberg)?;
                if outcome == StepOutcome::Breakdown {
                    self.fac.breakdown_at = Some(step_index);
                }
                Ok(outcome)
            }
        }
    }
}

fn tensor_step(
    problem: &dyn TaylorProblem,
    b: &mut TensorBasis,
    policy: OrthoPolicy,
    hess: &mut Hessenberg,
) -> Result<StepOutcome> {
    let n = b.n;
    let m_in = b.coeffs.len();
    let dmax = problem.max_derivative_order().unwrap_or(usize::MAX);

    // first block of the matvec: -A0^-1 sum (1/i) A^(i)(0) x_i, with the
    // needed blocks of the newest column materialized through Z
    let last = b.coeffs[m_in - 1].clone();
    let mut sum = DVector::from_element(n, C_ZERO);
    for i in 1..=m_in.min(dmax) {
        let xi = b.reconstruct(&last[i - 1]);
        let term = problem.deriv_apply(i, &xi)?;
        sum.axpy(Cx::new(1.0 / i as f64, 0.0), &term, Cx::new(1.0, 0.0));
    }
    let mut first = problem.solve_a0(&sum);
    first.neg_mut();

    // grow Z by the part of the new first block outside its range; always
    // refine the projection once so Z stays orthonormal to roundoff
    let mut w = b.project(&first);
    let mut resid = first.clone();
    for (c, wc) in w.iter().enumerate() {
        resid.axpy(-*wc, &b.z_cols[c], Cx::new(1.0, 0.0));
    }
    let w2 = b.project(&resid);
    for (c, wc) in w2.iter().enumerate() {
        resid.axpy(-*wc, &b.z_cols[c], Cx::new(1.0, 0.0));
    }
    w += w2;
    let beta_z = resid.norm();
    let first_coeff = if beta_z > BREAKDOWN_TOL * first.norm().max(f64::MIN_POSITIVE) {
        b.z_cols.push(resid / Cx::new(beta_z, 0.0));
        let mut a0 = DVector::from_element(w.len() + 1, C_ZERO);
        a0.rows_mut(0, w.len()).copy_from(&w);
        a0[w.len()] = Cx::new(beta_z, 0.0);
        a0
    } else {
        w
    };

    // working coefficients of the matvec result: new first block plus the
    // shifted, scaled copies of the previous column's blocks
    let mut work: Vec<DVector<Cx>> = Vec::with_capacity(m_in + 1);
    work.push(first_coeff);
    for (l, a) in last.iter().enumerate() {
        work.push(a * Cx::new(1.0 / (l + 1) as f64, 0.0));
    }

    // Gram-Schmidt entirely in coefficient space
    let y_norm = coeff_blocks_norm(&work);
    let mut h = DVector::from_element(m_in, C_ZERO);
    for pass in 0..2 {
        for (j, col) in b.coeffs.iter().enumerate() {
            let mut c = C_ZERO;
            for (l, a) in col.iter().enumerate() {
                c += coeff_dot(a, &work[l]);
            }
            if c != C_ZERO {
                for (l, a) in col.iter().enumerate() {
                    axpy_padded(&mut work[l], -c, a);
                }
            }
            h[j] += c;
        }
        if pass == 0 && !policy.needs_second_pass(y_norm, coeff_blocks_norm(&work)) {
            break;
        }
    }
    let beta = coeff_blocks_norm(&work);
    hess.push_column(h.iter().copied().collect(), if beta <= BREAKDOWN_TOL * y_norm { 0.0 } else { beta });

    if beta <= BREAKDOWN_TOL * y_norm {
        return Ok(StepOutcome::Breakdown);
    }
    let inv = Cx::new(1.0 / beta, 0.0);
    for a in &mut work {
        *a *= inv;
    }
    b.coeffs.push(work);
    Ok(StepOutcome::Expanded)
}

fn coeff_blocks_norm(blocks: &[DVector<Cx>]) -> f64 {
    blocks
        .iter()
        .map(|a| a.norm_squared())
        .sum::<f64>()
        .sqrt()
}

/// dst += alpha * src where src may be shorter than dst (zero padded).
fn axpy_padded(dst: &mut DVector<Cx>, alpha: Cx, src: &DVector<Cx>) {
    debug_assert!(src.len() <= dst.len());
    for (i, s) in src.iter().enumerate() {
        dst[i] += alpha * s;
    }
}

/// Builds an Arnoldi factorization with up to `max_iters` iterations.
///
/// Fewer iterations are run only on lucky breakdown, which is flagged on
/// the result. The first basis column is c_hat / ||c_hat|| with
/// c_hat = -A(0)^-1 b.
pub fn arnoldi_build(
    problem: &dyn TaylorProblem,
    max_iters: usize,
    variant: BasisVariant,
    policy: OrthoPolicy,
) -> Result<ArnoldiFactorization> {
    assert!(max_iters >= 1, "max_iters must be at least 1");
    let mut proc = ArnoldiProcess::new(problem, variant, policy)?;
    for _ in 0..max_iters {
        if proc.step()? == StepOutcome::Breakdown {
            break;
        }
    }
    Ok(proc.into_factorization())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::GenericProblem;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn toy() -> GenericProblem {
        let id = DMatrix::<Cx>::identity(2, 2);
        let b = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        GenericProblem::from_dense_coefficients(vec![id.clone(), -id], b).unwrap()
    }

    #[test]
    fn single_iteration_is_normalized() {
        let p = toy();
        let fac = arnoldi_build(&p, 1, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
        assert_eq!(fac.m(), 1);
        let h = fac.hessenberg().leading_matrix(1);
        assert_eq!(h.nrows(), 2);
        assert_eq!(h.ncols(), 1);
        assert!((fac.basis().column(0).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn toy_hessenberg_matches_block_shift_structure() {
        // B(mu) = I: the operator copies the first block down, so the first
        // column of Hbar is [1; 1]
        let p = toy();
        let fac = arnoldi_build(&p, 3, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
        let h = fac.hessenberg();
        assert!((h.entry(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((h.subdiag(0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gram_schmidt_exact_dependence_and_orthogonal_cases() {
        let p = toy();
        let fac = arnoldi_build(&p, 2, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
        let q1 = fac.basis().column(0);

        // y = q1 -> h = e1, beta = 0
        let gs = fac.basis().gram_schmidt(&q1, OrthoPolicy::TwoPass);
        assert!((gs.coefficients[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(gs.beta, 0.0);
        assert!(gs.orthonormal.is_none());

        // y orthogonal to the basis (the toy Krylov vectors only touch the
        // first coordinate of each block) -> h = 0, beta = ||y||
        let y = BlockVector::new(vec![
            DVector::from_vec(vec![C_ZERO, C_ZERO]),
            DVector::from_vec(vec![C_ZERO, C_ZERO]),
            DVector::from_vec(vec![C_ZERO, c(0.0, 3.0)]),
        ]);
        let gs = fac.basis().gram_schmidt(&y, OrthoPolicy::TwoPass);
        assert!(gs.coefficients.norm() < 1e-12);
        assert!((gs.beta - 3.0).abs() < 1e-12);
    }

    #[test]
    fn dgks_second_pass_restores_orthogonality() {
        let p = toy();
        let fac = arnoldi_build(&p, 2, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
        // y = q1 + 1e-9 * (unit vector orthogonal to the basis)
        let mut y = fac.basis().column(0);
        let perp = BlockVector::new(vec![
            DVector::from_element(2, C_ZERO),
            DVector::from_element(2, C_ZERO),
            DVector::from_vec(vec![C_ZERO, c(1e-9, 0.0)]),
        ]);
        y.axpy(c(1.0, 0.0), &perp);
        let gs = fac.basis().gram_schmidt(&y, OrthoPolicy::Dgks);
        let qn = gs.orthonormal.expect("no breakdown");
        for j in 0..fac.basis().num_columns() {
            let overlap = fac.basis().column(j).dot(&qn).norm();
            assert!(overlap < 1e-12, "column {j} overlap {overlap:.2e}");
        }
    }

    #[test]
    fn zero_rhs_is_empty_krylov() {
        let id = DMatrix::<Cx>::identity(2, 2);
        let p = GenericProblem::from_dense_coefficients(
            vec![id.clone(), -id],
            DVector::from_element(2, C_ZERO),
        )
        .unwrap();
        assert!(matches!(
            arnoldi_build(&p, 1, BasisVariant::Full, OrthoPolicy::TwoPass),
            Err(Error::EmptyKrylov)
        ));
    }

    #[test]
    fn lowrank_variant_requires_low_rank_problem() {
        let p = toy();
        assert!(matches!(
            arnoldi_build(&p, 1, BasisVariant::LowRank, OrthoPolicy::TwoPass),
            Err(Error::ProblemDefinition(_))
        ));
    }
}
