//! The companion linearization applied matrix-free.
//!
//! A parameter-dependent system A(mu) x(mu) = b with A analytic at 0 is
//! rewritten as the shifted linear system (mu B - I) v = c, where B is the
//! infinite block companion operator built from the Taylor coefficients of
//! A at 0 and c = -e1 (x) A(0)^-1 b. Krylov vectors of B that start from c
//! carry an infinite tail of zero blocks, so the operator action needs only
//! the finitely many leading blocks: applying B to a vector with k nonzero
//! blocks yields k+1 nonzero blocks, at a cost independent of any
//! truncation order.
//!
//! Problems enter through the [`TaylorProblem`] trait (actions of A(0)^-1,
//! of the derivatives A^(i)(0), and of the exact A(mu)); problems whose
//! high-order coefficients factor as U_i V^T additionally implement
//! [`LowRankTaylorProblem`], which enables the compressed block layout where
//! blocks beyond index s have length p instead of n.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{Cx, C_ZERO};

/// Abstract parameter-dependent problem A(mu) x = b, expanded at mu = 0.
///
/// Implementations must be immutable after construction; all actions are
/// pure functions of their inputs so a problem can be shared across threads.
pub trait TaylorProblem: Send + Sync {
    /// System size n.
    fn dim(&self) -> usize;

    /// Applies A(0)^-1 using a factorization prepared at construction.
    fn solve_a0(&self, y: &DVector<Cx>) -> DVector<Cx>;

    /// Applies the derivative A^(i)(0); order 0 applies A(0) itself.
    fn deriv_apply(&self, order: usize, y: &DVector<Cx>) -> Result<DVector<Cx>>;

    /// Applies the exact (untruncated) A(mu).
    fn eval_apply(&self, mu: Cx, y: &DVector<Cx>) -> DVector<Cx>;

    /// Right-hand side b.
    fn rhs(&self) -> &DVector<Cx>;

    /// Largest order with a nonzero derivative, when finite.
    ///
    /// Polynomial problems report their degree so the operator action can
    /// skip identically-zero terms; `None` means all orders may contribute.
    fn max_derivative_order(&self) -> Option<usize> {
        None
    }

    /// Low-rank view of this problem, when its high-order Taylor
    /// coefficients factor as U_i V^T.
    fn as_low_rank(&self) -> Option<&dyn LowRankTaylorProblem> {
        None
    }
}

/// A [`TaylorProblem`] whose coefficients of order i > s factor as
/// A^(i)(0) = U_i V^T with U_i of width p.
pub trait LowRankTaylorProblem: TaylorProblem {
    /// Order s after which coefficients are low rank.
    fn split_order(&self) -> usize;

    /// Rank p of the high-order coefficients.
    fn rank(&self) -> usize;

    /// Applies U_i = U F^(i)(0) to a length-p vector, for i > s.
    fn u_apply(&self, order: usize, y: &DVector<Cx>) -> Result<DVector<Cx>>;

    /// Applies V^T (plain transpose, no conjugation) to a length-n vector.
    fn vt_apply(&self, y: &DVector<Cx>) -> DVector<Cx>;
}

/// Leading nonzero blocks of an infinite vector whose tail is zero.
///
/// Appending a zero block does not change the represented vector, its norm,
/// or any inner product; two block vectors interoperate over the common
/// prefix of their block patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    blocks: Vec<DVector<Cx>>,
}

impl BlockVector {
    pub fn new(blocks: Vec<DVector<Cx>>) -> Self {
        Self { blocks }
    }

    /// Single-block vector.
    pub fn from_single(block: DVector<Cx>) -> Self {
        Self {
            blocks: vec![block],
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> &DVector<Cx> {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[DVector<Cx>] {
        &self.blocks
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut [DVector<Cx>] {
        &mut self.blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Total number of stored scalars.
    pub fn stored_len(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    /// Euclidean norm of the represented (zero-tailed) vector.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Hermitian inner product <self, other>, conjugating self.
    ///
    /// Blocks beyond either operand's stored prefix are zero, so only the
    /// common prefix contributes. Panics if the common prefix disagrees on
    /// block sizes.
    pub fn dot(&self, other: &BlockVector) -> Cx {
        let k = self.blocks.len().min(other.blocks.len());
        let mut acc = C_ZERO;
        for i in 0..k {
            assert_eq!(
                self.blocks[i].len(),
                other.blocks[i].len(),
                "block pattern mismatch in inner product"
            );
            acc += self.blocks[i].dotc(&other.blocks[i]);
        }
        acc
    }

    /// self <- self + alpha * other (block patterns must agree on the
    /// common prefix; other may have more blocks, which are appended).
    pub fn axpy(&mut self, alpha: Cx, other: &BlockVector) {
        for (i, ob) in other.blocks.iter().enumerate() {
            if i < self.blocks.len() {
                assert_eq!(
                    self.blocks[i].len(),
                    ob.len(),
                    "block pattern mismatch in axpy"
                );
                self.blocks[i].axpy(alpha, ob, Cx::new(1.0, 0.0));
            } else {
                self.blocks.push(ob * alpha);
            }
        }
    }

    pub fn scale(&mut self, alpha: Cx) {
        for b in &mut self.blocks {
            *b *= alpha;
        }
    }

    /// Stacks the blocks into one dense vector, zero-padding to
    /// `total_len` if requested.
    pub fn to_dense(&self, total_len: Option<usize>) -> DVector<Cx> {
        let stored = self.stored_len();
        let len = total_len.unwrap_or(stored);
        assert!(len >= stored, "padding shorter than stored data");
        let mut v = DVector::from_element(len, C_ZERO);
        let mut at = 0;
        for b in &self.blocks {
            v.rows_mut(at, b.len()).copy_from(b);
            at += b.len();
        }
        v
    }
}

/// Applies the companion operator to a block vector with k uniform n-blocks,
/// producing k+1 blocks.
///
/// Output block 1 is -A(0)^-1 sum_{i=1..k} (1/i) A^(i)(0) x_i; output block
/// j+1 is x_j / j. The cost depends only on k, never on a truncation order.
pub fn companion_apply(problem: &dyn TaylorProblem, v: &BlockVector) -> Result<BlockVector> {
    let n = problem.dim();
    let k = v.num_blocks();
    if k == 0 {
        return Err(Error::BlockStructure(
            "companion_apply needs at least one block".into(),
        ));
    }
    for (i, b) in v.blocks().iter().enumerate() {
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                context: "companion_apply block",
                expected: n,
                got: v.block(i).len(),
            });
        }
    }

    let dmax = problem.max_derivative_order().unwrap_or(usize::MAX);
    let mut sum = DVector::from_element(n, C_ZERO);
    for i in 1..=k {
        if i > dmax {
            break;
        }
        let term = problem.deriv_apply(i, v.block(i - 1))?;
        sum.axpy(Cx::new(1.0 / i as f64, 0.0), &term, Cx::new(1.0, 0.0));
    }
    let mut first = problem.solve_a0(&sum);
    first.neg_mut();

    let mut blocks = Vec::with_capacity(k + 1);
    blocks.push(first);
    for j in 1..=k {
        blocks.push(v.block(j - 1) * Cx::new(1.0 / j as f64, 0.0));
    }
    Ok(BlockVector::new(blocks))
}

/// Applies the low-rank companion operator to a block vector in the mixed
/// n/p layout at iteration index m.
///
/// The input must carry min(m, s) blocks of length n followed by
/// max(0, m - s) blocks of length p. For m < s this reduces to
/// [`companion_apply`] on the available blocks; the n-to-p transition
/// happens exactly at the step that produces block s+1, which is
/// (1/s) V^T x_s.
pub fn companion_apply_low_rank(
    problem: &dyn LowRankTaylorProblem,
    v: &BlockVector,
    m: usize,
) -> Result<BlockVector> {
    let n = problem.dim();
    let s = problem.split_order();
    let p = problem.rank();
    if m == 0 || v.num_blocks() != m {
        return Err(Error::BlockStructure(format!(
            "low-rank apply at iteration {m} expects {m} blocks, got {}",
            v.num_blocks()
        )));
    }
    let n_blocks = m.min(s);
    for i in 0..m {
        let expect = if i < n_blocks { n } else { p };
        if v.block(i).len() != expect {
            return Err(Error::BlockStructure(format!(
                "block {i} has length {}, expected {expect} for (s={s}, p={p}, m={m})",
                v.block(i).len()
            )));
        }
    }

    // first block: -A0^-1 ( sum_{i<=s} A_i x_i / i + sum_{i>s} U_i x_i / i )
    let mut sum = DVector::from_element(n, C_ZERO);
    for i in 1..=n_blocks {
        let term = problem.deriv_apply(i, v.block(i - 1))?;
        sum.axpy(Cx::new(1.0 / i as f64, 0.0), &term, Cx::new(1.0, 0.0));
    }
    for i in (s + 1)..=m {
        let term = problem.u_apply(i, v.block(i - 1))?;
        sum.axpy(Cx::new(1.0 / i as f64, 0.0), &term, Cx::new(1.0, 0.0));
    }
    let mut first = problem.solve_a0(&sum);
    first.neg_mut();

    let mut blocks = Vec::with_capacity(m + 1);
    blocks.push(first);
    for j in 1..=m {
        if j == s && m >= s {
            // transition block: (1/s) V^T x_s
            blocks.push(problem.vt_apply(v.block(s - 1)) * Cx::new(1.0 / s as f64, 0.0));
        } else {
            blocks.push(v.block(j - 1) * Cx::new(1.0 / j as f64, 0.0));
        }
    }
    Ok(BlockVector::new(blocks))
}

/// Relative residual ||A(mu) x - b|| / ||b|| measured with the exact A(mu).
pub fn residual_true(problem: &dyn TaylorProblem, mu: Cx, x: &DVector<Cx>) -> f64 {
    let b = problem.rhs();
    assert!(b.norm() > 0.0, "residual_true needs a nonzero rhs");
    assert_eq!(x.len(), problem.dim(), "residual_true dimension");
    (problem.eval_apply(mu, x) - b).norm() / b.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::GenericProblem;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    /// A(mu) = (1 - mu) I at n = 2.
    fn toy() -> GenericProblem {
        let id = DMatrix::<Cx>::identity(2, 2);
        let b = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        GenericProblem::from_dense_coefficients(vec![id.clone(), -id], b).unwrap()
    }

    #[test]
    fn toy_companion_shift_copies_first_block() {
        let p = toy();
        let b = p.rhs().clone();
        let v = BlockVector::from_single(b.clone());
        let out = companion_apply(&p, &v).unwrap();
        assert_eq!(out.num_blocks(), 2);
        // B(mu) = I, so the action copies the block: output = vec(b, b)
        assert!((out.block(0) - &b).norm() < 1e-15);
        assert!((out.block(1) - &b).norm() < 1e-15);
    }

    #[test]
    fn zero_blocks_stay_zero() {
        let p = toy();
        let z = DVector::from_element(2, C_ZERO);
        let v = BlockVector::new(vec![z.clone(), z.clone()]);
        let out = companion_apply(&p, &v).unwrap();
        assert_eq!(out.num_blocks(), 3);
        assert!(out.norm() == 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = toy();
        let v = BlockVector::from_single(DVector::from_element(3, C_ZERO));
        assert!(matches!(
            companion_apply(&p, &v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn residual_true_definition_cases() {
        let p = toy();
        // x = 0 -> residual 1
        let zero = DVector::from_element(2, C_ZERO);
        assert!((residual_true(&p, c(0.3, 0.0), &zero) - 1.0).abs() < 1e-15);
        // A(mu) = (1-mu) I, b = e1, mu = 0.5, x = 2 e1 -> residual 0
        let x = DVector::from_vec(vec![c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(residual_true(&p, c(0.5, 0.0), &x) < 1e-15);
    }

    #[test]
    fn block_vector_zero_padding_preserves_norm_and_dot() {
        let a = BlockVector::new(vec![DVector::from_vec(vec![c(1.0, 1.0), c(0.0, -2.0)])]);
        let mut b = a.clone();
        b.axpy(C_ZERO, &BlockVector::new(vec![
            DVector::from_element(2, C_ZERO),
            DVector::from_element(2, C_ZERO),
        ]));
        assert_eq!(b.num_blocks(), 2);
        assert!((a.norm() - b.norm()).abs() < 1e-15);
        assert!((a.dot(&b) - a.dot(&a)).norm() < 1e-15);
    }
}
