//! Time-delay transfer function problem.
//!
//! The frequency-domain formulation of a single-delay system yields the
//! parameterized family A(s) = -s I + A0 + A1 e^{-s} with the delay
//! normalized to 1; evaluating the transfer function H(s) = A(s)^-1 b for
//! many s values is exactly the multi-parameter solve this crate targets.
//! All Taylor derivative actions are closed-form: A'(0) = -I - A1 and
//! A^(i)(0) = (-1)^i A1 for i >= 2.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::A0Factor;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Cx};
use crate::linearization::TaylorProblem;

/// How the delay matrices are produced.
pub enum MatrixGenerator {
    /// Reproducible sparse random matrices: roughly 10 nonzeros per row
    /// with entries uniform in [-0.5, 0.5], plus 2 I added to A0 so that
    /// A(0) = A0 + A1 stays comfortably nonsingular.
    Seeded { seed: u64 },
    /// Explicit matrices.
    Explicit { a0: CsrMatrix, a1: CsrMatrix },
}

/// Delay problem -s I + A0 + A1 e^{-s} with right-hand side b.
#[derive(Debug)]
pub struct DelayProblem {
    a0: CsrMatrix,
    a1: CsrMatrix,
    b: DVector<Cx>,
    factor: A0Factor,
}

/// Builds a [`DelayProblem`]; with `b = None` a seeded right-hand side is
/// drawn from the same generator stream.
pub fn build_delay(
    n: usize,
    generator: MatrixGenerator,
    b: Option<DVector<Cx>>,
) -> Result<DelayProblem> {
    let (a0, a1, b_default) = match generator {
        MatrixGenerator::Explicit { a0, a1 } => {
            if a0.nrows() != n || a0.ncols() != n || a1.nrows() != n || a1.ncols() != n {
                return Err(Error::DimensionMismatch {
                    context: "delay matrices",
                    expected: n,
                    got: a0.nrows(),
                });
            }
            (a0, a1, DVector::from_element(n, Cx::new(1.0, 0.0)))
        }
        MatrixGenerator::Seeded { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = |diag_shift: f64| -> Result<CsrMatrix> {
                let per_row = 10.min(n);
                let mut triplets = Vec::with_capacity(n * (per_row + 1));
                for r in 0..n {
                    for _ in 0..per_row {
                        let col = rng.random_range(0..n);
                        triplets.push((r, col, Cx::new(rng.random_range(-0.5..0.5), 0.0)));
                    }
                    if diag_shift != 0.0 {
                        triplets.push((r, r, Cx::new(diag_shift, 0.0)));
                    }
                }
                CsrMatrix::from_triplets(n, n, triplets)
            };
            let a0 = draw(2.0)?;
            let a1 = draw(0.0)?;
            let b = DVector::from_fn(n, |_, _| Cx::new(rng.random_range(-1.0..1.0), 0.0));
            (a0, a1, b)
        }
    };
    let b = b.unwrap_or(b_default);
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            context: "delay rhs",
            expected: n,
            got: b.len(),
        });
    }
    let at_zero = a0.add(&a1)?;
    let factor = A0Factor::factor(&at_zero)?;
    Ok(DelayProblem { a0, a1, b, factor })
}

impl DelayProblem {
    pub fn a0_matrix(&self) -> &CsrMatrix {
        &self.a0
    }

    pub fn a1_matrix(&self) -> &CsrMatrix {
        &self.a1
    }
}

impl TaylorProblem for DelayProblem {
    fn dim(&self) -> usize {
        self.a0.nrows()
    }

    fn solve_a0(&self, y: &DVector<Cx>) -> DVector<Cx> {
        self.factor.solve(y)
    }

    fn deriv_apply(&self, order: usize, y: &DVector<Cx>) -> Result<DVector<Cx>> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "delay deriv_apply",
                expected: self.dim(),
                got: y.len(),
            });
        }
        Ok(match order {
            0 => self.a0.mul_vec(y) + self.a1.mul_vec(y),
            1 => -y - self.a1.mul_vec(y),
            i => {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                self.a1.mul_vec(y) * Cx::new(sign, 0.0)
            }
        })
    }

    fn eval_apply(&self, mu: Cx, y: &DVector<Cx>) -> DVector<Cx> {
        let mut out = self.a0.mul_vec(y);
        out.axpy((-mu).exp(), &self.a1.mul_vec(y), Cx::new(1.0, 0.0));
        out.axpy(-mu, y, Cx::new(1.0, 0.0));
        out
    }

    fn rhs(&self) -> &DVector<Cx> {
        &self.b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C_ZERO;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn small_explicit() -> DelayProblem {
        // A0 = I, A1 = diag(0.5, 0.2)
        let a0 = CsrMatrix::identity(2);
        let a1 = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, c(0.5, 0.0)), (1, 1, c(0.2, 0.0))],
        )
        .unwrap();
        build_delay(2, MatrixGenerator::Explicit { a0, a1 }, None).unwrap()
    }

    #[test]
    fn derivative_actions_are_closed_form() {
        let p = small_explicit();
        let y = DVector::from_vec(vec![c(1.0, 1.0), c(-2.0, 0.0)]);
        let a1y = DVector::from_vec(vec![c(0.5, 0.5), c(-0.4, 0.0)]);
        assert!((p.deriv_apply(1, &y).unwrap() - (-&y - &a1y)).norm() < 1e-15);
        assert!((p.deriv_apply(2, &y).unwrap() - &a1y).norm() < 1e-15);
        // (-1)^3 A1 y
        assert!((p.deriv_apply(3, &y).unwrap() + &a1y).norm() < 1e-15);
    }

    #[test]
    fn eval_apply_uses_exact_exponential() {
        let p = small_explicit();
        let y = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let mu = c(0.1, 0.0);
        let out = p.eval_apply(mu, &y);
        let dense_a0 = p.a0_matrix().to_dense();
        let dense_a1 = p.a1_matrix().to_dense();
        let expect = (&dense_a0 + &dense_a1 * (-mu).exp()
            - DMatrix::identity(2, 2) * mu)
            * &y;
        assert!((out - expect).norm() < 1e-15);
    }

    #[test]
    fn seeded_generator_is_reproducible_and_well_posed() {
        let p1 = build_delay(50, MatrixGenerator::Seeded { seed: 7 }, None).unwrap();
        let p2 = build_delay(50, MatrixGenerator::Seeded { seed: 7 }, None).unwrap();
        let y = DVector::from_element(50, c(1.0, 0.0));
        assert!((p1.deriv_apply(2, &y).unwrap() - p2.deriv_apply(2, &y).unwrap()).norm() == 0.0);
        // A(0)^-1 really inverts A(0)
        let z = p1.solve_a0(&y);
        assert!((p1.eval_apply(C_ZERO, &z) - &y).norm() < 1e-10);
    }

    #[test]
    fn singular_at_zero_is_a_construction_error() {
        // A0 = I, A1 = -I makes A(0) = 0
        let a0 = CsrMatrix::identity(2);
        let a1 = CsrMatrix::from_dense(&(-DMatrix::<Cx>::identity(2, 2)));
        let r = build_delay(2, MatrixGenerator::Explicit { a0, a1 }, None);
        assert!(matches!(r, Err(Error::SingularMatrix(_))));
    }
}
