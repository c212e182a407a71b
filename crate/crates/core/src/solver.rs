//! Parameterized solution evaluation and multi-parameter sweeps.
//!
//! A built factorization turns every parameter value into the small shifted
//! least squares problem
//!
//! ```text
//! x_m(mu) = Q_m(1:n, :) argmin_z || (mu Hbar_m - Ibar_m) z - e1 ||c_hat|| ||
//! ```
//!
//! where Ibar_m is the m x m identity with an appended zero row and
//! ||c_hat|| = ||A(0)^-1 b||. Evaluations never mutate the factorization, so
//! distinct parameter values can be evaluated concurrently. The sweep driver
//! grows one factorization incrementally and re-checks all not-yet-converged
//! parameter values after every step; convergence is declared on the true
//! relative residual ||A(mu) x - b|| / ||b||, with the least-squares residual
//! reported alongside.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::krylov::{ArnoldiProcess, BasisVariant, OrthoPolicy, StepOutcome};
use crate::krylov::ArnoldiFactorization;
use crate::linalg::{least_squares, Cx, C_ZERO};
use crate::linearization::{residual_true, TaylorProblem};

/// One evaluation x_m(mu) together with its least squares residual.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub x: DVector<Cx>,
    /// Attained minimum of the shifted least squares problem.
    pub ls_residual: f64,
    /// Set when (mu Hbar - Ibar) was rank deficient to working precision
    /// and the minimum-norm solution was returned.
    pub rank_deficient: bool,
}

/// Evaluator mapping mu to x_m(mu) from a fixed factorization.
///
/// Two evaluations at the same mu are bit-identical; the factorization and
/// problem are shared read-only.
pub struct ParamSolution<'a> {
    factorization: &'a ArnoldiFactorization,
    problem: &'a dyn TaylorProblem,
}

impl<'a> ParamSolution<'a> {
    pub fn new(factorization: &'a ArnoldiFactorization, problem: &'a dyn TaylorProblem) -> Self {
        Self {
            factorization,
            problem,
        }
    }

    pub fn factorization(&self) -> &ArnoldiFactorization {
        self.factorization
    }

    /// Evaluates the GMRES iterate at `mu` using the leading `m` iterations.
    ///
    /// `mu = 0` short-circuits to the exact solve x = A(0)^-1 b with zero
    /// least squares residual.
    pub fn evaluate(&self, mu: Cx, m: usize) -> Result<Evaluation> {
        evaluate_at(self.factorization, self.problem, mu, m)
    }
}

fn evaluate_at(
    fac: &ArnoldiFactorization,
    problem: &dyn TaylorProblem,
    mu: Cx,
    m: usize,
) -> Result<Evaluation> {
    if mu == C_ZERO {
        return Ok(Evaluation {
            x: problem.solve_a0(problem.rhs()),
            ls_residual: 0.0,
            rank_deficient: false,
        });
    }
    if m < 1 || m > fac.m() {
        return Err(Error::OutOfRange(format!(
            "iteration budget {m} outside 1..={}",
            fac.m()
        )));
    }
    let hbar = fac.hessenberg().leading_matrix(m);
    // M = mu * Hbar - Ibar
    let mut shifted = hbar * mu;
    for i in 0..m {
        shifted[(i, i)] -= Cx::new(1.0, 0.0);
    }
    let mut rhs = DVector::from_element(m + 1, C_ZERO);
    rhs[0] = Cx::new(fac.c_norm(), 0.0);
    let ls = least_squares(&shifted, &rhs);
    let x = fac.basis().first_block_combine(&ls.solution);
    Ok(Evaluation {
        x,
        ls_residual: ls.residual,
        rank_deficient: ls.rank_deficient,
    })
}

/// Options for [`sweep`].
#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// True-residual convergence tolerance.
    pub tol: f64,
    /// Maximum Arnoldi iterations.
    pub max_iters: usize,
    pub variant: BasisVariant,
    pub ortho: OrthoPolicy,
    /// Keep evaluating already-converged parameter values on later
    /// iterations so their residual histories extend to the final m.
    pub keep_histories: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 200,
            variant: BasisVariant::Full,
            ortho: OrthoPolicy::TwoPass,
            keep_histories: false,
        }
    }
}

/// Residuals of one parameter value across the incremental sweep.
///
/// Entry k holds the residuals of the iterate after k+1 Arnoldi steps;
/// recording stops once the value converges unless
/// [`SweepOptions::keep_histories`] is set.
#[derive(Debug, Clone, Default)]
pub struct ResidualHistory {
    pub true_residuals: Vec<f64>,
    pub ls_residuals: Vec<f64>,
}

/// Result of a multi-parameter sweep sharing one factorization.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub mu_values: Vec<Cx>,
    pub solutions: Vec<DVector<Cx>>,
    /// Final shifted least squares residual per parameter value.
    pub ls_residuals: Vec<f64>,
    /// Final true relative residual per parameter value.
    pub true_residuals: Vec<f64>,
    /// Iterations at which each value first met the tolerance (0 for the
    /// mu = 0 short circuit; max_iters when it never converged).
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    /// Total Arnoldi iterations built for the whole set.
    pub iterations_used: usize,
    pub histories: Vec<ResidualHistory>,
}

impl SweepResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Solves A(mu) x = b for every mu in `mu_values` with one factorization.
///
/// The factorization grows one step at a time; after each step all
/// not-yet-converged values are evaluated (in parallel) and checked against
/// the true-residual tolerance. Non-convergence at max_iters is reported in
/// the per-value flags, not as an error.
pub fn sweep(
    problem: &dyn TaylorProblem,
    mu_values: &[Cx],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if mu_values.is_empty() {
        return Err(Error::OutOfRange("sweep needs at least one mu".into()));
    }
    if !opts.tol.is_finite() || opts.tol <= 0.0 {
        return Err(Error::OutOfRange("sweep tolerance must be positive".into()));
    }
    let k = mu_values.len();
    let mut solutions: Vec<DVector<Cx>> = vec![DVector::zeros(problem.dim()); k];
    let mut ls_residuals = vec![f64::NAN; k];
    let mut true_residuals = vec![f64::NAN; k];
    let mut iterations = vec![opts.max_iters; k];
    let mut converged = vec![false; k];
    let mut histories = vec![ResidualHistory::default(); k];

    // mu = 0 short-circuits to the direct A(0) solve
    for (i, &mu) in mu_values.iter().enumerate() {
        if mu == C_ZERO {
            let x = problem.solve_a0(problem.rhs());
            true_residuals[i] = residual_true(problem, mu, &x);
            ls_residuals[i] = 0.0;
            iterations[i] = 0;
            converged[i] = true;
            solutions[i] = x;
        }
    }

    let mut proc = ArnoldiProcess::new(problem, opts.variant, opts.ortho)?;
    let mut steps = 0usize;
    while steps < opts.max_iters && !converged.iter().all(|&c| c) {
        let outcome = proc.step()?;
        steps = proc.m();
        let fac = proc.factorization_ref();

        let pending: Vec<usize> = (0..k)
            .filter(|&i| mu_values[i] != C_ZERO && (!converged[i] || opts.keep_histories))
            .collect();
        let evals: Vec<(usize, Evaluation, f64)> = pending
            .par_iter()
            .map(|&i| {
                let ev = evaluate_at(fac, problem, mu_values[i], steps)?;
                let tr = residual_true(problem, mu_values[i], &ev.x);
                Ok((i, ev, tr))
            })
            .collect::<Result<Vec<_>>>()?;

        for (i, ev, tr) in evals {
            histories[i].true_residuals.push(tr);
            histories[i].ls_residuals.push(ev.ls_residual);
            if !converged[i] {
                ls_residuals[i] = ev.ls_residual;
                true_residuals[i] = tr;
                solutions[i] = ev.x;
                if tr <= opts.tol {
                    converged[i] = true;
                    iterations[i] = steps;
                }
            }
        }

        if outcome == StepOutcome::Breakdown {
            break; // the subspace is exact; nothing more can improve
        }
    }

    Ok(SweepResult {
        mu_values: mu_values.to_vec(),
        solutions,
        ls_residuals,
        true_residuals,
        iterations,
        converged,
        iterations_used: proc.m(),
        histories,
    })
}

/// Assembles the dense (m+1) x m shifted matrix mu Hbar - Ibar (test
/// support and diagnostics).
pub fn shifted_matrix(fac: &ArnoldiFactorization, mu: Cx, m: usize) -> DMatrix<Cx> {
    let mut shifted = fac.hessenberg().leading_matrix(m) * mu;
    for i in 0..m {
        shifted[(i, i)] -= Cx::new(1.0, 0.0);
    }
    shifted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::arnoldi_build;
    use crate::problems::GenericProblem;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn toy() -> GenericProblem {
        let id = DMatrix::<Cx>::identity(2, 2);
        let b = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        GenericProblem::from_dense_coefficients(vec![id.clone(), -id], b).unwrap()
    }

    #[test]
    fn mu_zero_short_circuits_to_direct_solve() {
        let p = toy();
        let fac = arnoldi_build(&p, 3, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
        let sol = ParamSolution::new(&fac, &p);
        let ev = sol.evaluate(C_ZERO, 2).unwrap();
        assert!((ev.x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(ev.ls_residual, 0.0);
    }

    #[test]
    fn toy_iterates_converge_to_exact_solution() {
        // A(mu) = (1 - mu) I: the linearized solution has factorially
        // decaying Taylor blocks, so each added iteration shrinks the error
        // superlinearly until the roundoff floor
        let p = toy();
        let fac = arnoldi_build(&p, 50, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
        let sol = ParamSolution::new(&fac, &p);
        let ev = sol.evaluate(c(0.5, 0.0), 50).unwrap();
        assert!((ev.x[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!(ev.x[1].norm() < 1e-12);

        let e3 = (sol.evaluate(c(0.5, 0.0), 3).unwrap().x[0] - c(2.0, 0.0)).norm();
        let e10 = (sol.evaluate(c(0.5, 0.0), 10).unwrap().x[0] - c(2.0, 0.0)).norm();
        assert!(e10 < e3 * 1e-2);
        assert!(e10 < 1e-8);
    }

    #[test]
    fn ls_residual_monotone_in_m() {
        let p = toy();
        let fac = arnoldi_build(&p, 20, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
        let sol = ParamSolution::new(&fac, &p);
        let mu = c(0.4, 0.1);
        let mut prev = f64::INFINITY;
        for m in 1..=20 {
            let ev = sol.evaluate(mu, m).unwrap();
            assert!(ev.ls_residual <= prev + 1e-13);
            prev = ev.ls_residual;
        }
    }

    #[test]
    fn singleton_sweep_equals_evaluate() {
        let p = toy();
        let opts = SweepOptions {
            tol: 1e-12,
            max_iters: 60,
            ..Default::default()
        };
        let mu = c(0.5, 0.0);
        let out = sweep(&p, &[mu], &opts).unwrap();
        assert!(out.all_converged());
        let m = out.iterations[0];
        let fac = arnoldi_build(&p, m, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
        let ev = ParamSolution::new(&fac, &p).evaluate(mu, m).unwrap();
        assert!((out.solutions[0].clone() - ev.x).norm() < 1e-13);
    }

    #[test]
    fn sweep_with_zero_mu_mixes_direct_and_iterative() {
        let p = toy();
        let opts = SweepOptions {
            tol: 1e-10,
            max_iters: 60,
            ..Default::default()
        };
        let out = sweep(&p, &[C_ZERO, c(0.3, 0.0)], &opts).unwrap();
        assert!(out.all_converged());
        assert_eq!(out.iterations[0], 0);
        assert!(out.iterations[1] >= 1);
        assert!((out.solutions[0][0] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn empty_mu_list_is_an_error() {
        let p = toy();
        assert!(sweep(&p, &[], &SweepOptions::default()).is_err());
    }
}
