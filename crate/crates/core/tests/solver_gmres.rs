//! The parameterized evaluator against textbook GMRES on the explicit
//! shifted linearization, plus sweep semantics and end-to-end solves.

mod common;

use common::*;
use infgmres::oracle::{assemble_companion, direct_solve, reference_gmres};
use infgmres::problems::{build_delay, MatrixGenerator};
use infgmres::solver::{sweep, SweepOptions};
use infgmres::{
    arnoldi_build, residual_true, BasisVariant, Cx, OrthoPolicy, ParamSolution,
};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn evaluate_equals_reference_gmres_on_explicit_linearization() {
    // shift invariance: GMRES on (mu B_N - I) from c explores the same
    // Krylov space the matrix-free factorization does, so the iterates'
    // first blocks must coincide at every m
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mu = c(0.3, 0.1);
    for trial in 0..6 {
        let n = 2 + trial % 3;
        let degree = 1 + trial % 6;
        let p = random_problem(&mut rng, n, degree);
        let big_n = 10;
        let comp = assemble_companion(&p, big_n).unwrap();
        let shifted = &comp.matrix * mu - DMatrix::<Cx>::identity(comp.matrix.nrows(), comp.matrix.nrows());
        let rhs = comp.rhs_c(&p);
        let reference = reference_gmres(&shifted, &rhs, 10);

        let fac = arnoldi_build(&p, 10, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
        let sol = ParamSolution::new(&fac, &p);
        for m in 1..=10usize {
            let ev = sol.evaluate(mu, m).unwrap();
            let ref_first = reference.iterates[m - 1].rows(0, n).into_owned();
            let denom = ref_first.norm().max(1e-10);
            let diff = (&ev.x - &ref_first).norm() / denom;
            assert!(
                diff <= 1e-10,
                "trial {trial}, m {m}: first-block difference {diff:.2e}"
            );
        }
    }
}

#[test]
fn ls_residual_equals_linearized_gmres_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let p = random_problem(&mut rng, 3, 4);
    let mu = c(0.25, -0.15);
    let big_n = 9;
    let comp = assemble_companion(&p, big_n).unwrap();
    let dim = comp.matrix.nrows();
    let shifted = &comp.matrix * mu - DMatrix::<Cx>::identity(dim, dim);
    let rhs = comp.rhs_c(&p);
    let reference = reference_gmres(&shifted, &rhs, 8);

    let fac = arnoldi_build(&p, 8, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
    let sol = ParamSolution::new(&fac, &p);
    for m in 1..=8usize {
        let ev = sol.evaluate(mu, m).unwrap();
        let d = (ev.ls_residual - reference.residuals[m - 1]).abs();
        assert!(
            d <= 1e-10 * (1.0 + reference.residuals[m - 1]),
            "m {m}: {d:.2e}"
        );
    }
}

#[test]
fn perturbing_the_minimizer_never_decreases_the_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let p = random_problem(&mut rng, 4, 5);
    let m = 7;
    let fac = arnoldi_build(&p, m, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
    let mu = c(0.4, 0.2);

    // recompute the minimizer and its objective directly
    let shifted = infgmres::solver::shifted_matrix(&fac, mu, m);
    let mut rhs = DVector::from_element(m + 1, C_ZERO);
    rhs[0] = c(fac.c_norm(), 0.0);
    let ls = infgmres::linalg::least_squares(&shifted, &rhs);
    for _ in 0..30 {
        let d = rand_vector(&mut rng, m) * c(1e-6, 0.0);
        let perturbed = (&shifted * (&ls.solution + &d) - &rhs).norm();
        assert!(perturbed + 1e-14 >= ls.residual);
    }
}

#[test]
fn delay_small_case_matches_independent_direct_formula() {
    // A0 = I, A1 = diag(0.5, 0.2), b = ones: A(mu) is diagonal, so the
    // exact solution is componentwise b_i / (1 - mu + a_i e^{-mu})
    let a0 = infgmres::linalg::CsrMatrix::identity(2);
    let a1 = infgmres::linalg::CsrMatrix::from_triplets(
        2,
        2,
        vec![(0, 0, c(0.5, 0.0)), (1, 1, c(0.2, 0.0))],
    )
    .unwrap();
    let b = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
    let p = build_delay(2, MatrixGenerator::Explicit { a0, a1 }, Some(b)).unwrap();
    let mu = c(0.1, 0.0);

    let opts = SweepOptions {
        tol: 1e-13,
        max_iters: 60,
        ..Default::default()
    };
    let out = sweep(&p, &[mu], &opts).unwrap();
    assert!(out.all_converged());
    let exact0 = c(1.0, 0.0) / (c(1.0, 0.0) - mu + (-mu).exp() * 0.5);
    let exact1 = c(1.0, 0.0) / (c(1.0, 0.0) - mu + (-mu).exp() * 0.2);
    assert!((out.solutions[0][0] - exact0).norm() < 1e-12);
    assert!((out.solutions[0][1] - exact1).norm() < 1e-12);
}

#[test]
fn affine_delay_reaches_exact_solve_when_subspace_saturates() {
    // A1 = 0 makes the problem affine in mu; once the Krylov dimension
    // covers the relevant invariant subspace the solve is exact
    let n = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut dense0 = rand_matrix(&mut rng, n, n) * c(0.3, 0.0);
    for i in 0..n {
        dense0[(i, i)] += c(2.0, 0.0);
    }
    let a0 = infgmres::linalg::CsrMatrix::from_dense(&dense0);
    let a1 = infgmres::linalg::CsrMatrix::zeros(n, n);
    let p = build_delay(n, MatrixGenerator::Explicit { a0, a1 }, None).unwrap();
    let mu = c(0.05, 0.0);
    let opts = SweepOptions {
        tol: 1e-12,
        max_iters: 80,
        ..Default::default()
    };
    let out = sweep(&p, &[mu], &opts).unwrap();
    assert!(out.all_converged());
    let xd = direct_solve(&p, mu).unwrap();
    assert!((&out.solutions[0] - &xd).norm() / xd.norm() < 1e-10);
}

#[test]
fn delay_eight_matches_direct_solve_to_high_accuracy() {
    let p = build_delay(8, MatrixGenerator::Seeded { seed: 3 }, None).unwrap();
    let mu = c(0.05, 0.0);
    let fac = arnoldi_build(&p, 30, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
    let sol = ParamSolution::new(&fac, &p);
    let ev = sol.evaluate(mu, 30).unwrap();
    let xd = direct_solve(&p, mu).unwrap();
    assert!((&ev.x - &xd).norm() / xd.norm() <= 1e-8);
}

#[test]
fn sweep_histories_are_monotone_in_the_ls_residual() {
    let p = build_delay(40, MatrixGenerator::Seeded { seed: 5 }, None).unwrap();
    let mus = [c(0.05, 0.0), c(0.1, 0.02), c(0.15, 0.0)];
    let opts = SweepOptions {
        tol: 1e-12,
        max_iters: 60,
        keep_histories: true,
        ..Default::default()
    };
    let out = sweep(&p, &mus, &opts).unwrap();
    for h in &out.histories {
        for w in h.ls_residuals.windows(2) {
            assert!(w[1] <= w[0] + 1e-13, "ls residual increased: {w:?}");
        }
    }
}

#[test]
fn sweep_iterations_monotone_in_mu_magnitude() {
    let p = build_delay(100, MatrixGenerator::Seeded { seed: 1 }, None).unwrap();
    let mus: Vec<Cx> = (1..=20).map(|i| c(0.01 * i as f64, 0.0)).collect();
    let opts = SweepOptions {
        tol: 1e-12,
        max_iters: 200,
        ..Default::default()
    };
    let out = sweep(&p, &mus, &opts).unwrap();
    assert!(out.all_converged());
    for w in out.iterations.windows(2) {
        assert!(w[1] >= w[0], "iterations decreased along the mu grid: {w:?}");
    }
}

#[test]
fn factorization_is_mu_independent_and_shared() {
    // one factorization serves every mu; evaluations are bit-identical on
    // repeat (no hidden state)
    let p = build_delay(30, MatrixGenerator::Seeded { seed: 6 }, None).unwrap();
    let fac = arnoldi_build(&p, 20, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
    let sol = ParamSolution::new(&fac, &p);
    for &mu in &[c(0.03, 0.0), c(0.0, 0.08), c(-0.05, 0.05)] {
        let a = sol.evaluate(mu, 20).unwrap();
        let b = sol.evaluate(mu, 20).unwrap();
        assert_eq!(a.x, b.x);
        assert!(residual_true(&p, mu, &a.x) < 1e-9);
    }
}

#[test]
fn residual_true_of_a_direct_solve_is_tiny() {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let p = random_problem(&mut rng, 10, 4);
    let mu = c(0.2, -0.1);
    let x = direct_solve(&p, mu).unwrap();
    assert!(residual_true(&p, mu, &x) <= 1e-12);
}
