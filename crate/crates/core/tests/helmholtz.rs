//! Helmholtz discretization fidelity: dense re-assembly, Taylor
//! consistency, the rank structure of high-order coefficients, boundary
//! condition satisfaction, and storage-variant agreement of the solves.

mod common;

use common::*;
use infgmres::problems::helmholtz1d::{f_exact, g_exact};
use infgmres::problems::Helmholtz1dProblem;
use infgmres::solver::{sweep, SweepOptions};
use infgmres::{
    arnoldi_build, residual_true, BasisVariant, Cx, LowRankTaylorProblem, OrthoPolicy,
    ParamSolution, TaylorProblem,
};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense assembly straight from the formulas, independent of the problem's
/// own assembly helper.
fn assemble_reference(n: usize, mu: Cx) -> DMatrix<Cx> {
    let dx = 1.0 / n as f64;
    let k = |x: f64| -> f64 {
        if x < 0.5 {
            5.0 + 10.0 * x * (10.0 * std::f64::consts::PI * x).sin()
        } else if x < 1.0 {
            5.0 + 10.0 * (1.0 - x) * (10.0 * std::f64::consts::PI * x).sin()
        } else {
            5.0
        }
    };
    let beta = |x: f64| -> f64 {
        if x < 1.0 {
            (2.0 * std::f64::consts::PI * x).sin()
        } else {
            0.0
        }
    };
    let mut m = DMatrix::from_element(n, n, C_ZERO);
    let inv2 = 1.0 / (dx * dx);
    for i in 0..n - 1 {
        let x = (i + 1) as f64 * dx;
        if i > 0 {
            m[(i, i - 1)] = c(inv2, 0.0);
        }
        let kq = c(1.0, 0.0) + mu * k(x);
        m[(i, i)] = c(-2.0 * inv2 + beta(x), 0.0) + kq * kq;
        m[(i, i + 1)] = c(inv2, 0.0);
    }
    // X F(mu) Y^T in the last row
    let g = g_exact(mu);
    let f = f_exact(mu);
    m[(n - 1, n - 1)] = g + f * (1.5 / dx);
    m[(n - 1, n - 2)] = f * (-2.0 / dx);
    m[(n - 1, n - 3)] = f * (0.5 / dx);
    m
}

#[test]
fn eval_apply_matches_independent_dense_assembly() {
    let n = 50;
    let p = Helmholtz1dProblem::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for &mu_re in &[0.3, 1.6, 2.5] {
        let mu = c(mu_re, 0.0);
        let reference = assemble_reference(n, mu);
        for _ in 0..4 {
            let y = rand_vector(&mut rng, n);
            let got = p.eval_apply(mu, &y);
            let expect = &reference * &y;
            let err = (got - &expect).norm() / expect.norm();
            assert!(err < 1e-12, "mu {mu_re}: {err:.2e}");
        }
    }
}

#[test]
fn taylor_series_of_eval_converges_geometrically() {
    let n = 30;
    let p = Helmholtz1dProblem::new(n).unwrap();
    let mu = c(0.1, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y = rand_vector(&mut rng, n);
    let exact = p.eval_apply(mu, &y);

    let mut acc = DVector::from_element(n, C_ZERO);
    let mut w = c(1.0, 0.0);
    let mut errs = Vec::new();
    for i in 0..=20usize {
        if i > 0 {
            w *= mu / c(i as f64, 0.0);
        }
        acc.axpy(w, &p.deriv_apply(i, &y).unwrap(), c(1.0, 0.0));
        errs.push((&exact - &acc).norm());
    }
    assert!(errs[20] < 1e-10 * exact.norm());
    // ratio test on the tail: geometric or better until the roundoff floor
    let floor = 1e-12 * exact.norm();
    for k in 5..19 {
        if errs[k] <= floor {
            break;
        }
        assert!(
            errs[k + 1] <= 0.5 * errs[k],
            "tail not contracting at {k}: {} -> {}",
            errs[k],
            errs[k + 1]
        );
    }
}

#[test]
fn high_order_coefficients_have_rank_at_most_two() {
    let n = 24;
    let p = Helmholtz1dProblem::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for order in [3usize, 5, 9] {
        // apply to p+1 = 3 random vectors; the images must be linearly
        // dependent beyond rank 2
        let images: Vec<DVector<Cx>> = (0..3)
            .map(|_| p.deriv_apply(order, &rand_vector(&mut rng, n)).unwrap())
            .collect();
        let mut m = DMatrix::from_element(n, 3, C_ZERO);
        for (j, im) in images.iter().enumerate() {
            m.set_column(j, im);
        }
        let sv = m.svd(false, false).singular_values;
        let smax = sv.max();
        assert!(
            sv[2] <= 1e-10 * smax,
            "order {order}: third singular value {:.2e} vs {smax:.2e}",
            sv[2]
        );
    }
}

#[test]
fn deriv_consistency_with_low_rank_split() {
    let n = 20;
    let p = Helmholtz1dProblem::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let y = rand_vector(&mut rng, n);
    for order in [3usize, 4, 7] {
        let direct = p.deriv_apply(order, &y).unwrap();
        let split = p.u_apply(order, &p.vt_apply(&y)).unwrap();
        let denom = direct.norm().max(1e-300);
        assert!((direct - split).norm() / denom < 1e-12);
    }
}

#[test]
fn converged_solution_satisfies_the_robin_boundary() {
    let n = 400;
    let p = Helmholtz1dProblem::new(n).unwrap();
    let mu = c(1.6, 0.0);
    let opts = SweepOptions {
        tol: 1e-10,
        max_iters: 120,
        variant: BasisVariant::LowRank,
        ..Default::default()
    };
    let out = sweep(&p, &[mu], &opts).unwrap();
    assert!(out.all_converged());
    let u = &out.solutions[0];
    let relation = p.boundary_relation(mu, u).norm();
    assert!(
        relation <= 1e-6 * u.norm(),
        "boundary relation {relation:.2e} vs ||u|| {:.2e}",
        u.norm()
    );
}

#[test]
fn full_and_low_rank_iterates_agree_once_converged() {
    let n = 200;
    let p = Helmholtz1dProblem::new(n).unwrap();
    let mu = c(1.6, 0.0);
    let m = 40;
    let f_full = arnoldi_build(&p, m, BasisVariant::Full, OrthoPolicy::TwoPass).unwrap();
    let f_lr = arnoldi_build(&p, m, BasisVariant::LowRank, OrthoPolicy::TwoPass).unwrap();
    let xf = ParamSolution::new(&f_full, &p).evaluate(mu, m).unwrap();
    let xl = ParamSolution::new(&f_lr, &p).evaluate(mu, m).unwrap();
    let rel = (&xf.x - &xl.x).norm() / xf.x.norm();
    assert!(rel <= 1e-8, "variant iterate difference {rel:.2e}");
    assert!(residual_true(&p, mu, &xf.x) < 1e-10);
    assert!(residual_true(&p, mu, &xl.x) < 1e-10);
}

#[test]
fn delay_taylor_series_also_contracts() {
    // same ratio test for the exponential family
    let p = infgmres::problems::build_delay(
        25,
        infgmres::problems::MatrixGenerator::Seeded { seed: 10 },
        None,
    )
    .unwrap();
    let mu = c(0.1, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let y = rand_vector(&mut rng, 25);
    let exact = p.eval_apply(mu, &y);
    let mut acc = DVector::from_element(25, C_ZERO);
    let mut w = c(1.0, 0.0);
    let floor = 1e-13 * exact.norm();
    let mut prev = f64::INFINITY;
    let mut last = f64::INFINITY;
    for i in 0..=20usize {
        if i > 0 {
            w *= mu / c(i as f64, 0.0);
        }
        acc.axpy(w, &p.deriv_apply(i, &y).unwrap(), c(1.0, 0.0));
        let e = (&exact - &acc).norm();
        if i >= 3 && prev > floor {
            assert!(e <= 0.5 * prev, "no contraction at order {i}");
        }
        prev = e;
        last = e;
    }
    assert!(last < 1e-12 * exact.norm());
}
