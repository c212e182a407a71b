//! 1-D Helmholtz problem with an absorbing boundary condition.
//!
//! A second-order finite-difference discretization of
//! u'' + (1 + mu k(x))^2 u + beta(x) u = h(x) on [0, 1) with u(0) = 0 and,
//! at x = 1, the exact parameter-dependent Robin condition
//! g(mu) u(1) + f(mu) u'(1) = 0 obtained from a Dirichlet-to-Neumann map of
//! the constant-coefficient exterior [1, 1.5]:
//!
//! ```text
//! g(mu) = cos((c-b)(1 + k0 mu))
//! f(mu) = sin((c-b)(1 + k0 mu)) / (1 + k0 mu)
//! ```
//!
//! The Robin row makes the discretized family
//! A_n(mu) = D_n + K_n(mu) + L_n + X_n F(mu) Y_n^T, whose polynomial part is
//! quadratic in mu while every higher derivative lives in the rank-2
//! boundary term: exactly the split-order structure the low-rank basis
//! variant exploits (s = 2, p = 2).
//!
//! f is entire (the pole of 1/(1 + k0 mu) is cancelled by the sine zero),
//! so all derivative orders of the boundary functions exist; they are
//! computed from the power series of sin((c-b) z)/z around z = 1, which is
//! stable at every order, and cross-checked against finite differences at
//! construction time.

use nalgebra::DVector;

use super::A0Factor;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Cx, C_ZERO};
use crate::linearization::{LowRankTaylorProblem, TaylorProblem};

const A_PT: f64 = 0.0;
const B_PT: f64 = 1.0;
const C_PT: f64 = 1.5;
const ALPHA: f64 = 10.0;
/// k(x) on the constant exterior branch x >= b.
const K0: f64 = 5.0;
/// c - b, the exterior width.
const DELTA: f64 = C_PT - B_PT;

/// Highest derivative order of g and f representable without overflow.
const MAX_BOUNDARY_ORDER: usize = 700;

fn k_of_x(x: f64) -> f64 {
    if x < B_PT / 2.0 {
        5.0 + (10.0 * x / B_PT) * (ALPHA * std::f64::consts::PI / B_PT * x).sin()
    } else if x < B_PT {
        5.0 + 10.0 * (1.0 - x / B_PT) * (ALPHA * std::f64::consts::PI / B_PT * x).sin()
    } else {
        K0
    }
}

fn beta_of_x(x: f64) -> f64 {
    if x < B_PT {
        ((x - A_PT) / (B_PT - A_PT) * 2.0 * std::f64::consts::PI).sin()
    } else {
        0.0
    }
}

fn h_of_x(x: f64) -> f64 {
    if x < B_PT {
        (x - B_PT).powi(2) / (A_PT - B_PT).powi(2)
    } else {
        0.0
    }
}

/// g(mu) at a complex parameter.
pub fn g_exact(mu: Cx) -> Cx {
    ((Cx::new(1.0, 0.0) + mu * K0) * DELTA).cos()
}

/// f(mu) at a complex parameter (the removable singularity at
/// mu = -1/k0 is evaluated by its limit).
pub fn f_exact(mu: Cx) -> Cx {
    let z = Cx::new(1.0, 0.0) + mu * K0;
    if z.norm() < 1e-8 {
        // sin(delta z)/z -> delta as z -> 0
        return Cx::new(DELTA, 0.0);
    }
    (z * DELTA).sin() / z
}

/// m-th derivative of g at 0: (delta k0)^m cos(delta + m pi/2).
fn g_deriv(m: usize) -> f64 {
    let theta = DELTA * K0;
    let trig = match m % 4 {
        0 => DELTA.cos(),
        1 => -DELTA.sin(),
        2 => -DELTA.cos(),
        _ => DELTA.sin(),
    };
    theta.powi(m as i32) * trig
}

/// m-th derivative of f at 0 via the entire series of sin(delta z)/z
/// around z = 1 (z = 1 + k0 mu):
///
/// f^(m)(0) = sum_{2r >= m} (-1)^r delta^(2r+1) k0^m (2r)! / ((2r-m)! (2r+1)!)
///
/// The leading term dominates and successive ratios are below 1/4, so the
/// sum has no cancellation blowup at any order.
fn f_deriv(m: usize) -> Result<f64> {
    if m > MAX_BOUNDARY_ORDER {
        return Err(Error::OutOfRange(format!(
            "boundary derivative order {m} exceeds the f64 range (max {MAX_BOUNDARY_ORDER})"
        )));
    }
    let r_start = m.div_ceil(2);
    let r_end = r_start + 220;
    // cumulative log-factorials up to 2 r_end + 1
    let mut lnfact = vec![0.0f64; 2 * r_end + 2];
    for i in 1..lnfact.len() {
        lnfact[i] = lnfact[i - 1] + (i as f64).ln();
    }
    let ln_delta = DELTA.ln();
    let ln_k0 = K0.ln();
    let mut sum = 0.0f64;
    let mut max_term = 0.0f64;
    for r in r_start..=r_end {
        let ln_term = (2 * r + 1) as f64 * ln_delta + m as f64 * ln_k0 + lnfact[2 * r]
            - lnfact[2 * r - m]
            - lnfact[2 * r + 1];
        let term = ln_term.exp();
        let signed = if r % 2 == 0 { term } else { -term };
        sum += signed;
        max_term = max_term.max(term);
        if term < 1e-22 * max_term && r > r_start + 4 {
            break;
        }
    }
    Ok(sum)
}

/// Discretized Helmholtz family with the low-rank absorbing boundary.
#[derive(Debug)]
pub struct Helmholtz1dProblem {
    n: usize,
    dx: f64,
    /// k(x_i) for i = 1..n-1 (the interior diagonal of the quadratic part).
    k_vals: Vec<f64>,
    beta_vals: Vec<f64>,
    rhs: DVector<Cx>,
    a0: A0Factor,
}

impl Helmholtz1dProblem {
    /// Builds the n-point discretization (x_k = k/n, so x_n = 1 carries the
    /// one-sided Robin stencil, which needs n >= 4).
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::ProblemDefinition(format!(
                "the one-sided boundary stencil needs n >= 4, got {n}"
            )));
        }
        validate_boundary_derivatives()?;
        let dx = 1.0 / n as f64;
        let k_vals: Vec<f64> = (1..n).map(|k| k_of_x(k as f64 * dx)).collect();
        let beta_vals: Vec<f64> = (1..n).map(|k| beta_of_x(k as f64 * dx)).collect();
        let rhs = DVector::from_fn(n, |i, _| Cx::new(h_of_x((i + 1) as f64 * dx), 0.0));

        let a0_mat = assemble_at(
            n,
            dx,
            &k_vals,
            &beta_vals,
            Cx::new(g_exact(C_ZERO).re, 0.0),
            Cx::new(f_exact(C_ZERO).re, 0.0),
            C_ZERO,
        );
        let a0 = A0Factor::factor(&a0_mat)?;
        Ok(Self {
            n,
            dx,
            k_vals,
            beta_vals,
            rhs,
            a0,
        })
    }

    fn y_columns(&self) -> (f64, f64, f64) {
        // second column of Y: (3/(2 dx)) e_n - (2/dx) e_{n-1} + (1/(2 dx)) e_{n-2}
        (1.5 / self.dx, -2.0 / self.dx, 0.5 / self.dx)
    }

    /// Residual of the Robin boundary relation g(mu) u(b) + f(mu) u'(b)
    /// with the one-sided second-order stencil for u'(b).
    pub fn boundary_relation(&self, mu: Cx, u: &DVector<Cx>) -> Cx {
        let n = self.n;
        let (w_n, w_n1, w_n2) = self.y_columns();
        let du = u[n - 1] * w_n + u[n - 2] * w_n1 + u[n - 3] * w_n2;
        g_exact(mu) * u[n - 1] + f_exact(mu) * du
    }
}

fn assemble_at(
    n: usize,
    dx: f64,
    k_vals: &[f64],
    beta_vals: &[f64],
    g: Cx,
    f: Cx,
    mu: Cx,
) -> CsrMatrix {
    let inv2 = 1.0 / (dx * dx);
    let mut triplets = Vec::with_capacity(4 * n);
    for i in 0..n - 1 {
        if i > 0 {
            triplets.push((i, i - 1, Cx::new(inv2, 0.0)));
        }
        let kq = Cx::new(1.0, 0.0) + mu * k_vals[i];
        triplets.push((
            i,
            i,
            Cx::new(-2.0 * inv2 + beta_vals[i], 0.0) + kq * kq,
        ));
        triplets.push((i, i + 1, Cx::new(inv2, 0.0)));
    }
    let (w_n, w_n1, w_n2) = (1.5 / dx, -2.0 / dx, 0.5 / dx);
    triplets.push((n - 1, n - 1, g + f * w_n));
    triplets.push((n - 1, n - 2, f * w_n1));
    triplets.push((n - 1, n - 3, f * w_n2));
    CsrMatrix::from_triplets(n, n, triplets).expect("indices in range")
}

/// Construction-time cross-check of the closed-form boundary derivatives
/// against finite differences (orders 1..3) and against re-summation of the
/// Taylor series (through order 12).
fn validate_boundary_derivatives() -> Result<()> {
    let fd_tol = 1e-8;
    let g_fn = |x: f64| g_exact(Cx::new(x, 0.0)).re;
    let f_fn = |x: f64| f_exact(Cx::new(x, 0.0)).re;
    for (name, func, deriv) in [
        ("g", &g_fn as &dyn Fn(f64) -> f64, &g_deriv as &dyn Fn(usize) -> f64),
        ("f", &f_fn, &|m| f_deriv(m).unwrap()),
    ] {
        let h = 5e-3;
        let d1 = (-func(2.0 * h) + 8.0 * func(h) - 8.0 * func(-h) + func(-2.0 * h)) / (12.0 * h);
        let d2 = (-func(2.0 * h) + 16.0 * func(h) - 30.0 * func(0.0) + 16.0 * func(-h)
            - func(-2.0 * h))
            / (12.0 * h * h);
        let h3 = 5e-3;
        let d3 = (0.125 * func(-3.0 * h3) - func(-2.0 * h3) + 1.625 * func(-h3)
            - 1.625 * func(h3)
            + func(2.0 * h3)
            - 0.125 * func(3.0 * h3))
            / (h3 * h3 * h3);
        for (order, fd) in [(1usize, d1), (2, d2), (3, d3)] {
            let exact = deriv(order);
            let scale = exact.abs().max(1.0);
            if (exact - fd).abs() > fd_tol * scale {
                return Err(Error::ProblemDefinition(format!(
                    "boundary function {name}: order-{order} derivative {exact} disagrees with finite difference {fd}"
                )));
            }
        }
        // series re-summation reproduces the function near 0
        for &mu in &[0.05f64, 0.1, 0.2] {
            let mut acc = 0.0;
            let mut fact = 1.0;
            for m in 0..=12 {
                if m > 0 {
                    fact *= m as f64;
                }
                acc += deriv(m) * mu.powi(m as i32) / fact;
            }
            let direct = func(mu);
            if (acc - direct).abs() > 1e-9 * direct.abs().max(1.0) {
                return Err(Error::ProblemDefinition(format!(
                    "boundary function {name}: Taylor re-summation at mu = {mu} drifted ({acc} vs {direct})"
                )));
            }
        }
    }
    Ok(())
}

impl TaylorProblem for Helmholtz1dProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve_a0(&self, y: &DVector<Cx>) -> DVector<Cx> {
        self.a0.solve(y)
    }

    fn deriv_apply(&self, order: usize, y: &DVector<Cx>) -> Result<DVector<Cx>> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "helmholtz deriv_apply",
                expected: self.n,
                got: y.len(),
            });
        }
        if order == 0 {
            let m = assemble_at(
                self.n,
                self.dx,
                &self.k_vals,
                &self.beta_vals,
                g_exact(C_ZERO),
                f_exact(C_ZERO),
                C_ZERO,
            );
            return Ok(m.mul_vec(y));
        }
        let mut out = DVector::from_element(self.n, C_ZERO);
        // polynomial (diagonal) part: quadratic in mu, zero beyond order 2
        match order {
            1 => {
                for i in 0..self.n - 1 {
                    out[i] = y[i] * (2.0 * self.k_vals[i]);
                }
            }
            2 => {
                for i in 0..self.n - 1 {
                    out[i] = y[i] * (2.0 * self.k_vals[i] * self.k_vals[i]);
                }
            }
            _ => {}
        }
        // rank-2 boundary part at every order
        let w = self.vt_apply(y);
        let boundary = self.u_apply_impl(order, &w)?;
        Ok(out + boundary)
    }

    fn eval_apply(&self, mu: Cx, y: &DVector<Cx>) -> DVector<Cx> {
        let m = assemble_at(
            self.n,
            self.dx,
            &self.k_vals,
            &self.beta_vals,
            g_exact(mu),
            f_exact(mu),
            mu,
        );
        m.mul_vec(y)
    }

    fn rhs(&self) -> &DVector<Cx> {
        &self.rhs
    }

    fn as_low_rank(&self) -> Option<&dyn LowRankTaylorProblem> {
        Some(self)
    }
}

impl Helmholtz1dProblem {
    fn u_apply_impl(&self, order: usize, w: &DVector<Cx>) -> Result<DVector<Cx>> {
        // U_i = X F^(i)(0) with X = [e_n, e_n]: only the boundary row moves
        let g_i = g_deriv(order);
        let f_i = f_deriv(order)?;
        let mut out = DVector::from_element(self.n, C_ZERO);
        out[self.n - 1] = w[0] * g_i + w[1] * f_i;
        Ok(out)
    }
}

impl LowRankTaylorProblem for Helmholtz1dProblem {
    fn split_order(&self) -> usize {
        2
    }

    fn rank(&self) -> usize {
        2
    }

    fn u_apply(&self, order: usize, y: &DVector<Cx>) -> Result<DVector<Cx>> {
        if order <= 2 {
            return Err(Error::OutOfRange(format!(
                "u_apply order {order} is within the polynomial part (s = 2)"
            )));
        }
        self.u_apply_impl(order, y)
    }

    fn vt_apply(&self, y: &DVector<Cx>) -> DVector<Cx> {
        let n = self.n;
        let (w_n, w_n1, w_n2) = self.y_columns();
        DVector::from_vec(vec![
            y[n - 1],
            y[n - 1] * w_n + y[n - 2] * w_n1 + y[n - 3] * w_n2,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_functions_at_zero() {
        // c - b = 0.5: g(0) = cos(0.5), f(0) = sin(0.5)
        assert!((g_exact(C_ZERO).re - 0.5f64.cos()).abs() < 1e-15);
        assert!((f_exact(C_ZERO).re - 0.5f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn f_derivative_series_is_stable_at_high_order() {
        // the Taylor coefficients f^(m)(0)/m! must decay like an entire
        // function of type delta*k0 = 2.5: check the ratio at large m
        let m = 120;
        let a = f_deriv(m).unwrap().abs();
        let b = f_deriv(m + 1).unwrap().abs();
        let ratio = b / (a * (m + 1) as f64); // coefficient ratio
        assert!(ratio < 1.0, "coefficient growth {ratio} at order {m}");
        assert!(a.is_finite());
    }

    #[test]
    fn polynomial_part_vanishes_beyond_order_two() {
        let p = Helmholtz1dProblem::new(16).unwrap();
        let y = DVector::from_fn(16, |i, _| Cx::new(1.0 + i as f64, -0.3));
        let d3 = p.deriv_apply(3, &y).unwrap();
        // only the boundary row is nonzero
        for i in 0..15 {
            assert_eq!(d3[i], C_ZERO);
        }
        assert!(d3[15].norm() > 0.0);
    }

    #[test]
    fn rhs_last_entry_is_zero() {
        let p = Helmholtz1dProblem::new(10).unwrap();
        assert_eq!(p.rhs()[9], C_ZERO);
        // h(x_1) = (x_1 - 1)^2
        let x1 = 0.1;
        assert!((p.rhs()[0].re - (x1 - 1.0f64).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn a0_solve_inverts_a_at_zero() {
        let p = Helmholtz1dProblem::new(64).unwrap();
        let y = DVector::from_fn(64, |i, _| Cx::new((i as f64 * 0.7).sin(), 0.2));
        let x = p.solve_a0(&y);
        let back = p.eval_apply(C_ZERO, &x);
        assert!((back - &y).norm() / y.norm() < 1e-10);
    }

    #[test]
    fn n_below_stencil_width_is_rejected() {
        assert!(Helmholtz1dProblem::new(3).is_err());
    }
}
