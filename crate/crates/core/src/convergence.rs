//! Convergence theory: spectrum estimates, the outlier-aware residual
//! bound, observed convergence factors, and a numerical check of the
//! generalized Gelfand limit.
//!
//! The residual of the parameterized GMRES iteration is governed by the
//! eigenvalues gamma_i of the companion operator: after discounting j
//! outliers, ||r_k|| <= (|mu| |gamma_{j+1}|)^k for sufficiently large k.
//! The gamma_i are reciprocals of the eigenvalues lambda_i of the
//! associated nonlinear eigenvalue problem A(lambda) v = 0, so the smallest
//! NEP eigenvalues play the role the largest matrix eigenvalues play for
//! standard GMRES.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::krylov::ArnoldiFactorization;
use crate::linalg::{complex_eigenvalues, schur_triangular_sorted, spectral_norm, Cx, C_ZERO};
use crate::linearization::TaylorProblem;
use crate::oracle;

/// Where a spectrum estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    /// Ritz values of the Arnoldi Hessenberg factor.
    Ritz,
    /// Dense eigensolve of the explicitly assembled companion matrix.
    Dense,
}

/// Eigenvalue estimates for the companion operator, sorted by descending
/// modulus.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    /// Companion eigenvalue estimates gamma_i, |gamma_1| >= |gamma_2| >= ...
    pub gammas: Vec<Cx>,
    pub source: SpectrumSource,
}

impl SpectrumEstimate {
    fn from_unsorted(mut gammas: Vec<Cx>, source: SpectrumSource) -> Self {
        gammas.sort_by(|a, b| {
            (b.norm(), b.re, b.im)
                .partial_cmp(&(a.norm(), a.re, a.im))
                .expect("finite eigenvalues")
        });
        Self { gammas, source }
    }

    /// Approximate NEP eigenvalues lambda_i = 1 / gamma_i.
    ///
    /// Exactly-zero gammas (eigenvalues at infinity of the NEP, e.g. the
    /// structural nullspace of a truncated companion) are skipped, so the
    /// list may be shorter than `gammas`.
    pub fn lambdas(&self) -> Vec<Cx> {
        self.gammas
            .iter()
            .filter(|g| g.norm() > 0.0)
            .map(|g| Cx::new(1.0, 0.0) / g)
            .collect()
    }
}

/// Full spectrum of the companion matrix assembled densely at truncation
/// order `trunc_order`.
///
/// Guarded by the oracle's dense size cap; larger problems should use
/// [`spectrum_ritz`].
pub fn spectrum_dense(problem: &dyn TaylorProblem, trunc_order: usize) -> Result<SpectrumEstimate> {
    let comp = oracle::assemble_companion(problem, trunc_order)?;
    let eig = complex_eigenvalues(&comp.matrix)?;
    Ok(SpectrumEstimate::from_unsorted(eig, SpectrumSource::Dense))
}

/// Ritz estimates of the dominant companion eigenvalues: eigenvalues of the
/// leading m x m Hessenberg block, sorted by modulus, truncated to `count`.
pub fn spectrum_ritz(fac: &ArnoldiFactorization, count: usize) -> Result<SpectrumEstimate> {
    let m = fac.m();
    if count > m {
        return Err(Error::OutOfRange(format!(
            "requested {count} Ritz values from an order-{m} factorization"
        )));
    }
    let h = fac.hessenberg().square_matrix(m);
    let eig = complex_eigenvalues(&h)?;
    let mut est = SpectrumEstimate::from_unsorted(eig, SpectrumSource::Ritz);
    est.gammas.truncate(count);
    Ok(est)
}

/// Predicted residual bound parameters for one parameter value.
#[derive(Debug, Clone)]
pub struct BoundPrediction {
    pub mu: Cx,
    /// Number of discounted outlier eigenvalues j.
    pub outliers: usize,
    /// Convergence factor |mu| * |gamma_{j+1}|.
    pub factor: f64,
    /// False when the outliers are not strictly separated from
    /// |gamma_{j+1}|, in which case the bound's hypotheses are violated.
    pub separation_ok: bool,
}

impl BoundPrediction {
    /// The bound value factor^k.
    pub fn per_k(&self, k: usize) -> f64 {
        self.factor.powi(k as i32)
    }
}

/// Builds the outlier-discounted convergence factor |mu| * |gamma_{j+1}|.
///
/// `outliers = 0` uses the largest-modulus eigenvalue. Strict separation of
/// the discounted outliers is required by the theory; a violation is
/// reported in the result, not an error.
pub fn predict_bound(spec: &SpectrumEstimate, mu: Cx, outliers: usize) -> Result<BoundPrediction> {
    if outliers + 1 > spec.gammas.len() {
        return Err(Error::OutOfRange(format!(
            "outlier count {outliers} needs at least {} eigenvalues, have {}",
            outliers + 1,
            spec.gammas.len()
        )));
    }
    let edge = spec.gammas[outliers].norm();
    let separation_ok = (0..outliers).all(|i| spec.gammas[i].norm() > edge * (1.0 + 1e-12));
    Ok(BoundPrediction {
        mu,
        outliers,
        factor: mu.norm() * edge,
        separation_ok,
    })
}

/// Relative floor below which residual entries measure roundoff, not
/// convergence: 100 * eps * r_0.
pub fn stagnation_floor(r0: f64) -> f64 {
    1e2 * f64::EPSILON * r0
}

/// Worst observed per-iteration contraction rho = max r_{k+1} / r_k over
/// the pre-stagnation part of a residual history.
///
/// Entries below the stagnation floor are excluded; a history with fewer
/// than two usable entries has no defined factor.
pub fn observed_factor(history: &[f64]) -> Result<f64> {
    if history.len() < 2 {
        return Err(Error::UndefinedFactor(
            "history needs at least two entries".into(),
        ));
    }
    let floor = stagnation_floor(history[0]);
    let mut rho: Option<f64> = None;
    for w in history.windows(2) {
        if w[0] >= floor && w[1] >= floor {
            let ratio = w[1] / w[0];
            rho = Some(rho.map_or(ratio, |r: f64| r.max(ratio)));
        }
    }
    rho.ok_or_else(|| Error::UndefinedFactor("all iterations below the stagnation floor".into()))
}

/// First index from which the residual has dropped below 1e-2 * r_0; the
/// operational "sufficiently large k" past the outlier transient.
pub fn knee_index(history: &[f64]) -> Option<usize> {
    let r0 = *history.first()?;
    history.iter().position(|&r| r < 1e-2 * r0)
}

/// Evaluates ||(A - gamma_1 I) ... (A - gamma_j I) A^k||_2^(1/k) for
/// k = 1..=k_max, where gamma_1..gamma_j are the j largest-modulus
/// eigenvalues of A.
///
/// The product is accumulated on a Schur triangle with the dominant
/// eigenvalues ordered first: the annihilating factors then zero the
/// leading j columns exactly, so the dominant powers never amplify
/// roundoff, and the running scale is carried in log magnitude so powers up
/// to spectral radius^k_max cannot overflow.
pub fn gelfand_limit_check(a: &DMatrix<Cx>, j: usize, k_max: usize) -> Result<Vec<(usize, f64)>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "gelfand_limit_check",
            expected: n,
            got: a.ncols(),
        });
    }
    if j >= n {
        return Err(Error::OutOfRange(format!(
            "outlier count {j} must be below the dimension {n}"
        )));
    }
    if k_max == 0 {
        return Ok(Vec::new());
    }

    let t = schur_triangular_sorted(a)?;
    // annihilator q(T) = prod (T - gamma_i I); diagonal entries are placed
    // exactly so columns 1..j of the product are structurally zero
    let mut p = DMatrix::<Cx>::identity(n, n);
    for i in 0..j {
        let gamma = t[(i, i)];
        let mut shifted = t.clone();
        for d in 0..n {
            shifted[(d, d)] -= gamma;
        }
        p = mul_upper_triangular(&p, &shifted);
    }

    let mut log_scale = 0.0f64;
    let mut values = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        p = mul_upper_triangular(&p, &t);
        let fro = p.norm();
        if !fro.is_finite() {
            return Err(Error::EigFailure(format!(
                "gelfand accumulation overflowed at k = {k}"
            )));
        }
        if fro > 0.0 {
            p /= Cx::new(fro, 0.0);
            log_scale += fro.ln();
        }
        let sigma = spectral_norm(&p);
        let value = if sigma > 0.0 {
            ((log_scale + sigma.ln()) / k as f64).exp()
        } else {
            0.0
        };
        values.push((k, value));
    }
    Ok(values)
}

fn mul_upper_triangular(a: &DMatrix<Cx>, b: &DMatrix<Cx>) -> DMatrix<Cx> {
    let n = a.nrows();
    let mut out = DMatrix::from_element(n, n, C_ZERO);
    for i in 0..n {
        for l in i..n {
            let mut acc = C_ZERO;
            for q in i..=l {
                acc += a[(i, q)] * b[(q, l)];
            }
            out[(i, l)] = acc;
        }
    }
    out
}

/// Per-parameter convergence diagnostics assembled from a sweep history and
/// a spectrum estimate.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub mu: Cx,
    /// True relative residuals per iteration.
    pub true_residuals: Vec<f64>,
    /// Least squares residuals per iteration.
    pub ls_residuals: Vec<f64>,
    /// Worst pre-stagnation contraction, when defined.
    pub observed_rho: Option<f64>,
    /// One bound prediction per requested outlier count.
    pub bounds: Vec<BoundPrediction>,
}

impl ConvergenceReport {
    pub fn new(
        mu: Cx,
        true_residuals: Vec<f64>,
        ls_residuals: Vec<f64>,
        spectrum: &SpectrumEstimate,
        outlier_counts: &[usize],
    ) -> Result<Self> {
        let observed_rho = observed_factor(&true_residuals).ok();
        let bounds = outlier_counts
            .iter()
            .map(|&j| predict_bound(spectrum, mu, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mu,
            true_residuals,
            ls_residuals,
            observed_rho,
            bounds,
        })
    }
}
