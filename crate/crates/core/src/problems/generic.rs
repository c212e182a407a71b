//! File-defined problems: explicit Taylor coefficient matrices with an
//! optional low-rank tail.
//!
//! A generic problem is the polynomial
//! A(mu) = sum_{i=0..d} (1/i!) A_i mu^i, optionally extended past a split
//! order s by low-rank terms (1/i!) U F^(i)(0) V^T mu^i. The coefficient
//! list is an exact, finite description: derivative orders beyond the
//! polynomial degree are zero, while orders beyond a stored low-rank
//! derivative list are an error, because there the function genuinely has
//! more terms than were supplied.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use super::matrix_market;
use super::A0Factor;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Cx, C_ZERO};
use crate::linearization::{LowRankTaylorProblem, TaylorProblem};

/// JSON manifest describing a [`GenericProblem`] on disk.
///
/// All matrix and vector files are Matrix Market; paths are resolved
/// relative to the manifest's directory.
#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    pub n: usize,
    pub rhs: String,
    pub coefficients: Vec<String>,
    #[serde(default)]
    pub lowrank: Option<ManifestLowRank>,
}

/// Low-rank tail section of a [`Manifest`].
#[derive(Debug, Clone, Deserialize)]
pub struct ManifestLowRank {
    /// Order after which coefficients are U F^(i)(0) V^T.
    pub s: usize,
    /// Path to U (n x p).
    pub u: String,
    /// Path to V (n x p).
    pub v: String,
    /// Paths to F^(i)(0) (p x p) for i = s+1, s+2, ...
    pub f_derivs: Vec<String>,
}

#[derive(Debug)]
struct LowRankTail {
    s: usize,
    p: usize,
    u: CsrMatrix,
    v: CsrMatrix,
    f_derivs: Vec<DMatrix<Cx>>,
}

/// Problem assembled from explicit coefficient matrices.
#[derive(Debug)]
pub struct GenericProblem {
    n: usize,
    coeffs: Vec<CsrMatrix>,
    rhs: DVector<Cx>,
    a0: A0Factor,
    tail: Option<LowRankTail>,
}

impl GenericProblem {
    /// Builds from CSR coefficients A_0, A_1, ..., A_d.
    pub fn from_coefficients(coeffs: Vec<CsrMatrix>, rhs: DVector<Cx>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::ProblemDefinition(
                "at least the order-0 coefficient is required".into(),
            ));
        }
        let n = coeffs[0].nrows();
        for (i, c) in coeffs.iter().enumerate() {
            if c.nrows() != c.ncols() {
                return Err(Error::ProblemDefinition(format!(
                    "coefficient {i} is {}x{}, not square",
                    c.nrows(),
                    c.ncols()
                )));
            }
            if c.nrows() != n {
                return Err(Error::DimensionMismatch {
                    context: "generic coefficient",
                    expected: n,
                    got: c.nrows(),
                });
            }
        }
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                context: "generic rhs",
                expected: n,
                got: rhs.len(),
            });
        }
        let a0 = A0Factor::factor(&coeffs[0])?;
        Ok(Self {
            n,
            coeffs,
            rhs,
            a0,
            tail: None,
        })
    }

    /// Convenience constructor from dense coefficients.
    pub fn from_dense_coefficients(coeffs: Vec<DMatrix<Cx>>, rhs: DVector<Cx>) -> Result<Self> {
        Self::from_coefficients(coeffs.iter().map(CsrMatrix::from_dense).collect(), rhs)
    }

    /// Attaches a low-rank tail: orders i > s act as U F^(i)(0) V^T, with
    /// F^(i)(0) taken from `f_derivs[i - s - 1]`.
    ///
    /// The polynomial part must then hold exactly the orders 0..=s.
    pub fn with_low_rank_tail(
        mut self,
        s: usize,
        u: CsrMatrix,
        v: CsrMatrix,
        f_derivs: Vec<DMatrix<Cx>>,
    ) -> Result<Self> {
        if s == 0 {
            return Err(Error::ProblemDefinition(
                "low-rank split order s must be at least 1".into(),
            ));
        }
        if self.coeffs.len() != s + 1 {
            return Err(Error::ProblemDefinition(format!(
                "low-rank tail with s = {s} requires exactly {} polynomial coefficients, got {}",
                s + 1,
                self.coeffs.len()
            )));
        }
        let p = u.ncols();
        if u.nrows() != self.n || v.nrows() != self.n || v.ncols() != p {
            return Err(Error::ProblemDefinition(format!(
                "low-rank factors must be {}x{p}: U is {}x{}, V is {}x{}",
                self.n,
                u.nrows(),
                u.ncols(),
                v.nrows(),
                v.ncols()
            )));
        }
        for (k, f) in f_derivs.iter().enumerate() {
            if f.nrows() != p || f.ncols() != p {
                return Err(Error::ProblemDefinition(format!(
                    "F derivative {} must be {p}x{p}, got {}x{}",
                    k + s + 1,
                    f.nrows(),
                    f.ncols()
                )));
            }
        }
        self.tail = Some(LowRankTail {
            s,
            p,
            u,
            v,
            f_derivs,
        });
        Ok(self)
    }

    /// Loads a problem from a JSON manifest referencing Matrix Market files.
    pub fn load(manifest_path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(manifest_path).map_err(|source| Error::Io {
            path: manifest_path.display().to_string(),
            source,
        })?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::Manifest {
                path: manifest_path.display().to_string(),
                message: e.to_string(),
            })?;
        let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
        let resolve = |p: &str| dir.join(p);

        let rhs = matrix_market::read_vector(&resolve(&manifest.rhs))?;
        let coeffs = manifest
            .coefficients
            .iter()
            .map(|p| matrix_market::read_matrix(&resolve(p)))
            .collect::<Result<Vec<_>>>()?;
        if rhs.len() != manifest.n || coeffs.iter().any(|c| c.nrows() != manifest.n) {
            return Err(Error::Manifest {
                path: manifest_path.display().to_string(),
                message: format!("file dimensions disagree with declared n = {}", manifest.n),
            });
        }

        let problem = Self::from_coefficients(coeffs, rhs)?;
        match manifest.lowrank {
            None => Ok(problem),
            Some(lr) => {
                let u = matrix_market::read_matrix(&resolve(&lr.u))?;
                let v = matrix_market::read_matrix(&resolve(&lr.v))?;
                let f_derivs = lr
                    .f_derivs
                    .iter()
                    .map(|p| Ok(matrix_market::read_matrix(&resolve(p))?.to_dense()))
                    .collect::<Result<Vec<_>>>()?;
                problem.with_low_rank_tail(lr.s, u, v, f_derivs)
            }
        }
    }

    /// Polynomial degree of the explicit coefficient list.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Highest derivative order this problem can supply.
    pub fn max_available_order(&self) -> usize {
        match &self.tail {
            None => self.degree(),
            Some(t) => t.s + t.f_derivs.len(),
        }
    }
}

impl TaylorProblem for GenericProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve_a0(&self, y: &DVector<Cx>) -> DVector<Cx> {
        self.a0.solve(y)
    }

    fn deriv_apply(&self, order: usize, y: &DVector<Cx>) -> Result<DVector<Cx>> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "generic deriv_apply",
                expected: self.n,
                got: y.len(),
            });
        }
        if order < self.coeffs.len() {
            return Ok(self.coeffs[order].mul_vec(y));
        }
        match &self.tail {
            // the coefficient list is the whole polynomial: higher
            // derivatives vanish identically
            None => Ok(DVector::from_element(self.n, C_ZERO)),
            Some(tail) => {
                let w = tail.v.tr_mul_vec(y);
                self.u_apply(order, &w)
            }
        }
    }

    fn eval_apply(&self, mu: Cx, y: &DVector<Cx>) -> DVector<Cx> {
        // exact evaluation of the finite representation
        let mut out = DVector::from_element(self.n, C_ZERO);
        let mut weight = Cx::new(1.0, 0.0); // mu^i / i!
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                weight *= mu / Cx::new(i as f64, 0.0);
            }
            out.axpy(weight, &c.mul_vec(y), Cx::new(1.0, 0.0));
        }
        if let Some(tail) = &self.tail {
            let w = tail.v.tr_mul_vec(y);
            let mut fsum = DVector::from_element(tail.p, C_ZERO);
            let mut weight = Cx::new(1.0, 0.0);
            for i in 1..=tail.s {
                weight *= mu / Cx::new(i as f64, 0.0);
            }
            for (k, f) in tail.f_derivs.iter().enumerate() {
                let i = tail.s + 1 + k;
                weight *= mu / Cx::new(i as f64, 0.0);
                fsum.axpy(weight, &(f * &w), Cx::new(1.0, 0.0));
            }
            out += tail.u.mul_vec(&fsum);
        }
        out
    }

    fn rhs(&self) -> &DVector<Cx> {
        &self.rhs
    }

    fn max_derivative_order(&self) -> Option<usize> {
        match &self.tail {
            None => Some(self.degree()),
            Some(_) => None,
        }
    }

    fn as_low_rank(&self) -> Option<&dyn LowRankTaylorProblem> {
        self.tail.as_ref().map(|_| self as &dyn LowRankTaylorProblem)
    }
}

impl LowRankTaylorProblem for GenericProblem {
    fn split_order(&self) -> usize {
        self.tail.as_ref().expect("low-rank tail").s
    }

    fn rank(&self) -> usize {
        self.tail.as_ref().expect("low-rank tail").p
    }

    fn u_apply(&self, order: usize, y: &DVector<Cx>) -> Result<DVector<Cx>> {
        let tail = self.tail.as_ref().expect("low-rank tail");
        if order <= tail.s {
            return Err(Error::OutOfRange(format!(
                "u_apply order {order} is within the polynomial part (s = {})",
                tail.s
            )));
        }
        let idx = order - tail.s - 1;
        let f = tail.f_derivs.get(idx).ok_or({
            Error::DerivativeOrderUnavailable {
                order,
                available: tail.s + tail.f_derivs.len(),
            }
        })?;
        Ok(tail.u.mul_vec(&(f * y)))
    }

    fn vt_apply(&self, y: &DVector<Cx>) -> DVector<Cx> {
        self.tail.as_ref().expect("low-rank tail").v.tr_mul_vec(y)
    }
}
