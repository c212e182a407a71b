//! Minimal compressed-sparse-row matrix over complex scalars.

use nalgebra::{DMatrix, DVector};

use super::{Cx, C_ZERO};
use crate::error::{Error, Result};

/// Compressed sparse row matrix with complex entries.
///
/// Supports exactly what the problem builders need: construction from
/// triplets or dense, matrix-vector products, transpose products, and
/// bandwidth inspection for the banded factorization path.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Cx>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets; duplicate entries are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Cx)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, Cx)>> = vec![Vec::new(); nrows];
        for (r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::OutOfRange(format!(
                    "triplet ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
            rows[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for &(c, v) in row.iter() {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    pub fn from_dense(m: &DMatrix<Cx>) -> Self {
        let mut triplets = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != C_ZERO {
                    triplets.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), triplets).expect("indices in range")
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, Cx::new(1.0, 0.0))))
            .expect("indices in range")
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, std::iter::empty()).expect("no triplets")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// y = self * x
    pub fn mul_vec(&self, x: &DVector<Cx>) -> DVector<Cx> {
        assert_eq!(x.len(), self.ncols, "csr matvec dimension");
        let mut y = DVector::from_element(self.nrows, C_ZERO);
        for r in 0..self.nrows {
            let mut acc = C_ZERO;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            y[r] = acc;
        }
        y
    }

    /// y = self^T * x (plain transpose, no conjugation)
    pub fn tr_mul_vec(&self, x: &DVector<Cx>) -> DVector<Cx> {
        assert_eq!(x.len(), self.nrows, "csr transpose matvec dimension");
        let mut y = DVector::from_element(self.ncols, C_ZERO);
        for r in 0..self.nrows {
            let xr = x[r];
            for k in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[k]] += self.values[k] * xr;
            }
        }
        y
    }

    /// self + other
    pub fn add(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch {
                context: "csr add",
                expected: self.nrows,
                got: other.nrows,
            });
        }
        CsrMatrix::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().chain(other.triplets()),
        )
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Cx)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> DMatrix<Cx> {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, C_ZERO);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// (lower, upper) bandwidths: max of i-j and j-i over stored entries.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0usize;
        let mut ku = 0usize;
        for (r, c, v) in self.triplets() {
            if v == C_ZERO {
                continue;
            }
            if r > c {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
        (kl, ku)
    }
}
