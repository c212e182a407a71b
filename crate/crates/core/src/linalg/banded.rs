//! Banded LU factorization with partial pivoting.
//!
//! Classic band-storage elimination (LAPACK gbtrf layout): a matrix with
//! lower bandwidth `kl` and upper bandwidth `ku` is factored in place with
//! `kl` extra superdiagonals for pivoting fill. This is the large-n
//! factorization path for the structured problems; cost is O(n kl (kl+ku)).

use nalgebra::DVector;

use super::{CsrMatrix, Cx, C_ZERO};
use crate::error::{Error, Result};

/// Band-stored complex matrix: entry (i, j) kept when -ku <= i-j <= kl.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column-major band storage with ldab = 2*kl + ku + 1 rows; entry
    /// (i, j) lives at row kl + ku + i - j of column j. The top kl rows
    /// are workspace for pivoting fill.
    data: Vec<Cx>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            data: vec![C_ZERO; ldab * n],
        }
    }

    pub fn from_csr(m: &CsrMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                context: "banded from csr",
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let (kl, ku) = m.bandwidths();
        let mut b = Self::zeros(m.nrows(), kl, ku);
        for (r, c, v) in m.triplets() {
            *b.at_mut(r, c) += v;
        }
        Ok(b)
    }

    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        // the upper band widens to ku + kl during pivoted elimination
        debug_assert!(
            i + self.ku + self.kl >= j && j + self.kl >= i,
            "outside band"
        );
        self.kl + self.ku + i - j + j * self.ldab()
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Cx {
        let k = self.idx(i, j);
        &mut self.data[k]
    }

    pub fn at(&self, i: usize, j: usize) -> Cx {
        if i + self.ku + self.kl < j || j + self.kl < i {
            return C_ZERO;
        }
        self.data[self.idx(i, j)]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// LU factorization of a banded matrix with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandedLu {
    mat: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn factor(mut a: BandedMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let ku_eff = a.ku + a.kl; // fill widens the upper band
        let mut pivots = vec![0usize; n];

        #[allow(clippy::needless_range_loop)]
        for j in 0..n {
            // pivot: largest magnitude in column j, rows j..=j+kl
            let i_max = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = a.at(j, j).norm();
            for i in (j + 1)..=i_max {
                let v = a.at(i, j).norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[j] = p;
            if best == 0.0 {
                return Err(Error::SingularMatrix(format!(
                    "banded LU: zero pivot at column {j}"
                )));
            }
            if p != j {
                let c_max = (j + ku_eff).min(n - 1);
                for c in j..=c_max {
                    let x = a.at(j, c);
                    let y = a.at(p, c);
                    *a.at_mut(j, c) = y;
                    *a.at_mut(p, c) = x;
                }
            }
            let piv = a.at(j, j);
            for i in (j + 1)..=i_max {
                let l = a.at(i, j) / piv;
                *a.at_mut(i, j) = l;
                if l != C_ZERO {
                    let c_max = (j + ku_eff).min(n - 1);
                    for c in (j + 1)..=c_max {
                        let ajc = a.at(j, c);
                        if ajc != C_ZERO {
                            *a.at_mut(i, c) -= l * ajc;
                        }
                    }
                }
            }
        }
        Ok(Self { mat: a, pivots })
    }

    pub fn solve(&self, b: &DVector<Cx>) -> DVector<Cx> {
        let n = self.mat.n;
        assert_eq!(b.len(), n, "banded solve dimension");
        let kl = self.mat.kl;
        let ku_eff = self.mat.ku + self.mat.kl;
        let mut x = b.clone();

        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                x.swap_rows(j, p);
            }
            let xj = x[j];
            if xj != C_ZERO {
                let i_max = (j + kl).min(n - 1);
                for i in (j + 1)..=i_max {
                    x[i] -= self.mat.at(i, j) * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let xj = x[j] / self.mat.at(j, j);
            x[j] = xj;
            if xj != C_ZERO {
                let i_min = j.saturating_sub(ku_eff);
                for i in i_min..j {
                    x[i] -= self.mat.at(i, j) * xj;
                }
            }
        }
        x
    }
}
