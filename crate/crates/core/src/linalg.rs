//! Exact linear algebra helpers: Gaussian elimination over the rationals and
//! column-style Hermite normal form over the integers with transform
//! tracking. Matrices here are small (at most precision × basis-dimension),
//! so the simple cubic algorithms are the right tool.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::Rational;

/// Outcome of an exact linear solve of `M x = b`.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    /// Full column rank and consistent: the unique solution.
    Unique(Vec<Rational>),
    /// Consistent but rank-deficient; a particular solution with free
    /// variables set to zero.
    Underdetermined(Vec<Rational>),
    Inconsistent,
}

/// Row-reduce the augmented system `[m | b]` and classify. `m` is row-major,
/// all rows of equal length.
#[allow(clippy::needless_range_loop)] // elimination mutates rows while reading the pivot row
pub fn solve(m: &[Vec<Rational>], b: &[Rational]) -> SolveOutcome {
    let rows = m.len();
    assert_eq!(rows, b.len());
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut aug: Vec<Vec<Rational>> = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !aug[i][c].is_zero()) else {
            continue;
        };
        aug.swap(r, p);
        let inv = aug[r][c].recip();
        for x in aug[r][c..].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !aug[i][c].is_zero() {
                let factor = aug[i][c].clone();
                for j in c..=cols {
                    let t = &aug[r][j] * &factor;
                    aug[i][j] -= t;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }

    // any leftover nonzero RHS in a zero row means inconsistency
    for row in aug.iter().skip(r) {
        if !row[cols].is_zero() {
            return SolveOutcome::Inconsistent;
        }
    }
    // rows below the pivot block may still be nonzero only in the RHS column,
    // which the loop above catches; pivot rows give the solution directly
    let mut x = vec![Rational::zero(); cols];
    for (row, &c) in pivot_cols.iter().enumerate() {
        x[c] = aug[row][cols].clone();
    }
    if pivot_cols.len() == cols {
        SolveOutcome::Unique(x)
    } else {
        SolveOutcome::Underdetermined(x)
    }
}

/// Rank of a rational matrix (row-major).
#[cfg_attr(not(test), allow(dead_code))] // exercised by the rank-guard tests
#[allow(clippy::needless_range_loop)]
pub fn rank(m: &[Vec<Rational>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in (r + 1)..rows {
            if !a[i][c].is_zero() {
                let factor = &a[i][c] / &a[r][c];
                for j in c..cols {
                    let t = &a[r][j] * &factor;
                    a[i][j] -= t;
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Integer matrix in column-major storage, the shape column operations want.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    /// `cols[j]` is column j, length `rows`.
    pub cols: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<BigInt>]) -> Self {
        let nrows = rows.len();
        assert!(nrows > 0, "matrix needs at least one row");
        let ncols = rows[0].len();
        assert!(ncols > 0, "matrix needs at least one column");
        let mut cols = vec![vec![BigInt::zero(); nrows]; ncols];
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols);
            for (j, v) in row.iter().enumerate() {
                cols[j][i] = v.clone();
            }
        }
        IntMatrix { rows: nrows, cols }
    }

    pub fn identity(n: usize) -> Self {
        let mut cols = vec![vec![BigInt::zero(); n]; n];
        for (j, col) in cols.iter_mut().enumerate() {
            col[j] = BigInt::one();
        }
        IntMatrix { rows: n, cols }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.cols[j][i]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|i| self.cols.iter().map(|c| c[i].clone()).collect())
            .collect()
    }

    #[cfg_attr(not(test), allow(dead_code))] // exercised by the transform tests
    pub fn mat_mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.ncols(), other.rows);
        let cols = other
            .cols
            .iter()
            .map(|oc| {
                let mut col = vec![BigInt::zero(); self.rows];
                for (k, factor) in oc.iter().enumerate() {
                    if factor.is_zero() {
                        continue;
                    }
                    for (i, v) in self.cols[k].iter().enumerate() {
                        col[i] += v * factor;
                    }
                }
                col
            })
            .collect();
        IntMatrix {
            rows: self.rows,
            cols,
        }
    }
}

/// Column Hermite normal form with both transforms: returns `(h, u, v)` with
/// `h = a · u`, `u` unimodular, `v = u⁻¹`.
///
/// `h` is in lower-triangular column Hermite form: pivot rows strictly
/// increase across the nonzero columns, pivots are positive, entries of
/// earlier columns in a pivot row are reduced into `[0, pivot)`, and zero
/// columns are collected on the right.
pub fn hnf_with_inverse(a: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let m = a.ncols();
    let mut h = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(m);

    // column op c_j -= q * c_p on h and u; mirrored row op on v keeps v = u⁻¹
    let sub_col = |h: &mut IntMatrix,
                   u: &mut IntMatrix,
                   v: &mut IntMatrix,
                   j: usize,
                   p: usize,
                   q: &BigInt| {
        if q.is_zero() {
            return;
        }
        for i in 0..h.rows {
            let t = &h.cols[p][i] * q;
            h.cols[j][i] -= t;
        }
        for i in 0..m {
            let t = &u.cols[p][i] * q;
            u.cols[j][i] -= t;
        }
        for c in 0..m {
            let t = &v.cols[c][j] * q;
            v.cols[c][p] += t;
        }
    };

    let mut pivot = 0usize;
    for row in 0..h.rows {
        if pivot == m {
            break;
        }
        while let Some(jmin) = (pivot..m)
            .filter(|&j| !h.cols[j][row].is_zero())
            .min_by_key(|&j| h.cols[j][row].abs())
        {
            if jmin != pivot {
                h.cols.swap(pivot, jmin);
                u.cols.swap(pivot, jmin);
                for c in 0..m {
                    v.cols[c].swap(pivot, jmin);
                }
            }
            let mut cleared = true;
            for j in (pivot + 1)..m {
                if !h.cols[j][row].is_zero() {
                    let q = &h.cols[j][row] / &h.cols[pivot][row];
                    sub_col(&mut h, &mut u, &mut v, j, pivot, &q);
                    if !h.cols[j][row].is_zero() {
                        cleared = false;
                    }
                }
            }
            if cleared {
                if h.cols[pivot][row].is_negative() {
                    for x in h.cols[pivot].iter_mut() {
                        *x = -x.clone();
                    }
                    for x in u.cols[pivot].iter_mut() {
                        *x = -x.clone();
                    }
                    for c in 0..m {
                        v.cols[c][pivot] = -v.cols[c][pivot].clone();
                    }
                }
                // reduce this row's entries in earlier columns into [0, pivot)
                for i in 0..pivot {
                    let q = h.cols[i][row].div_floor(&h.cols[pivot][row]);
                    sub_col(&mut h, &mut u, &mut v, i, pivot, &q);
                }
                pivot += 1;
                break;
            }
        }
    }
    (h, u, v)
}

/// Number of nonzero columns of a column-HNF matrix (they come first).
pub fn hnf_rank(h: &IntMatrix) -> usize {
    h.cols
        .iter()
        .position(|c| c.iter().all(Zero::is_zero))
        .unwrap_or(h.ncols())
}
