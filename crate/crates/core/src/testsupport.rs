//! Independent oracles for the test suites, compiled only with the
//! `testsupport` feature. Everything here deliberately avoids the library's
//! decision paths: the Hermite form is a fresh textbook column reduction,
//! witness search is exhaustive enumeration, kernel functionals come from
//! plain rational elimination.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{rat, Rational};
use crate::divcong::InhomogeneousForm;
use crate::modforms;
use crate::qseries::QSeries;

/// Small deterministic xorshift so sweeps are reproducible.
pub struct Rng(pub u64);

impl Rng {
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as i64
    }
}

/// Textbook column reduction to Hermite form, written independently of the
/// library: walk the rows, repeatedly subtract the smaller column from the
/// larger until one nonzero entry remains, then normalize. Returns only H.
#[allow(clippy::needless_range_loop)] // index loops mutate while reading a pivot row
pub fn naive_column_hnf(mat: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = mat.len();
    let m = mat[0].len();
    let mut cols: Vec<Vec<BigInt>> = (0..m)
        .map(|j| (0..n).map(|i| mat[i][j].clone()).collect())
        .collect();
    let mut next_pivot = 0;
    for row in 0..n {
        if next_pivot == m {
            break;
        }
        loop {
            let mut nz: Vec<usize> = (next_pivot..m)
                .filter(|&j| !cols[j][row].is_zero())
                .collect();
            if nz.is_empty() {
                break;
            }
            if nz.len() == 1 {
                let j = nz[0];
                cols.swap(next_pivot, j);
                if cols[next_pivot][row].sign() == Sign::Minus {
                    for x in cols[next_pivot].iter_mut() {
                        *x = -x.clone();
                    }
                }
                for i in 0..next_pivot {
                    let q = cols[i][row].div_floor(&cols[next_pivot][row]);
                    if !q.is_zero() {
                        for t in 0..n {
                            let s = &cols[next_pivot][t] * &q;
                            cols[i][t] -= s;
                        }
                    }
                }
                next_pivot += 1;
                break;
            }
            nz.sort_by_key(|&j| cols[j][row].abs());
            let (ja, jb) = (nz[0], nz[1]);
            let q = &cols[jb][row] / &cols[ja][row];
            for t in 0..n {
                let s = &cols[ja][t] * &q;
                cols[jb][t] -= s;
            }
        }
    }
    (0..n)
        .map(|i| (0..m).map(|j| cols[j][i].clone()).collect())
        .collect()
}

/// Exact determinant via rational Gaussian elimination.
#[allow(clippy::needless_range_loop)]
pub fn det_rational(m: &[Vec<BigInt>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| Rational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].clone().recip();
        for i in (c + 1)..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &a[c][j] * &f;
                a[i][j] -= t;
            }
        }
    }
    det
}

/// Solve `H x = b` over Z by forward substitution on a column-HNF matrix.
pub fn hnf_solve(h: &[Vec<BigInt>], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let n = h.len();
    let m = h[0].len();
    let mut x = vec![BigInt::zero(); m];
    let mut residual: Vec<BigInt> = b.to_vec();
    for j in 0..m {
        let Some(pivot_row) = (0..n).find(|&i| !h[i][j].is_zero()) else {
            break; // zero columns only from here on
        };
        let (q, r) = residual[pivot_row].div_rem(&h[pivot_row][j]);
        if !r.is_zero() {
            return None;
        }
        for i in 0..n {
            let t = &h[i][j] * &q;
            residual[i] -= t;
        }
        x[j] = q;
    }
    if residual.iter().all(Zero::is_zero) {
        Some(x)
    } else {
        None
    }
}

/// Rank of a rational matrix by fresh forward elimination.
#[allow(clippy::needless_range_loop)]
pub fn rational_rank(m: &[Vec<Rational>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let rows = m.len();
    let cols = m[0].len();
    let mut a = m.to_vec();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in (r + 1)..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &a[r][c];
            for j in c..cols {
                let t = &a[r][j] * &f;
                a[i][j] -= t;
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Denominator bound of the brute-force witness grid.
pub const BRUTE_DENOMINATOR: i64 = 24;

/// Exhaustive search for adjustment witnesses with coordinates in
/// (1/24)·Z mod 1. Only y mod 1 matters because the adjustment columns
/// have integer expansions.
pub fn brute_force_in_dbar(f: &InhomogeneousForm, k: u32, prec: usize) -> bool {
    let columns: Vec<QSeries> = {
        let mut c = modforms::expand_basis(k, prec);
        c.push(QSeries::one(prec));
        c
    };
    let m = columns.len();
    let v = f.expansion(prec);
    let ring = f.ring();

    let total = (BRUTE_DENOMINATOR as u64).pow(m as u32);
    'candidates: for idx in 0..total {
        let mut rem = idx;
        let mut candidate = Vec::with_capacity(m);
        for _ in 0..m {
            candidate.push(rat(
                (rem % BRUTE_DENOMINATOR as u64) as i64,
                BRUTE_DENOMINATOR,
            ));
            rem /= BRUTE_DENOMINATOR as u64;
        }
        for i in 0..prec {
            let mut c = v.coeff(i).clone();
            for (y, col) in candidate.iter().zip(&columns) {
                c -= y * col.coeff(i);
            }
            if !ring.strip_denominator(c.denom()).is_one() {
                continue 'candidates;
            }
        }
        return true;
    }
    false
}

/// One integer left-kernel functional of the adjustment columns at
/// filtration `k`, found by rational elimination. Pairing a form's
/// expansion non-integrally against it certifies a negative verdict.
#[allow(clippy::needless_range_loop)]
pub fn kernel_functional(k: u32, prec: usize) -> Vec<BigInt> {
    let mut columns = modforms::expand_basis(k, prec);
    columns.push(QSeries::one(prec));
    let m = columns.len();
    // rows of the system: columns^T · phi = 0, unknowns phi_0..phi_{prec-1}
    let mut a: Vec<Vec<Rational>> = (0..m)
        .map(|j| (0..prec).map(|i| columns[j].coeff(i).clone()).collect())
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..prec {
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].clone().recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..prec {
                    let t = &a[r][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m {
            break;
        }
    }
    let free = (0..prec)
        .find(|c| !pivots.contains(c))
        .expect("kernel is nontrivial");
    let mut phi = vec![Rational::zero(); prec];
    phi[free] = Rational::one();
    for (row, &c) in pivots.iter().enumerate() {
        phi[c] = -a[row][free].clone();
    }
    let mut lcm = BigInt::one();
    for x in &phi {
        lcm = lcm.lcm(x.denom());
    }
    let scale = Rational::from_integer(lcm);
    phi.iter()
        .map(|x| {
            let y = x * &scale;
            assert!(y.denom().is_one());
            y.numer().clone()
        })
        .collect()
}
