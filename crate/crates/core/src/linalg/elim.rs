//! Gaussian elimination over the rationals.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::matrix::{primitive_integral, IntMatrix, IntVector, QVector, RatMatrix, Rational};

/// Reduced row echelon form together with the pivot column of each nonzero row.
/// Zero rows are dropped.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: RatMatrix,
    pub pivots: Vec<usize>,
}

pub fn rref(m: &RatMatrix) -> Rref {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        a.swap_rows(r, p);
        let inv = a[(r, c)].recip();
        for j in c..cols {
            let v = &a[(r, j)] * &inv;
            a[(r, j)] = v;
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..cols {
                let v = &a[(i, j)] - &f * &a[(r, j)];
                a[(i, j)] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    let keep: Vec<usize> = (0..pivots.len()).collect();
    Rref { matrix: a.select_rows(&keep), pivots }
}

pub fn rank(m: &RatMatrix) -> usize {
    rref(m).pivots.len()
}

pub fn int_rank(m: &IntMatrix) -> usize {
    rank(&m.to_rational())
}

/// Basis of the rational null space `{x : m x = 0}`, one vector per free column.
pub fn rational_kernel(m: &RatMatrix) -> Vec<QVector> {
    let cols = m.cols();
    let Rref { matrix, pivots } = rref(m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); cols];
            x[f] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                x[p] = -matrix[(r, f)].clone();
            }
            x
        })
        .collect()
}

/// Rational kernel basis rescaled to primitive integral vectors.
pub fn integral_kernel_span(m: &RatMatrix) -> Vec<IntVector> {
    rational_kernel(m).iter().map(|v| primitive_integral(v)).collect()
}

/// Basis of the row space, rescaled to primitive integral rows (RREF order).
pub fn row_space_basis(m: &RatMatrix) -> (Vec<IntVector>, Vec<usize>) {
    let Rref { matrix, pivots } = rref(m);
    let rows = matrix.row_iter().map(primitive_integral).collect();
    (rows, pivots)
}

/// Some rational solution of `m x = b`, if one exists.
pub fn solve(m: &RatMatrix, b: &[Rational]) -> Option<QVector> {
    assert_eq!(m.rows(), b.len(), "solve: right-hand side length mismatch");
    let cols = m.cols();
    let mut aug = RatMatrix::zeros(m.rows(), cols + 1);
    for i in 0..m.rows() {
        for j in 0..cols {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, cols)] = b[i].clone();
    }
    let Rref { matrix, pivots } = rref(&aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = matrix[(r, cols)].clone();
    }
    Some(x)
}

/// Whether `v` lies in the rational span of the rows of `m`.
pub fn in_row_span(m: &RatMatrix, v: &[Rational]) -> bool {
    if m.rows() == 0 {
        return v.iter().all(Zero::is_zero);
    }
    solve(&m.transpose(), v).is_some()
}

pub fn determinant(m: &IntMatrix) -> BigInt {
    assert_eq!(m.rows(), m.cols(), "determinant of a non-square matrix");
    let n = m.rows();
    let mut a = m.to_rational();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[(i, c)].is_zero()) else {
            return BigInt::zero();
        };
        if p != c {
            a.swap_rows(p, c);
            det = -det;
        }
        det *= a[(c, c)].clone();
        for i in c + 1..n {
            if a[(i, c)].is_zero() {
                continue;
            }
            let f = &a[(i, c)] / &a[(c, c)];
            for j in c..n {
                let v = &a[(i, j)] - &f * &a[(c, j)];
                a[(i, j)] = v;
            }
        }
    }
    det.to_integer()
}
