//! Integer normal forms and lattice computations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{is_zero_vec, IntMatrix, IntVector};

fn row_sub_mul(m: &mut IntMatrix, target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for j in 0..m.cols() {
        let v = &m[(target, j)] - q * &m[(source, j)];
        m[(target, j)] = v;
    }
}

fn row_add(m: &mut IntMatrix, target: usize, source: usize) {
    for j in 0..m.cols() {
        let v = &m[(target, j)] + &m[(source, j)];
        m[(target, j)] = v;
    }
}

fn row_negate(m: &mut IntMatrix, r: usize) {
    for x in m.row_mut(r) {
        *x = -&*x;
    }
}

fn col_sub_mul(m: &mut IntMatrix, target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for i in 0..m.rows() {
        let v = &m[(i, target)] - q * &m[(i, source)];
        m[(i, target)] = v;
    }
}

fn swap_cols(m: &mut IntMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows() {
        let tmp = m[(i, a)].clone();
        m[(i, a)] = m[(i, b)].clone();
        m[(i, b)] = tmp;
    }
}

/// Row-style Hermite normal form: returns `(h, u)` with `u` unimodular and `h = u * m`.
///
/// `h` is in row echelon form, pivots are positive, entries above a pivot lie in
/// `[0, pivot)` and zero rows sit at the bottom. Pivot rows are chosen by smallest
/// absolute value, ties broken by smallest row index.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = m.shape();
    let mut h = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut has_pivot = false;
        loop {
            let pivot = (r..rows)
                .filter(|&i| !h[(i, c)].is_zero())
                .min_by(|&a, &b| h[(a, c)].abs().cmp(&h[(b, c)].abs()).then(a.cmp(&b)));
            let Some(p) = pivot else { break };
            has_pivot = true;
            h.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut clean = true;
            for i in r + 1..rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = h[(i, c)].div_floor(&h[(r, c)]);
                row_sub_mul(&mut h, i, r, &q);
                row_sub_mul(&mut u, i, r, &q);
                if !h[(i, c)].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if !has_pivot {
            continue;
        }
        if h[(r, c)].is_negative() {
            row_negate(&mut h, r);
            row_negate(&mut u, r);
        }
        for i in 0..r {
            let q = h[(i, c)].div_floor(&h[(r, c)]);
            row_sub_mul(&mut h, i, r, &q);
            row_sub_mul(&mut u, i, r, &q);
        }
        r += 1;
    }
    (h, u)
}

/// Nonzero rows of the Hermite normal form: a canonical basis of the row lattice.
pub fn hnf_basis(m: &IntMatrix) -> IntMatrix {
    let (h, _) = hermite_normal_form(m);
    let keep: Vec<usize> = (0..h.rows()).filter(|&i| !is_zero_vec(h.row(i))).collect();
    h.select_rows(&keep)
}

/// Same as [`hnf_basis`] for a list of generators of length `dim`.
pub fn lattice_basis(dim: usize, generators: &[IntVector]) -> IntMatrix {
    hnf_basis(&IntMatrix::from_rows(dim, generators))
}

/// Whether two generator sets span the same sublattice of `Z^dim`.
pub fn same_lattice(dim: usize, a: &[IntVector], b: &[IntVector]) -> bool {
    lattice_basis(dim, a) == lattice_basis(dim, b)
}

/// Smith normal form: returns `(u, d, v)` with `u`, `v` unimodular, `d = u * m * v`
/// diagonal and `d[0][0] | d[1][1] | ...`, all nonnegative.
pub fn smith_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let (rows, cols) = m.shape();
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if d[(i, j)].is_zero() {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bi, bj)) => d[(i, j)].abs() < d[(bi, bj)].abs(),
                    };
                    if better {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return (u, d, v);
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            swap_cols(&mut d, t, pj);
            swap_cols(&mut v, t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = d[(i, t)].div_floor(&d[(t, t)]);
                row_sub_mul(&mut d, i, t, &q);
                row_sub_mul(&mut u, i, t, &q);
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = d[(t, j)].div_floor(&d[(t, t)]);
                col_sub_mul(&mut d, j, t, &q);
                col_sub_mul(&mut v, j, t, &q);
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !d[(i, j)].is_multiple_of(&d[(t, t)])));
            match offender {
                Some(i) => {
                    row_add(&mut d, t, i);
                    row_add(&mut u, t, i);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            row_negate(&mut d, t);
            row_negate(&mut u, t);
        }
    }
    (u, d, v)
}

/// Diagonal of the Smith normal form (length `min(rows, cols)`).
pub fn elementary_divisors(m: &IntMatrix) -> Vec<BigInt> {
    let (_, d, _) = smith_normal_form(m);
    (0..m.rows().min(m.cols())).map(|i| d[(i, i)].clone()).collect()
}

/// Lattice basis of `ker(m) ∩ Z^cols`, in Hermite normal form.
///
/// The kernel of an integer matrix intersected with the integer lattice is
/// saturated, so every returned vector is primitive.
pub fn integer_kernel_basis(m: &IntMatrix) -> Vec<IntVector> {
    let cols = m.cols();
    if m.rows() == 0 {
        return IntMatrix::identity(cols).to_rows();
    }
    let (h, u) = hermite_normal_form(&m.transpose());
    let kernel: Vec<IntVector> = (0..h.rows()).filter(|&i| is_zero_vec(h.row(i))).map(|i| u.row(i).to_vec()).collect();
    if kernel.is_empty() {
        return kernel;
    }
    lattice_basis(cols, &kernel).to_rows()
}

/// Some integral `x` with `m x = b`, if one exists.
pub fn solve_integral(m: &IntMatrix, b: &[BigInt]) -> Option<IntVector> {
    assert_eq!(m.rows(), b.len(), "solve_integral: right-hand side length mismatch");
    let (u, d, v) = smith_normal_form(m);
    let ub = u.mul_vec(b);
    let mut y = vec![BigInt::zero(); m.cols()];
    for (i, rhs) in ub.iter().enumerate() {
        let di = if i < m.cols() { d[(i, i)].clone() } else { BigInt::zero() };
        if di.is_zero() {
            if !rhs.is_zero() {
                return None;
            }
            continue;
        }
        let (q, r) = rhs.div_rem(&di);
        if !r.is_zero() {
            return None;
        }
        y[i] = q;
    }
    Some(v.mul_vec(&y))
}

/// Whether `u` is `m x` for some integral `x`.
pub fn in_lattice_image(u: &[BigInt], m: &IntMatrix) -> bool {
    if is_zero_vec(u) {
        return true;
    }
    solve_integral(m, u).is_some()
}

/// Saturation `span_Q(L) ∩ Z^dim` of the lattice generated by `generators`.
pub fn saturation(dim: usize, generators: &[IntVector]) -> Vec<IntVector> {
    if generators.is_empty() {
        return Vec::new();
    }
    let orth = integer_kernel_basis(&IntMatrix::from_rows(dim, generators));
    integer_kernel_basis(&IntMatrix::from_rows(dim, &orth))
}

/// Index of the lattice generated by `generators` inside its saturation.
pub fn saturation_index(dim: usize, generators: &[IntVector]) -> BigInt {
    let basis = lattice_basis(dim, generators);
    elementary_divisors(&basis).into_iter().filter(|x| !x.is_zero()).fold(BigInt::one(), |acc, x| acc * x)
}
