//! Strict feasibility of homogeneous linear systems in exact arithmetic.
//!
//! For `A x = 0, G x > 0` write `x = K y` with the columns of `K` spanning `ker A`,
//! and set `M = G K`. By Gordan's alternative exactly one of `M y > 0` and
//! `mu >= 0, mu != 0, M^T mu = 0` is solvable. The second system, normalized by
//! `sum mu = 1`, is decided by a phase-one simplex with Bland's rule over the
//! rationals. A feasible `mu` is a certificate (`G^T mu` lies in the row space of
//! `A`, which gives `lambda`); otherwise the optimal phase-one duals give `y`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::elim::{integral_kernel_span, solve};
use super::matrix::{to_rational_vec, QVector, RatMatrix, Rational};

/// Multipliers proving that `A x = 0, G x > 0` has no solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    /// One multiplier per equality row, any sign.
    #[serde(with = "crate::serial::rational_vec")]
    pub equality_multipliers: QVector,
    /// One multiplier per strict row, nonnegative and not all zero.
    #[serde(with = "crate::serial::rational_vec")]
    pub strict_multipliers: QVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeasibilityOutcome {
    /// A point satisfying every equation exactly and every strict row with value at least one.
    Feasible {
        witness: QVector,
    },
    Infeasible(FarkasCertificate),
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::Feasible { .. })
    }

    pub fn witness(&self) -> Option<&QVector> {
        match self {
            FeasibilityOutcome::Feasible { witness } => Some(witness),
            FeasibilityOutcome::Infeasible(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&FarkasCertificate> {
        match self {
            FeasibilityOutcome::Feasible { .. } => None,
            FeasibilityOutcome::Infeasible(c) => Some(c),
        }
    }

    /// Rechecks the witness or certificate by direct substitution.
    pub fn verify(&self, equalities: &RatMatrix, strict: &RatMatrix) -> bool {
        match self {
            FeasibilityOutcome::Feasible { witness } => verify_witness(equalities, strict, witness),
            FeasibilityOutcome::Infeasible(c) => c.verify(equalities, strict),
        }
    }
}

pub fn verify_witness(equalities: &RatMatrix, strict: &RatMatrix, x: &[Rational]) -> bool {
    if x.len() != equalities.cols() || x.len() != strict.cols() {
        return false;
    }
    equalities.mul_vec(x).iter().all(Zero::is_zero) && strict.mul_vec(x).iter().all(Signed::is_positive)
}

impl FarkasCertificate {
    pub fn verify(&self, equalities: &RatMatrix, strict: &RatMatrix) -> bool {
        if self.equality_multipliers.len() != equalities.rows() || self.strict_multipliers.len() != strict.rows() {
            return false;
        }
        if self.strict_multipliers.iter().any(Signed::is_negative) || self.strict_multipliers.iter().all(Zero::is_zero)
        {
            return false;
        }
        let stacked = equalities.vstack(strict);
        let mut y = self.equality_multipliers.clone();
        y.extend(self.strict_multipliers.iter().cloned());
        stacked.transpose().mul_vec(&y).iter().all(Zero::is_zero)
    }

    /// Rescales all multipliers by one positive factor so they are coprime integers.
    pub fn normalized(&self) -> Self {
        let all: Vec<&Rational> = self.equality_multipliers.iter().chain(&self.strict_multipliers).collect();
        let l = all.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let scaled: Vec<BigInt> = all.iter().map(|x| (*x * Rational::from_integer(l.clone())).to_integer()).collect();
        let g = scaled.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        let g = if g.is_zero() { BigInt::one() } else { g };
        let mut ints = scaled.into_iter().map(|x| Rational::from_integer(x / &g));
        let p = self.equality_multipliers.len();
        FarkasCertificate { equality_multipliers: ints.by_ref().take(p).collect(), strict_multipliers: ints.collect() }
    }
}

/// Decides `equalities · x = 0, strict · x > 0`.
///
/// Both matrices must have the same number of columns. A returned witness has
/// every strict row at least one; a returned certificate satisfies
/// [`FarkasCertificate::verify`] and is normalized to coprime integers.
pub fn strict_lp_feasibility(equalities: &RatMatrix, strict: &RatMatrix) -> FeasibilityOutcome {
    assert_eq!(equalities.cols(), strict.cols(), "strict_lp_feasibility: column mismatch");
    let n = equalities.cols();
    if strict.rows() == 0 {
        return FeasibilityOutcome::Feasible { witness: vec![Rational::zero(); n] };
    }
    let kernel: Vec<QVector> = if equalities.rows() == 0 {
        (0..n)
            .map(|i| {
                let mut e = vec![Rational::zero(); n];
                e[i] = Rational::one();
                e
            })
            .collect()
    } else {
        integral_kernel_span(equalities).iter().map(|v| to_rational_vec(v)).collect()
    };
    let r = kernel.len();
    let k = RatMatrix::from_rows(n, &kernel).transpose();
    let m = if r == 0 { RatMatrix::zeros(strict.rows(), 0) } else { strict.mul(&k) };
    let q = m.rows();
    // [M^T; 1^T] mu = [0; 1]
    let mut system = RatMatrix::zeros(r + 1, q);
    for i in 0..q {
        for j in 0..r {
            system[(j, i)] = m[(i, j)].clone();
        }
        system[(r, i)] = Rational::one();
    }
    let mut rhs = vec![Rational::zero(); r + 1];
    rhs[r] = Rational::one();
    let outcome = match PhaseOne::new(&system, &rhs).solve() {
        Ok(mu) => {
            let g_mu: QVector = strict.transpose().mul_vec(&mu).into_iter().map(|x| -x).collect();
            let lambda = if equalities.rows() == 0 {
                Vec::new()
            } else {
                solve(&equalities.transpose(), &g_mu).expect("G^T mu lies in the row space of A")
            };
            FeasibilityOutcome::Infeasible(
                FarkasCertificate { equality_multipliers: lambda, strict_multipliers: mu }.normalized(),
            )
        }
        Err(pi) => {
            let y: QVector = pi[..r].iter().map(|x| -x.clone()).collect();
            let x = k.mul_vec(&y);
            let values = strict.mul_vec(&x);
            let min = values.iter().min().expect("at least one strict row").clone();
            FeasibilityOutcome::Feasible { witness: x.into_iter().map(|v| v / &min).collect() }
        }
    };
    debug_assert!(outcome.verify(equalities, strict), "LP outcome failed self-check");
    outcome
}

/// Phase one for `E mu = b, mu >= 0` with `b >= 0`, one artificial per row.
struct PhaseOne {
    vars: usize,
    rows: usize,
    width: usize,
    tableau: Vec<Vec<Rational>>,
    reduced: Vec<Rational>,
    basis: Vec<usize>,
}

impl PhaseOne {
    fn new(e: &RatMatrix, b: &[Rational]) -> Self {
        let (rows, vars) = e.shape();
        let width = vars + rows;
        let mut tableau = Vec::with_capacity(rows);
        for i in 0..rows {
            let mut row = vec![Rational::zero(); width + 1];
            row[..vars].clone_from_slice(e.row(i));
            row[vars + i] = Rational::one();
            row[width] = b[i].clone();
            tableau.push(row);
        }
        let mut reduced = vec![Rational::zero(); width + 1];
        for j in 0..=width {
            let col_sum = tableau.iter().fold(Rational::zero(), |acc, r| acc + &r[j]);
            let cost = if (vars..width).contains(&j) { Rational::one() } else { Rational::zero() };
            reduced[j] = cost - col_sum;
        }
        PhaseOne { vars, rows, width, tableau, reduced, basis: (vars..width).collect() }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.tableau[r][c].recip();
        for x in self.tableau[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = self.tableau[r].clone();
        for (i, row) in self.tableau.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        let f = self.reduced[c].clone();
        if !f.is_zero() {
            for (x, y) in self.reduced.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// `Ok(mu)` when feasible, otherwise `Err(duals)` of the optimal phase-one basis.
    fn solve(mut self) -> Result<QVector, QVector> {
        let w = self.width;
        while let Some(enter) = (0..w).find(|&j| self.reduced[j].is_negative()) {
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows {
                let a = &self.tableau[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.tableau[i][w] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            // Phase one is bounded below by zero, so a ratio always exists.
            let (r, _) = leave.expect("phase-one simplex cannot be unbounded");
            self.pivot(r, enter);
        }
        let objective = self
            .basis
            .iter()
            .zip(&self.tableau)
            .filter(|(b, _)| **b >= self.vars)
            .fold(Rational::zero(), |acc, (_, row)| acc + &row[w]);
        if objective.is_zero() {
            let mut values = vec![Rational::zero(); w];
            for (b, row) in self.basis.iter().zip(&self.tableau) {
                values[*b] = row[w].clone();
            }
            values.truncate(self.vars);
            Ok(values)
        } else {
            Err((0..self.rows).map(|i| Rational::one() - &self.reduced[self.vars + i]).collect())
        }
    }
}
