//! k-divisoriality through monomials on the Cox lift.
//!
//! For a subset of maximal cones `σ_1, ..., σ_s` we look for exponent vectors
//! `u^(i)` with `u^(i)_j = 0` on the rays of `σ_i`, `u^(i)_j > 0` elsewhere,
//! `u^(i)` orthogonal to `ker Q1`, and `u^(i) - u^(1)` orthogonal to `ker Q`.
//! Feasible systems give monomial witnesses (scaled so the weight differences lie
//! in the image of `Q^T` exactly); infeasible ones give Farkas certificates.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::fan::Fan;
use crate::linalg::{
    clear_denominators, dot, elementary_divisors, gcd_of, in_lattice_image, rref, solve_integral,
    strict_lp_feasibility, FarkasCertificate, FeasibilityOutcome, IntMatrix, IntVector, RatMatrix, Rational,
};
use crate::quotient::{cox_lift, for_each_subset, kajiwara_presentation, CoxLift, KajiwaraPresentation, QuotientError};

/// Everything the subset systems need: the fan, its Cox lift and its Kajiwara map.
#[derive(Clone, Debug)]
pub struct KDivInstance {
    pub fan: Fan,
    pub k: usize,
    pub cox: CoxLift,
    pub kajiwara: KajiwaraPresentation,
}

impl KDivInstance {
    pub fn new(fan: &Fan, k: usize) -> Result<Self, QuotientError> {
        let cox = cox_lift(fan)?;
        let kajiwara = kajiwara_presentation(fan)?;
        Ok(KDivInstance { fan: fan.clone(), k, cox, kajiwara })
    }

    pub fn ray_count(&self) -> usize {
        self.fan.ray_count()
    }

    /// Size of the subsets that decide `k`-divisoriality.
    pub fn subset_size(&self) -> usize {
        self.k.min(self.fan.cone_count())
    }

    /// All subsets of maximal cones of size [`Self::subset_size`], lexicographic.
    pub fn subsets(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for_each_subset(self.fan.cone_count(), self.subset_size(), &mut |s| out.push(s.to_vec()));
        out
    }

    /// `d × n` matrix `Q^T`; its integral image holds the exponent differences of equal weight.
    fn q_transpose(&self) -> IntMatrix {
        self.cox.q.matrix.transpose()
    }

    /// Builds `(equalities, strict)` for a subset. Variables are `u^(1), ..., u^(s)`.
    pub fn system(&self, subset: &[usize]) -> (RatMatrix, RatMatrix) {
        let d = self.ray_count();
        let s = subset.len();
        let vars = d * s;
        let mut eq: Vec<IntVector> = Vec::new();
        let mut strict: Vec<IntVector> = Vec::new();
        let unit = |i: usize, j: usize| {
            let mut row = vec![BigInt::zero(); vars];
            row[i * d + j] = BigInt::one();
            row
        };
        for (i, &c) in subset.iter().enumerate() {
            let cone = &self.fan.max_cones()[c];
            for j in 0..d {
                if cone.contains(&j) {
                    eq.push(unit(i, j));
                } else {
                    strict.push(unit(i, j));
                }
            }
        }
        for (i, _) in subset.iter().enumerate() {
            for w in &self.kajiwara.kernel_basis {
                let mut row = vec![BigInt::zero(); vars];
                row[i * d..(i + 1) * d].clone_from_slice(w);
                eq.push(row);
            }
        }
        for i in 1..s {
            for z in &self.cox.kernel_basis {
                let mut row = vec![BigInt::zero(); vars];
                row[i * d..(i + 1) * d].clone_from_slice(z);
                for (x, zj) in row[..d].iter_mut().zip(z) {
                    *x = -zj;
                }
                eq.push(row);
            }
        }
        let to_mat = |rows: &[IntVector]| {
            if rows.is_empty() {
                RatMatrix::zeros(0, vars)
            } else {
                IntMatrix::from_rows(vars, rows).to_rational()
            }
        };
        (to_mat(&eq), to_mat(&strict))
    }

    /// Checks a witness directly: zero pattern, positivity, `ker Q1` orthogonality and
    /// exact membership of the differences in the image of `Q^T`.
    pub fn verify_witness(&self, subset: &[usize], w: &MonomialWitness) -> bool {
        let d = self.ray_count();
        if w.exponents.len() != subset.len() {
            return false;
        }
        let qt = self.q_transpose();
        subset.iter().zip(&w.exponents).all(|(&c, u)| {
            let cone = &self.fan.max_cones()[c];
            u.len() == d
                && (0..d).all(|j| if cone.contains(&j) { u[j].is_zero() } else { u[j].is_positive() })
                && self.kajiwara.kernel_basis.iter().all(|k| dot(k, u).is_zero())
                && {
                    let diff: IntVector = u.iter().zip(&w.exponents[0]).map(|(a, b)| a - b).collect();
                    in_lattice_image(&diff, &qt)
                }
        })
    }

    pub fn verify_certificate(&self, subset: &[usize], c: &InfeasibilityCertificate) -> bool {
        let (eq, strict) = self.system(subset);
        c.farkas.verify(&eq, &strict)
    }
}

/// One exponent vector per selected cone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialWitness {
    #[serde(with = "crate::serial::int_vecs")]
    pub exponents: Vec<IntVector>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfeasibilityCertificate {
    pub farkas: FarkasCertificate,
    /// The derived relation, e.g. `2a1 + a9 = -3b4 - 2b8`: the certificate's positive
    /// combination, reduced modulo the invariance equations when that keeps it
    /// manifestly positive.
    pub relation: String,
    /// Coefficients of that combination, one row per selected cone.
    pub relation_coefficients: Vec<Vec<Rational>>,
}

impl InfeasibilityCertificate {
    /// Equality multipliers followed by strict multipliers.
    pub fn multipliers(&self) -> Vec<Rational> {
        self.farkas.equality_multipliers.iter().chain(&self.farkas.strict_multipliers).cloned().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubsetOutcome {
    Feasible(MonomialWitness),
    Infeasible(InfeasibilityCertificate),
}

impl SubsetOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SubsetOutcome::Feasible(_))
    }
}

/// Letter naming the exponents of the `i`-th selected monomial: `a`, `b`, ..., `z`, `a'`, ...
pub fn exponent_letter(i: usize) -> String {
    let base = (b'a' + (i % 26) as u8) as char;
    format!("{base}{}", "'".repeat(i / 26))
}

pub fn subset_feasibility(inst: &KDivInstance, subset: &[usize]) -> SubsetOutcome {
    let (eq, strict) = inst.system(subset);
    match strict_lp_feasibility(&eq, &strict) {
        FeasibilityOutcome::Feasible { witness } => SubsetOutcome::Feasible(integral_witness(inst, subset, &witness)),
        FeasibilityOutcome::Infeasible(farkas) => {
            let coeffs = relation_coefficients(inst, subset, &farkas);
            let reduced = reduce_modulo_invariance(inst, subset, &coeffs);
            let manifest =
                reduced.iter().flatten().all(|c| !c.is_negative()) && reduced.iter().flatten().any(|c| !c.is_zero());
            let relation = if manifest { format_relation(&coprime_rows(&reduced)) } else { format_relation(&coeffs) };
            SubsetOutcome::Infeasible(InfeasibilityCertificate { farkas, relation, relation_coefficients: coeffs })
        }
    }
}

/// Strict multipliers laid out per selected cone and ray; each row of the result is
/// the coefficient vector of one monomial's exponents.
fn relation_coefficients(inst: &KDivInstance, subset: &[usize], farkas: &FarkasCertificate) -> Vec<Vec<Rational>> {
    let d = inst.ray_count();
    let mut out = vec![vec![Rational::zero(); d]; subset.len()];
    let mut mu = farkas.strict_multipliers.iter();
    for (i, &c) in subset.iter().enumerate() {
        let cone = &inst.fan.max_cones()[c];
        for j in 0..d {
            if !cone.contains(&j) {
                out[i][j] = mu.next().expect("one multiplier per strict row").clone();
            }
        }
    }
    out
}

/// Rescales all rows by one positive factor so the entries are coprime integers.
pub fn coprime_rows(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let flat: Vec<Rational> = rows.iter().flatten().cloned().collect();
    let (ints, _) = clear_denominators(&flat);
    let g = gcd_of(&ints);
    if g.is_zero() {
        return rows.to_vec();
    }
    let mut it = ints.into_iter().map(|x| Rational::from_integer(x / &g));
    rows.iter().map(|r| it.by_ref().take(r.len()).collect()).collect()
}

fn term(coef: &Rational, name: &str) -> String {
    if coef.is_one() {
        name.to_string()
    } else {
        format!("{coef}{name}")
    }
}

/// `sum over the first monomial = -(sum over the others)`, or `... = 0` for one monomial.
pub fn format_relation(coeffs: &[Vec<Rational>]) -> String {
    let side = |rows: &[(usize, &Vec<Rational>)], negate: bool| {
        let mut s = String::new();
        for (i, row) in rows {
            for (j, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let name = format!("{}{}", exponent_letter(*i), j + 1);
                let c = if negate { -c.clone() } else { c.clone() };
                if s.is_empty() {
                    if c.is_negative() {
                        s.push('-');
                    }
                } else if c.is_negative() {
                    s.push_str(" - ");
                } else {
                    s.push_str(" + ");
                }
                s.push_str(&term(&c.abs(), &name));
            }
        }
        if s.is_empty() {
            "0".to_string()
        } else {
            s
        }
    };
    let rows: Vec<(usize, &Vec<Rational>)> = coeffs.iter().enumerate().collect();
    if rows.len() <= 1 {
        return format!("{} = 0", side(&rows, false));
    }
    let lhs = side(&rows[..1], false);
    if lhs == "0" {
        return format!("{} = 0", side(&rows[1..], false));
    }
    format!("{lhs} = {}", side(&rows[1..], true))
}

/// Eliminates, within each monomial, the exponents that the `ker Q1` equations express
/// through lower-indexed ones, and returns the reduced coefficient rows.
pub fn reduce_modulo_invariance(inst: &KDivInstance, subset: &[usize], coeffs: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let d = inst.ray_count();
    coeffs
        .iter()
        .zip(subset)
        .map(|(row, &c)| {
            let cone = &inst.fan.max_cones()[c];
            let free: Vec<usize> = (0..d).filter(|j| !cone.contains(j)).rev().collect();
            if inst.kajiwara.kernel_basis.is_empty() || free.is_empty() {
                return row.clone();
            }
            // Restrict each invariance equation to the free exponents, highest index first,
            // so that row reduction pivots on (and eliminates) the highest-index exponents.
            let eqs: Vec<Vec<Rational>> = inst
                .kajiwara
                .kernel_basis
                .iter()
                .map(|w| free.iter().map(|&j| Rational::from_integer(w[j].clone())).collect())
                .collect();
            let r = rref(&RatMatrix::from_rows(free.len(), &eqs));
            let mut v: Vec<Rational> = free.iter().map(|&j| row[j].clone()).collect();
            for (k, &p) in r.pivots.iter().enumerate() {
                let f = v[p].clone();
                if !f.is_zero() {
                    for (x, y) in v.iter_mut().zip(r.matrix.row(k)) {
                        *x -= &f * y;
                    }
                }
            }
            let mut out = vec![Rational::zero(); d];
            for (x, &j) in v.into_iter().zip(&free) {
                out[j] = x;
            }
            out
        })
        .collect()
}

/// Scales a rational solution to integers with the weight differences in the image of
/// `Q^T` and each exponent vector in the row lattice of `Q1`, then divides by the
/// largest common factor that keeps both lattice conditions.
fn integral_witness(inst: &KDivInstance, subset: &[usize], x: &[Rational]) -> MonomialWitness {
    let d = inst.ray_count();
    let (ints, _) = clear_denominators(x);
    let exponent = |m: &IntMatrix| elementary_divisors(m).into_iter().rfind(|e| !e.is_zero());
    let qt = inst.q_transpose();
    let q1t = inst.kajiwara.q1.matrix.transpose();
    let mut factor = BigInt::one();
    for m in [&qt, &q1t] {
        if let Some(e) = exponent(m) {
            factor = factor.lcm(&e);
        }
    }
    let mut ints: IntVector = ints.into_iter().map(|v| v * &factor).collect();
    let split =
        |v: &IntVector| -> Vec<IntVector> { (0..subset.len()).map(|i| v[i * d..(i + 1) * d].to_vec()).collect() };
    let admissible = |v: &IntVector| {
        let us = split(v);
        us.iter().all(|u| in_lattice_image(u, &q1t))
            && us.iter().all(|u| {
                let diff: IntVector = u.iter().zip(&us[0]).map(|(a, b)| a - b).collect();
                in_lattice_image(&diff, &qt)
            })
    };
    let g = gcd_of(&ints);
    if let Some(g) = g.to_u64() {
        if g > 1 && g <= 1 << 40 {
            for t in divisors_descending(g) {
                let bt = BigInt::from(t);
                let cand: IntVector = ints.iter().map(|v| v / &bt).collect();
                if admissible(&cand) {
                    ints = cand;
                    break;
                }
            }
        }
    }
    let w = MonomialWitness { exponents: split(&ints) };
    debug_assert!(inst.verify_witness(subset, &w));
    w
}

fn divisors_descending(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            small.push(i);
            if i * i != n {
                large.push(n / i);
            }
        }
        i += 1;
    }
    large.into_iter().chain(small.into_iter().rev()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetStatus {
    Feasible,
    Infeasible,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateEntry {
    #[serde(with = "crate::serial::rational_vec")]
    pub multipliers: Vec<Rational>,
    pub relation: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsetEntry {
    /// 0-based maximal cone indices.
    pub cones: Vec<usize>,
    pub status: SubsetStatus,
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_int_vecs")]
    pub witness: Option<Vec<IntVector>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateEntry>,
    #[serde(skip)]
    pub outcome: SubsetOutcome,
}

mod opt_int_vecs {
    use super::IntVector;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &Option<Vec<IntVector>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => crate::serial::int_vecs::serialize(v, s),
            None => s.serialize_none(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KDivReport {
    pub k: usize,
    /// Whether every tested subset admits monomials.
    pub verdict: bool,
    /// Set when the quotient presentation does not exist; no subsets are tested then.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub presentation_error: Option<String>,
    /// When false, orthogonality to `ker Q1` is weaker than exact invariance.
    pub q1_row_space_saturated: bool,
    pub entries: Vec<SubsetEntry>,
}

impl KDivReport {
    pub fn failing(&self) -> impl Iterator<Item = &SubsetEntry> {
        self.entries.iter().filter(|e| e.status == SubsetStatus::Infeasible)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Rechecks every witness and certificate without the LP solver.
    pub fn verify(&self, inst: &KDivInstance) -> bool {
        self.entries.iter().all(|e| match &e.outcome {
            SubsetOutcome::Feasible(w) => inst.verify_witness(&e.cones, w),
            SubsetOutcome::Infeasible(c) => inst.verify_certificate(&e.cones, c),
        })
    }
}

fn entry(inst: &KDivInstance, subset: Vec<usize>) -> SubsetEntry {
    let outcome = subset_feasibility(inst, &subset);
    match &outcome {
        SubsetOutcome::Feasible(w) => SubsetEntry {
            cones: subset,
            status: SubsetStatus::Feasible,
            witness: Some(w.exponents.clone()),
            certificate: None,
            outcome,
        },
        SubsetOutcome::Infeasible(c) => SubsetEntry {
            cones: subset,
            status: SubsetStatus::Infeasible,
            witness: None,
            certificate: Some(CertificateEntry { multipliers: c.multipliers(), relation: c.relation.clone() }),
            outcome,
        },
    }
}

/// Runs every subset of the instance, in parallel, sorted by subset.
pub fn run_instance(inst: &KDivInstance) -> KDivReport {
    let mut entries: Vec<SubsetEntry> = inst.subsets().into_par_iter().map(|s| entry(inst, s)).collect();
    entries.sort_by(|a, b| a.cones.cmp(&b.cones));
    KDivReport {
        k: inst.k,
        verdict: entries.iter().all(|e| e.status == SubsetStatus::Feasible),
        presentation_error: None,
        q1_row_space_saturated: inst.kajiwara.row_space_saturated,
        entries,
    }
}

/// Decides `k`-divisoriality. Fans without a quotient presentation are reported as
/// not divisorial without running any system; degenerate fans are an error.
pub fn k_divisoriality(fan: &Fan, k: usize) -> Result<KDivReport, QuotientError> {
    match KDivInstance::new(fan, k.max(1)) {
        Ok(inst) => {
            let mut r = run_instance(&inst);
            r.k = k;
            Ok(r)
        }
        Err(e @ (QuotientError::NotDivisorial(_) | QuotientError::NoCartierDivisors)) => Ok(KDivReport {
            k,
            verdict: false,
            presentation_error: Some(e.to_string()),
            q1_row_space_saturated: true,
            entries: Vec::new(),
        }),
        Err(e) => Err(e),
    }
}

/// Quasiprojective iff `k`-divisorial for `k` the number of maximal cones.
pub fn quasiprojectivity_via_corollary(fan: &Fan) -> Result<bool, QuotientError> {
    Ok(k_divisoriality(fan, fan.cone_count())?.verdict)
}

/// `u ↦ sum u_j D_j`, e.g. `2D1 + D7`.
pub fn divisor_string(u: &[BigInt]) -> String {
    let mut s = String::new();
    for (j, c) in u.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if !s.is_empty() {
            s.push_str(if c.is_negative() { " - " } else { " + " });
        } else if c.is_negative() {
            s.push('-');
        }
        let a = c.abs();
        if !a.is_one() {
            let _ = write!(s, "{a}");
        }
        let _ = write!(s, "D{}", j + 1);
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

/// Divisor form of a witness: effective divisors `D_i = sum u^(i)_j D_j` whose
/// complements contain the selected orbits, and characters `m_i` with
/// `D_i - D_1 = div(χ^{m_i})`.
#[derive(Clone, Debug, Serialize)]
pub struct DivisorForm {
    pub divisors: Vec<String>,
    #[serde(with = "crate::serial::int_vecs")]
    pub characters: Vec<IntVector>,
}

pub fn divisor_form(inst: &KDivInstance, w: &MonomialWitness) -> Option<DivisorForm> {
    let qt = inst.q_transpose();
    let mut characters = Vec::new();
    for u in &w.exponents {
        let diff: IntVector = u.iter().zip(&w.exponents[0]).map(|(a, b)| a - b).collect();
        characters.push(solve_integral(&qt, &diff)?);
    }
    Some(DivisorForm { divisors: w.exponents.iter().map(|u| divisor_string(u)).collect(), characters })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> Fan {
        Fan::from_i64(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[0, 2]]).unwrap()
    }

    #[test]
    fn letters() {
        assert_eq!(exponent_letter(0), "a");
        assert_eq!(exponent_letter(1), "b");
        assert_eq!(exponent_letter(27), "b'");
    }

    #[test]
    fn relation_format() {
        let r = |v: &[i64]| v.iter().map(|&x| Rational::from_integer(x.into())).collect::<Vec<_>>();
        let c = vec![r(&[2, 0, 0, 0, 0, 0, 0, 0, 1]), r(&[0, 0, 0, 3, 0, 0, 0, 2, 0])];
        assert_eq!(format_relation(&c), "2a1 + a9 = -3b4 - 2b8");
        assert_eq!(format_relation(&[r(&[1, 1])]), "a1 + a2 = 0");
    }

    #[test]
    fn divisor_strings() {
        let v: IntVector = [2, 0, -1, 1].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(divisor_string(&v), "2D1 - D3 + D4");
        assert_eq!(divisor_string(&[BigInt::zero()]), "0");
    }

    #[test]
    fn divisors_of_twelve() {
        assert_eq!(divisors_descending(12), vec![12, 6, 4, 3, 2, 1]);
        assert_eq!(divisors_descending(1), vec![1]);
    }

    #[test]
    fn p2_is_three_divisorial() {
        let f = p2();
        let inst = KDivInstance::new(&f, 3).unwrap();
        let r = run_instance(&inst);
        assert!(r.verdict);
        assert_eq!(r.entries.len(), 1);
        assert!(r.verify(&inst));
        let SubsetOutcome::Feasible(w) = &r.entries[0].outcome else { panic!() };
        let form = divisor_form(&inst, w).unwrap();
        assert_eq!(form.divisors.len(), 3);
    }

    #[test]
    fn degenerate_fan_is_an_error() {
        let f = Fan::from_i64(2, &[&[1, 0]], &[&[0]]).unwrap();
        assert!(k_divisoriality(&f, 1).is_err());
    }
}
