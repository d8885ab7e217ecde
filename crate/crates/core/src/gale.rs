//! Gale transforms, cofaces and two projectivity tests for complete fans.
//!
//! A complete fan is strongly polytopal iff the relative interiors of the cofaces of
//! its maximal cones share a point, and iff it carries a strictly convex piecewise
//! linear support function. Both conditions are strict linear feasibility problems,
//! so each test returns either a witness or a Farkas certificate.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cone::Cone;
use crate::fan::Fan;
use crate::linalg::{
    clear_denominators, dot, gcd_of, hnf_basis, integer_kernel_basis, primitive, strict_lp_feasibility,
    to_rational_vec, FarkasCertificate, FeasibilityOutcome, IntMatrix, IntVector, RatMatrix, Rational,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GaleError {
    #[error("the rays do not span the ambient space (degenerate fan)")]
    Degenerate,
}

/// Ray matrix `R` (`d × n`) and a Gale matrix `B` (`(d-n) × d`) whose rows form a
/// basis of the linear relations among the rays. The Gale vectors are the columns of `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaleData {
    pub rays: IntMatrix,
    pub gale: IntMatrix,
}

impl GaleData {
    pub fn ray_count(&self) -> usize {
        self.rays.rows()
    }

    /// Dimension `d - n` of the space the Gale vectors live in.
    pub fn dual_rank(&self) -> usize {
        self.gale.rows()
    }

    pub fn gale_vector(&self, j: usize) -> IntVector {
        self.gale.column(j)
    }

    pub fn gale_vectors(&self) -> Vec<IntVector> {
        (0..self.ray_count()).map(|j| self.gale_vector(j)).collect()
    }

    /// `B · R = 0`, `rank B = d - n`, `rank R = n`.
    pub fn check_invariants(&self) -> bool {
        let d = self.rays.rows();
        let n = self.rays.cols();
        self.gale.cols() == d
            && self.gale.mul(&self.rays).is_zero()
            && crate::linalg::int_rank(&self.gale) == d - n
            && crate::linalg::int_rank(&self.rays) == n
    }

    /// Replaces the relation basis by `u · B`; `u` must be unimodular.
    pub fn with_basis_change(&self, u: &IntMatrix) -> GaleData {
        GaleData { rays: self.rays.clone(), gale: u.mul(&self.gale) }
    }

    /// Cone generated by the Gale vectors of the rays not in `cone_rays`.
    pub fn coface(&self, cone_rays: &[usize]) -> Cone {
        let gens = (0..self.ray_count()).filter(|j| !cone_rays.contains(j)).map(|j| self.gale_vector(j)).collect();
        Cone::new(self.dual_rank(), gens)
    }
}

/// Gale transform with the relation basis in Hermite normal form.
pub fn gale_transform(fan: &Fan) -> Result<GaleData, GaleError> {
    if !fan.is_nondegenerate() {
        return Err(GaleError::Degenerate);
    }
    let rays = fan.ray_matrix();
    let relations = integer_kernel_basis(&rays.transpose());
    let d = fan.ray_count();
    let gale =
        if relations.is_empty() { IntMatrix::zeros(0, d) } else { hnf_basis(&IntMatrix::from_rows(d, &relations)) };
    Ok(GaleData { rays, gale })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectivityMethod {
    Shephard,
    SupportFunction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProjectivityWitness {
    /// Integral point in the relative interior of every coface.
    Point {
        #[serde(with = "crate::serial::int_vec")]
        point: IntVector,
    },
    /// Values `c_i` of a support function at the rays and its linear pieces `m_σ`.
    SupportFunction {
        #[serde(with = "crate::serial::int_vec")]
        values: IntVector,
        #[serde(with = "crate::serial::int_vecs")]
        pieces: Vec<IntVector>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectivityVerdict {
    pub method: ProjectivityMethod,
    pub is_strongly_polytopal: bool,
    pub witness: Option<ProjectivityWitness>,
    pub certificate: Option<FarkasCertificate>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    system: LinearSystem,
}

impl ProjectivityVerdict {
    /// Rechecks the witness by direct evaluation on the fan (and the Gale data the
    /// test used), or the certificate against the constraint system.
    pub fn verify(&self, fan: &Fan, gale: Option<&GaleData>) -> bool {
        match (&self.witness, &self.certificate) {
            (Some(w), None) if self.is_strongly_polytopal => match w {
                ProjectivityWitness::Point { point } => {
                    let owned;
                    let g = match gale {
                        Some(g) => g,
                        None => match gale_transform(fan) {
                            Ok(g) => {
                                owned = g;
                                &owned
                            }
                            Err(_) => return false,
                        },
                    };
                    let x = to_rational_vec(point);
                    fan.max_cones().iter().all(|idx| g.coface(idx).in_relative_interior(&x))
                }
                ProjectivityWitness::SupportFunction { values, pieces } => verify_support_function(fan, values, pieces),
            },
            (None, Some(c)) if !self.is_strongly_polytopal => c.verify(&self.system.equalities, &self.system.strict),
            _ => false,
        }
    }

    /// The constraint system the verdict was decided on.
    pub fn system(&self) -> (&RatMatrix, &RatMatrix) {
        (&self.system.equalities, &self.system.strict)
    }
}

/// `equalities · x = 0`, `strict · x > 0`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub equalities: RatMatrix,
    pub strict: RatMatrix,
}

impl LinearSystem {
    fn new(vars: usize, eq: Vec<IntVector>, strict: Vec<IntVector>) -> Self {
        let to_mat = |rows: Vec<IntVector>| {
            if rows.is_empty() {
                RatMatrix::zeros(0, vars)
            } else {
                IntMatrix::from_rows(vars, &rows).to_rational()
            }
        };
        LinearSystem { equalities: to_mat(eq), strict: to_mat(strict) }
    }

    fn solve(&self) -> FeasibilityOutcome {
        strict_lp_feasibility(&self.equalities, &self.strict)
    }
}

/// Points in the relative interior of every coface: span equations and strict facet
/// inequalities of each coface, all in the Gale space.
pub fn shephard_system(fan: &Fan, gale: &GaleData) -> LinearSystem {
    let mut eq = Vec::new();
    let mut strict = Vec::new();
    for idx in fan.max_cones() {
        let c = gale.coface(idx);
        let desc = c.description();
        eq.extend(desc.span_equations.iter().cloned());
        strict.extend(desc.facets.iter().cloned());
    }
    LinearSystem::new(gale.dual_rank(), eq, strict)
}

fn precondition_warnings(fan: &Fan) -> Vec<String> {
    let mut w = Vec::new();
    if !fan.is_complete() {
        w.push("fan is not complete; the criterion assumes a complete fan".to_string());
    }
    if !fan.is_nondegenerate() {
        w.push("fan is degenerate; the criterion assumes rays spanning the ambient space".to_string());
    }
    w
}

/// Shephard's criterion with the canonical Gale transform.
pub fn shephard_test(fan: &Fan) -> Result<ProjectivityVerdict, GaleError> {
    let gale = gale_transform(fan)?;
    Ok(shephard_test_with(fan, &gale))
}

/// Shephard's criterion with a caller-supplied Gale transform.
pub fn shephard_test_with(fan: &Fan, gale: &GaleData) -> ProjectivityVerdict {
    let system = shephard_system(fan, gale);
    let outcome = system.solve();
    let warnings = precondition_warnings(fan);
    match outcome {
        FeasibilityOutcome::Feasible { witness } => ProjectivityVerdict {
            method: ProjectivityMethod::Shephard,
            is_strongly_polytopal: true,
            witness: Some(ProjectivityWitness::Point { point: scale_to_integral(&witness) }),
            certificate: None,
            warnings,
            system,
        },
        FeasibilityOutcome::Infeasible(cert) => ProjectivityVerdict {
            method: ProjectivityMethod::Shephard,
            is_strongly_polytopal: false,
            witness: None,
            certificate: Some(cert),
            warnings,
            system,
        },
    }
}

/// Variables `(m_σ1, ..., m_σs, c)`: `<m_σ, v_i> = c_i` on the rays of `σ` and
/// `<m_σ, v_j> > c_j` on all other rays.
pub fn support_function_system(fan: &Fan) -> LinearSystem {
    let n = fan.rank();
    let s = fan.cone_count();
    let d = fan.ray_count();
    let vars = n * s + d;
    let mut eq = Vec::new();
    let mut strict = Vec::new();
    for (c, idx) in fan.max_cones().iter().enumerate() {
        for j in 0..d {
            let mut row = vec![BigInt::zero(); vars];
            for (k, x) in fan.rays()[j].iter().enumerate() {
                row[c * n + k] = x.clone();
            }
            row[n * s + j] = -BigInt::one();
            if idx.contains(&j) {
                eq.push(row);
            } else {
                strict.push(row);
            }
        }
    }
    LinearSystem::new(vars, eq, strict)
}

pub fn support_function_test(fan: &Fan) -> ProjectivityVerdict {
    let system = support_function_system(fan);
    let outcome = system.solve();
    let warnings = precondition_warnings(fan);
    match outcome {
        FeasibilityOutcome::Feasible { witness } => {
            let ints = scale_to_integral(&witness);
            let n = fan.rank();
            let s = fan.cone_count();
            let pieces = (0..s).map(|c| ints[c * n..(c + 1) * n].to_vec()).collect();
            let values = ints[n * s..].to_vec();
            ProjectivityVerdict {
                method: ProjectivityMethod::SupportFunction,
                is_strongly_polytopal: true,
                witness: Some(ProjectivityWitness::SupportFunction { values, pieces }),
                certificate: None,
                warnings,
                system,
            }
        }
        FeasibilityOutcome::Infeasible(cert) => ProjectivityVerdict {
            method: ProjectivityMethod::SupportFunction,
            is_strongly_polytopal: false,
            witness: None,
            certificate: Some(cert),
            warnings,
            system,
        },
    }
}

/// Direct check of a support function: linear on each maximal cone, strictly
/// larger than the function value at every ray outside the cone.
pub fn verify_support_function(fan: &Fan, values: &[BigInt], pieces: &[IntVector]) -> bool {
    if values.len() != fan.ray_count() || pieces.len() != fan.cone_count() {
        return false;
    }
    fan.max_cones().iter().zip(pieces).all(|(idx, m)| {
        m.len() == fan.rank()
            && fan.rays().iter().enumerate().all(|(j, v)| {
                let val = dot(m, v);
                if idx.contains(&j) {
                    val == values[j]
                } else {
                    val > values[j]
                }
            })
    })
}

/// Smallest positive integral multiple.
fn scale_to_integral(v: &[Rational]) -> IntVector {
    let (ints, _) = clear_denominators(v);
    if gcd_of(&ints).is_zero() {
        return ints;
    }
    primitive(&ints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int_vec;

    fn p2() -> Fan {
        Fan::from_i64(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[0, 2]]).unwrap()
    }

    #[test]
    fn p2_gale_transform() {
        let g = gale_transform(&p2()).unwrap();
        assert_eq!(g.gale, IntMatrix::from_i64(&[&[1, 1, 1]]));
        assert!(g.check_invariants());
        assert!(g.coface(&[0, 1]).same_set(&Cone::from_i64(1, &[&[1]])));
        assert_eq!(g.coface(&[]).generators().len(), 1);
    }

    #[test]
    fn p2_is_polytopal_both_ways() {
        let f = p2();
        let s = shephard_test(&f).unwrap();
        assert!(s.is_strongly_polytopal);
        assert_eq!(s.witness, Some(ProjectivityWitness::Point { point: int_vec(&[1]) }));
        assert!(s.verify(&f, None));
        let t = support_function_test(&f);
        assert!(t.is_strongly_polytopal);
        assert!(t.verify(&f, None));
    }

    #[test]
    fn simplex_fan_without_relations() {
        // d = n: a single full cone has no relations, every coface is the zero cone.
        let f = Fan::from_i64(2, &[&[1, 0], &[0, 1]], &[&[0, 1]]).unwrap();
        let g = gale_transform(&f).unwrap();
        assert_eq!(g.dual_rank(), 0);
        let v = shephard_test_with(&f, &g);
        assert!(v.is_strongly_polytopal);
        assert!(!v.warnings.is_empty());
    }

    #[test]
    fn degenerate_fan_has_no_gale_transform() {
        let f = Fan::from_i64(2, &[&[1, 0]], &[&[0]]).unwrap();
        assert_eq!(gale_transform(&f).unwrap_err(), GaleError::Degenerate);
    }

    #[test]
    fn square_fan_is_polytopal() {
        let f =
            Fan::from_i64(2, &[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]], &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]]).unwrap();
        let s = shephard_test(&f).unwrap();
        assert!(s.is_strongly_polytopal && s.verify(&f, None));
        let t = support_function_test(&f);
        assert!(t.is_strongly_polytopal && t.verify(&f, None));
    }
}
