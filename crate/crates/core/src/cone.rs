//! Rational polyhedral cones given by generators.
//!
//! The H-description is computed on demand by the double description method:
//! in coordinates on the linear span, the dual cone `{y : <g, y> >= 0}` is
//! pointed, and its extreme rays are exactly the facet normals.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::linalg::{
    dot, integer_kernel_basis, neg_vec, primitive, primitive_integral, rank, rref, solve, to_rational_vec, IntMatrix,
    IntVector, RatMatrix, Rational,
};

/// Linear span and facet normals of a cone.
///
/// A point `x` lies in the cone iff `<e, x> = 0` for every span equation `e`
/// and `<h, x> >= 0` for every facet normal `h`. Facet normals lie in the span
/// and are primitive integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetDescription {
    pub span_basis: Vec<IntVector>,
    pub span_equations: Vec<IntVector>,
    pub facets: Vec<IntVector>,
}

pub struct Cone {
    ambient: usize,
    generators: Vec<IntVector>,
    description: OnceLock<FacetDescription>,
}

impl Clone for Cone {
    fn clone(&self) -> Self {
        Cone { ambient: self.ambient, generators: self.generators.clone(), description: self.description.clone() }
    }
}

impl fmt::Debug for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|g| crate::linalg::fmt_vec(g)).collect();
        write!(f, "cone[{}]({})", self.ambient, gens.join(", "))
    }
}

impl Cone {
    /// Cone generated by `generators` in `Q^ambient`. Zero vectors are dropped and
    /// generators are made primitive and deduplicated.
    pub fn new(ambient: usize, generators: Vec<IntVector>) -> Self {
        let mut gens: Vec<IntVector> = Vec::with_capacity(generators.len());
        for g in generators {
            assert_eq!(g.len(), ambient, "generator length does not match ambient rank");
            if g.iter().all(Zero::is_zero) {
                continue;
            }
            let p = primitive(&g);
            if !gens.contains(&p) {
                gens.push(p);
            }
        }
        Cone { ambient, generators: gens, description: OnceLock::new() }
    }

    pub fn from_rational(ambient: usize, generators: &[Vec<Rational>]) -> Self {
        Self::new(ambient, generators.iter().map(|g| primitive_integral(g)).collect())
    }

    pub fn from_i64(ambient: usize, generators: &[&[i64]]) -> Self {
        Self::new(ambient, generators.iter().map(|g| crate::linalg::int_vec(g)).collect())
    }

    pub fn zero(ambient: usize) -> Self {
        Self::new(ambient, Vec::new())
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient
    }

    pub fn generators(&self) -> &[IntVector] {
        &self.generators
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn description(&self) -> &FacetDescription {
        self.description.get_or_init(|| facet_description(self.ambient, &self.generators))
    }

    pub fn facets(&self) -> &[IntVector] {
        &self.description().facets
    }

    /// Dimension of the linear span.
    pub fn dim(&self) -> usize {
        self.description().span_basis.len()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Trivial lineality space, i.e. `c ∩ -c = {0}`.
    pub fn is_pointed(&self) -> bool {
        let d = self.description();
        if d.span_basis.is_empty() {
            return true;
        }
        let normals = IntMatrix::from_rows(self.ambient, &d.facets);
        d.facets.len() >= d.span_basis.len() && rank(&normals.to_rational()) == d.span_basis.len()
    }

    /// Generators are linearly independent.
    pub fn is_simplicial(&self) -> bool {
        self.dim() == self.generators.len()
    }

    pub fn in_span(&self, x: &[Rational]) -> bool {
        self.description().span_equations.iter().all(|e| dot(&to_rational_vec(e), x).is_zero())
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        assert_eq!(x.len(), self.ambient, "point length does not match ambient rank");
        self.in_span(x) && self.facets().iter().all(|h| !dot(&to_rational_vec(h), x).is_negative())
    }

    pub fn contains_int(&self, x: &[BigInt]) -> bool {
        self.contains(&to_rational_vec(x))
    }

    /// `x` lies in the span and strictly inside every facet. The relative interior
    /// of the zero cone is `{0}`.
    pub fn in_relative_interior(&self, x: &[Rational]) -> bool {
        assert_eq!(x.len(), self.ambient, "point length does not match ambient rank");
        self.in_span(x) && self.facets().iter().all(|h| dot(&to_rational_vec(h), x).is_positive())
    }

    /// Set inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Cone) -> bool {
        self.generators.iter().all(|g| other.contains_int(g))
    }

    /// Set equality (mutual containment).
    pub fn same_set(&self, other: &Cone) -> bool {
        self.ambient == other.ambient && self.is_subset_of(other) && other.is_subset_of(self)
    }

    /// Whether `self` is a face of `c`.
    pub fn is_face_of(&self, c: &Cone) -> bool {
        assert_eq!(self.ambient, c.ambient, "is_face: ambient rank mismatch");
        if !self.is_subset_of(c) {
            return false;
        }
        let tight: Vec<Vec<Rational>> = c
            .facets()
            .iter()
            .map(|h| to_rational_vec(h))
            .filter(|h| self.generators.iter().all(|g| dot(h, &to_rational_vec(g)).is_zero()))
            .collect();
        // The smallest face of c containing self is cut out by the tight facets and is
        // generated by the generators of c it contains.
        c.generators.iter().all(|g| {
            let gq = to_rational_vec(g);
            let in_face = tight.iter().all(|h| dot(h, &gq).is_zero());
            !in_face || self.contains(&gq)
        })
    }

    /// `g` spans an extremal ray of the cone.
    pub fn has_extremal_ray(&self, g: &[BigInt]) -> bool {
        Cone::new(self.ambient, vec![g.to_vec()]).is_face_of(self)
    }

    /// Dual cone `{y : <y, x> >= 0 for all x in self}`.
    pub fn dual(&self) -> Cone {
        let d = self.description();
        let mut gens = d.facets.clone();
        for e in &d.span_equations {
            gens.push(e.clone());
            gens.push(neg_vec(e));
        }
        Cone::new(self.ambient, gens)
    }

    pub fn intersect(&self, other: &Cone) -> Cone {
        assert_eq!(self.ambient, other.ambient, "intersect: ambient rank mismatch");
        let mut dual_gens = Vec::new();
        for c in [self, other] {
            let d = c.description();
            dual_gens.extend(d.facets.iter().cloned());
            for e in &d.span_equations {
                dual_gens.push(e.clone());
                dual_gens.push(neg_vec(e));
            }
        }
        Cone::new(self.ambient, dual_gens).dual()
    }

    /// Cone generated by the images of the generators under `m`.
    pub fn image(&self, m: &IntMatrix) -> Cone {
        assert_eq!(m.cols(), self.ambient, "image_cone: matrix columns must equal ambient rank");
        Cone::new(m.rows(), self.generators.iter().map(|g| m.mul_vec(g)).collect())
    }

    /// Sum of the generators (a relative interior point).
    pub fn generator_sum(&self) -> Vec<Rational> {
        let mut s = vec![BigInt::zero(); self.ambient];
        for g in &self.generators {
            for (a, b) in s.iter_mut().zip(g) {
                *a += b;
            }
        }
        to_rational_vec(&s)
    }
}

pub fn facet_description(ambient: usize, generators: &[IntVector]) -> FacetDescription {
    if generators.is_empty() {
        return FacetDescription {
            span_basis: Vec::new(),
            span_equations: IntMatrix::identity(ambient).to_rows(),
            facets: Vec::new(),
        };
    }
    let g = IntMatrix::from_rows(ambient, generators).to_rational();
    let basis = rref(&g);
    let r = basis.pivots.len();
    let span_basis: Vec<IntVector> = basis.matrix.row_iter().map(primitive_integral).collect();
    let span_equations = integer_kernel_basis(&IntMatrix::from_rows(ambient, &span_basis));

    // Coordinates on the span: the pivot entries of a point.
    let coords: Vec<IntVector> =
        generators.iter().map(|x| basis.pivots.iter().map(|&p| x[p].clone()).collect()).collect();
    let dual_rays = pointed_cone_extreme_rays(r, &coords);

    let s = &basis.matrix;
    let gram = s.mul(&s.transpose());
    let mut facets: Vec<IntVector> = Vec::with_capacity(dual_rays.len());
    for y in dual_rays {
        let mut h0 = vec![Rational::zero(); ambient];
        for (k, &p) in basis.pivots.iter().enumerate() {
            h0[p] = Rational::from_integer(y[k].clone());
        }
        let h = if r == ambient {
            h0
        } else {
            // Orthogonal projection onto the span gives the canonical representative.
            let t = s.mul_vec(&h0);
            let z = solve(&gram, &t).expect("Gram matrix of a basis is invertible");
            s.transpose().mul_vec(&z)
        };
        let h = primitive_integral(&h);
        if !facets.contains(&h) {
            facets.push(h);
        }
    }
    facets.sort();
    FacetDescription { span_basis, span_equations, facets }
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn contains_all(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
}

/// Extreme rays of the pointed cone `{y in Q^r : <c, y> >= 0 for all c}`, where the
/// constraint vectors span `Q^r`.
fn pointed_cone_extreme_rays(r: usize, constraints: &[IntVector]) -> Vec<IntVector> {
    if r == 0 {
        return Vec::new();
    }
    let m = constraints.len();

    let mut chosen: Vec<usize> = Vec::with_capacity(r);
    for i in 0..m {
        let mut trial: Vec<IntVector> = chosen.iter().map(|&k| constraints[k].clone()).collect();
        trial.push(constraints[i].clone());
        if rank(&IntMatrix::from_rows(r, &trial).to_rational()) == trial.len() {
            chosen.push(i);
            if chosen.len() == r {
                break;
            }
        }
    }
    assert_eq!(chosen.len(), r, "constraints must span the coordinate space");

    // Initial simplicial cone: columns of the inverse of the chosen rows.
    let b: RatMatrix =
        IntMatrix::from_rows(r, &chosen.iter().map(|&k| constraints[k].clone()).collect::<Vec<_>>()).to_rational();
    let mut rays: Vec<(IntVector, Bits)> = Vec::with_capacity(r);
    for k in 0..r {
        let mut e = vec![Rational::zero(); r];
        e[k] = Rational::from_integer(1.into());
        let col = solve(&b, &e).expect("chosen rows are independent");
        let ray = primitive_integral(&col);
        let mut z = Bits::new(m);
        for (t, &row) in chosen.iter().enumerate() {
            if t != k {
                z.set(row);
            }
        }
        rays.push((ray, z));
    }

    for i in 0..m {
        if chosen.contains(&i) {
            continue;
        }
        let a = &constraints[i];
        let values: Vec<BigInt> = rays.iter().map(|(y, _)| dot(a, y)).collect();
        let mut next: Vec<(IntVector, Bits)> = Vec::with_capacity(rays.len());
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_negative()).collect();
        for (k, (y, z)) in rays.iter().enumerate() {
            if values[k].is_negative() {
                continue;
            }
            let mut z = z.clone();
            if values[k].is_zero() {
                z.set(i);
            }
            next.push((y.clone(), z));
        }
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].1.and(&rays[q].1);
                if r >= 2 && common.count() < r - 2 {
                    continue;
                }
                let adjacent = (0..rays.len()).all(|t| t == p || t == q || !rays[t].1.contains_all(&common));
                if !adjacent {
                    continue;
                }
                let new: IntVector =
                    rays[q].0.iter().zip(&rays[p].0).map(|(yq, yp)| &values[p] * yq - &values[q] * yp).collect();
                let mut z = common;
                z.set(i);
                next.push((primitive(&new), z));
            }
        }
        rays = next;
    }
    rays.into_iter().map(|(y, _)| y).collect()
}
