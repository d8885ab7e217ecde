//! Fans: rays plus maximal cones as index sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::Cone;
use crate::linalg::{
    dot, fmt_vec, gcd_of, int_rank, integer_kernel_basis, lattice_basis, primitive, solve_integral, IntMatrix,
    IntVector,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FanError {
    #[error("invalid fan JSON: {0}")]
    Json(String),
    #[error("ambient rank must be positive")]
    ZeroRank,
    #[error("ray {ray} has length {len}, expected {rank}")]
    RayLength { ray: usize, len: usize, rank: usize },
    #[error("ray {ray} is the zero vector")]
    ZeroRay { ray: usize },
    #[error("ray {ray} is not primitive")]
    NotPrimitive { ray: usize },
    #[error("rays {first} and {second} span the same ray")]
    DuplicateRay { first: usize, second: usize },
    #[error("cone {cone} refers to ray index {index}, but there are only {count} rays")]
    IndexOutOfRange { cone: usize, index: usize, count: usize },
    #[error("cone {cone} lists ray index {index} twice")]
    RepeatedIndex { cone: usize, index: usize },
}

/// A fan given by primitive rays and maximal cones (0-based index sets into the rays).
///
/// Construction only checks shapes and ray hygiene; the geometric axioms are
/// checked by [`Fan::validate`].
pub struct Fan {
    name: Option<String>,
    rank: usize,
    rays: Vec<IntVector>,
    max_cones: Vec<Vec<usize>>,
    cones: OnceLock<Vec<Cone>>,
}

impl Clone for Fan {
    fn clone(&self) -> Self {
        Fan {
            name: self.name.clone(),
            rank: self.rank,
            rays: self.rays.clone(),
            max_cones: self.max_cones.clone(),
            cones: self.cones.clone(),
        }
    }
}

impl fmt::Debug for Fan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fan")
            .field("name", &self.name)
            .field("rank", &self.rank)
            .field("rays", &self.rays.iter().map(|r| fmt_vec(r)).collect::<Vec<_>>())
            .field("max_cones", &self.max_cones)
            .finish()
    }
}

impl Fan {
    pub fn new(rank: usize, rays: Vec<IntVector>, max_cones: Vec<Vec<usize>>) -> Result<Fan, FanError> {
        if rank == 0 {
            return Err(FanError::ZeroRank);
        }
        for (i, r) in rays.iter().enumerate() {
            if r.len() != rank {
                return Err(FanError::RayLength { ray: i, len: r.len(), rank });
            }
            if r.iter().all(Zero::is_zero) {
                return Err(FanError::ZeroRay { ray: i });
            }
            if !gcd_of(r).is_one() {
                return Err(FanError::NotPrimitive { ray: i });
            }
        }
        for i in 0..rays.len() {
            for j in 0..i {
                if rays[i] == rays[j] {
                    return Err(FanError::DuplicateRay { first: j, second: i });
                }
            }
        }
        let mut cones = Vec::with_capacity(max_cones.len());
        for (c, idx) in max_cones.into_iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &i in &idx {
                if i >= rays.len() {
                    return Err(FanError::IndexOutOfRange { cone: c, index: i, count: rays.len() });
                }
                if !seen.insert(i) {
                    return Err(FanError::RepeatedIndex { cone: c, index: i });
                }
            }
            cones.push(seen.into_iter().collect());
        }
        Ok(Fan { name: None, rank, rays, max_cones: cones, cones: OnceLock::new() })
    }

    pub fn from_i64(rank: usize, rays: &[&[i64]], max_cones: &[&[usize]]) -> Result<Fan, FanError> {
        Fan::new(
            rank,
            rays.iter().map(|r| crate::linalg::int_vec(r)).collect(),
            max_cones.iter().map(|c| c.to_vec()).collect(),
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[IntVector] {
        &self.rays
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    pub fn cone_count(&self) -> usize {
        self.max_cones.len()
    }

    pub fn cones(&self) -> &[Cone] {
        self.cones.get_or_init(|| {
            self.max_cones
                .iter()
                .map(|idx| Cone::new(self.rank, idx.iter().map(|&i| self.rays[i].clone()).collect()))
                .collect()
        })
    }

    pub fn cone(&self, i: usize) -> &Cone {
        &self.cones()[i]
    }

    /// The `d × n` matrix with the rays as rows.
    pub fn ray_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(self.rank, &self.rays)
    }

    /// Whether the rays span the ambient rational vector space.
    pub fn is_nondegenerate(&self) -> bool {
        !self.rays.is_empty() && int_rank(&self.ray_matrix()) == self.rank
    }

    pub fn is_simplicial(&self) -> bool {
        self.max_cones.iter().all(|idx| {
            let rows: Vec<IntVector> = idx.iter().map(|&i| self.rays[i].clone()).collect();
            rows.is_empty() || int_rank(&IntMatrix::from_rows(self.rank, &rows)) == rows.len()
        })
    }

    /// Ray index sets of the facets of maximal cone `c`.
    pub fn facet_index_sets(&self, c: usize) -> Vec<Vec<usize>> {
        let idx = &self.max_cones[c];
        self.cone(c)
            .facets()
            .iter()
            .map(|h| idx.iter().copied().filter(|&i| dot(h, &self.rays[i]).is_zero()).collect())
            .collect()
    }

    /// Completeness by facet pairing: every maximal cone is full-dimensional, each
    /// facet of a maximal cone lies in exactly two maximal cones, and the adjacency
    /// graph is connected. Assumes a valid fan.
    pub fn is_complete(&self) -> bool {
        if self.max_cones.is_empty() {
            return false;
        }
        if !self.cones().iter().all(Cone::is_full_dimensional) {
            return false;
        }
        let mut owners: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for c in 0..self.cone_count() {
            for f in self.facet_index_sets(c) {
                owners.entry(f).or_default().push(c);
            }
        }
        let mut parent: Vec<usize> = (0..self.cone_count()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for cs in owners.values() {
            if cs.len() != 2 {
                return false;
            }
            let (a, b) = (find(&mut parent, cs[0]), find(&mut parent, cs[1]));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (0..self.cone_count()).all(|c| find(&mut parent, c) == root)
    }

    /// Index of the first maximal cone containing `x`, if any.
    pub fn locate(&self, x: &[crate::linalg::Rational]) -> Option<usize> {
        self.cones().iter().position(|c| c.contains(x))
    }

    pub fn validate(&self) -> ValidationReport {
        validate_fan(self)
    }

    /// Same ambient rank, same ray set and same maximal cones under the induced
    /// ray bijection. Ray order and cone order are irrelevant.
    pub fn equivalent(&self, other: &Fan) -> bool {
        if self.rank != other.rank || self.rays.len() != other.rays.len() {
            return false;
        }
        let mut map = Vec::with_capacity(self.rays.len());
        for r in &self.rays {
            match other.rays.iter().position(|s| s == r) {
                Some(j) => map.push(j),
                None => return false,
            }
        }
        let mine: BTreeSet<Vec<usize>> = self
            .max_cones
            .iter()
            .map(|c| {
                let mut v: Vec<usize> = c.iter().map(|&i| map[i]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let theirs: BTreeSet<Vec<usize>> = other.max_cones.iter().cloned().collect();
        mine == theirs && self.max_cones.len() == other.max_cones.len()
    }

    /// Lattice of invariant Cartier divisors, see [`cartier_lattice`].
    pub fn cartier_lattice(&self) -> CartierLattice {
        cartier_lattice(self)
    }

    /// The `d × n` matrix `m ↦ (<m, v_i>)_i` of principal divisors (rows are the rays).
    pub fn principal_divisors(&self) -> IntMatrix {
        self.ray_matrix()
    }

    /// Whether `sum a_i D_i` is locally principal on every maximal cone.
    pub fn is_cartier(&self, a: &[BigInt]) -> bool {
        self.max_cones.iter().all(|idx| local_witness(self, idx, a).is_some())
    }

    pub fn to_file(&self) -> FanFile {
        FanFile { rank: self.rank, rays: self.rays.clone(), max_cones: self.max_cones.clone(), name: self.name.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("fan serializes")
    }
}

/// On-disk fan format. `max_cones` holds 0-based ray indices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FanFile {
    pub rank: usize,
    #[serde(with = "crate::serial::int_vecs")]
    pub rays: Vec<IntVector>,
    pub max_cones: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// A parsed fan together with the factor each file ray was divided by.
#[derive(Clone, Debug)]
pub struct ParsedFan {
    pub fan: Fan,
    pub scalings: Vec<BigInt>,
}

impl ParsedFan {
    pub fn rescaled_rays(&self) -> impl Iterator<Item = (usize, &BigInt)> {
        self.scalings.iter().enumerate().filter(|(_, s)| !s.is_one())
    }
}

/// Parses the JSON fan format, making rays primitive.
pub fn parse_fan(json: &str) -> Result<ParsedFan, FanError> {
    let file: FanFile = serde_json::from_str(json).map_err(|e| FanError::Json(e.to_string()))?;
    fan_from_file(file)
}

pub fn fan_from_file(file: FanFile) -> Result<ParsedFan, FanError> {
    if file.rank == 0 {
        return Err(FanError::ZeroRank);
    }
    let mut rays = Vec::with_capacity(file.rays.len());
    let mut scalings = Vec::with_capacity(file.rays.len());
    for (i, r) in file.rays.iter().enumerate() {
        if r.len() != file.rank {
            return Err(FanError::RayLength { ray: i, len: r.len(), rank: file.rank });
        }
        let g = gcd_of(r);
        if g.is_zero() {
            return Err(FanError::ZeroRay { ray: i });
        }
        scalings.push(g);
        rays.push(primitive(r));
    }
    let mut fan = Fan::new(file.rank, rays, file.max_cones)?;
    fan.name = file.name;
    Ok(ParsedFan { fan, scalings })
}

/// Problems found by [`validate_fan`]. Cone and ray numbers are 0-based; the
/// `Display` impl prints them 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyFan,
    NotPointed { cone: usize },
    RayNotExtremal { cone: usize, ray: usize },
    UnusedRay { ray: usize },
    FaceOfAnother { cone: usize, other: usize },
    BadIntersection { first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::EmptyFan => write!(f, "the fan has no maximal cones"),
            Violation::NotPointed { cone } => write!(f, "cone {} is not pointed", cone + 1),
            Violation::RayNotExtremal { cone, ray } => {
                write!(f, "ray {} is not an extremal ray of cone {}", ray + 1, cone + 1)
            }
            Violation::UnusedRay { ray } => write!(f, "ray {} lies in no maximal cone", ray + 1),
            Violation::FaceOfAnother { cone, other } => {
                write!(f, "cone {} is a face of cone {}", cone + 1, other + 1)
            }
            Violation::BadIntersection { first, second } => {
                write!(f, "cones {} and {} intersect in a set that is not a face of both", first + 1, second + 1)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the fan axioms: pointed cones whose listed rays are extremal, every ray
/// used, no maximal cone a face of another, pairwise intersections faces of both.
pub fn validate_fan(fan: &Fan) -> ValidationReport {
    let mut violations = Vec::new();
    if fan.max_cones.is_empty() {
        violations.push(Violation::EmptyFan);
    }
    let cones = fan.cones();
    for (c, cone) in cones.iter().enumerate() {
        if !cone.is_pointed() {
            violations.push(Violation::NotPointed { cone: c });
            continue;
        }
        for &i in &fan.max_cones[c] {
            if !cone.has_extremal_ray(&fan.rays[i]) {
                violations.push(Violation::RayNotExtremal { cone: c, ray: i });
            }
        }
    }
    let used: BTreeSet<usize> = fan.max_cones.iter().flatten().copied().collect();
    for i in 0..fan.rays.len() {
        if !used.contains(&i) {
            violations.push(Violation::UnusedRay { ray: i });
        }
    }
    for a in 0..cones.len() {
        for b in 0..cones.len() {
            if a != b && cones[a].is_face_of(&cones[b]) {
                violations.push(Violation::FaceOfAnother { cone: a, other: b });
            }
        }
    }
    for a in 0..cones.len() {
        for b in a + 1..cones.len() {
            let meet = cones[a].intersect(&cones[b]);
            if !(meet.is_face_of(&cones[a]) && meet.is_face_of(&cones[b])) {
                violations.push(Violation::BadIntersection { first: a, second: b });
            }
        }
    }
    ValidationReport { violations }
}

/// Basis of the invariant Cartier divisors `sum a_i D_i` with, for every basis
/// element and every maximal cone `σ`, a witness `m_σ` satisfying
/// `<m_σ, v_i> = -a_i` for the rays `v_i` of `σ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartierLattice {
    /// Rows are coefficient vectors of length `d`, in Hermite normal form.
    pub basis: Vec<IntVector>,
    /// `witnesses[k][c]` is the local character of basis element `k` on cone `c`.
    pub witnesses: Vec<Vec<IntVector>>,
}

impl CartierLattice {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Basis rows as an `r × d` matrix.
    pub fn matrix(&self, d: usize) -> IntMatrix {
        IntMatrix::from_rows(d, &self.basis)
    }

    /// Rechecks every stored witness against the fan.
    pub fn verify_witnesses(&self, fan: &Fan) -> bool {
        self.basis.iter().zip(&self.witnesses).all(|(a, ws)| {
            ws.len() == fan.cone_count()
                && fan.max_cones().iter().zip(ws).all(|(idx, m)| idx.iter().all(|&i| dot(m, &fan.rays()[i]) == -&a[i]))
        })
    }

    pub fn contains(&self, a: &[BigInt]) -> bool {
        if self.basis.is_empty() {
            return a.iter().all(Zero::is_zero);
        }
        let d = a.len();
        crate::linalg::in_lattice_image(a, &self.matrix(d).transpose())
    }
}

fn local_witness(fan: &Fan, idx: &[usize], a: &[BigInt]) -> Option<IntVector> {
    if idx.is_empty() {
        return Some(vec![BigInt::zero(); fan.rank]);
    }
    let rows: Vec<IntVector> = idx.iter().map(|&i| fan.rays[i].clone()).collect();
    let rhs: IntVector = idx.iter().map(|&i| -&a[i]).collect();
    solve_integral(&IntMatrix::from_rows(fan.rank, &rows), &rhs)
}

/// Solves the stacked system in `(a, m_σ1, m_σ2, ...)` and projects to `a`.
pub fn cartier_lattice(fan: &Fan) -> CartierLattice {
    let d = fan.ray_count();
    let n = fan.rank;
    let s = fan.cone_count();
    let width = d + n * s;
    let mut rows: Vec<IntVector> = Vec::new();
    for (c, idx) in fan.max_cones.iter().enumerate() {
        for &i in idx {
            let mut row = vec![BigInt::zero(); width];
            row[i] = BigInt::one();
            for (k, x) in fan.rays[i].iter().enumerate() {
                row[d + c * n + k] = x.clone();
            }
            rows.push(row);
        }
    }
    let generators: Vec<IntVector> = if rows.is_empty() {
        IntMatrix::identity(d).to_rows()
    } else {
        integer_kernel_basis(&IntMatrix::from_rows(width, &rows)).into_iter().map(|v| v[..d].to_vec()).collect()
    };
    let basis = if generators.is_empty() { Vec::new() } else { lattice_basis(d, &generators).to_rows() };
    let witnesses = basis
        .iter()
        .map(|a| {
            fan.max_cones
                .iter()
                .map(|idx| local_witness(fan, idx, a).expect("Cartier basis element has local witnesses"))
                .collect()
        })
        .collect();
    CartierLattice { basis, witnesses }
}
