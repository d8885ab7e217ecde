//! Lattice maps between fans: Cox lift, Kajiwara presentation, distinguished
//! points and the combinatorial geometric-quotient check.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::Cone;
use crate::fan::{CartierLattice, Fan, FanError, ValidationReport};
use crate::linalg::{int_rank, integer_kernel_basis, primitive, saturation_index, IntMatrix, IntVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuotientError {
    #[error("invalid map JSON: {0}")]
    Json(String),
    #[error("map has {found} entries in row {row}, expected {cols}")]
    RowLength { row: usize, found: usize, cols: usize },
    #[error("map declares {declared} rows but lists {found}")]
    RowCount { declared: usize, found: usize },
    #[error("the rays do not span the ambient space (degenerate fan)")]
    Degenerate,
    #[error("map is {rows}x{cols} but the fan lives in rank {rank}")]
    Shape { rows: usize, cols: usize, rank: usize },
    #[error("map is not injective on cone {cone}")]
    NotInjective { cone: usize },
    #[error("the fan has no nonzero invariant Cartier divisors")]
    NoCartierDivisors,
    #[error("fan not divisorial at presentation level: {0}")]
    NotDivisorial(String),
    #[error("image cones do not form a fan: {0}")]
    InvalidImage(String),
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// Integer matrix from `Z^cols` to `Z^rows`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeMap {
    pub matrix: IntMatrix,
    pub name: Option<String>,
}

/// On-disk map format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapFile {
    pub rows: usize,
    pub cols: usize,
    #[serde(with = "crate::serial::int_vecs")]
    pub entries: Vec<IntVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl LatticeMap {
    pub fn new(matrix: IntMatrix) -> Self {
        LatticeMap { matrix, name: None }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        LatticeMap::new(IntMatrix::from_i64(rows))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn identity(n: usize) -> Self {
        LatticeMap::new(IntMatrix::identity(n))
    }

    pub fn source_rank(&self) -> usize {
        self.matrix.cols()
    }

    pub fn target_rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, v: &[BigInt]) -> IntVector {
        self.matrix.mul_vec(v)
    }

    /// Lattice basis of the kernel, in Hermite normal form.
    pub fn kernel_basis(&self) -> Vec<IntVector> {
        integer_kernel_basis(&self.matrix)
    }

    pub fn to_file(&self) -> MapFile {
        MapFile {
            rows: self.matrix.rows(),
            cols: self.matrix.cols(),
            entries: self.matrix.to_rows(),
            name: self.name.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("map serializes")
    }
}

pub fn parse_map(json: &str) -> Result<LatticeMap, QuotientError> {
    let file: MapFile = serde_json::from_str(json).map_err(|e| QuotientError::Json(e.to_string()))?;
    map_from_file(file)
}

pub fn map_from_file(file: MapFile) -> Result<LatticeMap, QuotientError> {
    if file.entries.len() != file.rows {
        return Err(QuotientError::RowCount { declared: file.rows, found: file.entries.len() });
    }
    for (i, r) in file.entries.iter().enumerate() {
        if r.len() != file.cols {
            return Err(QuotientError::RowLength { row: i, found: r.len(), cols: file.cols });
        }
    }
    let matrix =
        if file.rows == 0 { IntMatrix::zeros(0, file.cols) } else { IntMatrix::from_rows(file.cols, &file.entries) };
    Ok(LatticeMap { matrix, name: file.name })
}

/// Cox lift of a fan with `d` rays: cones of the positive orthant in `Z^d` and the
/// projection `Q(e_i) = v_i`.
#[derive(Clone, Debug)]
pub struct CoxLift {
    pub lifted: Fan,
    pub q: LatticeMap,
    /// Basis of `ker Q`, the sublattice defining the acting subtorus.
    pub kernel_basis: Vec<IntVector>,
    /// Smallest number of coordinates whose common vanishing locus is removed, i.e. the
    /// size of a smallest set of rays not contained in any maximal cone. `None` when
    /// all rays lie in one cone.
    pub exceptional_codim: Option<usize>,
}

pub fn cox_lift(fan: &Fan) -> Result<CoxLift, QuotientError> {
    if !fan.is_nondegenerate() {
        return Err(QuotientError::Degenerate);
    }
    let d = fan.ray_count();
    let lifted = Fan::new(d, IntMatrix::identity(d).to_rows(), fan.max_cones().to_vec())?;
    let lifted = match fan.name() {
        Some(n) => lifted.with_name(format!("{n}-coxlift")),
        None => lifted,
    };
    let q = LatticeMap::new(fan.ray_matrix().transpose());
    let q = match fan.name() {
        Some(n) => q.with_name(format!("{n}-Q")),
        None => q,
    };
    let kernel_basis = q.kernel_basis();
    Ok(CoxLift { exceptional_codim: minimal_nonface_size(fan), lifted, q, kernel_basis })
}

fn minimal_nonface_size(fan: &Fan) -> Option<usize> {
    let d = fan.ray_count();
    let in_some_cone = |s: &[usize]| fan.max_cones().iter().any(|c| s.iter().all(|i| c.contains(i)));
    for k in 1..=d {
        let mut found = false;
        for_each_subset(d, k, &mut |s| {
            if !found && !in_some_cone(s) {
                found = true;
            }
        });
        if found {
            return Some(k);
        }
    }
    None
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Quotient presentation built from a basis of the invariant Cartier divisors.
#[derive(Clone, Debug)]
pub struct KajiwaraPresentation {
    /// Fan in `Z^r` whose cones are the images of the Cox-lifted cones.
    pub hat: Fan,
    /// `r × d`; row `k` is the coefficient vector of the `k`-th Cartier basis element.
    pub q1: LatticeMap,
    pub cartier: CartierLattice,
    /// Basis of `ker Q1`.
    pub kernel_basis: Vec<IntVector>,
    /// Whether the row space of `Q1` is saturated in `Z^d`. When it is not, invariance
    /// under the kernel torus and exact lattice invariance can differ.
    pub row_space_saturated: bool,
}

/// Outcome of the checks that make the Kajiwara diagram well defined.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PresentationChecks {
    pub image_cone_pointed: bool,
    /// Every column of `Q1` spans an extremal ray of the image cone.
    pub rays_extremal: bool,
    /// Per maximal cone: its image is a face of the full image cone.
    pub faces: Vec<bool>,
    /// Per maximal cone `σ`: `dim Q1(σ~) = dim σ`, so the second quotient map is geometric.
    pub dimensions: Vec<bool>,
}

impl PresentationChecks {
    pub fn passed(&self) -> bool {
        self.image_cone_pointed
            && self.rays_extremal
            && self.faces.iter().all(|&b| b)
            && self.dimensions.iter().all(|&b| b)
    }

    fn failure(&self) -> Option<String> {
        if !self.image_cone_pointed {
            return Some("image of the positive orthant is not pointed".into());
        }
        if !self.rays_extremal {
            return Some("some column of Q1 is not an extremal ray of the image cone".into());
        }
        if let Some(c) = self.faces.iter().position(|&b| !b) {
            return Some(format!("image of cone {} is not a face of the image cone", c + 1));
        }
        if let Some(c) = self.dimensions.iter().position(|&b| !b) {
            return Some(format!("image of cone {} drops dimension", c + 1));
        }
        None
    }
}

/// Runs the presentation checks for `Q1` (rows = Cartier basis) on the Cox-lifted cones.
pub fn presentation_checks(fan: &Fan, q1: &IntMatrix) -> PresentationChecks {
    let r = q1.rows();
    let columns: Vec<IntVector> = (0..fan.ray_count()).map(|j| q1.column(j)).collect();
    let full = Cone::new(r, columns.clone());
    let image_cone_pointed = full.is_pointed();
    let rays_extremal = columns.iter().all(|c| !c.iter().all(Zero::is_zero) && full.has_extremal_ray(c));
    let mut faces = Vec::new();
    let mut dimensions = Vec::new();
    for (c, idx) in fan.max_cones().iter().enumerate() {
        let img = Cone::new(r, idx.iter().map(|&j| columns[j].clone()).collect());
        faces.push(img.is_face_of(&full));
        dimensions.push(img.dim() == fan.cone(c).dim());
    }
    PresentationChecks { image_cone_pointed, rays_extremal, faces, dimensions }
}

/// The Kajiwara presentation, or an error naming the first failed check.
pub fn kajiwara_presentation(fan: &Fan) -> Result<KajiwaraPresentation, QuotientError> {
    if !fan.is_nondegenerate() {
        return Err(QuotientError::Degenerate);
    }
    let cartier = fan.cartier_lattice();
    if cartier.rank() == 0 {
        return Err(QuotientError::NoCartierDivisors);
    }
    let d = fan.ray_count();
    let r = cartier.rank();
    let q1m = cartier.matrix(d);
    let checks = presentation_checks(fan, &q1m);
    if let Some(reason) = checks.failure() {
        return Err(QuotientError::NotDivisorial(reason));
    }
    let rays: Vec<IntVector> = (0..d).map(|j| primitive(&q1m.column(j))).collect();
    let hat = Fan::new(r, rays, fan.max_cones().to_vec()).map_err(|e| QuotientError::NotDivisorial(e.to_string()))?;
    let hat = match fan.name() {
        Some(n) => hat.with_name(format!("{n}-hat")),
        None => hat,
    };
    let q1 = LatticeMap::new(q1m);
    let q1 = match fan.name() {
        Some(n) => q1.with_name(format!("{n}-Q1")),
        None => q1,
    };
    let kernel_basis = q1.kernel_basis();
    let row_space_saturated = saturation_index(d, &cartier.basis).is_one();
    Ok(KajiwaraPresentation { hat, q1, cartier, kernel_basis, row_space_saturated })
}

/// The 0/1 point of a Cox-lifted cone: coordinate `j` vanishes iff ray `j` is in the cone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistinguishedPoint {
    pub cone: usize,
    pub coordinates: Vec<u8>,
}

pub fn distinguished_point(d: usize, cone: usize, rays: &[usize]) -> DistinguishedPoint {
    let coordinates = (0..d).map(|j| u8::from(!rays.contains(&j))).collect();
    DistinguishedPoint { cone, coordinates }
}

/// One point per maximal cone of a lifted fan.
pub fn distinguished_points(lifted: &Fan) -> Vec<DistinguishedPoint> {
    lifted.max_cones().iter().enumerate().map(|(c, idx)| distinguished_point(lifted.ray_count(), c, idx)).collect()
}

/// First reason a map fails to be a geometric quotient. Cone indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuotientFailure {
    Shape,
    NotInjective { cone: usize },
    ImageNotInTarget { cone: usize },
    TargetNotCovered { cone: usize },
    SameImage { cone: usize, other: usize },
}

impl std::fmt::Display for QuotientFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QuotientFailure::Shape => write!(f, "map shape does not match the fans"),
            QuotientFailure::NotInjective { cone } => {
                write!(f, "map is not injective on source cone {}", cone + 1)
            }
            QuotientFailure::ImageNotInTarget { cone } => {
                write!(f, "image of source cone {} is not a maximal target cone", cone + 1)
            }
            QuotientFailure::TargetNotCovered { cone } => {
                write!(f, "target cone {} is not the image of a source cone", cone + 1)
            }
            QuotientFailure::SameImage { cone, other } => {
                write!(f, "source cones {} and {} have the same image", other + 1, cone + 1)
            }
        }
    }
}

/// Source fan, lattice map and target fan with the outcome of the quotient checks.
#[derive(Clone, Debug, Serialize)]
pub struct QuotientDiagram {
    #[serde(with = "crate::serial::int_vecs")]
    pub kernel_basis: Vec<IntVector>,
    pub cones_injective: bool,
    pub image_is_target: bool,
    pub bijective_on_cones: bool,
    /// For each source cone, the target cone equal to its image.
    pub cone_images: Vec<Option<usize>>,
    pub first_failure: Option<QuotientFailure>,
}

impl QuotientDiagram {
    pub fn is_geometric_quotient(&self) -> bool {
        self.cones_injective && self.image_is_target && self.bijective_on_cones
    }
}

fn image_cone(p: &IntMatrix, fan: &Fan, c: usize) -> Cone {
    let gens = fan.max_cones()[c].iter().map(|&i| p.mul_vec(&fan.rays()[i])).collect();
    Cone::new(p.rows(), gens)
}

/// Whether `p` is injective on the linear span of cone `c`.
fn injective_on(p: &IntMatrix, fan: &Fan, c: usize) -> bool {
    let idx = &fan.max_cones()[c];
    if idx.is_empty() {
        return true;
    }
    let gens: Vec<IntVector> = idx.iter().map(|&i| fan.rays()[i].clone()).collect();
    let images: Vec<IntVector> = gens.iter().map(|g| p.mul_vec(g)).collect();
    int_rank(&IntMatrix::from_rows(p.cols(), &gens)) == int_rank(&IntMatrix::from_rows(p.rows(), &images))
}

pub fn check_geometric_quotient(source: &Fan, p: &LatticeMap, target: &Fan) -> QuotientDiagram {
    let m = &p.matrix;
    if m.cols() != source.rank() || m.rows() != target.rank() {
        return QuotientDiagram {
            kernel_basis: Vec::new(),
            cones_injective: false,
            image_is_target: false,
            bijective_on_cones: false,
            cone_images: vec![None; source.cone_count()],
            first_failure: Some(QuotientFailure::Shape),
        };
    }
    let kernel_basis = p.kernel_basis();
    let mut failure = None;
    let injective: Vec<bool> = (0..source.cone_count()).map(|c| injective_on(m, source, c)).collect();
    if let Some(c) = injective.iter().position(|&b| !b) {
        failure = Some(QuotientFailure::NotInjective { cone: c });
    }
    let cone_images: Vec<Option<usize>> = (0..source.cone_count())
        .map(|c| {
            let img = image_cone(m, source, c);
            (0..target.cone_count()).find(|&t| img.same_set(target.cone(t)))
        })
        .collect();
    let mut image_is_target = true;
    if let Some(c) = cone_images.iter().position(Option::is_none) {
        image_is_target = false;
        failure.get_or_insert(QuotientFailure::ImageNotInTarget { cone: c });
    }
    if let Some(t) = (0..target.cone_count()).find(|t| !cone_images.contains(&Some(*t))) {
        image_is_target = false;
        failure.get_or_insert(QuotientFailure::TargetNotCovered { cone: t });
    }
    let mut bijective = true;
    let mut first_source: BTreeMap<usize, usize> = BTreeMap::new();
    for (c, t) in cone_images.iter().enumerate() {
        if let Some(t) = t {
            if let Some(&other) = first_source.get(t) {
                bijective = false;
                failure.get_or_insert(QuotientFailure::SameImage { cone: c, other });
            } else {
                first_source.insert(*t, c);
            }
        }
    }
    let bijective_on_cones = bijective && image_is_target && source.cone_count() == target.cone_count();
    QuotientDiagram {
        kernel_basis,
        cones_injective: injective.iter().all(|&b| b),
        image_is_target,
        bijective_on_cones,
        cone_images,
        first_failure: failure,
    }
}

/// Fan formed by the images of the maximal cones of `source`, validated.
pub fn image_fan(p: &LatticeMap, source: &Fan) -> Result<Fan, QuotientError> {
    let m = &p.matrix;
    if m.cols() != source.rank() {
        return Err(QuotientError::Shape { rows: m.rows(), cols: m.cols(), rank: source.rank() });
    }
    for c in 0..source.cone_count() {
        if !injective_on(m, source, c) {
            return Err(QuotientError::NotInjective { cone: c });
        }
    }
    let mut rays: Vec<IntVector> = Vec::new();
    let mut index = Vec::with_capacity(source.ray_count());
    for v in source.rays() {
        let w = primitive(&m.mul_vec(v));
        let pos = match rays.iter().position(|r| *r == w) {
            Some(pos) => pos,
            None => {
                rays.push(w);
                rays.len() - 1
            }
        };
        index.push(pos);
    }
    let cones = source.max_cones().iter().map(|c| c.iter().map(|&i| index[i]).collect()).collect();
    let fan = Fan::new(m.rows(), rays, cones)?;
    let report: ValidationReport = fan.validate();
    if !report.is_valid() {
        return Err(QuotientError::InvalidImage(report.to_string()));
    }
    Ok(fan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int_vec;

    fn p1() -> Fan {
        Fan::from_i64(1, &[&[1], &[-1]], &[&[0], &[1]]).unwrap()
    }

    #[test]
    fn subsets_in_lex_order() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, &mut |s| seen.push(s.to_vec()));
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        let mut count = 0;
        for_each_subset(3, 0, &mut |_| count += 1);
        assert_eq!(count, 1);
        for_each_subset(2, 3, &mut |_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn p1_cox_lift() {
        let lift = cox_lift(&p1()).unwrap();
        assert_eq!(lift.q.matrix, IntMatrix::from_i64(&[&[1, -1]]));
        assert_eq!(lift.kernel_basis, vec![int_vec(&[1, 1])]);
        assert_eq!(lift.exceptional_codim, Some(2));
        let pts = distinguished_points(&lift.lifted);
        assert_eq!(pts[0].coordinates, vec![0, 1]);
        assert!(image_fan(&lift.q, &lift.lifted).unwrap().equivalent(&p1()));
    }

    #[test]
    fn identity_is_a_geometric_quotient() {
        let f = p1();
        let diag = check_geometric_quotient(&f, &LatticeMap::identity(1), &f);
        assert!(diag.is_geometric_quotient());
        assert!(diag.kernel_basis.is_empty());
    }

    #[test]
    fn collapsing_map_is_rejected() {
        let f = Fan::from_i64(2, &[&[1, 0], &[0, 1]], &[&[0, 1]]).unwrap();
        let p = LatticeMap::from_i64(&[&[1, 1]]);
        let target = Fan::from_i64(1, &[&[1]], &[&[0]]).unwrap();
        let diag = check_geometric_quotient(&f, &p, &target);
        assert!(!diag.cones_injective);
        assert_eq!(diag.first_failure, Some(QuotientFailure::NotInjective { cone: 0 }));
        assert!(matches!(image_fan(&p, &f), Err(QuotientError::NotInjective { cone: 0 })));
    }

    #[test]
    fn map_json_round_trip() {
        let p = LatticeMap::from_i64(&[&[1, -1, 0], &[0, 2, 3]]).with_name("m");
        assert_eq!(parse_map(&p.to_json()).unwrap(), p);
        assert!(matches!(parse_map(r#"{"rows":1,"cols":2,"entries":[[1]]}"#), Err(QuotientError::RowLength { .. })));
    }

    #[test]
    fn p2_kajiwara_presentation() {
        let f = Fan::from_i64(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[0, 2]]).unwrap();
        let k = kajiwara_presentation(&f).unwrap();
        assert_eq!(k.q1.matrix.rows(), 3);
        assert!(k.kernel_basis.is_empty());
        assert!(k.row_space_saturated);
        assert!(k.hat.validate().is_valid());
    }
}
