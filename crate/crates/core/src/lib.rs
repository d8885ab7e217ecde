//! Exact computations on rational polyhedral fans: lattice linear algebra, cones,
//! fan validation, projectivity tests through Gale duality, toric quotient
//! constructions and k-divisoriality decisions with checkable certificates.
//!
//! All arithmetic is exact. Every positive or negative answer carries a witness or
//! a certificate that can be re-verified independently of the code that produced it.

pub mod cone;
pub mod corpus;
pub mod divisorial;
pub mod fan;
pub mod gale;
pub mod linalg;
pub mod quotient;
pub mod random;
pub mod serial;

pub use cone::Cone;
pub use divisorial::{k_divisoriality, KDivInstance, KDivReport};
pub use fan::{parse_fan, CartierLattice, Fan, FanError, ValidationReport};
pub use gale::{gale_transform, shephard_test, support_function_test, GaleData, ProjectivityVerdict};
pub use linalg::{FarkasCertificate, FeasibilityOutcome, IntMatrix, IntVector, QVector, RatMatrix, Rational};
pub use quotient::{check_geometric_quotient, cox_lift, kajiwara_presentation, parse_map, LatticeMap};
