//! Exact integer and rational linear algebra.

mod elim;
mod lattice;
mod lp;
mod matrix;

pub use elim::{
    determinant, in_row_span, int_rank, integral_kernel_span, rank, rational_kernel, row_space_basis, rref, solve, Rref,
};
pub use lattice::{
    elementary_divisors, hermite_normal_form, hnf_basis, in_lattice_image, integer_kernel_basis, lattice_basis,
    same_lattice, saturation, saturation_index, smith_normal_form, solve_integral,
};
pub use lp::{strict_lp_feasibility, verify_witness, FarkasCertificate, FeasibilityOutcome};
pub use matrix::{
    clear_denominators, dot, fmt_vec, gcd_of, int_vec, is_primitive, is_zero_vec, neg_vec, primitive,
    primitive_integral, rat_sign, sign, to_rational_vec, IntMatrix, IntVector, Matrix, QVector, RatMatrix, Rational,
};
