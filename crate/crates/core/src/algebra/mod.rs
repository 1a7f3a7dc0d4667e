//! Exact arithmetic and linear algebra.
//!
//! Field elements are plain `u32` values in `[0, p)`; the [`PrimeField`]
//! handle carries the modulus. The ring `R_n = F_q[t]/<phi>` is represented
//! by [`Ring`], which packs ring elements into integer codes whose numeric
//! order agrees with the canonical serialization order.

mod field;
mod matrix;
mod ring;
mod sparse;
mod spectral;

pub use field::{inv, is_prime, PrimeField, MAX_MODULUS};
pub use matrix::{rank_nullspace, rref, Elimination, ExactMatrix, RhsOutcome, Rref};
pub use ring::{is_primitive, primitive_modulus, ring_mul, PrimitiveModulus, Ring, RingElement};
pub use sparse::CsrMatrix;
pub use spectral::{
    second_eigenvalue, second_eigenvalue_dense, SpectralMethod, SpectralOptions, SpectralResult,
};
