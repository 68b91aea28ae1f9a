//! Exact linear algebra over ℤ, ℚ and ℤ/p for boundary matrices.

pub mod field;
pub mod snf;
pub mod sparse;

pub use field::{rank as field_rank, Field, PrimeField, Rationals};
pub use snf::elementary_divisors;
pub use sparse::SparseMatrix;
