//! Exact dense linear algebra over ℚ and prime fields.

mod field;
mod matrix;

pub use field::{FieldSpec, Scalar};
pub use matrix::{induced_map_on_quotients, quotient_representatives, Kernel, Matrix, Quotient, RowReduction};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("{0} is not a supported prime modulus")]
    NotPrime(u64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector [{}] does not map into the target subspace", witness.join(", "))]
    NotInSubspace { witness: Vec<String> },
}
