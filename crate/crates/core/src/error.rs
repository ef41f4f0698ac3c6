use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("d∘d ≠ 0 at degree {degree} (basis element {column})")]
    NotAComplex { degree: i64, column: usize },
    #[error("not a chain map at degree {degree}: {detail}")]
    NotAChainMap { degree: i64, detail: String },
    #[error("axiom violated: {0}")]
    Axiom(crate::dg::Violation),
    #[error("invalid structure: {0}")]
    Invalid(String),
    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("generator cap of {cap} exceeded while resolving (reached degree {degree}, {generators} generators)")]
    ResourceBound {
        cap: usize,
        degree: i64,
        generators: usize,
    },
    #[error("witness rejected at node {node}: {detail}")]
    WitnessRejected { node: usize, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
