//! Exact homological algebra over differential graded algebras.

pub mod complex;
pub mod derived;
pub mod dg;
pub mod epi;
pub mod error;
pub mod linalg;
pub mod resolution;
pub mod text;

pub use error::{Error, Result};
