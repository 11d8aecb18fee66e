//! Coherent-state bosonic codes built from cubature formulas.

pub mod constellation;
pub mod error;
pub mod fock;
pub mod klcheck;
pub mod linalg;
pub mod moments;
pub mod stabilizer;

pub use error::{Error, Result};
