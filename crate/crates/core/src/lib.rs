//! Fréchet polynomials and monomials over commutative semigroups, and the
//! section method for functional equations that reduce to them.

pub mod acceptance;
pub mod algebra;
pub mod calculus;
pub mod cli;
pub mod equations;
pub mod error;
pub mod harness;
pub mod section;

pub use error::{Error, Result};
