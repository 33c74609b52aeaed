//! Lévy triples, random-integral transforms and their numerical verification.

pub mod classify;
pub mod doc;
pub mod error;
pub mod exponent;
pub mod hyperbolic;
pub mod measure;
pub mod quad;
pub mod simulate;
pub mod special;
pub mod transform;
pub mod triple;
pub mod verify;

pub use error::{LevyError, Result};
pub use measure::{Direction, LevyMeasure};
pub use triple::LevyTriple;
