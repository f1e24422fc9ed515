pub mod arith;
pub mod diagonals;
pub mod enumerate;
pub mod error;
pub mod grossgalois;
pub mod heckecosets;
pub mod quadratic;
pub mod quaternion;
pub mod ssoracle;

pub use error::{Error, Result};
