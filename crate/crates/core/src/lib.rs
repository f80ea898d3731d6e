//! Entanglement distillation with quaternary LDPC codes decoded by belief propagation.

pub mod channel;
pub mod codes;
pub mod decoder;
pub mod error;
pub mod field;
pub mod gf2;
pub mod harness;
pub mod protocol;
pub mod rng;
pub mod tanner;

pub use error::{Error, Result};
pub use field::{Gf4, ProbVec4};
