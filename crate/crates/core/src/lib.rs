//! Finite trace models and compiler-correctness criteria stated over relations between
//! source and target traces.
//!
//! Everything is bounded: universes are finite, quantification over properties is
//! exhaustive below a cap and seeded sampling (or a cap error) above it.

pub mod ani;
pub mod config;
pub mod criteria;
pub mod error;
pub mod galois;
pub mod property;
pub mod random;
pub mod robust;
pub mod trace;
pub mod verdict;

pub use config::QuantConfig;
pub use error::{Error, Result};
