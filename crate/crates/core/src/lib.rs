//! Exact symbolic verification of 2-plectic geometry: the Lie 2-algebra of
//! Hamiltonian observables, the crossed modules of gerbe sections and weak
//! symmetries, and the prequantisation morphism in the exact case.

pub mod cli;
pub mod error;
pub mod exterior;
pub mod gerbe_sections;
pub mod laws;
pub mod lie2;
pub mod linalg;
pub mod observables;
pub mod plectic;
pub mod polyring;
pub mod prequant;
pub mod random;
pub mod report;
pub mod syntax;

pub use error::{Error, Result};
