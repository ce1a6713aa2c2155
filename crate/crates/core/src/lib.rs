//! Numerical toolkit for zero-error superactivation of quantum channels.
//!
//! The crate covers Kraus/Choi channel calculus and the two-state recovery
//! map, bipartite subspaces with their symmetry operations, unextendible
//! product bases, sampling of subspaces under the flip/parity constraints,
//! and a condition suite that certifies each requirement on a candidate
//! subspace.

pub mod channel;
pub mod error;
pub mod json;
pub mod numerics;
pub mod sampler;
pub mod subspace;
pub mod superactivation;
pub mod upb;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, ComplexVector, Seed, C64};
