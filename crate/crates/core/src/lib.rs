//! Geodesic double-coset lattice counting for cocompact Fuchsian groups.

pub mod error;
pub mod experiments;
pub mod fuchsian;
pub mod numerics;
pub mod quad;
pub mod resonance;
pub mod spectral;
pub mod specfun;
pub mod transforms;

pub use error::{Error, Result};
