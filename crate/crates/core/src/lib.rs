//! Curvature operators of bi-invariant, scaled-up, submersion and
//! cohomogeneity-one metrics, together with a decision procedure for strong
//! nonnegativity: does some 4-form `ω` make `R + ω` positive-semidefinite?
//!
//! All operators live on `∧²V` in a frame that is orthonormal for the metric
//! at hand; the [`exterior`] module holds the bivector and 4-form bases, the
//! Bianchi projection and sectional curvature.  [`lie`] provides Lie algebras
//! in ad-invariant orthonormal bases, [`curvature`] the constructors,
//! [`certifier`] the primal/dual certificates, [`cohom1`] the disk-bundle
//! assemblies and [`fdoracle`] an independent finite-difference check.

pub mod certifier;
pub mod cohom1;
pub mod curvature;
pub mod error;
pub mod exterior;
pub mod fdoracle;
pub mod lie;
pub mod linalg;
pub mod random;

pub use error::{Error, Result};
pub use exterior::{BivectorFrame, FourForm, SymmetricBivectorOperator};
pub use lie::{LieAlgebra, Subspace};

/// Library version reported in CLI outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
