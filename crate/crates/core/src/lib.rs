//! Integrable classical Heisenberg spin systems.
//!
//! The crate decides whether a spin system admits a full set of commuting
//! constants of motion of Heisenberg type, builds the partition tree that
//! witnesses it, evolves such systems in closed form as products of
//! rotations, diagonalizes their quantum counterparts in a coupled
//! Clebsch-Gordan basis, and composes exact sub-flows into splitting
//! integrators for systems that are not integrable.

pub mod bracket;
pub mod catalog;
pub mod commutant;
pub mod error;
pub mod evolution;
pub mod exact;
pub mod graph;
pub mod heisenberg;
pub mod io;
pub mod numerics;
pub mod quantum;
pub mod random;
pub mod tree;

pub use error::{Error, Result};
pub use heisenberg::{CouplingMatrix, FieldVector, SpinConfiguration};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
