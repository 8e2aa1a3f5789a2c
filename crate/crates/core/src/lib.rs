//! Effective Hamiltonians for linearly driven qubits beyond the rotating
//! wave approximation, stroboscopic propagation, geometric path functionals
//! over the gauge family, and the variational machinery that probes whether
//! the effective evolution minimizes them.

pub mod drive;
pub mod erroranalysis;
pub mod error;
pub mod functional;
pub mod optimize;
pub mod propagate;
pub mod quadrature;
pub mod su2;
pub mod variational;
pub mod vec3;

pub use error::{Error, Result};
pub use su2::{PauliVector, RotationVector, Unitary2};
pub use vec3::Vec3;
