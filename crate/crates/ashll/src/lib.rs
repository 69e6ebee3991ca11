//! Finite-volume Euler/Navier-Stokes solver on 2D structured meshes with a
//! family of HLL-type approximate Riemann solvers, including all-speed
//! variants with a shock-sensor-driven pressure-dissipation term and a
//! low-Mach velocity fix.
//!
//! The numerics are generic over the scalar type (`f32`/`f64`) through the
//! [`scalar::Scalar`] trait; the type aliases at the crate root fix the
//! default `f64` instantiation used by the binary and the test suite.

pub mod allspeed;
pub mod cases;
pub mod error;
pub mod gas;
pub mod mesh;
pub mod oracles;
pub mod output;
pub mod reconstruction;
pub mod riemann;
pub mod scalar;
pub mod solver;

pub use error::{Result, SolverError};

/// Default-precision aliases for the main building blocks.
pub type GasModel = gas::GasModel<f64>;
pub type PrimitiveState = gas::PrimitiveState<f64>;
pub type ConservedState = gas::ConservedState<f64>;
pub type FluxVector = gas::FluxVector<f64>;
pub type StructuredMesh = mesh::StructuredMesh<f64>;
pub type SolverConfig = solver::SolverConfig<f64>;
pub type FieldSnapshot = solver::FieldSnapshot<f64>;
