//! Time evolution: exact linear flows, Lawson integrators for the nonlinear
//! Klein-Gordon and normal-form systems, and the Lie transform `T⁽¹⁾`.
//!
//! All solvers run in physical time. States are spectral coefficients; the
//! diagonal part `iω(ξ)` of each equation is applied exactly and only the
//! nonlinearity is discretized in time.

pub mod evolve;
pub mod io;
pub mod lawson;
pub mod lie;
pub mod linear;
pub mod system;

pub use evolve::{evolve, evolve_system, Trajectory};
pub use io::{
    read_snapshots, write_snapshot, write_trajectory_csv, write_trajectory_snapshots, Snapshot,
};
pub use lawson::LawsonStepper;
pub use lie::{lie_transform, Direction, LieTransform};
pub use linear::{kg_linear_flow, ur_linear_flow};
pub use system::{EvolutionSpec, State, System, SystemKind};
