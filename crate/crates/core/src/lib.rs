//! Pseudospectral laboratory for the nonrelativistic limit of nonlinear
//! Klein-Gordon equations and their normal forms.
//!
//! [`grid`] holds periodic grids and fields, [`multipliers`] the Fourier
//! operators, [`hamalg`] the exact normal-form algebra, [`propagators`] the
//! time integrators and [`harness`] the convergence experiments.

pub mod error;
pub mod grid;
pub mod hamalg;
pub mod harness;
pub mod multipliers;
pub mod propagators;

pub use error::{Error, Result};
pub use grid::{make_grid, Field, FieldPair, Grid, C64};
