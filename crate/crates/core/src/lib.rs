//! Spectral solvers for two-component Bose-Einstein condensates with
//! Raman-induced spin-orbit coupling.
//!
//! The crate is organized bottom-up: [`grid`] owns the discretization and
//! transforms, [`model`] the parameters and functionals, and the solver
//! modules build on both.

pub mod com_dynamics;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod ground_state;
pub mod model;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use grid::{make_grid, Axis, Basis, Grid};
pub use model::{Frame, Observables, Params, Potential, Spinor};
