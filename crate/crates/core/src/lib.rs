//! Pseudospectral solver and verification tools for capillary
//! Whitham-Boussinesq systems on periodic domains in one and two dimensions.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod experiments;
pub mod error;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod inequalities;
pub mod norms;
pub mod ops;
pub mod presets;
pub mod snapshot;
pub mod state;
pub mod symbol;

pub use error::{Error, Result};
pub use field::Field;
pub use grid::Grid;
pub use state::{Params, WaveState};
pub use symbol::Symbol;
