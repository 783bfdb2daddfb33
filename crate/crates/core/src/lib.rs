//! Periodic orbits, pressure and large deviations for expanding and intermittent
//! one-dimensional maps and subshifts of finite type.

pub mod cli;
pub mod deviations;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod oracle;
pub mod orbits;
pub mod systems;
pub mod thermo;
pub mod word;

pub use error::{Error, Result};
