//! Teacher-reference-student semi-supervised score regression on feature
//! sequences, with a small reverse-mode autodiff engine underneath.

pub mod autodiff;
pub mod data;
pub mod error;
pub mod eval;
pub mod memory;
pub mod networks;
pub mod objectives;
pub mod params;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
