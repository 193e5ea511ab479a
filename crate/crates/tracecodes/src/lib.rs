//! Trace-function laboratory over finite fields: field and character
//! arithmetic, sheaf-style kernel families with conductor accounting,
//! quasi-orthogonality checks, spherical-code counting bounds, and
//! randomized trace-norm experiments.

pub mod acceptance;
pub mod bounds;
pub mod characters;
pub mod cli;
pub mod error;
pub mod field;
pub mod normlab;
pub mod orthogonality;
pub mod poly;
pub mod sheaf;

pub use error::{Error, Result};
