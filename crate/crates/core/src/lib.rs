pub mod basefield;
pub mod gradedfield;
pub mod gradedvaluation;
pub mod galois;
pub mod zrspace;
pub mod quotient;
pub mod report;
pub mod fixtures;
pub mod config;
pub mod expr;
pub mod error;
pub mod lattice;
pub mod matrix;

pub use error::{Error, Result};
