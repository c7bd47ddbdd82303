pub mod data;
pub mod datasets;
pub mod distributions;
pub mod error;
pub mod hier_linear;
pub mod hier_nonlinear;
pub mod mcmc;
pub mod numeric;
pub mod regression;
pub mod simulation;

pub use error::{Error, Result};
