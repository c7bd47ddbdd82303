//! Numerical kernel: special functions, quadrature, finite differences,
//! optimization, random variates and small statistics helpers.

pub mod diff;
pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;

pub use diff::{numeric_gradient, numeric_hessian};
pub use quadrature::{integrate, QuadratureRule};
pub use rng::{sample_beta, sample_gamma, sample_normal, sample_uniform, Rng};
pub use special::{inv_logit, inv_reg_inc_beta, lgamma, logit, reg_inc_beta, std_normal_cdf};
