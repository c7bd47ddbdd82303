//! Beta and SLTB regression with a logit mean link and constant precision.

pub mod design;
pub mod fit;
pub mod likelihood;
pub mod report;
pub mod spec;

pub use design::{build_design, Design};
pub use fit::{fit_design, fit_mle, starting_values, FitResult};
pub use likelihood::{boundary_rows, loglik, loglik_beta, loglik_sltb, Family};
pub use report::{mse, mse_of, predict_mean, residuals, MseReport, MseSubset};
pub use spec::{Coding, FactorSpec, RegressionSpec};
