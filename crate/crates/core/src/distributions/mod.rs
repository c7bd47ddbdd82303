pub mod beta;
pub mod sltb;
pub mod tuning;

pub use beta::BetaMuPhi;
pub use sltb::{ScaleLocation, SltbParams, SltbSample, DEFAULT_LOCATION, DEFAULT_SCALE};
pub use tuning::{tune_scale_location, TuningGrid, TuningResult};
