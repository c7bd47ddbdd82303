use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::special::{inc_beta_pair, ln_beta};

/// Beta distribution parameterized by mean `mu` and precision `phi`,
/// i.e. shapes `α = μφ` and `β = (1 − μ)φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaMuPhi {
    pub mu: f64,
    pub phi: f64,
}

impl BetaMuPhi {
    pub fn new(mu: f64, phi: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::domain(format!("beta mean must lie in (0, 1), got {mu}")));
        }
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(Error::domain(format!("beta precision must be positive, got {phi}")));
        }
        Ok(Self { mu, phi })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.mu * self.phi
    }

    #[inline]
    pub fn beta_shape(&self) -> f64 {
        (1.0 - self.mu) * self.phi
    }

    pub fn mean(&self) -> f64 {
        self.mu
    }

    pub fn variance(&self) -> f64 {
        self.mu * (1.0 - self.mu) / (1.0 + self.phi)
    }

    /// Log-density on the open interval; 0 and 1 are a boundary error.
    pub fn logpdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y < 1.0) {
            return Err(Error::Boundary(format!("y = {y}")));
        }
        let (a, b) = (self.alpha(), self.beta_shape());
        Ok((a - 1.0) * y.ln() + (b - 1.0) * (-y).ln_1p() - ln_beta(a, b))
    }

    /// Density on the closed interval, using the limiting value (0, finite or
    /// +∞) at the endpoints.
    pub fn pdf_closed(&self, y: f64) -> f64 {
        let (a, b) = (self.alpha(), self.beta_shape());
        let end = |shape: f64, other: f64| -> f64 {
            if shape < 1.0 {
                f64::INFINITY
            } else if shape == 1.0 {
                // 1 / B(1, other) = other
                other
            } else {
                0.0
            }
        };
        if y <= 0.0 {
            end(a, b)
        } else if y >= 1.0 {
            end(b, a)
        } else {
            self.logpdf(y).map(f64::exp).unwrap_or(f64::NAN)
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let (a, b) = (self.alpha(), self.beta_shape());
        inc_beta_pair(y.clamp(0.0, 1.0), 1.0 - y.clamp(0.0, 1.0), a, b, ln_beta(a, b)).0
    }
}
