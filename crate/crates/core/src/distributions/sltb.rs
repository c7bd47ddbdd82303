//! The scale-location-truncated beta (SLTB) distribution.
//!
//! A beta variate `y ~ B(μ, φ)` is mapped through `z = (y − l)·s` and the
//! result is truncated to `[0, 1]`. For `l > 0` and `1/s + l < 1` the density
//! stays positive and finite at both endpoints, so observations at exactly 0
//! or 1 carry finite likelihood.

use serde::{Deserialize, Serialize};

use super::beta::BetaMuPhi;
use crate::error::{Error, Result};
use crate::numeric::rng::{sample_beta, Rng};
use crate::numeric::special::{inc_beta_pair, inv_reg_inc_beta, ln_beta, ln_gamma};

/// `1 + 10^{-8.5}`
pub const DEFAULT_SCALE: f64 = 1.0 + 3.162_277_660_168_379_4e-9;
/// `10^{-9}`
pub const DEFAULT_LOCATION: f64 = 1e-9;

const MAX_REJECTIONS: u64 = 1_000_000;

/// The `(s, l)` transform shared by every SLTB density with the same tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleLocation {
    pub s: f64,
    pub l: f64,
}

impl Default for ScaleLocation {
    fn default() -> Self {
        Self {
            s: DEFAULT_SCALE,
            l: DEFAULT_LOCATION,
        }
    }
}

impl ScaleLocation {
    pub fn new(s: f64, l: f64) -> Result<Self> {
        let sl = Self { s, l };
        sl.validate()?;
        Ok(sl)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { s, l } = *self;
        if !(s > 0.0) || !s.is_finite() || !(l >= 0.0) || !(l < 1.0) {
            return Err(Error::domain(format!("invalid scale/location s = {s}, l = {l}")));
        }
        if self.upper_gap() < 0.0 {
            return Err(Error::domain(format!(
                "scale/location must satisfy 1/s + l <= 1, got s = {s}, l = {l}"
            )));
        }
        Ok(())
    }

    /// `1 − (1/s + l)`, computed without cancellation.
    #[inline]
    pub fn upper_gap(&self) -> f64 {
        (self.s - 1.0) / self.s - self.l
    }

    /// Both endpoints of `[0, 1]` map strictly inside the beta support.
    pub fn has_finite_boundaries(&self) -> bool {
        self.l > 0.0 && self.upper_gap() > 0.0
    }

    /// Maps `g` to the beta argument `t = g/s + l`; returns `(t, 1 − t)`.
    #[inline]
    fn to_beta_scale(&self, g: f64) -> (f64, f64) {
        (g / self.s + self.l, (1.0 - g) / self.s + self.upper_gap())
    }

    /// `(F(l), 1 − F(1/s + l))`: the beta mass cut off below 0 and above 1.
    #[inline]
    fn cut_tails(&self, a: f64, b: f64, ln_b: f64) -> (f64, f64) {
        // Each tail is below exp(front)/shape; skip the continued fraction
        // when that bound is far under one ulp of the normalizer.
        const NEGLIGIBLE: f64 = -40.0;
        let lower = if a * self.l.ln() - ln_b - a.ln() < NEGLIGIBLE {
            0.0
        } else {
            inc_beta_pair(self.l, 1.0 - self.l, a, b, ln_b).0
        };
        let gap = self.upper_gap();
        let upper = if b * gap.ln() - ln_b - b.ln() < NEGLIGIBLE {
            0.0
        } else {
            inc_beta_pair(1.0 / self.s + self.l, gap, a, b, ln_b).1
        };
        (lower, upper)
    }

    /// SLTB log-density without parameter validation. Returns NaN or −∞ when
    /// the inputs are outside the support; likelihood loops check finiteness.
    #[inline]
    pub fn ln_pdf(&self, g: f64, mu: f64, phi: f64) -> f64 {
        self.ln_pdf_with(g, mu, phi, ln_gamma(phi))
    }

    /// As [`ln_pdf`](Self::ln_pdf) with `ln Γ(φ)` supplied by the caller.
    #[inline]
    pub fn ln_pdf_with(&self, g: f64, mu: f64, phi: f64, ln_gamma_phi: f64) -> f64 {
        let a = mu * phi;
        let b = (1.0 - mu) * phi;
        let ln_b = ln_gamma(a) + ln_gamma(b) - ln_gamma_phi;
        let (t, one_minus_t) = self.to_beta_scale(g);
        let (lower, upper) = self.cut_tails(a, b, ln_b);
        (a - 1.0) * t.ln() + (b - 1.0) * one_minus_t.ln() - ln_b - self.s.ln() - (-(lower + upper)).ln_1p()
    }
}

/// Full parameterization of an SLTB law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SltbParams {
    pub mu: f64,
    pub phi: f64,
    pub s: f64,
    pub l: f64,
}

/// One rejection-sampled SLTB draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SltbSample {
    pub value: f64,
    pub rejections: u64,
}

impl SltbParams {
    pub fn new(mu: f64, phi: f64, s: f64, l: f64) -> Result<Self> {
        BetaMuPhi::new(mu, phi)?;
        ScaleLocation::new(s, l)?;
        Ok(Self { mu, phi, s, l })
    }

    /// With the default tuning `s = 1 + 10^{-8.5}`, `l = 10^{-9}`.
    pub fn with_defaults(mu: f64, phi: f64) -> Result<Self> {
        Self::new(mu, phi, DEFAULT_SCALE, DEFAULT_LOCATION)
    }

    pub fn scale_location(&self) -> ScaleLocation {
        ScaleLocation { s: self.s, l: self.l }
    }

    /// The untransformed beta law.
    pub fn base(&self) -> BetaMuPhi {
        BetaMuPhi {
            mu: self.mu,
            phi: self.phi,
        }
    }

    fn shapes(&self) -> (f64, f64, f64) {
        let b = self.base();
        let (a, bb) = (b.alpha(), b.beta_shape());
        (a, bb, ln_beta(a, bb))
    }

    /// Density of the scale-location transformed variable `z = (y − l)·s`
    /// before truncation, on `[−l·s, (1 − l)·s]`.
    pub fn sl_pdf(&self, z: f64) -> Result<f64> {
        let lo = -self.l * self.s;
        let hi = (1.0 - self.l) * self.s;
        if !(z >= lo && z <= hi) {
            return Err(Error::domain(format!("z = {z} outside the transformed support [{lo}, {hi}]")));
        }
        let y = (z / self.s + self.l).clamp(0.0, 1.0);
        Ok(self.base().pdf_closed(y) / self.s)
    }

    /// Probability that the transformed variable lands in `[0, 1]`:
    /// `F(1/s + l) − F(l)`.
    pub fn normalizer(&self) -> f64 {
        let (a, b, ln_b) = self.shapes();
        let (lower, upper) = self.scale_location().cut_tails(a, b, ln_b);
        1.0 - lower - upper
    }

    pub fn logpdf(&self, g: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::domain(format!("SLTB support is [0, 1], got g = {g}")));
        }
        let sl = self.scale_location();
        if (g == 0.0 && self.l <= 0.0) || (g == 1.0 && sl.upper_gap() <= 0.0) {
            return Err(Error::Boundary(format!(
                "g = {g} with s = {}, l = {} maps onto the beta boundary",
                self.s, self.l
            )));
        }
        let v = sl.ln_pdf(g, self.mu, self.phi);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::non_finite(format!("SLTB log-density at g = {g}")))
        }
    }

    pub fn pdf(&self, g: f64) -> Result<f64> {
        self.logpdf(g).map(f64::exp)
    }

    /// Truncated CDF `(F(g/s + l) − F(l)) / (F(1/s + l) − F(l))`.
    pub fn cdf(&self, g: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::domain(format!("SLTB support is [0, 1], got g = {g}")));
        }
        Ok(self.cdf_unchecked(g))
    }

    fn cdf_unchecked(&self, g: f64) -> f64 {
        if g <= 0.0 {
            return 0.0;
        }
        if g >= 1.0 {
            return 1.0;
        }
        let (a, b, ln_b) = self.shapes();
        let sl = self.scale_location();
        let (lower, upper) = sl.cut_tails(a, b, ln_b);
        let norm = 1.0 - lower - upper;
        let (t, one_minus_t) = sl.to_beta_scale(g);
        let (below, above) = inc_beta_pair(t, one_minus_t, a, b, ln_b);
        let v = if below < 0.5 {
            (below - lower) / norm
        } else {
            1.0 - (above - upper) / norm
        };
        v.clamp(0.0, 1.0)
    }

    /// Right inverse of [`cdf`](Self::cdf): bisection on `[0, 1]` seeded by
    /// the beta quantile of the matching untruncated probability.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain(format!("quantile level must lie in [0, 1], got {q}")));
        }
        if q == 0.0 {
            return Ok(0.0);
        }
        if q == 1.0 {
            return Ok(1.0);
        }
        let (a, b, ln_b) = self.shapes();
        let (lower, upper) = self.scale_location().cut_tails(a, b, ln_b);
        let target = (lower + q * (1.0 - lower - upper)).clamp(0.0, 1.0);
        let seed = ((inv_reg_inc_beta(target, a, b)? - self.l) * self.s).clamp(0.0, 1.0);

        let (mut lo, mut hi) = (0.0, 1.0);
        let w = 1e-6;
        let (slo, shi) = ((seed - w).max(0.0), (seed + w).min(1.0));
        if self.cdf_unchecked(slo) <= q && self.cdf_unchecked(shi) >= q {
            lo = slo;
            hi = shi;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf_unchecked(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `E(G) = s·(μ − l)`.
    pub fn mean(&self) -> f64 {
        self.s * (self.mu - self.l)
    }

    /// `Var(G) = s²·μ(1 − μ)/(φ + 1)`.
    pub fn variance(&self) -> f64 {
        self.s * self.s * self.mu * (1.0 - self.mu) / (self.phi + 1.0)
    }

    /// Rejection sampler: draw `y` from the base beta law, map to
    /// `z = (y − l)·s`, accept when `z ∈ [0, 1]`.
    pub fn sample(&self, rng: &mut Rng) -> Result<SltbSample> {
        let base = self.base();
        let (a, b) = (base.alpha(), base.beta_shape());
        for rejections in 0..MAX_REJECTIONS {
            let y = sample_beta(rng, a, b)?;
            let z = (y - self.l) * self.s;
            if (0.0..=1.0).contains(&z) {
                return Ok(SltbSample { value: z, rejections });
            }
        }
        Err(Error::non_finite(format!(
            "SLTB rejection sampler exceeded {MAX_REJECTIONS} proposals (normalizer {})",
            self.normalizer()
        )))
    }
}
