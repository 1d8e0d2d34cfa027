//! Discount functions: exponential and the two-rate mixture used to model
//! present bias.
//!
//! For the mixture `α(t) = λe^{-ρt} + (1-λ)e^{-γt}` with `γ > ρ`, the implied
//! rate `-α'(t)/α(t)` falls from the short-run rate `ρ + (1-λ)(γ-ρ)` at `t = 0`
//! toward the long-run rate `ρ`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscountSpec {
    Exponential { rho: f64 },
    Mixture { lambda: f64, rho: f64, gamma: f64 },
}

impl DiscountSpec {
    pub fn exponential(rho: f64) -> Result<Self> {
        let spec = DiscountSpec::Exponential { rho };
        spec.validate()?;
        Ok(spec)
    }

    pub fn mixture(lambda: f64, rho: f64, gamma: f64) -> Result<Self> {
        let spec = DiscountSpec::Mixture { lambda, rho, gamma };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the constructor invariants. Variants can be built directly, so
    /// everything that accepts a spec re-validates it.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DiscountSpec::Exponential { rho } => {
                if !(rho.is_finite() && rho > 0.0) {
                    return Err(Error::param(format!(
                        "exponential discount rate rho must be > 0 (got {rho})"
                    )));
                }
            }
            DiscountSpec::Mixture { lambda, rho, gamma } => {
                if !(rho.is_finite() && rho > 0.0) {
                    return Err(Error::param(format!(
                        "mixture long-run rate rho must be > 0 (got {rho})"
                    )));
                }
                if !(gamma.is_finite() && gamma > rho) {
                    return Err(Error::param(format!(
                        "mixture short-run rate gamma must exceed rho (got gamma={gamma}, rho={rho})"
                    )));
                }
                if !(lambda > 0.0 && lambda < 1.0) {
                    return Err(Error::param(format!(
                        "mixture weight lambda must lie strictly inside (0, 1) (got {lambda})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, DiscountSpec::Exponential { .. })
    }

    /// `α(t)`.
    pub fn alpha(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.weight(t))
    }

    /// `dα/dt`, always negative.
    pub fn alpha_derivative(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.slope(t))
    }

    /// Instantaneous discount rate `-α'(t)/α(t)`.
    pub fn implied_rate(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match *self {
            DiscountSpec::Exponential { rho } => rho,
            DiscountSpec::Mixture { lambda, rho, gamma } => {
                // Written so that e^{(γ-ρ)t} overflowing to +inf yields ρ.
                rho + (1.0 - lambda) * (gamma - rho)
                    / (lambda * ((gamma - rho) * t).exp() + 1.0 - lambda)
            }
        })
    }

    /// Rate at `t = 0`.
    pub fn short_run_rate(&self) -> f64 {
        match *self {
            DiscountSpec::Exponential { rho } => rho,
            DiscountSpec::Mixture { lambda, rho, gamma } => rho + (1.0 - lambda) * (gamma - rho),
        }
    }

    /// Limit of the implied rate as `t → ∞`.
    pub fn long_run_rate(&self) -> f64 {
        match *self {
            DiscountSpec::Exponential { rho } | DiscountSpec::Mixture { rho, .. } => rho,
        }
    }

    /// `(weight, rate)` pairs with `α(t) = Σ weight·e^{-rate·t}`.
    pub fn components(&self) -> Vec<(f64, f64)> {
        match *self {
            DiscountSpec::Exponential { rho } => vec![(1.0, rho)],
            DiscountSpec::Mixture { lambda, rho, gamma } => {
                vec![(lambda, rho), (1.0 - lambda, gamma)]
            }
        }
    }

    /// Unchecked `α(t)` for internal loops where `t ≥ 0` holds by construction.
    #[inline]
    pub(crate) fn weight(&self, t: f64) -> f64 {
        match *self {
            DiscountSpec::Exponential { rho } => (-rho * t).exp(),
            DiscountSpec::Mixture { lambda, rho, gamma } => {
                lambda * (-rho * t).exp() + (1.0 - lambda) * (-gamma * t).exp()
            }
        }
    }

    #[inline]
    pub(crate) fn slope(&self, t: f64) -> f64 {
        match *self {
            DiscountSpec::Exponential { rho } => -rho * (-rho * t).exp(),
            DiscountSpec::Mixture { lambda, rho, gamma } => {
                -lambda * rho * (-rho * t).exp() - (1.0 - lambda) * gamma * (-gamma * t).exp()
            }
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain(format!(
            "discount argument must be >= 0 (got {t})"
        )));
    }
    Ok(())
}
