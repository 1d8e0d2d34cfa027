use crate::discount::DiscountSpec;
use crate::error::{Error, Result};

/// Scalar coefficients of the model: horizon `T`, state volatility `σ`,
/// effort-cost ratio `R` and the discount function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub horizon: f64,
    pub sigma: f64,
    pub cost_ratio: f64,
    pub discount: DiscountSpec,
}

impl ModelParams {
    pub fn new(horizon: f64, sigma: f64, cost_ratio: f64, discount: DiscountSpec) -> Result<Self> {
        let params = ModelParams {
            horizon,
            sigma,
            cost_ratio,
            discount,
        };
        params.validate()?;
        Ok(params)
    }

    /// `T = 10, σ = 0.25, R = 0.5` with the mixture `λ = 0.5, ρ = 0.15, γ = 0.3`.
    pub fn baseline() -> Self {
        ModelParams {
            horizon: 10.0,
            sigma: 0.25,
            cost_ratio: 0.5,
            discount: DiscountSpec::Mixture {
                lambda: 0.5,
                rho: 0.15,
                gamma: 0.3,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::param(format!(
                "horizon T must be a positive finite number (got {})",
                self.horizon
            )));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::param(format!(
                "volatility sigma must be finite and >= 0 (got {})",
                self.sigma
            )));
        }
        if !(self.cost_ratio > 0.0 && self.cost_ratio <= 1.0) {
            return Err(Error::param(format!(
                "effort-cost ratio R must satisfy 0 < R <= 1 (got {}); equilibria are not guaranteed outside this range",
                self.cost_ratio
            )));
        }
        self.discount.validate()
    }

    pub fn with_discount(mut self, discount: DiscountSpec) -> Result<Self> {
        self.discount = discount;
        self.validate()?;
        Ok(self)
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// `(1 - R)/R`, the net weight of the quadratic term in the game Riccati
    /// equations.
    pub fn game_weight(&self) -> f64 {
        (1.0 - self.cost_ratio) / self.cost_ratio
    }

    pub(crate) fn check_time(&self, s: f64, what: &str) -> Result<()> {
        if !(s >= 0.0 && s <= self.horizon) {
            return Err(Error::domain(format!(
                "{what} = {s} lies outside [0, {}]",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// `n` equal steps on `[0, horizon]`, with the last node pinned to `horizon`.
pub fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    let mut grid: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
    grid[n] = horizon;
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_is_valid() {
        ModelParams::baseline().validate().unwrap();
    }

    #[test]
    fn rejects_cost_ratio_above_one() {
        let err = ModelParams::new(10.0, 0.25, 1.5, ModelParams::baseline().discount).unwrap_err();
        assert!(err.to_string().contains("0 < R <= 1"));
        assert!(ModelParams::new(10.0, 0.25, 0.0, ModelParams::baseline().discount).is_err());
        assert!(ModelParams::new(0.0, 0.25, 0.5, ModelParams::baseline().discount).is_err());
        assert!(ModelParams::new(10.0, -0.1, 0.5, ModelParams::baseline().discount).is_err());
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = uniform_grid(7.3, 9);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 7.3);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
