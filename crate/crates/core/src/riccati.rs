//! Constant-discount problems: the single player's optimal feedback, the
//! zero-sum game's closed-loop saddle, and the general auxiliary game whose
//! Riccati equation is integrated numerically.

use crate::curve::{validate_grid, StrategyCurve};
use crate::discount::DiscountSpec;
use crate::error::{Error, Result};
use crate::ode::rk4_backward;
use crate::params::ModelParams;

/// Below this `|ρ - σ²|` the closed forms are 0/0 and the analytic limits are
/// used instead.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

/// Blow-up factor over the Lyapunov envelope that aborts the auxiliary solve.
const BLOW_UP_FACTOR: f64 = 10.0;

fn exponential_rate(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    match params.discount {
        DiscountSpec::Exponential { rho } => Ok(rho),
        DiscountSpec::Mixture { .. } => Err(Error::param(
            "closed-form strategies require an exponential discount",
        )),
    }
}

/// Optimal feedback `Θ̂₂(s)` of player 2 alone under exponential discounting.
pub fn single_constant_gain(params: &ModelParams, s: f64) -> Result<f64> {
    let rho = exponential_rate(params)?;
    params.check_time(s, "s")?;
    let r = params.cost_ratio;
    let a = rho - params.sigma2();
    let tau = params.horizon - s;
    if a.abs() < DEGENERACY_THRESHOLD {
        return Ok(-1.0 / (r + tau));
    }
    // (1 + Ra)e^{aτ} - 1, arranged to avoid cancellation near a = 0.
    let denom = (a * tau).exp_m1() + r * a * (a * tau).exp();
    Ok(-a / denom)
}

/// Closed-loop saddle gains `(Θ*₁(s), Θ*₂(s))` of the constant-discount game.
/// `Θ*₁ = -R·Θ*₂` holds exactly.
pub fn game_constant_gains(params: &ModelParams, s: f64) -> Result<(f64, f64)> {
    let rho = exponential_rate(params)?;
    params.check_time(s, "s")?;
    let r = params.cost_ratio;
    let a = rho - params.sigma2();
    let tau = params.horizon - s;
    let theta2 = if a.abs() < DEGENERACY_THRESHOLD {
        -1.0 / (r + (1.0 - r) * tau)
    } else {
        // [1 - R + Ra]e^{aτ} - (1 - R)
        let denom = (1.0 - r) * (a * tau).exp_m1() + r * a * (a * tau).exp();
        -a / denom
    };
    Ok((-r * theta2, theta2))
}

pub fn single_constant_curve(params: &ModelParams, grid: Vec<f64>) -> Result<StrategyCurve> {
    StrategyCurve::try_from_fn(grid, |s| single_constant_gain(params, s))
}

/// Both saddle gains sampled on `grid`.
pub fn game_constant_curves(
    params: &ModelParams,
    grid: Vec<f64>,
) -> Result<(StrategyCurve, StrategyCurve)> {
    let theta2 = StrategyCurve::try_from_fn(grid, |s| Ok(game_constant_gains(params, s)?.1))?;
    let r = params.cost_ratio;
    Ok((theta2.map(|v| -r * v), theta2))
}

/// `Ξ(s) = e^{σ²(T-s)}`, the solution of `Ξ' + σ²Ξ = 0, Ξ(T) = 1`. It bounds
/// every value kernel in this crate from above.
pub fn lyapunov_envelope(sigma: f64, horizon: f64, s: f64) -> f64 {
    (sigma * sigma * (horizon - s)).exp()
}

pub type CostWeight = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// The game with payoff `E{e^{-ρ(T-t)}G X(T)² + ∫ e^{-ρ(s-t)}(R₁u₁² + R₂u₂²)}`.
pub struct AuxiliaryGameSpec {
    pub terminal: f64,
    pub r1: CostWeight,
    pub r2: CostWeight,
    pub rho: f64,
}

impl AuxiliaryGameSpec {
    pub fn new(
        terminal: f64,
        r1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        r2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        rho: f64,
    ) -> Self {
        AuxiliaryGameSpec {
            terminal,
            r1: Box::new(r1),
            r2: Box::new(r2),
            rho,
        }
    }

    /// `G = 1, R₁ ≡ -1, R₂ ≡ R`: the constant-discount game itself.
    pub fn for_game(cost_ratio: f64, rho: f64) -> Self {
        Self::new(1.0, |_| -1.0, move |_| cost_ratio, rho)
    }

    /// `(R₁ + R₂)/(R₁R₂)`.
    fn quadratic_weight(&self, s: f64) -> f64 {
        let (a, b) = ((self.r1)(s), (self.r2)(s));
        (a + b) / (a * b)
    }

    fn check(&self, grid: &[f64]) -> Result<()> {
        if !(self.terminal.is_finite() && self.terminal >= 0.0) {
            return Err(Error::param(format!(
                "terminal weight G must be >= 0 (got {})",
                self.terminal
            )));
        }
        if !self.rho.is_finite() {
            return Err(Error::param("discount rate must be finite"));
        }
        for &s in grid {
            let (a, b) = ((self.r1)(s), (self.r2)(s));
            if !(a < 0.0) {
                return Err(Error::param(format!("R1({s}) = {a} must be < 0")));
            }
            if !(b > 0.0) {
                return Err(Error::param(format!("R2({s}) = {b} must be > 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliarySolution {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    r1: Vec<f64>,
    r2: Vec<f64>,
}

impl AuxiliarySolution {
    /// Saddle gains `Θ₁ = -P/R₁`, `Θ₂ = -P/R₂`.
    pub fn gains(&self) -> Result<(StrategyCurve, StrategyCurve)> {
        let t1 = self
            .values
            .iter()
            .zip(&self.r1)
            .map(|(p, r)| -p / r)
            .collect();
        let t2 = self
            .values
            .iter()
            .zip(&self.r2)
            .map(|(p, r)| -p / r)
            .collect();
        Ok((
            StrategyCurve::new(self.grid.clone(), t1)?,
            StrategyCurve::new(self.grid.clone(), t2)?,
        ))
    }
}

/// Integrates `P' + σ²P - ρP - ((R₁+R₂)/(R₁R₂))P² = 0, P(T) = G` backward with
/// one RK4 step per grid segment.
pub fn solve_auxiliary_riccati(
    spec: &AuxiliaryGameSpec,
    sigma: f64,
    horizon: f64,
    grid: &[f64],
) -> Result<AuxiliarySolution> {
    validate_grid(grid)?;
    if grid[0] != 0.0 || *grid.last().unwrap() != horizon {
        return Err(Error::domain(format!(
            "grid must cover [0, {horizon}] exactly (got [{}, {}])",
            grid[0],
            grid.last().unwrap()
        )));
    }
    spec.check(grid)?;
    let drift = sigma * sigma - spec.rho;
    let envelope = |s: f64| spec.terminal * (drift * (horizon - s)).exp();
    let values = rk4_backward(
        grid,
        spec.terminal,
        |s, p| -drift * p + spec.quadratic_weight(s) * p * p,
        |i, p| {
            let bound = BLOW_UP_FACTOR * envelope(grid[i]);
            if !p.is_finite() || p.abs() > bound {
                Err(Error::solver(format!(
                    "Riccati solution left 10x its envelope at s = {} (P = {p}); \
                     the sign condition (R1+R2)/(R1 R2) >= 0 is violated",
                    grid[i]
                )))
            } else {
                Ok(())
            }
        },
    )?;
    Ok(AuxiliarySolution {
        grid: grid.to_vec(),
        values,
        r1: grid.iter().map(|&s| (spec.r1)(s)).collect(),
        r2: grid.iter().map(|&s| (spec.r2)(s)).collect(),
    })
}
