//! Closed-loop strategies for a scalar linear-quadratic stochastic control
//! problem and the matching two-person zero-sum game, under exponential and
//! present-biased (mixture of exponentials) discounting.
//!
//! Under non-exponential discounting the optimal plan is time-inconsistent;
//! [`equilibrium`] computes the consistent-planning (equilibrium) strategies,
//! [`evaluate`] checks them by spike variations, and [`simulate`] runs the
//! closed-loop state by Monte Carlo.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod discount;
pub mod equilibrium;
pub mod error;
pub mod evaluate;
mod ode;
pub mod params;
pub mod riccati;
pub mod simulate;

pub use curve::StrategyCurve;
pub use discount::DiscountSpec;
pub use error::{Error, Result};
pub use params::{uniform_grid, ModelParams};
