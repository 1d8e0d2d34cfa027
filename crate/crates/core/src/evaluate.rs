//! Deterministic evaluation of affine feedback strategies.
//!
//! For feedback `u_i = Θ_i X` the payoff is quadratic in the initial state,
//! `J(t, ξ) = p·ξ²`, and `p` solves a scalar Lyapunov equation backward from
//! `T`. Spike deviations on `[t, t+ε]` are evaluated the same way, so the
//! first-order equilibrium conditions can be checked without sampling noise.

use crate::curve::StrategyCurve;
use crate::equilibrium::EquilibriumSolution;
use crate::error::{Error, Result};
use crate::ode::rk4_step;
use crate::params::ModelParams;

/// Longest RK4 step used when a strategy grid is coarse.
const MAX_STEP: f64 = 1e-2;
/// RK4 steps spent on the deviation window `[t, t+ε]`.
const SPIKE_SUBSTEPS: usize = 64;

/// Feedback gains of both players on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopPair {
    theta1: StrategyCurve,
    theta2: StrategyCurve,
}

impl ClosedLoopPair {
    pub fn new(theta1: StrategyCurve, theta2: StrategyCurve) -> Result<Self> {
        if theta1.grid() != theta2.grid() {
            return Err(Error::domain("both strategy curves must share one grid"));
        }
        Ok(ClosedLoopPair { theta1, theta2 })
    }

    /// Player 2 alone: `Θ₁ ≡ 0`.
    pub fn single(theta2: StrategyCurve) -> Self {
        let theta1 = StrategyCurve::zeros(theta2.grid().to_vec()).expect("grid already validated");
        ClosedLoopPair { theta1, theta2 }
    }

    pub fn from_solution(sol: &EquilibriumSolution) -> Self {
        ClosedLoopPair {
            theta1: sol.theta1.clone(),
            theta2: sol.theta2.clone(),
        }
    }

    pub fn theta1(&self) -> &StrategyCurve {
        &self.theta1
    }

    pub fn theta2(&self) -> &StrategyCurve {
        &self.theta2
    }

    pub fn grid(&self) -> &[f64] {
        self.theta1.grid()
    }

    pub fn horizon(&self) -> f64 {
        self.theta1.horizon()
    }

    /// `Θ₁(s) + Θ₂(s)`.
    pub fn total(&self, s: f64) -> f64 {
        self.theta1.value_at(s) + self.theta2.value_at(s)
    }
}

/// `J(t, ξ) = p·ξ²` for the self anchored at `anchor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueCoefficient {
    pub anchor: f64,
    pub p: f64,
}

impl ValueCoefficient {
    pub fn value(&self, xi: f64) -> f64 {
        self.p * xi * xi
    }
}

/// Signs of the terminal and running terms: `J₁` is `(1, -1, R)` and `J₂` its
/// negative.
#[derive(Debug, Clone, Copy)]
struct PayoffWeights {
    terminal: f64,
    control1: f64,
    control2: f64,
}

impl PayoffWeights {
    fn first(params: &ModelParams) -> Self {
        PayoffWeights {
            terminal: 1.0,
            control1: -1.0,
            control2: params.cost_ratio,
        }
    }

    fn second(params: &ModelParams) -> Self {
        PayoffWeights {
            terminal: -1.0,
            control1: 1.0,
            control2: -params.cost_ratio,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    /// The maximizer of `J`.
    One,
    /// The minimizer of `J`.
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deviation {
    /// Feedback `u = k·X` with constant gain `k` on the window.
    Proportional(f64),
    /// Open-loop constant control `u` on the window (evaluated at `ξ = 1`).
    Constant(f64),
}

fn check_pair(pair: &ClosedLoopPair, params: &ModelParams) -> Result<()> {
    params.validate()?;
    let h = pair.horizon();
    if (h - params.horizon).abs() > 1e-12 * params.horizon {
        return Err(Error::domain(format!(
            "strategies end at {h} but the horizon is {}",
            params.horizon
        )));
    }
    Ok(())
}

/// Integrates `dp/ds = f(s, p, Θ₁(s), Θ₂(s))` backward from `p(hi)` to `lo`,
/// one curve segment at a time so jumps in the gains are respected, with
/// steps no longer than `max_step`.
fn sweep(
    pair: &ClosedLoopPair,
    lo: f64,
    hi: f64,
    p_hi: f64,
    max_step: f64,
    mut f: impl FnMut(f64, f64, f64, f64) -> f64,
) -> f64 {
    let g = pair.grid();
    let mut i = g
        .partition_point(|&x| x < hi)
        .saturating_sub(1)
        .min(g.len() - 2);
    let mut upper = hi;
    let mut p = p_hi;
    loop {
        let lower = lo.max(g[i]);
        if upper > lower {
            let steps = ((upper - lower) / max_step).ceil().max(1.0) as usize;
            let h = (upper - lower) / steps as f64;
            let mut rhs = |s: f64, p: f64| {
                f(
                    s,
                    p,
                    pair.theta1.on_segment(i, s),
                    pair.theta2.on_segment(i, s),
                )
            };
            for k in (0..steps).rev() {
                let s0 = if k + 1 == steps {
                    upper
                } else {
                    lower + (k + 1) as f64 * h
                };
                let s1 = if k == 0 { lower } else { lower + k as f64 * h };
                p = rk4_step(s0, s1, p, &mut rhs);
            }
        }
        if lower <= lo || i == 0 {
            break;
        }
        upper = lower;
        i -= 1;
    }
    p
}

/// Quadratic value coefficient on `[from, T]` of the self anchored at
/// `anchor ≤ from`.
fn lyapunov(
    pair: &ClosedLoopPair,
    params: &ModelParams,
    anchor: f64,
    from: f64,
    w: PayoffWeights,
) -> f64 {
    let disc = &params.discount;
    let sigma2 = params.sigma2();
    let horizon = params.horizon;
    let terminal = w.terminal * disc.weight(horizon - anchor);
    sweep(pair, from, horizon, terminal, MAX_STEP, |s, p, a, b| {
        let running = w.control1 * a * a + w.control2 * b * b;
        -(2.0 * (a + b) + sigma2) * p - disc.weight(s - anchor) * running
    })
}

fn check_start(t: f64, params: &ModelParams) -> Result<()> {
    if !(t >= 0.0 && t < params.horizon) {
        return Err(Error::domain(format!(
            "evaluation time must lie in [0, {}) (got {t})",
            params.horizon
        )));
    }
    Ok(())
}

/// `J₁(t, ξ; Θ₁X, Θ₂X) / ξ²`.
pub fn closed_loop_value(
    t: f64,
    pair: &ClosedLoopPair,
    params: &ModelParams,
) -> Result<ValueCoefficient> {
    check_pair(pair, params)?;
    check_start(t, params)?;
    Ok(ValueCoefficient {
        anchor: t,
        p: lyapunov(pair, params, t, t, PayoffWeights::first(params)),
    })
}

/// `J₁ + J₂` at `(t, ξ = 1)`, each from its own Lyapunov equation.
pub fn zero_sum_check(t: f64, pair: &ClosedLoopPair, params: &ModelParams) -> Result<f64> {
    check_pair(pair, params)?;
    check_start(t, params)?;
    let j1 = lyapunov(pair, params, t, t, PayoffWeights::first(params));
    let j2 = lyapunov(pair, params, t, t, PayoffWeights::second(params));
    Ok(j1 + j2)
}

/// Difference quotient `[J(deviated) - J(equilibrium)] / ε` at `(t, ξ = 1)`
/// when `who` plays `deviation` on `[t, t+ε]` and the pair is followed
/// elsewhere. The tail keeps the deviating self's discount `α(· - t)`.
///
/// At an equilibrium the quotient of player 1 (the maximizer) tends to a
/// limit `≤ 0` and that of player 2 to a limit `≥ 0`. A lone player 2
/// maximizes `-J`, so its condition is the player-2 one.
pub fn spike_check(
    t: f64,
    epsilon: f64,
    deviation: Deviation,
    who: Player,
    pair: &ClosedLoopPair,
    params: &ModelParams,
) -> Result<f64> {
    check_pair(pair, params)?;
    check_start(t, params)?;
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!(
            "spike length must be > 0 (got {epsilon})"
        )));
    }
    let end = t + epsilon;
    if end > params.horizon * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "spike window [{t}, {end}] exceeds the horizon {}",
            params.horizon
        )));
    }
    let end = end.min(params.horizon);
    let w = PayoffWeights::first(params);
    let disc = &params.discount;
    let sigma2 = params.sigma2();
    let r = params.cost_ratio;
    let tail = lyapunov(pair, params, t, end, w);
    let step = epsilon / SPIKE_SUBSTEPS as f64;
    let alpha = |s: f64| disc.weight(s - t);

    let equilibrium = sweep(pair, t, end, tail, step, |s, p, a, b| {
        -(2.0 * (a + b) + sigma2) * p - alpha(s) * (-a * a + r * b * b)
    });

    let deviated = match deviation {
        Deviation::Proportional(k) => sweep(pair, t, end, tail, step, |s, p, a, b| {
            let (a, b) = match who {
                Player::One => (k, b),
                Player::Two => (a, k),
            };
            -(2.0 * (a + b) + sigma2) * p - alpha(s) * (-a * a + r * b * b)
        }),
        Deviation::Constant(u) => {
            let mut y = [tail, 0.0, 0.0];
            for k in (0..SPIKE_SUBSTEPS).rev() {
                let s0 = t + (k + 1) as f64 * step;
                let s1 = t + k as f64 * step;
                y = rk4_vec(s0, s1, y, |s, y| {
                    affine_rhs(who, u, s, y, pair, alpha(s), sigma2, r)
                });
            }
            y[0] + y[1] + y[2]
        }
    };
    Ok((deviated - equilibrium) / epsilon)
}

/// Derivatives of the value coefficients `(a, b, c)` of `V = a x² + b x + c`
/// while `who` plays the constant `u`.
#[allow(clippy::too_many_arguments)]
fn affine_rhs(
    who: Player,
    u: f64,
    s: f64,
    y: [f64; 3],
    pair: &ClosedLoopPair,
    alpha: f64,
    sigma2: f64,
    r: f64,
) -> [f64; 3] {
    let [a, b, _] = y;
    match who {
        Player::One => {
            let th = pair.theta2.value_at(s);
            [
                -(2.0 * th + sigma2) * a - alpha * r * th * th,
                -2.0 * u * a - th * b,
                -u * b + alpha * u * u,
            ]
        }
        Player::Two => {
            let th = pair.theta1.value_at(s);
            [
                -(2.0 * th + sigma2) * a + alpha * th * th,
                -2.0 * u * a - th * b,
                -u * b - alpha * r * u * u,
            ]
        }
    }
}

fn rk4_vec(
    s0: f64,
    s1: f64,
    y: [f64; 3],
    mut f: impl FnMut(f64, [f64; 3]) -> [f64; 3],
) -> [f64; 3] {
    let h = s1 - s0;
    let mid = s0 + 0.5 * h;
    let add =
        |y: [f64; 3], k: [f64; 3], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2]];
    let k1 = f(s0, y);
    let k2 = f(mid, add(y, k1, 0.5 * h));
    let k3 = f(mid, add(y, k2, 0.5 * h));
    let k4 = f(s1, add(y, k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Two-level Richardson extrapolation `2Q(ε/2) - Q(ε)` of the spike quotient.
pub fn spike_limit(
    t: f64,
    epsilon: f64,
    deviation: Deviation,
    who: Player,
    pair: &ClosedLoopPair,
    params: &ModelParams,
) -> Result<f64> {
    let coarse = spike_check(t, epsilon, deviation, who, pair, params)?;
    let fine = spike_check(t, 0.5 * epsilon, deviation, who, pair, params)?;
    Ok(2.0 * fine - coarse)
}
