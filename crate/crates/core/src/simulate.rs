//! Monte Carlo simulation of the closed-loop state
//! `dX = (Θ₁ + Θ₂)X ds + σX dW`.
//!
//! Each step is exact in law for gains frozen at the step midpoint:
//! `X_{k+1} = X_k exp((Θ̄_k - σ²/2)Δ + σ√Δ Z_k)`. Path `i` draws from its own
//! ChaCha stream `(seed, i)`, so results do not depend on how paths are
//! scheduled across threads.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluate::ClosedLoopPair;
use crate::params::{uniform_grid, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub xi: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 {
            return Err(Error::param(format!(
                "need at least one path and one step (got {} paths, {} steps)",
                self.n_paths, self.n_steps
            )));
        }
        if !self.xi.is_finite() {
            return Err(Error::param("initial state must be finite"));
        }
        Ok(())
    }
}

/// Simulated paths stored path-major: entry `(i, k)` sits at
/// `i·(n_steps+1) + k`. Controls are `u_j = Θ_j(t_k)X_k` at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    times: Vec<f64>,
    n_paths: usize,
    states: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl PathEnsemble {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    fn span(&self, i: usize) -> std::ops::Range<usize> {
        let w = self.times.len();
        i * w..(i + 1) * w
    }

    pub fn states(&self, path: usize) -> &[f64] {
        &self.states[self.span(path)]
    }

    pub fn u1(&self, path: usize) -> &[f64] {
        &self.u1[self.span(path)]
    }

    pub fn u2(&self, path: usize) -> &[f64] {
        &self.u2[self.span(path)]
    }

    pub fn terminal_states(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_paths).map(move |i| *self.states(i).last().unwrap())
    }
}

/// Sample mean with its standard error (NaN for a single sample).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    /// Mean and standard error, accumulated sequentially in input order.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        McEstimate {
            mean,
            std_error: (var / n as f64).sqrt(),
            n,
        }
    }

    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_error
    }
}

/// Path-independent per-step data.
struct Stepper {
    times: Vec<f64>,
    drift: Vec<f64>,
    vol: Vec<f64>,
    gain1: Vec<f64>,
    gain2: Vec<f64>,
    seed: u64,
    xi: f64,
}

impl Stepper {
    fn new(pair: &ClosedLoopPair, params: &ModelParams, cfg: &SimConfig, t0: f64) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        let horizon = params.horizon;
        if (pair.horizon() - horizon).abs() > 1e-12 * horizon {
            return Err(Error::domain(format!(
                "strategies end at {} but the horizon is {horizon}",
                pair.horizon()
            )));
        }
        if !(t0 >= 0.0 && t0 < horizon) {
            return Err(Error::domain(format!(
                "start time must lie in [0, {horizon}) (got {t0})"
            )));
        }
        let times: Vec<f64> = uniform_grid(horizon - t0, cfg.n_steps)
            .into_iter()
            .map(|s| if s == horizon - t0 { horizon } else { t0 + s })
            .collect();
        let sigma = params.sigma;
        let (mut drift, mut vol) = (Vec::new(), Vec::new());
        for w in times.windows(2) {
            let dt = w[1] - w[0];
            let theta = pair.total(0.5 * (w[0] + w[1]));
            drift.push((theta - 0.5 * sigma * sigma) * dt);
            vol.push(sigma * dt.sqrt());
        }
        let gain1 = times.iter().map(|&s| pair.theta1().value_at(s)).collect();
        let gain2 = times.iter().map(|&s| pair.theta2().value_at(s)).collect();
        Ok(Stepper {
            times,
            drift,
            vol,
            gain1,
            gain2,
            seed: cfg.seed,
            xi: cfg.xi,
        })
    }

    /// Calls `visit(k, X_k)` along path `i`.
    fn walk(&self, i: usize, mut visit: impl FnMut(usize, f64)) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        let mut x = self.xi;
        visit(0, x);
        for (k, (d, v)) in self.drift.iter().zip(&self.vol).enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            x *= (d + v * z).exp();
            visit(k + 1, x);
        }
    }

    /// `(J₁, J₂)` of path `i`, trapezoid in time for the running term.
    fn payoffs(&self, i: usize, params: &ModelParams, anchor: f64) -> (f64, f64) {
        let mut running = Vec::with_capacity(self.times.len());
        let mut terminal = 0.0;
        let n = self.times.len() - 1;
        self.walk(i, |k, x| {
            running.push(self.running(k, x, params, anchor));
            if k == n {
                terminal = x * x;
            }
        });
        payoff_pair(&self.times, &running, terminal, params, anchor)
    }

    fn running(&self, k: usize, x: f64, params: &ModelParams, anchor: f64) -> (f64, f64) {
        let (u1, u2) = (self.gain1[k] * x, self.gain2[k] * x);
        let alpha = params.discount.weight(self.times[k] - anchor);
        (alpha * -(u1 * u1), alpha * (params.cost_ratio * u2 * u2))
    }
}

/// Assembles `J₁` from per-node running terms `(-αu₁², αRu₂²)` and `J₂` from
/// their negatives, with identical arithmetic so that `J₁ + J₂ = 0` exactly.
fn payoff_pair(
    times: &[f64],
    running: &[(f64, f64)],
    terminal: f64,
    params: &ModelParams,
    anchor: f64,
) -> (f64, f64) {
    let w_t = params.discount.weight(params.horizon - anchor) * terminal;
    let mut j1 = w_t;
    let mut j2 = -w_t;
    for (k, w) in times.windows(2).enumerate() {
        let h = 0.5 * (w[1] - w[0]);
        let (a0, b0) = running[k];
        let (a1, b1) = running[k + 1];
        j1 += h * ((a0 + b0) + (a1 + b1));
        j2 += h * ((-a0 + -b0) + (-a1 + -b1));
    }
    (j1, j2)
}

pub fn simulate_closed_loop(
    pair: &ClosedLoopPair,
    params: &ModelParams,
    cfg: &SimConfig,
) -> Result<PathEnsemble> {
    simulate_closed_loop_from(0.0, pair, params, cfg)
}

/// Simulates on a uniform grid of `n_steps` steps over `[t0, T]` with
/// `X(t0) = ξ`.
pub fn simulate_closed_loop_from(
    t0: f64,
    pair: &ClosedLoopPair,
    params: &ModelParams,
    cfg: &SimConfig,
) -> Result<PathEnsemble> {
    let st = Stepper::new(pair, params, cfg, t0)?;
    let width = st.times.len();
    let rows: Vec<Vec<[f64; 3]>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(width);
            st.walk(i, |k, x| row.push([x, st.gain1[k] * x, st.gain2[k] * x]));
            row
        })
        .collect();
    let mut states = Vec::with_capacity(width * cfg.n_paths);
    let mut u1 = Vec::with_capacity(width * cfg.n_paths);
    let mut u2 = Vec::with_capacity(width * cfg.n_paths);
    for row in rows {
        for [x, a, b] in row {
            states.push(x);
            u1.push(a);
            u2.push(b);
        }
    }
    Ok(PathEnsemble {
        times: st.times,
        n_paths: cfg.n_paths,
        states,
        u1,
        u2,
    })
}

/// Per-path `(J₁, J₂)` for the self anchored at the ensemble's start time.
pub fn pathwise_payoffs(
    ensemble: &PathEnsemble,
    params: &ModelParams,
    t: f64,
) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    let times = ensemble.times();
    if times[0] != t || (times[times.len() - 1] - params.horizon).abs() > 1e-12 * params.horizon {
        return Err(Error::domain(format!(
            "ensemble covers [{}, {}], expected [{t}, {}]",
            times[0],
            times[times.len() - 1],
            params.horizon
        )));
    }
    Ok((0..ensemble.n_paths)
        .map(|i| {
            let (x, a, b) = (ensemble.states(i), ensemble.u1(i), ensemble.u2(i));
            let running: Vec<(f64, f64)> = (0..times.len())
                .map(|k| {
                    let alpha = params.discount.weight(times[k] - t);
                    (
                        alpha * -(a[k] * a[k]),
                        alpha * (params.cost_ratio * b[k] * b[k]),
                    )
                })
                .collect();
            let terminal = x[x.len() - 1] * x[x.len() - 1];
            payoff_pair(times, &running, terminal, params, t)
        })
        .collect())
}

/// Monte Carlo estimate of `J₁(t, ξ)` from a stored ensemble.
pub fn monte_carlo_value(
    ensemble: &PathEnsemble,
    params: &ModelParams,
    t: f64,
) -> Result<McEstimate> {
    let j1: Vec<f64> = pathwise_payoffs(ensemble, params, t)?
        .into_iter()
        .map(|(a, _)| a)
        .collect();
    Ok(McEstimate::from_samples(&j1))
}

/// As [`monte_carlo_value`] on a fresh simulation from `t0`, without storing
/// the paths. Gives the same numbers as simulating and then estimating.
pub fn estimate_value(
    t0: f64,
    pair: &ClosedLoopPair,
    params: &ModelParams,
    cfg: &SimConfig,
) -> Result<McEstimate> {
    let st = Stepper::new(pair, params, cfg, t0)?;
    let j1: Vec<f64> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| st.payoffs(i, params, t0).0)
        .collect();
    Ok(McEstimate::from_samples(&j1))
}

/// Writes `path,step,time,state,u1,u2` rows with 17 significant digits.
pub fn write_ensemble_csv(ensemble: &PathEnsemble, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "path,step,time,state,u1,u2")?;
    for i in 0..ensemble.n_paths {
        let (x, a, b) = (ensemble.states(i), ensemble.u1(i), ensemble.u2(i));
        for (k, t) in ensemble.times.iter().enumerate() {
            writeln!(
                out,
                "{i},{k},{t:.16e},{:.16e},{:.16e},{:.16e}",
                x[k], a[k], b[k]
            )?;
        }
    }
    Ok(())
}
