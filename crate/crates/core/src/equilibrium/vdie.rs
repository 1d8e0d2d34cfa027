//! The diagonal `Γ(t) = P(t, t)` of the game's equilibrium kernel as the
//! solution of a Volterra differential-integral equation, and the kernel
//! recovered from it.
//!
//! With `c = (1-R)/R`, `β = σ² - 2cΓ` and `d = -α'`, the diagonal solves
//!
//! ```text
//! Γ'(t) = -σ²Γ + cΓ² + ∫_t^T e^{∫_t^s β} d(s-t) cΓ(s)² ds + e^{∫_t^T β} d(T-t),
//! Γ(T) = 1,
//! ```
//!
//! and the kernel is
//! `P(t,s) = ∫_s^T e^{∫_s^τ β} α(τ-t) cΓ(τ)² dτ + e^{∫_s^T β} α(T-t)`.

use super::kernel::TriangularKernel;
use crate::curve::validate_grid;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::riccati::lyapunov_envelope;

const FIXED_POINT_TOL: f64 = 1e-15;
const FIXED_POINT_MAX_ITER: usize = 100;
const ENVELOPE_SLACK: f64 = 1e-9;

/// `Γ` sampled on a grid covering `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaCurve {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl GammaCurve {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation between nodes.
    pub fn value_at(&self, t: f64) -> f64 {
        let g = &self.grid;
        let i = g.partition_point(|&x| x <= t).clamp(1, g.len() - 1) - 1;
        let w = ((t - g[i]) / (g[i + 1] - g[i])).clamp(0.0, 1.0);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }
}

fn check_grid(params: &ModelParams, grid: &[f64]) -> Result<()> {
    params.validate()?;
    validate_grid(grid)?;
    let horizon = params.horizon;
    if grid[0] != 0.0 || (grid[grid.len() - 1] - horizon).abs() > 1e-12 * horizon {
        return Err(Error::domain(format!(
            "grid must cover [0, {horizon}] (got [{}, {}])",
            grid[0],
            grid[grid.len() - 1]
        )));
    }
    Ok(())
}

/// `f(k·h)` for `k = 0..len` when `grid` is uniform with step `h`.
fn lag_table(grid: &[f64], f: impl Fn(f64) -> f64) -> Option<Vec<f64>> {
    let n = grid.len() - 1;
    let h = grid[n] / n as f64;
    let uniform = grid
        .iter()
        .enumerate()
        .all(|(i, &t)| (t - i as f64 * h).abs() <= 1e-12 * grid[n]);
    uniform.then(|| (0..=n).map(|k| f(k as f64 * h)).collect())
}

/// Integrates the diagonal equation backward from `Γ(T) = 1`, trapezoid in
/// time with the implicit node resolved by fixed-point iteration; the
/// non-local term uses trapezoid quadrature over the computed tail.
pub fn vdie_solve(params: &ModelParams, grid: &[f64]) -> Result<GammaCurve> {
    check_grid(params, grid)?;
    let disc = &params.discount;
    let sigma2 = params.sigma2();
    let c = params.game_weight();
    let horizon = params.horizon;
    let n = grid.len() - 1;
    let d = |u: f64| -disc.slope(u);
    let d_table = lag_table(grid, d);
    let d_lag = |i: usize, j: usize| match &d_table {
        Some(tab) => tab[j - i],
        None => d(grid[j] - grid[i]),
    };
    let d0 = d(0.0);

    let mut gamma = vec![0.0; n + 1];
    // B_i = ∫_{t_i}^T β and g_j = e^{-B_j} cΓ_j², the tail integrand without
    // the lag factor.
    let mut big_b = vec![0.0; n + 1];
    let mut g = vec![0.0; n + 1];
    gamma[n] = 1.0;
    g[n] = c;
    let beta = |x: f64| sigma2 - 2.0 * c * x;
    let mut f_next = -sigma2 + c + d0;

    for i in (0..n).rev() {
        let h = grid[i + 1] - grid[i];
        let t = grid[i];
        // Σ_{j>i} w_j g_j d(t_j - t_i), with trapezoid weights of [t_i, T]
        // minus the node-i weight, which depends on Γ_i.
        let mut tail = 0.0;
        for j in i + 1..=n {
            let w = if j == n {
                0.5 * (grid[n] - grid[n - 1])
            } else {
                0.5 * (grid[j + 1] - grid[j - 1])
            };
            tail += w * g[j] * d_lag(i, j);
        }
        let d_end = match &d_table {
            Some(tab) => tab[n - i],
            None => d(horizon - t),
        };
        let rhs = |x: f64| {
            let b = big_b[i + 1] + 0.5 * h * (beta(x) + beta(gamma[i + 1]));
            let eb = b.exp();
            let integral = eb * (tail + d_end) + 0.5 * h * d0 * c * x * x;
            (-sigma2 * x + c * x * x + integral, b)
        };
        let mut x = gamma[i + 1] - h * f_next;
        let mut converged = false;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let (fx, _) = rhs(x);
            let next = gamma[i + 1] - 0.5 * h * (fx + f_next);
            if !next.is_finite() {
                break;
            }
            let delta = (next - x).abs();
            x = next;
            if delta <= FIXED_POINT_TOL * (1.0 + x.abs()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::solver(format!(
                "implicit step did not converge at t = {t} (step {h} too large?)"
            )));
        }
        let bound = lyapunov_envelope(params.sigma, horizon, t);
        if x < -ENVELOPE_SLACK * bound || x > bound * (1.0 + ENVELOPE_SLACK) {
            return Err(Error::Envelope {
                s: t,
                value: x,
                bound,
            });
        }
        let (fx, b) = rhs(x);
        gamma[i] = x;
        big_b[i] = b;
        g[i] = (-b).exp() * c * x * x;
        f_next = fx;
    }
    Ok(GammaCurve {
        grid: grid.to_vec(),
        values: gamma,
    })
}

/// Rebuilds `P(t_i, s_j)` on every node pair of `gamma`'s grid.
pub fn reconstruct_kernel(gamma: &GammaCurve, params: &ModelParams) -> Result<TriangularKernel> {
    reconstruct_kernel_strided(gamma, params, 1)
}

/// As [`reconstruct_kernel`] but keeps only every `stride`-th node in both
/// directions (the integrals still use the full grid). The number of grid
/// segments must be a multiple of `stride`.
pub fn reconstruct_kernel_strided(
    gamma: &GammaCurve,
    params: &ModelParams,
    stride: usize,
) -> Result<TriangularKernel> {
    let grid = gamma.grid();
    check_grid(params, grid)?;
    let n = grid.len() - 1;
    if stride == 0 || !n.is_multiple_of(stride) {
        return Err(Error::param(format!(
            "stride {stride} does not divide the {n} grid segments"
        )));
    }
    let disc = &params.discount;
    let c = params.game_weight();
    let sigma2 = params.sigma2();
    let gv = gamma.values();
    let alpha_table = lag_table(grid, |u| disc.weight(u));
    let alpha_lag = |i: usize, j: usize| match &alpha_table {
        Some(tab) => tab[j - i],
        None => disc.weight(grid[j] - grid[i]),
    };
    let growth: Vec<f64> = (0..n)
        .map(|j| {
            let beta = 2.0 * sigma2 - 2.0 * c * (gv[j] + gv[j + 1]);
            (0.5 * (grid[j + 1] - grid[j]) * beta).exp()
        })
        .collect();
    let source: Vec<f64> = gv.iter().map(|x| c * x * x).collect();

    let kept: Vec<usize> = (0..=n).step_by(stride).collect();
    let mut rows = Vec::with_capacity(kept.len());
    for &i in &kept {
        let mut row = vec![0.0; (n - i) / stride + 1];
        let mut p = alpha_lag(i, n);
        *row.last_mut().unwrap() = p;
        for j in (i..n).rev() {
            let e = growth[j];
            let h = grid[j + 1] - grid[j];
            p = e * p
                + 0.5 * h * (alpha_lag(i, j) * source[j] + e * alpha_lag(i, j + 1) * source[j + 1]);
            if (j - i) % stride == 0 {
                row[(j - i) / stride] = p;
            }
        }
        rows.push(row);
    }
    let kept_grid = kept.iter().map(|&i| grid[i]).collect();
    TriangularKernel::new(kept_grid, rows)
}

/// The symmetric game's kernel `P(t,s) = e^{σ²(T-s)}α(T-t)`.
pub fn symmetric_kernel(params: &ModelParams, t: f64, s: f64) -> Result<f64> {
    params.validate()?;
    if params.cost_ratio != 1.0 {
        return Err(Error::param(format!(
            "the closed-form kernel needs R = 1 (got R = {})",
            params.cost_ratio
        )));
    }
    params.check_time(t, "t")?;
    params.check_time(s, "s")?;
    if t > s {
        return Err(Error::domain(format!(
            "kernel needs t <= s (got t = {t}, s = {s})"
        )));
    }
    Ok(lyapunov_envelope(params.sigma, params.horizon, s)
        * params.discount.weight(params.horizon - t))
}
