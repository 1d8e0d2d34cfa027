//! Backward partition recursions for the single player and the game.
//!
//! On each cell `[t_k, t_{k+1}]` the self at `t_k` precommits: it solves its
//! own Riccati equation with discount `α(· - t_k)`, in reciprocal form, taking
//! as terminal value the worth at `t_{k+1}` of the gains already fixed on
//! `[t_{k+1}, T]`. That worth is a linear Lyapunov equation along the later
//! gains. Every integral is a composite trapezoid on `subgrid_factor`
//! sub-steps per cell.

use super::kernel::TriangularKernel;
use super::partition::Partition;
use crate::curve::StrategyCurve;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::riccati::lyapunov_envelope;

pub const DEFAULT_SUBGRID_FACTOR: usize = 8;

/// Relative slack allowed on the envelope before the game solve aborts.
const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Players {
    /// Player 2 alone, minimizing `α(T-t)X(T)² + ∫ α(s-t)R u₂²`.
    Single,
    /// The zero-sum game.
    Game,
}

/// Output of a partition solve.
///
/// `kernel` holds `P^Π(t_k, t_j)` at partition points. `theta1`/`theta2` live
/// on the sub-grid (`N·subgrid_factor + 1` nodes); they jump at partition
/// points, where the node value is the right limit. For the single player
/// `theta1 ≡ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    pub players: Players,
    pub partition: Partition,
    pub kernel: TriangularKernel,
    pub theta1: StrategyCurve,
    pub theta2: StrategyCurve,
}

impl EquilibriumSolution {
    pub fn mesh(&self) -> f64 {
        self.partition.mesh()
    }
}

pub fn single_partition_solve(
    params: &ModelParams,
    partition: &Partition,
    subgrid_factor: usize,
) -> Result<EquilibriumSolution> {
    solve(params, partition, subgrid_factor, Players::Single)
}

pub fn game_partition_solve(
    params: &ModelParams,
    partition: &Partition,
    subgrid_factor: usize,
) -> Result<EquilibriumSolution> {
    solve(params, partition, subgrid_factor, Players::Game)
}

pub(crate) fn solve(
    params: &ModelParams,
    partition: &Partition,
    m: usize,
    players: Players,
) -> Result<EquilibriumSolution> {
    params.validate()?;
    if m == 0 {
        return Err(Error::param("subgrid factor must be >= 1"));
    }
    let horizon = params.horizon;
    if (partition.horizon() - horizon).abs() > 1e-12 * horizon {
        return Err(Error::domain(format!(
            "partition ends at {} but the horizon is {horizon}",
            partition.horizon()
        )));
    }
    let pts = partition.points();
    let n = partition.intervals();
    let sigma2 = params.sigma2();
    let r = params.cost_ratio;
    let disc = &params.discount;
    // Reciprocal-form source weight: 1 alone, 1 - R in the game.
    let c = match players {
        Players::Single => 1.0,
        Players::Game => 1.0 - r,
    };

    let nodes: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let (a, b) = (pts[k], pts[k + 1]);
            let h = (b - a) / m as f64;
            let mut v: Vec<f64> = (0..=m).map(|l| a + l as f64 * h).collect();
            v[m] = b;
            v
        })
        .collect();

    let mut theta1 = vec![Vec::new(); n];
    let mut theta2 = vec![Vec::new(); n];
    // Per sub-step growth factor exp(∫ drift) and per node cost -Θ₁² + RΘ₂².
    let mut growth = vec![Vec::new(); n];
    let mut cost = vec![Vec::new(); n];
    let mut rows = vec![Vec::new(); n + 1];
    rows[n] = vec![1.0];

    let check = |s: f64, value: f64| -> Result<()> {
        if !value.is_finite() {
            return Err(Error::solver(format!("non-finite value kernel at s = {s}")));
        }
        if players == Players::Game {
            let bound = lyapunov_envelope(params.sigma, horizon, s);
            if value < -ENVELOPE_SLACK * bound || value > bound * (1.0 + ENVELOPE_SLACK) {
                return Err(Error::Envelope { s, value, bound });
            }
        }
        Ok(())
    };

    for k in (0..n).rev() {
        let tk = pts[k];
        let mut row = vec![0.0; n - k + 1];

        // Lyapunov extension over [t_{k+1}, T] along the later gains.
        let mut p = disc.weight(horizon - tk);
        row[n - k] = p;
        for j in (k + 1..n).rev() {
            let x = &nodes[j];
            for l in (0..m).rev() {
                let dx = x[l + 1] - x[l];
                let e = growth[j][l];
                let sa = disc.weight(x[l] - tk) * cost[j][l];
                let sb = disc.weight(x[l + 1] - tk) * cost[j][l + 1];
                p = e * p + 0.5 * dx * (sa + e * sb);
            }
            check(pts[j], p)?;
            row[j - k] = p;
        }

        // Precommitment on the fresh cell, Q = 1/P.
        let x = &nodes[k];
        let mut pk = vec![0.0; m + 1];
        pk[m] = p;
        if !(p > 0.0) {
            return Err(Error::solver(format!(
                "non-positive terminal value {p} on cell [{tk}, {}]",
                pts[k + 1]
            )));
        }
        let mut q = 1.0 / p;
        let f = |s: f64| c / (disc.weight(s - tk) * r);
        for l in (0..m).rev() {
            let dx = x[l + 1] - x[l];
            let decay = (-sigma2 * dx).exp();
            q = decay * q + 0.5 * dx * (f(x[l]) + decay * f(x[l + 1]));
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::solver(format!(
                    "non-positive quadrature denominator {q} at s = {}",
                    x[l]
                )));
            }
            pk[l] = 1.0 / q;
            check(x[l], pk[l])?;
        }
        row[0] = pk[0];
        rows[k] = row;

        let alphas: Vec<f64> = x.iter().map(|&s| disc.weight(s - tk)).collect();
        let t2: Vec<f64> = pk.iter().zip(&alphas).map(|(p, a)| -p / (r * a)).collect();
        let t1: Vec<f64> = match players {
            Players::Single => vec![0.0; m + 1],
            // Θ₁ = P/α, written as -RΘ₂ so the identity holds bit for bit.
            Players::Game => t2.iter().map(|b| -r * b).collect(),
        };
        let drift: Vec<f64> = t1
            .iter()
            .zip(&t2)
            .map(|(a, b)| 2.0 * (a + b) + sigma2)
            .collect();
        growth[k] = (0..m)
            .map(|l| (0.5 * (x[l + 1] - x[l]) * (drift[l] + drift[l + 1])).exp())
            .collect();
        cost[k] = t1
            .iter()
            .zip(&t2)
            .map(|(a, b)| -a * a + r * b * b)
            .collect();
        theta1[k] = t1;
        theta2[k] = t2;
    }

    let kernel = TriangularKernel::new(pts.to_vec(), rows)?;
    let theta1 = glue(&nodes, &theta1)?;
    let theta2 = glue(&nodes, &theta2)?;
    Ok(EquilibriumSolution {
        players,
        partition: partition.clone(),
        kernel,
        theta1,
        theta2,
    })
}

/// Joins per-cell arrays into one curve on the sub-grid, keeping the jump at
/// each partition point as (left limit, right value).
fn glue(nodes: &[Vec<f64>], cells: &[Vec<f64>]) -> Result<StrategyCurve> {
    let mut grid = Vec::new();
    let mut values = Vec::new();
    let mut left = Vec::new();
    for (k, (x, v)) in nodes.iter().zip(cells).enumerate() {
        let m = x.len() - 1;
        for l in 0..m {
            grid.push(x[l]);
            values.push(v[l]);
            left.push(if l == 0 && k > 0 {
                cells[k - 1][m]
            } else {
                v[l]
            });
        }
    }
    let (x, v) = (nodes.last().unwrap(), cells.last().unwrap());
    grid.push(*x.last().unwrap());
    values.push(*v.last().unwrap());
    left.push(*v.last().unwrap());
    StrategyCurve::with_left_limits(grid, values, left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discount::DiscountSpec;
    use crate::riccati::{game_constant_gains, single_constant_gain};

    fn params(r: f64, d: DiscountSpec) -> ModelParams {
        ModelParams::new(10.0, 0.25, r, d).unwrap()
    }

    #[test]
    fn exponential_discount_reproduces_closed_forms() {
        let p = params(0.5, DiscountSpec::exponential(0.15).unwrap());
        let part = Partition::uniform(10.0, 100).unwrap();
        let single = single_partition_solve(&p, &part, 100).unwrap();
        for (&s, &v) in single.theta2.grid().iter().zip(single.theta2.values()) {
            let e = single_constant_gain(&p, s).unwrap();
            assert!((v - e).abs() < 1e-6, "s = {s}: {v} vs {e}");
        }
        let game = game_partition_solve(&p, &part, 100).unwrap();
        for (&s, &v) in game.theta2.grid().iter().zip(game.theta2.values()) {
            let e = game_constant_gains(&p, s).unwrap().1;
            assert!((v - e).abs() < 1e-6, "s = {s}: {v} vs {e}");
        }
    }

    #[test]
    fn terminal_gain_and_terminal_column() {
        let p = params(0.5, DiscountSpec::mixture(0.3, 0.15, 0.3).unwrap());
        let part = Partition::uniform(10.0, 40).unwrap();
        for sol in [
            single_partition_solve(&p, &part, 4).unwrap(),
            game_partition_solve(&p, &part, 4).unwrap(),
        ] {
            assert!((sol.theta2.value_at(10.0) + 2.0).abs() < 1e-12);
            for (k, v) in sol.kernel.terminal_column().iter().enumerate() {
                let t = part.points()[k];
                assert_eq!(*v, p.discount.weight(10.0 - t));
            }
        }
    }

    #[test]
    fn game_gains_satisfy_diagonal_identity() {
        let p = ModelParams::baseline();
        let sol = game_partition_solve(&p, &Partition::uniform(10.0, 30).unwrap(), 3).unwrap();
        for (a, b) in sol.theta1.values().iter().zip(sol.theta2.values()) {
            assert_eq!(*a, -0.5 * b);
        }
        let diag = sol.kernel.diagonal();
        for (k, &t) in sol.partition.points().iter().enumerate() {
            assert!((sol.theta1.value_at(t) - diag[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_game_is_exact_at_partition_points() {
        let p = params(1.0, DiscountSpec::mixture(0.5, 0.15, 0.3).unwrap());
        let part = Partition::uniform(10.0, 20).unwrap();
        let sol = game_partition_solve(&p, &part, 2).unwrap();
        let err = sol
            .kernel
            .sup_error_at_nodes(|t, s| (0.0625 * (10.0 - s)).exp() * p.discount.weight(10.0 - t));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ModelParams::baseline();
        let part = Partition::uniform(10.0, 10).unwrap();
        assert!(game_partition_solve(&p, &part, 0).is_err());
        let short = Partition::uniform(5.0, 10).unwrap();
        assert!(matches!(
            game_partition_solve(&p, &short, 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn irregular_partitions_are_accepted() {
        let p = ModelParams::baseline();
        let part = Partition::new(vec![0.0, 0.5, 3.0, 3.1, 7.0, 10.0]).unwrap();
        let sol = game_partition_solve(&p, &part, 16).unwrap();
        assert!(sol.kernel.bounds(p.sigma).worst() >= -1e-12);
        assert_eq!(sol.theta2.len(), 5 * 16 + 1);
    }
}
