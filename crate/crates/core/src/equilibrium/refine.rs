use super::partition::Partition;
use super::recursion::{solve, EquilibriumSolution, Players, DEFAULT_SUBGRID_FACTOR};
use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    pub initial_intervals: usize,
    pub subgrid_factor: usize,
    /// Number of doublings tried before giving up.
    pub max_levels: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            initial_intervals: 125,
            subgrid_factor: DEFAULT_SUBGRID_FACTOR,
            max_levels: 5,
        }
    }
}

/// The last iterate of a refinement together with its history.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub solution: EquilibriumSolution,
    /// `distances[k]` is the sup-distance between the `Θ₂` curves at `N₀·2^k`
    /// and `N₀·2^{k+1}` intervals, measured on the coarser curve's nodes.
    pub distances: Vec<f64>,
}

impl Refinement {
    pub fn intervals(&self) -> usize {
        self.solution.partition.intervals()
    }

    pub fn mesh(&self) -> f64 {
        self.solution.mesh()
    }

    /// Successive ratios `distances[k+1] / distances[k]`; about 1/2 for a
    /// first-order scheme.
    pub fn ratios(&self) -> Vec<f64> {
        self.distances.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Empirical convergence orders `log₂(distances[k] / distances[k+1])`.
    pub fn orders(&self) -> Vec<f64> {
        self.ratios().iter().map(|r| -r.log2()).collect()
    }
}

/// Doubles `N` on uniform partitions until successive `Θ₂` curves are closer
/// than `tol` in sup-norm. An infinite `tol` returns the first iterate.
pub fn refine_to_tolerance(
    players: Players,
    params: &ModelParams,
    tol: f64,
    options: RefineOptions,
) -> Result<Refinement> {
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance must be > 0 (got {tol})")));
    }
    if options.initial_intervals == 0 {
        return Err(Error::param(
            "initial partition needs at least one interval",
        ));
    }
    let run = |n: usize| {
        let part = Partition::uniform(params.horizon, n)?;
        solve(params, &part, options.subgrid_factor, players)
    };
    let mut n = options.initial_intervals;
    let mut current = Refinement {
        solution: run(n)?,
        distances: Vec::new(),
    };
    if tol.is_infinite() {
        return Ok(current);
    }
    for _ in 0..options.max_levels {
        n *= 2;
        let next = run(n)?;
        let d = current.solution.theta2.sup_distance(&next.theta2);
        current.distances.push(d);
        current.solution = next;
        if d < tol {
            return Ok(current);
        }
    }
    Err(Error::NotConverged {
        intervals: n,
        distance: current.distances.last().copied().unwrap_or(f64::INFINITY),
        tolerance: tol,
        last: Box::new(current),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(n: usize, levels: usize) -> RefineOptions {
        RefineOptions {
            initial_intervals: n,
            subgrid_factor: 4,
            max_levels: levels,
        }
    }

    #[test]
    fn infinite_tolerance_returns_first_iterate() {
        let p = ModelParams::baseline();
        let r = refine_to_tolerance(Players::Game, &p, f64::INFINITY, opts(20, 3)).unwrap();
        assert_eq!(r.intervals(), 20);
        assert!(r.distances.is_empty());
        let direct = solve(&p, &Partition::uniform(10.0, 20).unwrap(), 4, Players::Game).unwrap();
        assert_eq!(r.solution, direct);
    }

    #[test]
    fn first_order_ratios() {
        let p = ModelParams::baseline();
        let r = refine_to_tolerance(Players::Single, &p, 1e-12, opts(50, 3));
        let Err(Error::NotConverged {
            last, intervals, ..
        }) = r
        else {
            panic!("expected the level cap to be hit");
        };
        assert_eq!(intervals, 400);
        assert_eq!(last.distances.len(), 3);
        for ratio in last.ratios() {
            assert!((0.3..=0.7).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn converges_and_reports_mesh() {
        let p = ModelParams::baseline();
        let r = refine_to_tolerance(Players::Game, &p, 5e-3, opts(25, 6)).unwrap();
        assert!(*r.distances.last().unwrap() < 5e-3);
        assert!((r.mesh() - 10.0 / r.intervals() as f64).abs() < 1e-12);
        assert!(refine_to_tolerance(Players::Game, &p, 0.0, opts(25, 1)).is_err());
    }
}
