use crate::curve::validate_grid;
use crate::error::{Error, Result};
use crate::params::uniform_grid;

/// `0 = t₀ < t₁ < … < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    points: Vec<f64>,
}

impl Partition {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        validate_grid(&points)?;
        if points[0] != 0.0 {
            return Err(Error::domain(format!(
                "partition must start at 0 (starts at {})",
                points[0]
            )));
        }
        Ok(Partition { points })
    }

    /// `t_i = iT/N`, so the mesh is `T/N`.
    pub fn uniform(horizon: f64, intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::param("a partition needs at least one interval"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::param(format!("horizon must be > 0 (got {horizon})")));
        }
        Partition::new(uniform_grid(horizon, intervals))
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// `‖Π‖ = max (t_i - t_{i-1})`.
    pub fn mesh(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mesh() {
        let p = Partition::uniform(10.0, 4).unwrap();
        assert_eq!(p.points(), &[0.0, 2.5, 5.0, 7.5, 10.0]);
        assert_eq!(p.mesh(), 2.5);
        assert_eq!(p.intervals(), 4);
    }

    #[test]
    fn irregular_mesh_and_errors() {
        let p = Partition::new(vec![0.0, 1.0, 4.0, 4.5]).unwrap();
        assert_eq!(p.mesh(), 3.0);
        assert!(Partition::new(vec![0.0, 2.0, 1.0]).is_err());
        assert!(Partition::new(vec![0.1, 2.0]).is_err());
        assert!(Partition::uniform(10.0, 0).is_err());
    }
}
