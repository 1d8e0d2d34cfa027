use crate::error::{Error, Result};

/// A sampled feedback gain `Θ(s)` on an ascending grid starting at 0.
///
/// Between nodes the curve is linear. Curves produced by the partition
/// recursions jump at partition points, so each node carries both its value
/// (the right limit) and the left limit; for continuous curves the two agree.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyCurve {
    grid: Vec<f64>,
    values: Vec<f64>,
    left_limits: Vec<f64>,
}

impl StrategyCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let left_limits = values.clone();
        Self::with_left_limits(grid, values, left_limits)
    }

    pub fn with_left_limits(
        grid: Vec<f64>,
        values: Vec<f64>,
        left_limits: Vec<f64>,
    ) -> Result<Self> {
        validate_grid(&grid)?;
        if grid[0] != 0.0 {
            return Err(Error::domain(format!(
                "strategy grid must start at 0 (starts at {})",
                grid[0]
            )));
        }
        if values.len() != grid.len() || left_limits.len() != grid.len() {
            return Err(Error::domain(format!(
                "strategy curve has {} nodes but {} values / {} left limits",
                grid.len(),
                values.len(),
                left_limits.len()
            )));
        }
        if values.iter().chain(&left_limits).any(|v| !v.is_finite()) {
            return Err(Error::domain("strategy values must be finite"));
        }
        Ok(StrategyCurve {
            grid,
            values,
            left_limits,
        })
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&s| f(s)).collect();
        Self::new(grid, values)
    }

    pub fn try_from_fn(grid: Vec<f64>, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = grid.iter().map(|&s| f(s)).collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn zeros(grid: Vec<f64>) -> Result<Self> {
        let values = vec![0.0; grid.len()];
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_limits(&self) -> &[f64] {
        &self.left_limits
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().expect("validated grid is non-empty")
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Index `i` of the segment `[grid[i], grid[i+1]]` that holds `s`, using
    /// the right-continuous convention at interior nodes.
    pub(crate) fn segment_of(&self, s: f64) -> usize {
        let last = self.grid.len() - 2;
        match self.grid.partition_point(|&g| g <= s) {
            0 => 0,
            p => (p - 1).min(last),
        }
    }

    /// Value on segment `i` at `s`, using the segment's own end values.
    #[inline]
    pub(crate) fn on_segment(&self, i: usize, s: f64) -> f64 {
        let (s0, s1) = (self.grid[i], self.grid[i + 1]);
        let (v0, v1) = (self.values[i], self.left_limits[i + 1]);
        let w = (s - s0) / (s1 - s0);
        v0 + w * (v1 - v0)
    }

    /// Right-continuous evaluation; at the final node this is the left limit.
    /// Outside the grid the end values are held constant.
    pub fn value_at(&self, s: f64) -> f64 {
        if s <= self.grid[0] {
            return self.values[0];
        }
        if s >= self.horizon() {
            return *self.left_limits.last().unwrap();
        }
        let i = self.segment_of(s);
        self.on_segment(i, s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> StrategyCurve {
        StrategyCurve {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            left_limits: self.left_limits.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Largest `|self(s) - other(s)|` over this curve's nodes.
    pub fn sup_distance(&self, other: &StrategyCurve) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&s, &v)| (v - other.value_at(s)).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::domain("a time grid needs at least two nodes"));
    }
    if grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::domain("time grid contains a non-finite node"));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::domain(format!(
            "time grid must be strictly increasing ({} followed by {})",
            w[0], w[1]
        )));
    }
    Ok(())
}
