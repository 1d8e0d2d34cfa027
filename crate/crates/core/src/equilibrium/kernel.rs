use crate::error::{Error, Result};

/// A two-time function sampled on `{(t_i, s_j) : i ≤ j}` of a shared grid,
/// stored as ragged rows: `rows[i][j - i] = P(t_i, s_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularKernel {
    grid: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

/// Smallest slack of each a-priori inequality over all nodes; negative means
/// violated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBounds {
    /// `min P(t, s)`.
    pub nonnegativity: f64,
    /// `min e^{σ²(T-s)} - P(t, s)`.
    pub envelope: f64,
    /// `min P(s, s) - P(t, s)`.
    pub diagonal_dominance: f64,
}

impl KernelBounds {
    pub fn worst(&self) -> f64 {
        self.nonnegativity
            .min(self.envelope)
            .min(self.diagonal_dominance)
    }
}

impl TriangularKernel {
    pub fn new(grid: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        crate::curve::validate_grid(&grid)?;
        if rows.len() != grid.len() {
            return Err(Error::domain(format!(
                "kernel has {} rows for {} grid nodes",
                rows.len(),
                grid.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != grid.len() - i {
                return Err(Error::domain(format!(
                    "kernel row {i} has {} entries, expected {}",
                    row.len(),
                    grid.len() - i
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!(
                    "kernel row {i} has a non-finite entry"
                )));
            }
        }
        Ok(TriangularKernel { grid, rows })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `P(t_i, s_j)` for `i ≤ j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i <= j, "kernel is only defined for t <= s");
        self.rows[i][j - i]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    /// `P(t_i, T)` for every row.
    pub fn terminal_column(&self) -> Vec<f64> {
        self.rows.iter().map(|r| *r.last().unwrap()).collect()
    }

    /// Iterates `(t, s, P)` over all nodes, row by row.
    pub fn entries(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(i, row)| {
            row.iter()
                .enumerate()
                .map(move |(k, &v)| (self.grid[i], self.grid[i + k], v))
        })
    }

    pub fn bounds(&self, sigma: f64) -> KernelBounds {
        let horizon = *self.grid.last().unwrap();
        let sigma2 = sigma * sigma;
        let mut b = KernelBounds {
            nonnegativity: f64::INFINITY,
            envelope: f64::INFINITY,
            diagonal_dominance: f64::INFINITY,
        };
        for (i, row) in self.rows.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                let j = i + k;
                let s = self.grid[j];
                b.nonnegativity = b.nonnegativity.min(v);
                b.envelope = b.envelope.min((sigma2 * (horizon - s)).exp() - v);
                b.diagonal_dominance = b.diagonal_dominance.min(self.rows[j][0] - v);
            }
        }
        b
    }

    /// Largest deviation at the nodes from `reference(t, s)`.
    pub fn sup_error_at_nodes(&self, reference: impl Fn(f64, f64) -> f64) -> f64 {
        self.entries()
            .map(|(t, s, v)| (v - reference(t, s)).abs())
            .fold(0.0, f64::max)
    }

    /// Sup-distance from `reference` over the continuous triangle, reading
    /// this kernel as piecewise constant in `t` (row `i` holds on
    /// `[t_i, t_{i+1})`, which is how the partition recursions define it).
    ///
    /// Each row is compared at `t_i` and at the left limit `t_{i+1}⁻`. That is
    /// the exact supremum in `t` whenever the reference is monotone in `t`
    /// between grid nodes.
    pub fn sup_error_piecewise(&self, reference: impl Fn(f64, f64) -> f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            let t0 = self.grid[i];
            let t1 = self.grid.get(i + 1).copied();
            for (k, &v) in row.iter().enumerate() {
                let s = self.grid[i + k];
                worst = worst.max((v - reference(t0, s)).abs());
                if let Some(t1) = t1 {
                    if t1 <= s {
                        worst = worst.max((v - reference(t1, s)).abs());
                    }
                }
            }
        }
        worst
    }
}
