//! Fixed-step classical RK4 for scalar ODEs integrated backward in time.

/// Integrates `dp/ds = f(s, p)` backward from `p(grid[last]) = terminal`,
/// one RK4 step per grid segment. Returns `p` at every node.
///
/// `f` may return NaN/inf; `guard` is called after each step with the node
/// index and value and can abort by returning an error.
pub(crate) fn rk4_backward<E>(
    grid: &[f64],
    terminal: f64,
    mut f: impl FnMut(f64, f64) -> f64,
    mut guard: impl FnMut(usize, f64) -> Result<(), E>,
) -> Result<Vec<f64>, E> {
    let n = grid.len();
    let mut out = vec![0.0; n];
    out[n - 1] = terminal;
    let mut p = terminal;
    for i in (0..n - 1).rev() {
        p = rk4_step(grid[i + 1], grid[i], p, &mut f);
        guard(i, p)?;
        out[i] = p;
    }
    Ok(out)
}

/// One RK4 step from `s0` to `s1` (either direction).
#[inline]
pub(crate) fn rk4_step(s0: f64, s1: f64, p: f64, f: &mut impl FnMut(f64, f64) -> f64) -> f64 {
    let h = s1 - s0;
    let mid = s0 + 0.5 * h;
    let k1 = f(s0, p);
    let k2 = f(mid, p + 0.5 * h * k1);
    let k3 = f(mid, p + 0.5 * h * k2);
    let k4 = f(s1, p + h * k3);
    p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_on_linear_decay() {
        // p' = p, p(1) = 1  =>  p(0) = e^{-1}
        let err = |n: usize| {
            let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let p = rk4_backward::<()>(&grid, 1.0, |_, p| p, |_, _| Ok(())).unwrap();
            (p[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(10) / err(20);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }
}
