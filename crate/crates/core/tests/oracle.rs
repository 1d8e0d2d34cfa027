//! Cross-checks of the equilibrium solvers against an independent reference.
//!
//! For `α(u) = Σ w_c e^{-r_c u}` the equilibrium kernel separates as
//! `P(t,s) = Σ w_c e^{-r_c(s-t)} B_c(s)`, where
//! `B_c' = (r_c - σ² + 2kΓ)B_c - kΓ²`, `B_c(T) = 1`, `Γ = Σ w_c B_c`, and
//! `k = (1-R)/R` for the game or `1/R` for the lone player. That is a local
//! ODE system, integrated here with fine-step RK4.

use tilq_core::equilibrium::{
    game_partition_solve, reconstruct_kernel_strided, single_partition_solve, vdie_solve, Partition,
};
use tilq_core::riccati::{game_constant_gains, single_constant_gain};
use tilq_core::{uniform_grid, DiscountSpec, ModelParams};

struct Reference {
    h: f64,
    /// `b[i][c] = B_c(i·h)`.
    b: Vec<Vec<f64>>,
    weights: Vec<f64>,
    rates: Vec<f64>,
}

impl Reference {
    fn new(params: &ModelParams, k: f64, steps: usize) -> Self {
        let (weights, rates): (Vec<f64>, Vec<f64>) =
            params.discount.components().into_iter().unzip();
        let sigma2 = params.sigma * params.sigma;
        let h = params.horizon / steps as f64;
        let rhs = |b: &[f64]| -> Vec<f64> {
            let g: f64 = weights.iter().zip(b).map(|(w, x)| w * x).sum();
            rates
                .iter()
                .zip(b)
                .map(|(r, x)| (r - sigma2 + 2.0 * k * g) * x - k * g * g)
                .collect()
        };
        let axpy = |b: &[f64], d: &[f64], a: f64| -> Vec<f64> {
            b.iter().zip(d).map(|(x, y)| x + a * y).collect()
        };
        let mut out = vec![Vec::new(); steps + 1];
        let mut b = vec![1.0; weights.len()];
        out[steps] = b.clone();
        for i in (0..steps).rev() {
            let k1 = rhs(&b);
            let k2 = rhs(&axpy(&b, &k1, -0.5 * h));
            let k3 = rhs(&axpy(&b, &k2, -0.5 * h));
            let k4 = rhs(&axpy(&b, &k3, -h));
            b = (0..b.len())
                .map(|c| b[c] - h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]))
                .collect();
            out[i] = b.clone();
        }
        Reference {
            h,
            b: out,
            weights,
            rates,
        }
    }

    fn index(&self, s: f64) -> usize {
        let i = (s / self.h).round() as usize;
        assert!(
            (i as f64 * self.h - s).abs() < 1e-9,
            "{s} is not a reference node"
        );
        i
    }

    fn kernel(&self, t: f64, s: f64) -> f64 {
        let b = &self.b[self.index(s)];
        (0..b.len())
            .map(|c| self.weights[c] * (-self.rates[c] * (s - t)).exp() * b[c])
            .sum()
    }

    fn gamma(&self, s: f64) -> f64 {
        self.kernel(s, s)
    }
}

fn game_reference(params: &ModelParams) -> Reference {
    Reference::new(params, params.game_weight(), 40_000)
}

#[test]
fn vdie_matches_reference_diagonal() {
    let p = ModelParams::baseline();
    let reference = game_reference(&p);
    let gamma = vdie_solve(&p, &uniform_grid(10.0, 20_000)).unwrap();
    let err = gamma
        .grid()
        .iter()
        .zip(gamma.values())
        .step_by(10)
        .map(|(&t, &g)| (g - reference.gamma(t)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn reconstructed_kernel_matches_reference() {
    let p = ModelParams::baseline();
    let reference = game_reference(&p);
    let gamma = vdie_solve(&p, &uniform_grid(10.0, 8_000)).unwrap();
    let kernel = reconstruct_kernel_strided(&gamma, &p, 200).unwrap();
    let err = kernel.sup_error_at_nodes(|t, s| reference.kernel(t, s));
    assert!(err < 1e-6, "{err}");
}

#[test]
fn game_partition_kernel_converges_to_reference() {
    let p = ModelParams::baseline();
    let reference = game_reference(&p);
    let errors: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&n| {
            let sol = game_partition_solve(&p, &Partition::uniform(10.0, n).unwrap(), 8).unwrap();
            sol.kernel
                .sup_error_piecewise(|t, s| reference.kernel(t, s))
        })
        .collect();
    assert!(errors[2] < 2e-2, "{errors:?}");
    for w in errors.windows(2) {
        let ratio = w[1] / w[0];
        assert!((0.35..=0.65).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn single_partition_gain_converges_to_reference() {
    let p = ModelParams::baseline();
    let reference = Reference::new(&p, 1.0 / p.cost_ratio, 40_000);
    let mut previous = f64::INFINITY;
    for n in [100, 200, 400] {
        let sol = single_partition_solve(&p, &Partition::uniform(10.0, n).unwrap(), 8).unwrap();
        let diag = sol.kernel.diagonal();
        let err = sol
            .partition
            .points()
            .iter()
            .zip(&diag)
            .map(|(&t, &v)| (v - reference.gamma(t)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3 && err <= previous, "N = {n}: {err}");
        previous = err;
        // The gain at partition points is -P(t_k, t_k)/R.
        for (&t, &v) in sol.partition.points().iter().zip(&diag) {
            assert!((sol.theta2.value_at(t) + v / p.cost_ratio).abs() < 1e-14);
        }
    }
}

/// Direct backward RK4 of the constant-discount Riccati equations.
fn riccati_rk4(a: f64, quad: f64, steps: usize) -> Vec<f64> {
    // P' = aP + quad·P², P(10) = 1
    let f = |p: f64| a * p + quad * p * p;
    let h = 10.0 / steps as f64;
    let mut out = vec![1.0; steps + 1];
    let mut p = 1.0;
    for i in (0..steps).rev() {
        let k1 = f(p);
        let k2 = f(p - 0.5 * h * k1);
        let k3 = f(p - 0.5 * h * k2);
        let k4 = f(p - h * k3);
        p -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out[i] = p;
    }
    out
}

#[test]
fn closed_forms_match_direct_integration() {
    let p = ModelParams::new(10.0, 0.25, 0.5, DiscountSpec::exponential(0.15).unwrap()).unwrap();
    let a = 0.15 - 0.0625;
    let single = riccati_rk4(a, 1.0 / 0.5, 10_000);
    let game = riccati_rk4(a, 0.5 / 0.5, 10_000);
    for i in (0..=10_000).step_by(50) {
        let s = i as f64 * 1e-3;
        assert!((single_constant_gain(&p, s).unwrap() + single[i] / 0.5).abs() < 1e-8);
        let (t1, t2) = game_constant_gains(&p, s).unwrap();
        assert!((t1 - game[i]).abs() < 1e-8 && (t2 + game[i] / 0.5).abs() < 1e-8);
    }
}
