use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tilq_core::equilibrium::{
    game_partition_solve, single_partition_solve, symmetric_kernel, Partition,
};
use tilq_core::evaluate::{closed_loop_value, ClosedLoopPair};
use tilq_core::riccati::{game_constant_gains, single_constant_gain};
use tilq_core::simulate::{estimate_value, simulate_closed_loop, McEstimate, SimConfig};
use tilq_core::{uniform_grid, DiscountSpec, ModelParams, StrategyCurve};

prop_compose! {
    fn model()(
        horizon in 1.0f64..10.0,
        sigma in 0.0f64..0.5,
        r in 0.1f64..=1.0,
        lambda in 0.1f64..0.9,
        rho in 0.05f64..0.3,
        gap in 0.05f64..0.5,
    ) -> ModelParams {
        ModelParams::new(horizon, sigma, r, DiscountSpec::mixture(lambda, rho, rho + gap).unwrap()).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn game_kernel_respects_a_priori_bounds(p in model(), n in 10usize..80) {
        let sol = game_partition_solve(&p, &Partition::uniform(p.horizon, n).unwrap(), 4).unwrap();
        let b = sol.kernel.bounds(p.sigma);
        prop_assert!(b.worst() >= -1e-10, "{b:?}");
        for (a, c) in sol.theta1.values().iter().zip(sol.theta2.values()) {
            prop_assert_eq!(*a, -p.cost_ratio * c);
        }
        for (k, v) in sol.kernel.terminal_column().iter().enumerate() {
            let t = sol.partition.points()[k];
            prop_assert_eq!(*v, p.discount.alpha(p.horizon - t).unwrap());
        }
    }

    #[test]
    fn single_kernel_respects_a_priori_bounds(p in model(), n in 10usize..80) {
        let sol = single_partition_solve(&p, &Partition::uniform(p.horizon, n).unwrap(), 4).unwrap();
        prop_assert!(sol.kernel.bounds(p.sigma).worst() >= -1e-10);
        prop_assert!((sol.theta2.value_at(p.horizon) + 1.0 / p.cost_ratio).abs() < 1e-12);
    }

    #[test]
    fn irregular_partitions_keep_bounds(
        p in model(),
        cuts in prop::collection::vec(0.001f64..0.999, 5..40),
    ) {
        let mut pts: Vec<f64> = cuts.iter().map(|c| c * p.horizon).collect();
        pts.push(0.0);
        pts.push(p.horizon);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let sol = game_partition_solve(&p, &Partition::new(pts).unwrap(), 6).unwrap();
        prop_assert!(sol.kernel.bounds(p.sigma).worst() >= -1e-10);
    }

    #[test]
    fn game_intensifies_single_player(p in model()) {
        let exp = ModelParams { discount: DiscountSpec::exponential(p.discount.long_run_rate()).unwrap(), ..p };
        for s in uniform_grid(p.horizon, 20) {
            let single = single_constant_gain(&exp, s).unwrap();
            let (_, game) = game_constant_gains(&exp, s).unwrap();
            prop_assert!(game.abs() >= single.abs() - 1e-12);
        }
    }
}

#[test]
fn symmetric_game_converges_at_first_order() {
    let p = ModelParams::new(
        10.0,
        0.25,
        1.0,
        DiscountSpec::mixture(0.5, 0.15, 0.3).unwrap(),
    )
    .unwrap();
    let errors: Vec<f64> = [250, 500, 1000]
        .iter()
        .map(|&n| {
            let sol = game_partition_solve(&p, &Partition::uniform(10.0, n).unwrap(), 2).unwrap();
            sol.kernel
                .sup_error_piecewise(|t, s| symmetric_kernel(&p, t, s).unwrap())
        })
        .collect();
    for w in errors.windows(2) {
        assert!((0.35..=0.65).contains(&(w[1] / w[0])), "{errors:?}");
    }
}

#[test]
fn simulation_is_identical_across_thread_counts() {
    let p = ModelParams::baseline();
    let sol = game_partition_solve(&p, &Partition::uniform(10.0, 50).unwrap(), 4).unwrap();
    let pair = ClosedLoopPair::from_solution(&sol);
    let cfg = SimConfig {
        n_paths: 3000,
        n_steps: 64,
        seed: 42,
        xi: 1.0,
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            (
                simulate_closed_loop(&pair, &p, &cfg).unwrap(),
                estimate_value(0.0, &pair, &p, &cfg).unwrap(),
            )
        })
    };
    let (e1, v1) = run(1);
    let (e4, v4) = run(4);
    assert_eq!(e1, e4);
    assert_eq!(v1.mean.to_bits(), v4.mean.to_bits());
    assert_eq!(v1.std_error.to_bits(), v4.std_error.to_bits());
}

#[test]
fn second_moment_error_shrinks_like_inverse_sqrt_paths() {
    // Zero feedback: one exact step per path is enough.
    let p = ModelParams::baseline();
    let zero = ClosedLoopPair::single(StrategyCurve::zeros(vec![0.0, 10.0]).unwrap());
    let exact = (0.0625f64 * 10.0).exp();
    let sizes = [100usize, 1_000, 10_000, 100_000];
    let rms: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let sq: f64 = (0..16u64)
                .map(|seed| {
                    let cfg = SimConfig {
                        n_paths: n,
                        n_steps: 1,
                        seed,
                        xi: 1.0,
                    };
                    let e = simulate_closed_loop(&zero, &p, &cfg).unwrap();
                    let m = e.terminal_states().map(|x| x * x).sum::<f64>() / n as f64;
                    (m - exact).powi(2)
                })
                .sum();
            (sq / 16.0).sqrt()
        })
        .collect();
    // Least-squares slope of log(rms) against log(n).
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = rms.iter().map(|r| r.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((-0.7..=-0.3).contains(&slope), "slope {slope}, rms {rms:?}");
}

#[test]
fn monte_carlo_agrees_with_lyapunov_across_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..10u64 {
        let rho = rng.random_range(0.05..0.3);
        let p = ModelParams::new(
            rng.random_range(1.0..10.0),
            rng.random_range(0.05..0.4),
            rng.random_range(0.2..=1.0),
            DiscountSpec::mixture(
                rng.random_range(0.1..0.9),
                rho,
                rho + rng.random_range(0.05..0.5),
            )
            .unwrap(),
        )
        .unwrap();
        let sol =
            game_partition_solve(&p, &Partition::uniform(p.horizon, 100).unwrap(), 4).unwrap();
        let pair = ClosedLoopPair::from_solution(&sol);
        let exact = closed_loop_value(0.0, &pair, &p).unwrap().p;
        let cfg = SimConfig {
            n_paths: 20_000,
            n_steps: 200,
            seed: case,
            xi: 1.0,
        };
        let est: McEstimate = estimate_value(0.0, &pair, &p, &cfg).unwrap();
        assert!(est.z_score(exact) < 3.0, "case {case}: {est:?} vs {exact}");
    }
}
