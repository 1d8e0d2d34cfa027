//! `tilq`: solve, verify, simulate and reproduce the figures of the
//! time-inconsistent LQ model.

mod config;
mod csvio;
mod error;
mod figures;
mod svg;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tilq_core::equilibrium::{
    game_partition_solve, single_partition_solve, symmetric_kernel, Partition,
};
use tilq_core::evaluate::{closed_loop_value, ClosedLoopPair};
use tilq_core::riccati::{game_constant_curves, single_constant_curve};
use tilq_core::simulate::{estimate_value, simulate_closed_loop, write_ensemble_csv, SimConfig};
use tilq_core::{uniform_grid, StrategyCurve};

use config::RunConfig;
use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "tilq",
    version,
    about = "Equilibrium strategies for a present-biased zero-sum LQ game"
)]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Model and run settings. Values given here override the config file.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// Flat `key = value` file applied before the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Horizon.
    #[arg(long = "T", global = true)]
    t: Option<String>,
    /// State volatility.
    #[arg(long, global = true)]
    sigma: Option<String>,
    /// Long-run discount rate.
    #[arg(long, global = true)]
    rho: Option<String>,
    /// Effort-cost ratio, 0 < R <= 1.
    #[arg(long = "R", global = true)]
    r: Option<String>,
    /// Weight on the long-run rate in the discount mixture.
    #[arg(long, global = true)]
    lambda: Option<String>,
    /// Short-run rate of the discount mixture.
    #[arg(long, global = true)]
    gamma: Option<String>,
    /// Partition intervals.
    #[arg(long = "N", global = true)]
    n: Option<String>,
    /// Quadrature sub-steps per partition interval.
    #[arg(long, global = true)]
    subgrid: Option<String>,
    /// Monte Carlo paths.
    #[arg(long, global = true)]
    paths: Option<String>,
    /// Time steps per path.
    #[arg(long, global = true)]
    steps: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Initial state.
    #[arg(long, global = true)]
    xi: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> [(&'static str, &Option<String>); 13] {
        [
            ("T", &self.t),
            ("sigma", &self.sigma),
            ("rho", &self.rho),
            ("R", &self.r),
            ("lambda", &self.lambda),
            ("gamma", &self.gamma),
            ("N", &self.n),
            ("subgrid", &self.subgrid),
            ("paths", &self.paths),
            ("steps", &self.steps),
            ("seed", &self.seed),
            ("xi", &self.xi),
            ("out", &self.out),
        ]
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (key, value) in self.pairs() {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a strategy; writes strategy.csv, plus kernel.csv for equilibria.
    Solve {
        #[arg(value_enum)]
        kind: Kind,
    },
    /// Regenerate figure data as figN.csv and figN.svg.
    Figures {
        /// 1 to 8, or all.
        #[arg(long, default_value = "all")]
        figure: String,
    },
    /// Run the verification suites and print a pass/fail table.
    Verify,
    /// Monte Carlo estimate of player 1's payoff; writes ensemble.csv.
    Simulate {
        #[arg(value_enum, default_value = "game-equilibrium")]
        kind: Kind,
        /// Paths written to ensemble.csv.
        #[arg(long, default_value_t = 100)]
        dump_paths: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    SingleConstant,
    SingleEquilibrium,
    GameConstant,
    GameEquilibrium,
}

impl Kind {
    fn is_game(self) -> bool {
        matches!(self, Kind::GameConstant | Kind::GameEquilibrium)
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    Ok(&cfg.out)
}

/// Gains of `kind`; a lone player has `Θ₁ = 0`.
fn solve_pair(
    kind: Kind,
    cfg: &RunConfig,
) -> Result<
    (
        ClosedLoopPair,
        Option<tilq_core::equilibrium::EquilibriumSolution>,
    ),
    CliError,
> {
    let grid = uniform_grid(cfg.horizon, cfg.intervals);
    match kind {
        Kind::SingleConstant => {
            let theta2 = single_constant_curve(&cfg.exponential()?, grid)?;
            Ok((ClosedLoopPair::single(theta2), None))
        }
        Kind::GameConstant => {
            let (theta1, theta2) = game_constant_curves(&cfg.exponential()?, grid)?;
            Ok((ClosedLoopPair::new(theta1, theta2)?, None))
        }
        Kind::SingleEquilibrium | Kind::GameEquilibrium => {
            let params = cfg.mixture()?;
            let part = Partition::uniform(params.horizon, cfg.intervals)?;
            let sol = if kind.is_game() {
                game_partition_solve(&params, &part, cfg.subgrid)?
            } else {
                single_partition_solve(&params, &part, cfg.subgrid)?
            };
            let pair = if kind.is_game() {
                ClosedLoopPair::from_solution(&sol)
            } else {
                ClosedLoopPair::single(sol.theta2.clone())
            };
            Ok((pair, Some(sol)))
        }
    }
}

fn at_nodes(curve: &StrategyCurve, nodes: &[f64]) -> Vec<f64> {
    nodes.iter().map(|&s| curve.value_at(s)).collect()
}

fn cmd_solve(kind: Kind, cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let (pair, sol) = solve_pair(kind, cfg)?;
    let nodes: Vec<f64> = match &sol {
        Some(s) => s.partition.points().to_vec(),
        None => pair.grid().to_vec(),
    };
    let (t1, t2) = (
        at_nodes(pair.theta1(), &nodes),
        at_nodes(pair.theta2(), &nodes),
    );
    let path = dir.join("strategy.csv");
    let n = csvio::write_rows(
        &path,
        "s,theta1,theta2",
        (0..nodes.len()).map(|k| vec![nodes[k], t1[k], t2[k]]),
    )?;
    println!("wrote {} ({n} rows)", path.display());
    if let Some(sol) = sol {
        let path = dir.join("kernel.csv");
        let n = csvio::write_rows(
            &path,
            "t,s,P",
            sol.kernel.entries().map(|(t, s, p)| vec![t, s, p]),
        )?;
        println!("wrote {} ({n} rows)", path.display());
        if kind == Kind::GameEquilibrium && cfg.cost_ratio == 1.0 {
            let params = cfg.mixture()?;
            let err = sol
                .kernel
                .sup_error_piecewise(|t, s| symmetric_kernel(&params, t, s).unwrap_or(f64::NAN));
            println!("symmetric kernel sup-error: {err:.6e}");
        }
    }
    Ok(())
}

fn cmd_figures(selector: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let ids = figures::parse_selector(selector)?;
    let dir = out_dir(cfg)?;
    for id in ids {
        let fig = figures::build(id, cfg)?;
        let csv = dir.join(format!("fig{id}.csv"));
        csvio::write_table(&csv, &fig.header, &fig.rows)?;
        let svg = dir.join(format!("fig{id}.svg"));
        std::fs::write(&svg, svg::render(&fig.title, &fig.panels))
            .map_err(|e| CliError::io(&svg, e))?;
        println!("wrote {} and {}", csv.display(), svg.display());
    }
    Ok(())
}

fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let checks = verify::run(cfg);
    print!("{}", verify::report(cfg, &checks));
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.clone())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(failed))
    }
}

fn cmd_simulate(kind: Kind, dump: usize, cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let (pair, _) = solve_pair(kind, cfg)?;
    let params = if matches!(kind, Kind::SingleConstant | Kind::GameConstant) {
        cfg.exponential()?
    } else {
        cfg.mixture()?
    };
    let sim = SimConfig {
        n_paths: cfg.paths,
        n_steps: cfg.steps,
        seed: cfg.seed,
        xi: cfg.xi,
    };
    let est = estimate_value(0.0, &pair, &params, &sim)?;
    let exact = closed_loop_value(0.0, &pair, &params)?.value(cfg.xi);
    println!(
        "J1 Monte Carlo: {:.8e} (standard error {:.3e}, {} paths)",
        est.mean, est.std_error, est.n
    );
    println!("J1 Lyapunov:    {exact:.8e}");
    println!("z-score:        {:.3}", est.z_score(exact));
    if dump > 0 {
        let ens = simulate_closed_loop(
            &pair,
            &params,
            &SimConfig {
                n_paths: dump.min(cfg.paths),
                ..sim
            },
        )?;
        let path = dir.join("ensemble.csv");
        let io = |e| CliError::io(&path, e);
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path).map_err(io)?);
        write_ensemble_csv(&ens, &mut w).map_err(io)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.overrides.resolve()?;
    match cli.command {
        Command::Solve { kind } => cmd_solve(kind, &cfg),
        Command::Figures { figure } => cmd_figures(&figure, &cfg),
        Command::Verify => cmd_verify(&cfg),
        Command::Simulate { kind, dump_paths } => cmd_simulate(kind, dump_paths, &cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
