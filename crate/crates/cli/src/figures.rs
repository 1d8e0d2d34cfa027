//! Data behind the eight figures: strategy curves over parameter sweeps,
//! sandwich overlays and single-versus-game overlays.
//!
//! Every curve is sampled at the nodes `k·T/N` of its own uniform partition.
//! The CSV has an `s` column followed by one column per curve named
//! `<strategy>@<param>=<value>` (or just `<strategy>@rho=<value>` for the
//! overlays); curves with a shorter horizon leave trailing cells empty.

use tilq_core::equilibrium::{game_partition_solve, single_partition_solve, Partition};
use tilq_core::riccati::{game_constant_gains, single_constant_gain};
use tilq_core::{uniform_grid, DiscountSpec, ModelParams};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::svg::{Panel, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    SingleConstant,
    SingleEquilibrium,
    GameConstant,
    GameEquilibrium,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::SingleConstant => "single_constant",
            Strategy::SingleEquilibrium => "single_equilibrium",
            Strategy::GameConstant => "game_constant",
            Strategy::GameEquilibrium => "game_equilibrium",
        }
    }

    fn is_constant(self) -> bool {
        matches!(self, Strategy::SingleConstant | Strategy::GameConstant)
    }
}

/// A curve: label and `Θ₂` at the nodes `k·T/N`, `k = 0..=N`.
pub struct Curve {
    pub label: String,
    pub horizon: f64,
    pub values: Vec<f64>,
}

pub struct Figure {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub panels: Vec<Panel>,
}

/// Player 2's gain along the nodes of `N` uniform intervals.
pub fn strategy_curve(
    strategy: Strategy,
    params: &ModelParams,
    intervals: usize,
    subgrid: usize,
) -> Result<Vec<f64>, CliError> {
    let grid = uniform_grid(params.horizon, intervals);
    if strategy.is_constant() {
        return grid
            .iter()
            .map(|&s| {
                Ok(match strategy {
                    Strategy::SingleConstant => single_constant_gain(params, s)?,
                    _ => game_constant_gains(params, s)?.1,
                })
            })
            .collect();
    }
    let part = Partition::uniform(params.horizon, intervals)?;
    let sol = match strategy {
        Strategy::SingleEquilibrium => single_partition_solve(params, &part, subgrid)?,
        _ => game_partition_solve(params, &part, subgrid)?,
    };
    Ok(part
        .points()
        .iter()
        .map(|&s| sol.theta2.value_at(s))
        .collect())
}

fn short(v: f64) -> String {
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// The model for `strategy`: exponential at rate `rho` for closed forms,
/// the configured mixture otherwise.
fn model(cfg: &RunConfig, strategy: Strategy, lambda: f64) -> Result<ModelParams, CliError> {
    let discount = if strategy.is_constant() {
        DiscountSpec::exponential(cfg.rho)
    } else {
        DiscountSpec::mixture(lambda, cfg.rho, cfg.gamma)
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    ModelParams::new(cfg.horizon, cfg.sigma, cfg.cost_ratio, discount)
        .map_err(|e| CliError::Config(e.to_string()))
}

const SWEEPS: &[(&str, [f64; 3])] = &[
    ("T", [0.5, 1.0, 1.5]),
    ("sigma", [0.4, 1.0, 1.6]),
    ("rho", [1.0 / 3.0, 1.0, 5.0 / 3.0]),
    ("R", [0.5, 1.0, 2.0]),
];

/// One panel per swept parameter, each with three scaled values of it and
/// every strategy in `strategies`. Invalid combinations are skipped.
fn sweep(
    cfg: &RunConfig,
    strategies: &[Strategy],
    lambda: f64,
) -> Result<Vec<(String, Vec<Curve>)>, CliError> {
    let mut panels = Vec::new();
    for (key, factors) in SWEEPS {
        let mut curves = Vec::new();
        for f in factors {
            let mut c = cfg.clone();
            let (value, intervals) = match *key {
                "T" => {
                    c.horizon *= f;
                    (
                        c.horizon,
                        ((cfg.intervals as f64) * f).round().max(1.0) as usize,
                    )
                }
                "sigma" => {
                    c.sigma *= f;
                    (c.sigma, cfg.intervals)
                }
                "rho" => {
                    c.rho *= f;
                    (c.rho, cfg.intervals)
                }
                _ => {
                    c.cost_ratio *= f;
                    (c.cost_ratio, cfg.intervals)
                }
            };
            for &s in strategies {
                let Ok(params) = model(&c, s, lambda) else {
                    eprintln!(
                        "skipping {}@{key}={}: invalid parameters",
                        s.name(),
                        short(value)
                    );
                    continue;
                };
                curves.push(Curve {
                    label: format!("{}@{key}={}", s.name(), short(value)),
                    horizon: params.horizon,
                    values: strategy_curve(s, &params, intervals, cfg.subgrid)?,
                });
            }
        }
        panels.push((key.to_string(), curves));
    }
    Ok(panels)
}

/// The baseline curve of `strategy` plus closed forms at the long-run rate
/// `ρ` and the short-run rate `ρ + (1-λ)(γ-ρ)`.
fn sandwich(
    cfg: &RunConfig,
    strategy: Strategy,
    constant: Strategy,
) -> Result<Vec<Curve>, CliError> {
    let params = model(cfg, strategy, cfg.lambda)?;
    let short_run = params.discount.short_run_rate();
    let mut curves = vec![Curve {
        label: strategy.name().to_string(),
        horizon: cfg.horizon,
        values: strategy_curve(strategy, &params, cfg.intervals, cfg.subgrid)?,
    }];
    for rate in [cfg.rho, short_run] {
        let mut c = cfg.clone();
        c.rho = rate;
        let p = model(&c, constant, cfg.lambda)?;
        curves.push(Curve {
            label: format!("{}@rho={}", constant.name(), short(rate)),
            horizon: cfg.horizon,
            values: strategy_curve(constant, &p, cfg.intervals, cfg.subgrid)?,
        });
    }
    Ok(curves)
}

fn assemble(
    id: u8,
    title: &str,
    cfg: &RunConfig,
    panels: Vec<(String, Vec<Curve>)>,
    x_max: Option<f64>,
) -> Figure {
    let step = cfg.horizon / cfg.intervals as f64;
    let curves: Vec<&Curve> = panels.iter().flat_map(|(_, c)| c.iter()).collect();
    let rows_n = curves.iter().map(|c| c.values.len()).max().unwrap_or(0);
    let mut header = vec!["s".to_string()];
    header.extend(curves.iter().map(|c| c.label.clone()));
    let rows = (0..rows_n)
        .map(|k| {
            let mut row = vec![Some(k as f64 * step)];
            row.extend(curves.iter().map(|c| c.values.get(k).copied()));
            row
        })
        .collect();
    let svg_panels = panels
        .iter()
        .map(|(name, curves)| Panel {
            title: if name.is_empty() {
                title.to_string()
            } else {
                format!("varying {name}")
            },
            x_label: "s".into(),
            y_label: "Θ₂(s)".into(),
            series: curves
                .iter()
                .map(|c| {
                    let n = c.values.len() - 1;
                    Series {
                        label: c.label.clone(),
                        points: c
                            .values
                            .iter()
                            .enumerate()
                            .map(|(k, &v)| (c.horizon * k as f64 / n as f64, v))
                            .collect(),
                    }
                })
                .collect(),
            x_max,
        })
        .collect();
    Figure {
        title: format!("Figure {id}: {title}"),
        header,
        rows,
        panels: svg_panels,
    }
}

/// Builds figure `id` (1 to 8) from `cfg`.
pub fn build(id: u8, cfg: &RunConfig) -> Result<Figure, CliError> {
    use Strategy::*;
    let lam = cfg.lambda;
    let fig = match id {
        1 => assemble(
            1,
            "Optimal feedback, constant discount",
            cfg,
            sweep(cfg, &[SingleConstant], lam)?,
            None,
        ),
        // Figure 2 is drawn with λ = 0.3.
        2 => assemble(
            2,
            "Equilibrium feedback, single player",
            cfg,
            sweep(cfg, &[SingleEquilibrium], 0.3)?,
            None,
        ),
        3 => assemble(
            3,
            "Single-player equilibrium between constant-rate optima",
            cfg,
            vec![(
                String::new(),
                sandwich(cfg, SingleEquilibrium, SingleConstant)?,
            )],
            None,
        ),
        4 => assemble(
            4,
            "Saddle feedback, constant discount",
            cfg,
            sweep(cfg, &[GameConstant], lam)?,
            None,
        ),
        5 => assemble(
            5,
            "Saddle versus single-player feedback, constant discount",
            cfg,
            sweep(cfg, &[GameConstant, SingleConstant], lam)?,
            None,
        ),
        6 => assemble(
            6,
            "Equilibrium saddle feedback",
            cfg,
            sweep(cfg, &[GameEquilibrium], lam)?,
            None,
        ),
        7 => assemble(
            7,
            "Equilibrium saddle versus single-player equilibrium",
            cfg,
            sweep(cfg, &[GameEquilibrium, SingleEquilibrium], lam)?,
            None,
        ),
        8 => assemble(
            8,
            "Equilibrium saddle between constant-rate saddles",
            cfg,
            vec![(String::new(), sandwich(cfg, GameEquilibrium, GameConstant)?)],
            Some(0.85 * cfg.horizon),
        ),
        _ => {
            return Err(CliError::Config(format!(
                "unknown figure {id}; expected 1 to 8 or all"
            )))
        }
    };
    Ok(fig)
}

/// `"all"` or a single id in `1..=8`.
pub fn parse_selector(s: &str) -> Result<Vec<u8>, CliError> {
    if s.eq_ignore_ascii_case("all") {
        return Ok((1..=8).collect());
    }
    match s.parse::<u8>() {
        Ok(id @ 1..=8) => Ok(vec![id]),
        _ => Err(CliError::Config(format!(
            "unknown figure {s:?}; expected 1 to 8 or all"
        ))),
    }
}
