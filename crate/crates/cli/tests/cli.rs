use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_tilq");

fn temp() -> TempDir {
    tempfile::tempdir().unwrap()
}

fn tilq(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap()
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|c| {
                    if c.is_empty() {
                        f64::NAN
                    } else {
                        c.parse().unwrap()
                    }
                })
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn game_constant_terminal_row() {
    let dir = temp();
    let out = tilq(&dir.path(), &["solve", "game-constant"]);
    assert!(out.status.success());
    let (header, rows) = table(&dir.path().join("strategy.csv"));
    assert_eq!(header, ["s", "theta1", "theta2"]);
    assert_eq!(rows.len(), 1001);
    assert_eq!(rows.last().unwrap(), &vec![10.0, 1.0, -2.0]);
    assert!(!dir.path().join("kernel.csv").exists());
}

#[test]
fn symmetric_equilibrium_reports_small_error() {
    let dir = temp();
    let out = tilq(
        &dir.path(),
        &["solve", "game-equilibrium", "--R", "1", "--N", "1000"],
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let line = stdout
        .lines()
        .find(|l| l.starts_with("symmetric kernel sup-error:"))
        .unwrap();
    let err: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(err < 1e-2, "{err}");
    let (header, rows) = table(&dir.path().join("kernel.csv"));
    assert_eq!(header, ["t", "s", "P"]);
    assert_eq!(rows.len(), 1001 * 1002 / 2);
    // At R = 1 the two gains are exact negatives.
    let (_, strategy) = table(&dir.path().join("strategy.csv"));
    for r in &strategy {
        assert_eq!(r[1], -r[2]);
    }
}

#[test]
fn degenerate_rate_uses_limit_branch() {
    let dir = temp();
    let out = tilq(
        &dir.path(),
        &[
            "solve",
            "single-constant",
            "--rho",
            "0.0625",
            "--sigma",
            "0.25",
        ],
    );
    assert!(out.status.success());
    let (_, rows) = table(&dir.path().join("strategy.csv"));
    assert!(rows.iter().all(|r| r.iter().all(|v| v.is_finite())));
    assert!((rows[0][2] + 1.0 / 10.5).abs() < 1e-12);
    assert!(rows.iter().all(|r| r[1] == 0.0));
}

#[test]
fn invalid_cost_ratio_exits_2() {
    let dir = temp();
    let out = tilq(&dir.path(), &["verify", "--R", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("0 < R <= 1"));
}

#[test]
fn unknown_figure_exits_2() {
    let dir = temp();
    let out = tilq(&dir.path(), &["figures", "--figure", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8(out.stderr).unwrap().is_empty());
}

#[test]
fn unparsable_flag_exits_2() {
    let dir = temp();
    let out = tilq(&dir.path(), &["solve", "game-constant", "--sigma", "abc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_then_flags() {
    let dir = temp();
    let file = dir.path().join("run.conf");
    std::fs::write(&file, "# horizon and grid\nT = 4\nN = 40\nR = 0.25\n").unwrap();
    let out = Command::new(BIN)
        .args(["solve", "game-constant", "--config"])
        .arg(&file)
        .args(["--N", "20", "--out"])
        .arg(&dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (_, rows) = table(&dir.path().join("strategy.csv"));
    assert_eq!(rows.len(), 21);
    assert_eq!(rows.last().unwrap(), &vec![4.0, 1.0, -4.0]);

    std::fs::write(&file, "colour = blue\n").unwrap();
    let out = Command::new(BIN)
        .args(["solve", "game-constant", "--config"])
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn figure_orderings_hold() {
    let dir = temp();
    for id in ["3", "5", "8"] {
        let out = tilq(&dir.path(), &["figures", "--figure", id, "--N", "400"]);
        assert!(out.status.success());
        let svg = std::fs::read_to_string(dir.path().join(format!("fig{id}.svg"))).unwrap();
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    }
    let (h3, r3) = table(&dir.path().join("fig3.csv"));
    assert_eq!(
        h3,
        [
            "s",
            "single_equilibrium",
            "single_constant@rho=0.15",
            "single_constant@rho=0.225"
        ]
    );
    for r in &r3 {
        assert!(r[2] <= r[1] + 1e-12 && r[1] <= r[3] + 1e-12, "{r:?}");
    }
    let (h8, r8) = table(&dir.path().join("fig8.csv"));
    assert_eq!(r8.last().unwrap()[0], 10.0);
    assert_eq!(h8[1], "game_equilibrium");
    for r in r8.iter().filter(|r| r[0] <= 8.5) {
        assert!(r[2] <= r[1] + 1e-12 && r[1] <= r[3] + 1e-12, "{r:?}");
    }
    let (h5, r5) = table(&dir.path().join("fig5.csv"));
    for (g, name) in h5
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("game_constant@"))
    {
        let s = h5
            .iter()
            .position(|h| *h == name.replace("game_", "single_"))
            .unwrap();
        for r in r5.iter().filter(|r| r[g].is_finite()) {
            assert!(r[g].abs() >= r[s].abs() - 1e-12, "{name}: {r:?}");
        }
    }
}

#[test]
fn simulate_writes_ensemble() {
    let dir = temp();
    let out = tilq(
        &dir.path(),
        &[
            "simulate",
            "game-constant",
            "--paths",
            "500",
            "--steps",
            "50",
            "--dump-paths",
            "3",
        ],
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("J1 Monte Carlo") && stdout.contains("J1 Lyapunov"));
    let (header, rows) = table(&dir.path().join("ensemble.csv"));
    assert_eq!(header, ["path", "step", "time", "state", "u1", "u2"]);
    assert_eq!(rows.len(), 3 * 51);
    assert_eq!(rows[0][3], 1.0);
}

#[test]
fn csv_values_round_trip() {
    let dir = temp();
    assert!(
        tilq(&dir.path(), &["solve", "single-equilibrium", "--N", "50"])
            .status
            .success()
    );
    let text = std::fs::read_to_string(dir.path().join("strategy.csv")).unwrap();
    for line in text.lines().skip(1) {
        for cell in line.split(',') {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), cell);
        }
    }
}
