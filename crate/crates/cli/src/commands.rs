//! The four subcommands. Each builds a [`Table`] and a short text report;
//! writing them out is left to the caller.

use std::fmt::Write as _;

use beamalign::analytics::{
    degradation_percent, optimal_throughput, optimize_sensing_duration, peak_throughput,
    throughput_curve, SensingDuration,
};
use beamalign::simulator::run_monte_carlo_with_threads;
use beamalign::{run_monte_carlo, ChannelParams, FrameConfig, McSummary, PolicySpec};

use crate::config::{ConfigError, ExperimentConfig};
use crate::table::{Cell, Table};

pub const SWEEP_COLUMNS: [&str; 7] = [
    "policy",
    "param",
    "L_or_Lhat",
    "analytic_throughput",
    "sim_mean",
    "sim_stderr",
    "episodes",
];

pub const OPTIMIZE_COLUMNS: [&str; 4] = ["L", "throughput", "is_optimum", "L_hat"];

pub const COMPARE_COLUMNS: [&str; 5] = [
    "policy",
    "param",
    "best_L_or_K",
    "peak_throughput",
    "degradation_pct",
];

pub const SIMULATE_COLUMNS: [&str; 10] = [
    "policy",
    "param",
    "L",
    "episodes",
    "seed",
    "sim_mean",
    "sim_stderr",
    "analytic_throughput",
    "bisection_ceiling",
    "sensing_histogram",
];

/// A table plus the human-readable summary printed on stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub table: Table,
    pub report: String,
}

fn param_cell(p: &PolicySpec) -> Cell {
    p.param().map_or(Cell::Empty, |v| Cell::Int(v as u64))
}

fn simulate_point(
    cfg: &ExperimentConfig,
    spec: &PolicySpec,
    frame: &FrameConfig,
    cp: &ChannelParams,
) -> Result<McSummary, ConfigError> {
    let s = match cfg.threads {
        Some(t) => run_monte_carlo_with_threads(spec, frame, cp, cfg.episodes, cfg.seed, t)?,
        None => run_monte_carlo(spec, frame, cp, cfg.episodes, cfg.seed)?,
    };
    Ok(s)
}

/// Analytic throughput at every `L` (bisection, iterative) or `K`
/// (exhaustive), with Monte Carlo columns when `cfg.simulate` is set.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Output, ConfigError> {
    let frame = cfg.frame()?.with_sensing(0)?;
    let cp = cfg.channel()?;
    let mut table = Table::new(&SWEEP_COLUMNS);
    let mut report = String::new();
    for policy in &cfg.policies {
        let curve = throughput_curve(policy, &frame, &cp)?;
        let mut best: Option<(f64, f64)> = None;
        for point in curve {
            let (at, sim_cfg) = match point.duration {
                SensingDuration::Fixed(l) => (l as f64, frame.with_sensing(l)?),
                SensingDuration::Exhaustive { mean, .. } => (mean, frame),
            };
            let sim = if cfg.simulate {
                Some(simulate_point(cfg, &point.policy, &sim_cfg, &cp)?)
            } else {
                None
            };
            if best.is_none_or(|(_, v)| point.throughput > v) {
                best = Some((at, point.throughput));
            }
            table.push(vec![
                Cell::text(point.policy.name()),
                param_cell(&point.policy),
                Cell::num(at),
                Cell::num(point.throughput),
                Cell::opt_num(sim.as_ref().map(|s| s.mean)),
                Cell::opt_num(sim.as_ref().map(|s| s.std_error)),
                sim.map_or(Cell::Empty, |s| Cell::Int(s.episodes)),
            ]);
        }
        if let Some((at, v)) = best {
            let label = match policy {
                PolicySpec::Exhaustive { .. } => "exhaustive".to_string(),
                p => p.to_string(),
            };
            writeln!(report, "{label:<14} peak {v:.6} bits/slot at {at}").unwrap();
        }
    }
    Ok(Output { table, report })
}

/// Continuous and discrete optimum of the bisection sensing duration, with
/// the full scan over `L ∈ {0..N}` for audit.
pub fn optimize(cfg: &ExperimentConfig) -> Result<Output, ConfigError> {
    let frame = cfg.frame()?.with_sensing(0)?;
    let cp = cfg.channel()?;
    let opt = optimize_sensing_duration(&frame, &cp);
    let mut table = Table::new(&OPTIMIZE_COLUMNS);
    let mut scan_best = (0usize, f64::NEG_INFINITY);
    for l in 0..=frame.frame_len() {
        let v = optimal_throughput(&frame.with_sensing(l)?, &cp);
        if v > scan_best.1 {
            scan_best = (l, v);
        }
        table.push(vec![
            Cell::Int(l as u64),
            Cell::num(v),
            Cell::Int(u64::from(l == opt.sensing)),
            Cell::num(opt.continuous),
        ]);
    }
    let mut report = String::new();
    writeln!(report, "L_hat (continuous) = {:.9}", opt.continuous).unwrap();
    writeln!(report, "L*                 = {}", opt.sensing).unwrap();
    writeln!(
        report,
        "V*(sigma, L*)      = {:.12} bits/slot",
        opt.throughput
    )
    .unwrap();
    let agrees = if scan_best.0 == opt.sensing {
        "agrees"
    } else {
        "DISAGREES"
    };
    writeln!(report, "discrete scan best = L {} ({agrees})", scan_best.0).unwrap();
    Ok(Output { table, report })
}

/// Peak throughput of each policy and its shortfall against bisection.
pub fn compare(cfg: &ExperimentConfig) -> Result<Output, ConfigError> {
    let frame = cfg.frame()?.with_sensing(0)?;
    let cp = cfg.channel()?;
    let reference = peak_throughput(&PolicySpec::Bisection, &frame, &cp)?.throughput;
    let mut table = Table::new(&COMPARE_COLUMNS);
    let mut report = String::new();
    writeln!(
        report,
        "{:<14} {:>8} {:>14} {:>12}",
        "policy", "best", "peak", "degradation"
    )
    .unwrap();
    for policy in &cfg.policies {
        let peak = peak_throughput(policy, &frame, &cp)?;
        let (best, param) = match (peak.duration, peak.policy) {
            (SensingDuration::Exhaustive { sectors, .. }, _) => (sectors, None),
            (SensingDuration::Fixed(l), p) => (l, p.param()),
        };
        let deg = degradation_percent(peak.throughput, reference);
        let (label, best_label) = match peak.policy {
            PolicySpec::Exhaustive { .. } => ("exhaustive".to_string(), format!("K={best}")),
            p => (p.to_string(), format!("L={best}")),
        };
        writeln!(
            report,
            "{label:<14} {best_label:>8} {:>14.6} {:>11.2}%",
            peak.throughput, deg
        )
        .unwrap();
        table.push(vec![
            Cell::text(peak.policy.name()),
            param.map_or(Cell::Empty, |v| Cell::Int(v as u64)),
            Cell::Int(best as u64),
            Cell::num(peak.throughput),
            Cell::num(deg),
        ]);
    }
    Ok(Output { table, report })
}

/// Monte Carlo of each configured policy at one sensing budget: `cfg.sensing`
/// when given, otherwise the bisection optimum `L*`. Exhaustive search runs
/// its own `K` and ignores the budget.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Output, ConfigError> {
    let base = cfg.frame()?.with_sensing(0)?;
    let cp = cfg.channel()?;
    let l = match cfg.sensing {
        Some(l) => l,
        None => optimize_sensing_duration(&base, &cp).sensing,
    };
    let mut table = Table::new(&SIMULATE_COLUMNS);
    let mut report = String::new();
    for policy in &cfg.policies {
        let (frame, analytic, ceiling) = match *policy {
            PolicySpec::Exhaustive { sectors } => {
                let floor_lhat = (sectors + 1) / 2;
                (
                    base,
                    beamalign::analytics::exhaustive_expected_throughput(sectors, &base, &cp),
                    optimal_throughput(&base.with_sensing(floor_lhat)?, &cp),
                )
            }
            PolicySpec::Iterative { division } => {
                let f = base.with_sensing(l)?;
                (
                    f,
                    beamalign::analytics::iterative_expected_throughput(division, &f, &cp),
                    optimal_throughput(&f, &cp),
                )
            }
            PolicySpec::Bisection => {
                let f = base.with_sensing(l)?;
                let v = optimal_throughput(&f, &cp);
                (f, v, v)
            }
        };
        let s = simulate_point(cfg, policy, &frame, &cp)?;
        let hist = s
            .sensing_histogram
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            report,
            "{:<14} L={:<3} mean {:.6} ± {:.2e} (analytic {:.6}, {} episodes)",
            policy.to_string(),
            frame.sensing(),
            s.mean,
            s.std_error,
            analytic,
            s.episodes
        )
        .unwrap();
        table.push(vec![
            Cell::text(policy.name()),
            param_cell(policy),
            Cell::Int(frame.sensing() as u64),
            Cell::Int(s.episodes),
            Cell::Int(cfg.seed),
            Cell::num(s.mean),
            Cell::num(s.std_error),
            Cell::num(analytic),
            Cell::num(ceiling),
            Cell::text(hist),
        ]);
    }
    Ok(Output { table, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;

    fn paper() -> ExperimentConfig {
        ExperimentConfig::paper()
    }

    fn row<'a>(t: &'a Table, policy: &str, param: Cell, at: f64) -> &'a [Cell] {
        t.rows
            .iter()
            .find(|r| r[0] == Cell::text(policy) && r[1] == param && r[2].as_f64() == Some(at))
            .expect("row present")
    }

    #[test]
    fn sweep_reference_rows() {
        let out = sweep(&paper()).unwrap();
        let t = &out.table;
        // 51 rows each for bisection and two iterative policies, 50 for exhaustive
        assert_eq!(t.rows.len(), 3 * 51 + 50);
        let v10 = row(t, "bisection", Cell::Empty, 10.0)[3].as_f64().unwrap();
        assert!((v10 - 4.825).abs() < 1e-3);
        let v0 = row(t, "bisection", Cell::Empty, 0.0)[3].as_f64().unwrap();
        assert!((v0 - 0.07084).abs() < 1e-5);
        assert_eq!(row(t, "bisection", Cell::Empty, 0.0)[4], Cell::Empty);
    }

    #[test]
    fn sweep_bisection_column_is_the_closed_form() {
        let out = sweep(&paper()).unwrap();
        let frame = paper().frame().unwrap();
        let cp = paper().channel().unwrap();
        for l in 0..=50 {
            let want = optimal_throughput(&frame.with_sensing(l).unwrap(), &cp);
            let got = row(&out.table, "bisection", Cell::Empty, l as f64)[3].clone();
            assert_eq!(got, Cell::num(want), "L = {l}");
        }
    }

    #[test]
    fn sweep_iterative_two_matches_bisection() {
        let cfg = paper()
            .apply(Overrides {
                policies: vec!["bisection".into(), "iterative:2".into()],
                ..Default::default()
            })
            .unwrap();
        let t = sweep(&cfg).unwrap().table;
        let (b, i) = t.rows.split_at(51);
        for (x, y) in b.iter().zip(i) {
            assert_eq!(x[2..], y[2..]);
        }
    }

    #[test]
    fn sweep_with_simulation_fills_columns() {
        let cfg = paper()
            .apply(Overrides {
                n: Some(8),
                policies: vec!["iterative:3".into()],
                episodes: Some(2000),
                simulate: true,
                ..Default::default()
            })
            .unwrap();
        let t = sweep(&cfg).unwrap().table;
        assert_eq!(t.rows.len(), 9);
        for r in &t.rows {
            let (a, m, se) = (
                r[3].as_f64().unwrap(),
                r[4].as_f64().unwrap(),
                r[5].as_f64().unwrap(),
            );
            assert!((a - m).abs() <= 4.0 * se + 1e-9, "{r:?}");
            assert_eq!(r[6], Cell::Int(2000));
        }
    }

    #[test]
    fn optimize_reference_scenario() {
        let out = optimize(&paper()).unwrap();
        assert_eq!(out.table.rows.len(), 51);
        let flagged: Vec<_> = out
            .table
            .rows
            .iter()
            .filter(|r| r[2] == Cell::Int(1))
            .collect();
        assert_eq!(flagged.len(), 1);
        assert_eq!(flagged[0][0], Cell::Int(27));
        assert!(out.report.contains("L*                 = 27"));
        assert!(out.report.contains("(agrees)"));
    }

    #[test]
    fn optimize_single_slot_frame() {
        let cfg = paper()
            .apply(Overrides {
                n: Some(1),
                policies: vec!["bisection".into()],
                ..Default::default()
            })
            .unwrap();
        let out = optimize(&cfg).unwrap();
        assert!(out.report.contains("L*                 = 0"));
    }

    #[test]
    fn compare_degradations() {
        let out = compare(&paper()).unwrap();
        let deg: Vec<f64> = out
            .table
            .rows
            .iter()
            .map(|r| r[4].as_f64().unwrap())
            .collect();
        assert_eq!(deg[0], 0.0);
        assert!((deg[1] - 12.8).abs() < 0.1);
        assert!((deg[2] - 36.4).abs() < 0.1);
        assert!((deg[3] - 88.8).abs() < 0.1);
        assert_eq!(out.table.rows[3][2], Cell::Int(42));
    }

    #[test]
    fn simulate_defaults_to_bisection_optimum() {
        let cfg = paper()
            .apply(Overrides {
                policies: vec!["bisection".into()],
                episodes: Some(1000),
                ..Default::default()
            })
            .unwrap();
        let t = simulate(&cfg).unwrap().table;
        let r = &t.rows[0];
        assert_eq!(r[2], Cell::Int(27));
        assert_eq!(r[6], Cell::num(0.0));
        assert_eq!(r[5], r[7]);
    }

    #[test]
    fn simulate_is_thread_count_invariant() {
        let run = |threads| {
            let cfg = paper()
                .apply(Overrides {
                    sensing: Some(5),
                    episodes: Some(5000),
                    threads: Some(threads),
                    ..Default::default()
                })
                .unwrap();
            simulate(&cfg).unwrap().table.to_csv_string()
        };
        assert_eq!(run(1), run(6));
    }
}
