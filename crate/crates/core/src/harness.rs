//! Monte-Carlo estimation of Bayesian regret and scaling experiments.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{run_episode, AgentConfig, BanditModel};
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::{least_squares, mean_stderr};

/// Mean per-round and cumulative Bayesian regret over independent trials.
///
/// `stderr` is the standard error of the cumulative regret;
/// `per_round_stderr` that of the per-round regret.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretCurve {
    pub horizon: usize,
    pub trials: usize,
    pub per_round_regret: Vec<f64>,
    pub cumulative_regret: Vec<f64>,
    pub stderr: Vec<f64>,
    pub per_round_stderr: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    t: usize,
    mean_per_round: f64,
    mean_cumulative: f64,
    stderr: f64,
    stderr_per_round: f64,
}

impl RegretCurve {
    /// Cumulative regret at round `t` (1-based) with its standard error.
    pub fn at(&self, t: usize) -> Option<(f64, f64)> {
        (1..=self.horizon)
            .contains(&t)
            .then(|| (self.cumulative_regret[t - 1], self.stderr[t - 1]))
    }

    pub fn final_regret(&self) -> (f64, f64) {
        self.at(self.horizon).unwrap_or((0.0, 0.0))
    }

    /// CSV with columns `t, mean_per_round, mean_cumulative, stderr, stderr_per_round`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for i in 0..self.horizon {
            w.serialize(CurveRow {
                t: i + 1,
                mean_per_round: self.per_round_regret[i],
                mean_cumulative: self.cumulative_regret[i],
                stderr: self.stderr[i],
                stderr_per_round: self.per_round_stderr[i],
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the CSV written by [`RegretCurve::write_csv`]; `trials` is not
    /// stored in the file and must be supplied.
    pub fn read_csv<R: Read>(input: R, trials: usize) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let mut curve = RegretCurve {
            horizon: 0,
            trials,
            per_round_regret: Vec::new(),
            cumulative_regret: Vec::new(),
            stderr: Vec::new(),
            per_round_stderr: Vec::new(),
        };
        for row in rd.deserialize() {
            let row: CurveRow = row?;
            if row.t != curve.horizon + 1 {
                return Err(Error::input(format!("expected t = {}, found {}", curve.horizon + 1, row.t)));
            }
            curve.horizon += 1;
            curve.per_round_regret.push(row.mean_per_round);
            curve.cumulative_regret.push(row.mean_cumulative);
            curve.stderr.push(row.stderr);
            curve.per_round_stderr.push(row.stderr_per_round);
        }
        Ok(curve)
    }
}

/// Per-trial expected-regret paths, in trial order.
///
/// Trial `i` draws its parameter from the prior and runs its episode on the
/// stream `rng::stream(master_seed, i)`, so the output does not depend on the
/// rayon schedule.
pub fn regret_paths<M: BanditModel>(
    model: &M,
    config: &AgentConfig,
    horizon: usize,
    trials: usize,
    master_seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if trials == 0 {
        return Err(Error::input("trials must be at least 1"));
    }
    config.validate(horizon)?;
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(master_seed, i as u64);
            let theta = model.sample_prior(&mut rng);
            run_episode(model, config, horizon, &theta, &mut rng).map(|ep| ep.regret)
        })
        .collect()
}

pub fn curve_from_paths(paths: &[Vec<f64>]) -> RegretCurve {
    let trials = paths.len();
    let horizon = paths.first().map_or(0, Vec::len);
    let cumulative: Vec<Vec<f64>> = paths
        .iter()
        .map(|p| {
            p.iter()
                .scan(0.0, |acc, r| {
                    *acc += r;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let mut curve = RegretCurve {
        horizon,
        trials,
        per_round_regret: Vec::with_capacity(horizon),
        cumulative_regret: Vec::with_capacity(horizon),
        stderr: Vec::with_capacity(horizon),
        per_round_stderr: Vec::with_capacity(horizon),
    };
    let mut column = vec![0.0; trials];
    let mut running = 0.0;
    for t in 0..horizon {
        for (c, p) in column.iter_mut().zip(paths) {
            *c = p[t];
        }
        let (m, se) = mean_stderr(&column);
        running += m;
        curve.per_round_regret.push(m);
        curve.per_round_stderr.push(se);
        for (c, p) in column.iter_mut().zip(&cumulative) {
            *c = p[t];
        }
        let (_, se_cum) = mean_stderr(&column);
        curve.cumulative_regret.push(running);
        curve.stderr.push(se_cum);
    }
    curve
}

/// Monte-Carlo estimate of the Bayesian expected regret curve.
pub fn estimate_bayes_regret<M: BanditModel>(
    model: &M,
    config: &AgentConfig,
    horizon: usize,
    trials: usize,
    master_seed: u64,
) -> Result<RegretCurve> {
    let paths = regret_paths(model, config, horizon, trials, master_seed)?;
    Ok(curve_from_paths(&paths))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCell {
    pub d: usize,
    pub horizon: usize,
    pub regret: f64,
    pub stderr: f64,
    /// `regret / (d * sqrt(T))`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub cells: Vec<ScalingCell>,
    /// Fitted exponent of `T` in `regret ~ T^a d^b`.
    pub t_slope: Option<f64>,
    /// Fitted exponent of `d`.
    pub d_slope: Option<f64>,
}

impl ScalingTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.cells {
            w.serialize(c)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Least-squares exponents of `regret ~ c * T^a * d^b` from `(d, T, regret)`.
///
/// A grid with a single distinct `T` (or `d`) leaves that exponent
/// unidentified and it is reported as `None`.
pub fn fit_loglog_slopes(points: &[(f64, f64, f64)]) -> Result<(Option<f64>, Option<f64>)> {
    let distinct = |f: fn(&(f64, f64, f64)) -> f64| {
        let mut v: Vec<f64> = points.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len()
    };
    let vary_t = distinct(|p| p.1) > 1;
    let vary_d = distinct(|p| p.0) > 1;
    if !vary_t && !vary_d {
        return Ok((None, None));
    }
    if points.iter().any(|p| !(p.2 > 0.0)) {
        return Err(Error::input("log-log fit needs strictly positive regrets"));
    }
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|&(d, t, _)| {
            let mut r = Vec::new();
            if vary_t {
                r.push(t.ln());
            }
            if vary_d {
                r.push(d.ln());
            }
            r
        })
        .collect();
    let y: Vec<f64> = points.iter().map(|p| p.2.ln()).collect();
    let beta = least_squares(&rows, &y)?;
    let t_slope = vary_t.then(|| beta[1]);
    let d_slope = vary_d.then(|| beta[if vary_t { 2 } else { 1 }]);
    Ok((t_slope, d_slope))
}

/// Runs the agent for every `d` in `d_grid` up to the largest horizon and
/// reads the cumulative regret at every horizon in `t_grid` off the same
/// paths (the agent never looks at the horizon, so prefixes are exact).
pub fn scaling_experiment<M, F>(
    spec_family: F,
    config: &AgentConfig,
    d_grid: &[usize],
    t_grid: &[usize],
    trials: usize,
    master_seed: u64,
) -> Result<ScalingTable>
where
    M: BanditModel,
    F: Fn(usize) -> Result<M>,
{
    if d_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::input("scaling grids must be nonempty"));
    }
    for &t in t_grid {
        config.validate(t)?;
    }
    let t_max = *t_grid.iter().max().expect("nonempty");
    let mut cells = Vec::new();
    for &d in d_grid {
        let model = spec_family(d)?;
        let curve = estimate_bayes_regret(&model, config, t_max, trials, rng::derive_seed(master_seed, d as u64))?;
        for &t in t_grid {
            let (regret, stderr) = curve.at(t).expect("t within horizon");
            cells.push(ScalingCell {
                d,
                horizon: t,
                regret,
                stderr,
                ratio: regret / (d as f64 * (t as f64).sqrt()),
            });
        }
    }
    let points: Vec<(f64, f64, f64)> = cells
        .iter()
        .map(|c| (c.d as f64, c.horizon as f64, c.regret))
        .collect();
    let (t_slope, d_slope) = fit_loglog_slopes(&points)?;
    Ok(ScalingTable {
        cells,
        t_slope,
        d_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injected_power_laws_are_recovered() {
        let pts: Vec<(f64, f64, f64)> = [100.0, 400.0, 1600.0, 6400.0]
            .iter()
            .map(|&t: &f64| (3.0, t, 2.5 * t.sqrt()))
            .collect();
        let (a, b) = fit_loglog_slopes(&pts).unwrap();
        assert!((a.unwrap() - 0.5).abs() < 1e-9);
        assert!(b.is_none());

        let pts: Vec<(f64, f64, f64)> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&d| (d, 1000.0, 7.0 * d))
            .collect();
        let (a, b) = fit_loglog_slopes(&pts).unwrap();
        assert!(a.is_none());
        assert!((b.unwrap() - 1.0).abs() < 1e-9);

        let mut grid = Vec::new();
        for d in [2.0f64, 4.0, 8.0] {
            for t in [250.0f64, 500.0, 1000.0] {
                grid.push((d, t, 0.9 * d * t.sqrt()));
            }
        }
        let (a, b) = fit_loglog_slopes(&grid).unwrap();
        assert!((a.unwrap() - 0.5).abs() < 1e-9 && (b.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn curve_statistics() {
        let paths = vec![vec![1.0, 0.0, 2.0], vec![3.0, 2.0, 0.0]];
        let c = curve_from_paths(&paths);
        assert_eq!(c.per_round_regret, vec![2.0, 1.0, 1.0]);
        assert_eq!(c.cumulative_regret, vec![2.0, 3.0, 4.0]);
        // cumulative paths: [1,1,3] and [3,5,5]
        assert!((c.stderr[1] - 2.0).abs() < 1e-12);
        assert!((c.per_round_stderr[0] - 1.0).abs() < 1e-12);
    }
}
