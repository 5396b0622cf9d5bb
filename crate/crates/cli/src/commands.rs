use std::io::Write;
use std::path::Path;

use cbl_core::agent::AgentConfig;
use cbl_core::bounds::{
    alpha_series_constant, chained_bound, empirical_quantized_entropies, entropy_integral_bound, gamma_bar_linear,
    smooth_linear_bound, smooth_linear_bound_ball, unit_ball_bound, AlphaSeries, BoundReport, EntropyEstimate,
};
use cbl_core::env::{ActionSet, FiniteBanditSpec, LinearGaussianSpec, Prior};
use cbl_core::harness::{estimate_bayes_regret, scaling_experiment, RegretCurve};
use cbl_core::nets::{
    build_quantization_chain, finest_singleton_level, greedy_epsilon_net, log_covering_upper, K0Rule, PointSet,
};
use cbl_core::rng;
use serde::Serialize;

use crate::config::{ActionSetConfig, EnvKind, Format};
use crate::{BoundsArgs, ChainArgs, CliError, Context, EnvArgs, NetArgs, PointsArgs, ScalingArgs, SimulateArgs};

/// Stream index for drawing action sets, kept apart from trial streams.
const POINTS_STREAM: u64 = u64::MAX;

pub fn parse_prior(s: &str) -> Result<Prior, String> {
    match s {
        "standard_gaussian" | "gaussian" => Ok(Prior::StandardGaussian),
        "uniform_sphere" | "sphere" => Ok(Prior::UniformSphere),
        _ => Err(format!("unknown prior {s:?} (expected gaussian or sphere)")),
    }
}

fn json_line<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn finish(mut out: Box<dyn Write>) -> Result<(), CliError> {
    out.flush()?;
    Ok(())
}

fn read_points(path: &Path) -> Result<PointSet, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let raw: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("bad points file {}: {e}", path.display())))?;
    Ok(PointSet::new(raw)?)
}

fn ball_points(d: usize, n: usize, seed: u64) -> Result<PointSet, CliError> {
    let mut rng = rng::stream(seed, POINTS_STREAM);
    Ok(PointSet::ball_sample(d, n, &mut rng)?)
}

fn resolve_points(ctx: &Context, args: &PointsArgs) -> Result<PointSet, CliError> {
    if let Some(path) = &args.points {
        return read_points(path);
    }
    let d = args.d.or(ctx.config.env.d);
    let from_config = match &ctx.config.env.action_set {
        Some(ActionSetConfig::Points { points }) if args.n_actions.is_none() => Some(PointSet::new(points.clone())?),
        _ => None,
    };
    if let Some(p) = from_config {
        return Ok(p);
    }
    let n = args.n_actions.or(match ctx.config.env.action_set {
        Some(ActionSetConfig::BallSample { n }) => Some(n),
        _ => None,
    });
    match (d, n) {
        (Some(d), Some(n)) => ball_points(d, n, ctx.seed),
        _ => Err(CliError::input("give --points, or --d with --n-actions")),
    }
}

#[derive(Serialize)]
struct NetRow {
    point: usize,
    center: usize,
    distance: f64,
}

#[derive(Serialize)]
struct NetReport {
    epsilon: f64,
    covering_radius: f64,
    center_indices: Vec<usize>,
    assignment: Vec<usize>,
}

pub fn net(ctx: &Context, args: &NetArgs) -> Result<(), CliError> {
    let space = resolve_points(ctx, &args.points)?;
    let net = greedy_epsilon_net(&space, args.epsilon)?;
    log::info!("{} centers for {} points at epsilon {}", net.len(), space.len(), args.epsilon);
    let mut out = ctx.writer()?;
    match ctx.format_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for (point, &center) in net.assignment.iter().enumerate() {
                w.serialize(NetRow { point, center, distance: space.distance(point, center) })?;
            }
            w.flush()?;
        }
        Format::Json => json_line(
            &mut out,
            &NetReport {
                epsilon: net.epsilon,
                covering_radius: net.covering_radius(&space),
                center_indices: net.center_indices.clone(),
                assignment: net.assignment.clone(),
            },
        )?,
    }
    finish(out)
}

#[derive(Serialize)]
struct ChainRow {
    k: i32,
    point: usize,
    center: usize,
}

pub fn chain(ctx: &Context, args: &ChainArgs) -> Result<(), CliError> {
    let space = resolve_points(ctx, &args.points)?;
    let alpha = args.alpha.or(ctx.config.chain.alpha).unwrap_or(2.0);
    let rule = if args.unit_ball || ctx.config.chain.unit_ball.unwrap_or(false) {
        K0Rule::UnitBall
    } else {
        K0Rule::Diameter
    };
    let k_max = match args.k_max.or(ctx.config.chain.k_max) {
        Some(k) => k,
        None => finest_singleton_level(&space, alpha, rule)?,
    };
    let chain = build_quantization_chain(&space, alpha, k_max, rule)?;
    log::info!("chain levels {}..={}", chain.k0, chain.k_max());
    let mut out = ctx.writer()?;
    match ctx.format_or(Format::Json) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for k in chain.k0..=chain.k_max() {
                for point in 0..chain.points.len() {
                    w.serialize(ChainRow { k, point, center: chain.quantize(point, k)? })?;
                }
            }
            w.flush()?;
        }
        Format::Json => writeln!(out, "{}", chain.to_json()?)?,
    }
    finish(out)
}

enum Model {
    Linear(LinearGaussianSpec),
    Finite(FiniteBanditSpec),
}

fn resolve_model(ctx: &Context, args: &EnvArgs) -> Result<Model, CliError> {
    let env = &ctx.config.env;
    let spec_path = args.spec.clone().or_else(|| env.spec.clone());
    let kind = if args.spec.is_some() {
        EnvKind::Finite
    } else {
        env.kind.unwrap_or_default()
    };
    if kind == EnvKind::Finite {
        let path = spec_path.ok_or_else(|| CliError::input("finite environment needs --spec"))?;
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        return Ok(Model::Finite(FiniteBanditSpec::from_json(&text)?));
    }
    let d = args.d.or(env.d).ok_or_else(|| CliError::input("linear environment needs --d"))?;
    let sigma = args.sigma.or(env.sigma).unwrap_or(1.0);
    let prior = args.prior.or(env.prior).unwrap_or_default();
    let action_set = match (args.n_actions, &env.action_set) {
        (Some(n), _) | (None, &Some(ActionSetConfig::BallSample { n })) => ActionSet::Finite {
            points: ball_points(d, n, ctx.seed)?,
        },
        (None, Some(ActionSetConfig::Points { points })) => ActionSet::Finite {
            points: PointSet::new(points.clone())?,
        },
        (None, Some(ActionSetConfig::UnitBall {}) | None) => ActionSet::UnitBall,
    };
    Ok(Model::Linear(LinearGaussianSpec::new(d, action_set, prior, sigma)?))
}

fn agent_config(ctx: &Context, m: Option<usize>) -> AgentConfig {
    AgentConfig {
        batch_size: m.or(ctx.config.agent.m).unwrap_or(2),
        seed: ctx.seed,
    }
}

pub fn simulate(ctx: &Context, args: &SimulateArgs) -> Result<(), CliError> {
    let horizon = args
        .horizon
        .or(ctx.config.run.horizon)
        .ok_or_else(|| CliError::input("simulate needs --T"))?;
    let trials = args.trials.or(ctx.config.run.trials).unwrap_or(100);
    let config = agent_config(ctx, args.m);
    config.validate(horizon)?;
    let model = resolve_model(ctx, &args.env)?;
    log::info!("simulating T={horizon} trials={trials} m={}", config.batch_size);
    let curve: RegretCurve = match &model {
        Model::Linear(spec) => estimate_bayes_regret(spec, &config, horizon, trials, ctx.seed)?,
        Model::Finite(spec) => estimate_bayes_regret(spec, &config, horizon, trials, ctx.seed)?,
    };
    let mut out = ctx.writer()?;
    match ctx.format_or(Format::Csv) {
        Format::Csv => curve.write_csv(&mut out)?,
        Format::Json => json_line(&mut out, &curve)?,
    }
    finish(out)
}

pub fn scaling(ctx: &Context, args: &ScalingArgs) -> Result<(), CliError> {
    let sigma = args.sigma.or(ctx.config.env.sigma).unwrap_or(1.0);
    let trials = args.trials.or(ctx.config.run.trials).unwrap_or(200);
    let config = agent_config(ctx, args.m);
    let action_set = ctx.config.env.action_set.clone();
    let seed = ctx.seed;
    let table = scaling_experiment(
        |d| {
            let set = match &action_set {
                Some(ActionSetConfig::BallSample { n }) => {
                    let mut rng = rng::stream(seed, POINTS_STREAM);
                    ActionSet::Finite { points: PointSet::ball_sample(d, *n, &mut rng)? }
                }
                Some(ActionSetConfig::Points { .. }) => {
                    return Err(cbl_core::Error::Input("scaling varies d; explicit points are not allowed".into()))
                }
                _ => ActionSet::UnitBall,
            };
            LinearGaussianSpec::new(d, set, Prior::StandardGaussian, sigma)
        },
        &config,
        &args.d_grid,
        &args.t_grid,
        trials,
        seed,
    )?;
    let mut out = ctx.writer()?;
    match ctx.format_or(Format::Csv) {
        Format::Csv => table.write_csv(&mut out)?,
        Format::Json => json_line(&mut out, &table)?,
    }
    finish(out)
}

#[derive(Debug, Serialize)]
struct Empirical {
    n_actions: usize,
    samples: usize,
    entropies: Vec<EntropyEstimate>,
    chained: BoundReport,
}

#[derive(Debug, Serialize)]
struct BoundsReport {
    d: usize,
    horizon: f64,
    /// `7 d sqrt(T)`.
    unit_ball: Option<f64>,
    alpha_series: Option<AlphaSeries>,
    ball_convention: Option<BoundReport>,
    /// Smooth linear bound with covering-number envelope entropies.
    smooth_linear: BoundReport,
    entropy_integral: f64,
    empirical: Option<Empirical>,
}

#[derive(Serialize)]
struct BoundsRow {
    calculator: &'static str,
    total: f64,
    tail_bound: f64,
}

pub fn bounds(ctx: &Context, args: &BoundsArgs) -> Result<(), CliError> {
    let d = args.d.or(ctx.config.env.d).ok_or_else(|| CliError::input("bounds needs --d"))?;
    let horizon = args
        .horizon
        .or(ctx.config.run.horizon.map(|t| t as f64))
        .ok_or_else(|| CliError::input("bounds needs --T"))?;
    let alpha = args.alpha.or(ctx.config.chain.alpha).unwrap_or(20.0);
    let levels = args.levels.unwrap_or(30);
    if levels == 0 {
        return Err(CliError::input("--levels must be at least 1"));
    }
    let dyadic: Vec<f64> = (1..=levels as i32).map(|k| log_covering_upper(d, 2f64.powi(-k))).collect();
    let smooth_linear = smooth_linear_bound(d, horizon, 0, &dyadic)?;
    let entropy_integral = entropy_integral_bound(d, horizon, |e| log_covering_upper(d, e), 2.0)?;
    let (unit_ball, alpha_series, ball_convention) = if args.unit_ball || ctx.config.chain.unit_ball.unwrap_or(false) {
        let envelope: Vec<f64> = (1..=levels as i32).map(|k| log_covering_upper(d, alpha.powi(-k))).collect();
        (
            Some(unit_ball_bound(d, horizon)?),
            Some(alpha_series_constant(alpha, levels)?),
            Some(smooth_linear_bound_ball(d, horizon, alpha, &envelope)?),
        )
    } else {
        (None, None, None)
    };
    let empirical = if args.n_actions > 0 {
        let points = ball_points(d, args.n_actions, ctx.seed)?;
        let spec = LinearGaussianSpec::new(
            d,
            ActionSet::Finite { points: points.clone() },
            Prior::StandardGaussian,
            1.0,
        )?;
        let k_max = finest_singleton_level(&points, 2.0, K0Rule::UnitBall)?;
        let chain = build_quantization_chain(&points, 2.0, k_max, K0Rule::UnitBall)?;
        let entropies = empirical_quantized_entropies(&chain, &spec, args.samples, ctx.seed)?;
        let rows: Vec<(i32, f64, f64)> = entropies
            .iter()
            .filter(|e| e.k > chain.k0)
            .map(|e| (e.k, gamma_bar_linear(e.k, d), e.entropy_nats))
            .collect();
        let chained = chained_bound(horizon, &rows)?;
        Some(Empirical { n_actions: args.n_actions, samples: args.samples, entropies, chained })
    } else {
        None
    };
    let report = BoundsReport {
        d,
        horizon,
        unit_ball,
        alpha_series,
        ball_convention,
        smooth_linear,
        entropy_integral,
        empirical,
    };
    let mut out = ctx.writer()?;
    match ctx.format_or(Format::Csv) {
        Format::Csv => {
            let mut rows = Vec::new();
            if let Some(total) = report.unit_ball {
                rows.push(BoundsRow { calculator: "unit_ball", total, tail_bound: 0.0 });
            }
            if let Some(s) = &report.alpha_series {
                let scale = d as f64 * horizon.sqrt();
                rows.push(BoundsRow { calculator: "alpha_series", total: s.value * scale, tail_bound: s.tail_bound * scale });
            }
            if let Some(b) = &report.ball_convention {
                rows.push(BoundsRow { calculator: "smooth_linear_ball", total: b.total, tail_bound: b.tail_bound });
            }
            rows.push(BoundsRow {
                calculator: "smooth_linear",
                total: report.smooth_linear.total,
                tail_bound: report.smooth_linear.tail_bound,
            });
            rows.push(BoundsRow { calculator: "entropy_integral", total: report.entropy_integral, tail_bound: 0.0 });
            if let Some(e) = &report.empirical {
                rows.push(BoundsRow { calculator: "chained_empirical", total: e.chained.total, tail_bound: e.chained.tail_bound });
            }
            let mut w = csv::Writer::from_writer(&mut out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Json => json_line(&mut out, &report)?,
    }
    finish(out)
}
