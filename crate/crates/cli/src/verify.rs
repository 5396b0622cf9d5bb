use std::io::Write;

use cbl_core::info::specs::{circle_spec, random_finite_spec, rollout_history, singleton_chain};
use cbl_core::info::{
    build_sampling_functions_for, chain_link_reports, satisfies_reduction, telescoping, two_point_reduction,
    PosteriorModel, TELESCOPING_TOL,
};
use cbl_core::rng;
use rand::Rng;
use serde::Serialize;

use crate::config::Format;
use crate::{CliError, Context, VerifyArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Lemma,
    Construction,
    ChainLink,
    Telescoping,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Lemma => "lemma",
            Suite::Construction => "construction",
            Suite::ChainLink => "chain-link",
            Suite::Telescoping => "telescoping",
        }
    }
}

#[derive(Serialize)]
struct SuiteReport<R> {
    suite: &'static str,
    seed: u64,
    instances: usize,
    failures: usize,
    rows: Vec<R>,
}

trait Row: Serialize {
    fn ok(&self) -> bool;
}

#[derive(Serialize)]
struct LemmaRow {
    instance: usize,
    n: usize,
    a1: usize,
    a2: usize,
    q: f64,
    ok: bool,
}

impl Row for LemmaRow {
    fn ok(&self) -> bool {
        self.ok
    }
}

#[derive(Serialize)]
struct ConstructionRow {
    instance: usize,
    n_actions: usize,
    n_params: usize,
    steps: usize,
    root_difference: f64,
    /// Largest `lhs - rhs` over the first inequality.
    first_excess: Option<f64>,
    second_excess: Option<f64>,
    second_same_draw_excess: Option<f64>,
    max_center_ratio: f64,
    max_action_ratio: f64,
    ok: bool,
}

impl Row for ConstructionRow {
    fn ok(&self) -> bool {
        self.ok
    }
}

#[derive(Serialize)]
struct LinkRow {
    history: usize,
    steps: usize,
    k: i32,
    numerator: f64,
    denominator_nats: f64,
    gamma: Option<f64>,
    denominator_alt_nats: f64,
    gamma_alt: Option<f64>,
    bound: f64,
    ok: bool,
}

impl Row for LinkRow {
    fn ok(&self) -> bool {
        self.ok
    }
}

#[derive(Serialize)]
struct TelescopingRow {
    instance: usize,
    sum: f64,
    regret: f64,
    gap: f64,
    ok: bool,
}

impl Row for TelescopingRow {
    fn ok(&self) -> bool {
        self.ok
    }
}

fn lemma(seed: u64, instances: usize) -> Result<Vec<LemmaRow>, CliError> {
    (0..instances)
        .map(|i| {
            let mut rng = rng::stream(seed, i as u64);
            let n = rng.random_range(1..=12);
            let mut q: Vec<f64> = (0..n)
                .map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random::<f64>() })
                .collect();
            if q.iter().sum::<f64>() == 0.0 {
                q[0] = 1.0;
            }
            let total: f64 = q.iter().sum();
            q.iter_mut().for_each(|p| *p /= total);
            let f: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=10.0)).collect();
            let g: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=10.0)).collect();
            let t = two_point_reduction(&q, &f, &g)?;
            Ok(LemmaRow { instance: i, n, a1: t.a1, a2: t.a2, q: t.q, ok: satisfies_reduction(&q, &f, &g, &t) })
        })
        .collect()
}

fn max_excess(checks: &[cbl_core::info::InequalityCheck]) -> Option<f64> {
    checks.iter().map(|c| c.lhs - c.rhs).reduce(f64::max)
}

fn construction(seed: u64, instances: usize, alpha: f64, max_steps: usize) -> Result<Vec<ConstructionRow>, CliError> {
    (0..instances)
        .map(|i| {
            let mut rng = rng::stream(seed, i as u64);
            let spec = random_finite_spec(&mut rng, 8, 6, 3)?;
            let chain = singleton_chain(&spec, alpha)?;
            let steps = 2 * rng.random_range(0..=max_steps / 2);
            let history = rollout_history(&spec, steps, &mut rng)?;
            let model = PosteriorModel::new(&spec, &history)?;
            let family = build_sampling_functions_for(&model, &chain)?;
            let c = &family.checks;
            let ok = c.root_difference == 0.0
                && c.first.iter().chain(&c.second).all(|x| x.holds())
                && c.max_center_ratio <= 1.0
                && c.max_action_ratio <= 2.0;
            Ok(ConstructionRow {
                instance: i,
                n_actions: spec.n_actions(),
                n_params: spec.n_params(),
                steps,
                root_difference: c.root_difference,
                first_excess: max_excess(&c.first),
                second_excess: max_excess(&c.second),
                second_same_draw_excess: max_excess(&c.second_same_draw),
                max_center_ratio: c.max_center_ratio,
                max_action_ratio: c.max_action_ratio,
                ok,
            })
        })
        .collect()
}

fn chain_link(seed: u64, instances: usize, alpha: f64, max_steps: usize) -> Result<Vec<LinkRow>, CliError> {
    let spec = circle_spec()?;
    let chain = singleton_chain(&spec, alpha)?;
    let mut rows = Vec::new();
    for h in 0..instances {
        let mut rng = rng::stream(seed, h as u64);
        let steps = 2 * rng.random_range(0..=max_steps / 2);
        let history = rollout_history(&spec, steps, &mut rng)?;
        let model = PosteriorModel::new(&spec, &history)?;
        let family = build_sampling_functions_for(&model, &chain)?;
        for r in chain_link_reports(&model, &chain, &family)? {
            rows.push(LinkRow {
                history: h,
                steps,
                k: r.k,
                numerator: r.numerator,
                denominator_nats: r.denominator_nats,
                gamma: r.gamma,
                denominator_alt_nats: r.denominator_alt_nats,
                gamma_alt: r.gamma_alt,
                bound: r.bound,
                ok: r.within_bound(),
            });
        }
    }
    Ok(rows)
}

fn telescoping_suite(seed: u64, instances: usize, alpha: f64, max_steps: usize) -> Result<Vec<TelescopingRow>, CliError> {
    (0..instances)
        .map(|i| {
            let mut rng = rng::stream(seed, i as u64);
            let spec = random_finite_spec(&mut rng, 8, 6, 3)?;
            let chain = singleton_chain(&spec, alpha)?;
            let steps = 2 * rng.random_range(0..=max_steps / 2);
            let history = rollout_history(&spec, steps, &mut rng)?;
            let model = PosteriorModel::new(&spec, &history)?;
            let family = build_sampling_functions_for(&model, &chain)?;
            let t = telescoping(&model, &chain, &family)?;
            Ok(TelescopingRow { instance: i, sum: t.sum, regret: t.regret, gap: t.gap(), ok: t.gap() <= TELESCOPING_TOL })
        })
        .collect()
}

fn emit<R: Row>(ctx: &Context, suite: Suite, instances: usize, rows: Vec<R>) -> Result<(), CliError> {
    let failures = rows.iter().filter(|r| !r.ok()).count();
    let mut out = ctx.writer()?;
    match ctx.format_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let report = SuiteReport { suite: suite.name(), seed: ctx.seed, instances, failures, rows };
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if failures > 0 {
        return Err(CliError::internal(format!("{} suite: {failures} failing rows", suite.name())));
    }
    log::info!("{} suite passed on {instances} instances", suite.name());
    Ok(())
}

pub fn run(ctx: &Context, args: &VerifyArgs) -> Result<(), CliError> {
    if args.instances == 0 {
        return Err(CliError::input("--instances must be at least 1"));
    }
    let (seed, n) = (ctx.seed, args.instances);
    match args.suite {
        Suite::Lemma => emit(ctx, args.suite, n, lemma(seed, n)?),
        Suite::Construction => emit(ctx, args.suite, n, construction(seed, n, args.alpha, args.max_steps)?),
        Suite::ChainLink => emit(ctx, args.suite, n, chain_link(seed, n, args.alpha, args.max_steps)?),
        Suite::Telescoping => emit(ctx, args.suite, n, telescoping_suite(seed, n, args.alpha, args.max_steps)?),
    }
}
