use cbl_core::agent::AgentConfig;
use cbl_core::env::{FiniteBanditSpec, LinearGaussianSpec, Parameter, RewardPmf};
use cbl_core::harness::{estimate_bayes_regret, RegretCurve};
use cbl_core::nets::PointSet;

fn sign_spec() -> FiniteBanditSpec {
    let actions = PointSet::new(vec![vec![-1.0], vec![1.0]]).unwrap();
    let params = vec![
        Parameter { theta: vec![-1.0], weight: 0.5 },
        Parameter { theta: vec![1.0], weight: 0.5 },
    ];
    let pm = RewardPmf::point_mass;
    FiniteBanditSpec::new(params, actions, vec![vec![pm(1.0), pm(-1.0)], vec![pm(-1.0), pm(1.0)]]).unwrap()
}

#[test]
fn first_round_regret_is_one() {
    // (theta, theta_hat) uniform on four pairs: regret 2 on the two mismatches
    let curve = estimate_bayes_regret(&sign_spec(), &AgentConfig::default(), 2, 4000, 5).unwrap();
    let (m, se) = (curve.per_round_regret[0], curve.per_round_stderr[0]);
    assert!((m - 1.0).abs() <= 4.0 * se, "{m} +- {se}");
    // round 2 still uses the prior
    assert!((curve.per_round_regret[1] - 1.0).abs() <= 4.0 * curve.per_round_stderr[1]);
}

#[test]
fn curves_do_not_depend_on_thread_count() {
    let spec = LinearGaussianSpec::unit_ball(3, 1.0).unwrap();
    let cfg = AgentConfig::default();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_bayes_regret(&spec, &cfg, 40, 24, 99).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn regret_decays_and_round_trips_through_csv() {
    let spec = LinearGaussianSpec::unit_ball(2, 1.0).unwrap();
    let curve = estimate_bayes_regret(&spec, &AgentConfig::default(), 200, 100, 3).unwrap();
    let last = curve.horizon - 1;
    let combined = (curve.per_round_stderr[0].powi(2) + curve.per_round_stderr[last].powi(2)).sqrt();
    assert!(curve.per_round_regret[last] <= curve.per_round_regret[0] + 3.0 * combined);
    for (r, se) in curve.per_round_regret.iter().zip(&curve.per_round_stderr) {
        assert!(*r >= -3.0 * se);
    }
    let mut acc = 0.0;
    for (c, r) in curve.cumulative_regret.iter().zip(&curve.per_round_regret) {
        acc += r;
        assert_eq!(*c, acc);
    }
    let mut buf = Vec::new();
    curve.write_csv(&mut buf).unwrap();
    assert_eq!(RegretCurve::read_csv(buf.as_slice(), curve.trials).unwrap(), curve);
}

#[test]
fn point_mass_prior_gives_zero_curve() {
    let actions = PointSet::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let params = vec![Parameter { theta: vec![1.0], weight: 1.0 }];
    let spec = FiniteBanditSpec::new(
        params,
        actions,
        vec![vec![RewardPmf::point_mass(0.0)], vec![RewardPmf::point_mass(1.0)]],
    )
    .unwrap();
    let curve = estimate_bayes_regret(&spec, &AgentConfig::default(), 10, 5, 1).unwrap();
    assert!(curve.cumulative_regret.iter().all(|&r| r == 0.0));
}
