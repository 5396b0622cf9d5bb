use cbl_core::bounds::{
    chained_bound, empirical_quantized_entropies, empirical_quantized_entropy, entropy_integral_bound,
    gamma_bar_linear, smooth_linear_bound, smooth_linear_bound_ball, unit_ball_bound, ball_link_radius,
    alpha_series_constant,
};
use cbl_core::env::{ActionSet, FiniteBanditSpec, LinearGaussianSpec, Parameter, Prior, RewardPmf};
use cbl_core::nets::{build_quantization_chain, log_covering_upper, K0Rule, PointSet};
use cbl_core::rng::seeded;
use proptest::prelude::*;

proptest! {
    #[test]
    fn chained_and_smooth_forms_agree(d in 1usize..9, t in 1.0f64..1e6, k0 in -2i32..2, hs in prop::collection::vec(0.0f64..20.0, 1..8)) {
        let smooth = smooth_linear_bound(d, t, k0, &hs).unwrap();
        let rows: Vec<(i32, f64, f64)> = hs.iter().enumerate().map(|(i, &h)| {
            let k = k0 + 1 + i as i32;
            (k, gamma_bar_linear(k, d), h)
        }).collect();
        let chained = chained_bound(t, &rows).unwrap();
        for (a, b) in smooth.rows.iter().zip(&chained.rows) {
            prop_assert!((a.term - b.term).abs() <= 1e-12 * a.term.max(1e-300));
        }
        prop_assert!((smooth.total - chained.total).abs() <= 1e-12 * smooth.total.max(1e-300));
        prop_assert!(smooth.rows.iter().all(|r| r.term >= 0.0));
        let sum: f64 = smooth.rows.iter().map(|r| r.term).sum();
        prop_assert!((sum - smooth.total).abs() <= 1e-12 * sum.max(1e-300));
    }

    #[test]
    fn bounds_scale_as_root_t(d in 1usize..9, t in 1.0f64..1e5, hs in prop::collection::vec(0.0f64..5.0, 1..5)) {
        let a = smooth_linear_bound(d, t, 0, &hs).unwrap().total;
        let b = smooth_linear_bound(d, 4.0 * t, 0, &hs).unwrap().total;
        prop_assert!((b - 2.0 * a).abs() <= 1e-12 * b.max(1e-300));
        let u = unit_ball_bound(d, 4.0 * t).unwrap() / unit_ball_bound(d, t).unwrap();
        prop_assert!((u - 2.0).abs() <= 1e-12);
    }
}

#[test]
fn ball_convention_reproduces_the_alpha_series() {
    let (d, t, alpha) = (3, 500.0, 20.0);
    let terms = 12;
    let envelope: Vec<f64> = (1..=terms).map(|k| log_covering_upper(d, f64::powi(alpha, -k))).collect();
    let report = smooth_linear_bound_ball(d, t, alpha, &envelope).unwrap();
    let series = alpha_series_constant(alpha, (terms - 1) as usize).unwrap();
    // the chained form is smaller by sqrt(2) than the closed-form constant
    let closed = series.value * d as f64 * f64::sqrt(t);
    assert!((report.total * 2f64.sqrt() - closed).abs() <= 1e-10 * closed);
    assert_eq!(ball_link_radius(alpha, 1), 1.0);
}

#[test]
fn entropy_integral_of_envelope_is_finite() {
    let v = entropy_integral_bound(2, 100.0, |e| log_covering_upper(2, e), 2.0).unwrap();
    assert!(v.is_finite() && v > 0.0);
    assert_eq!(entropy_integral_bound(1, 1.0, |_| 0.0, 1.0).unwrap(), 0.0);
}

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
fn symmetric_coin_has_log_two_entropy() {
    let spec = sign_spec();
    let chain = build_quantization_chain(spec.actions(), 2.0, 1, K0Rule::Diameter).unwrap();
    let fine = empirical_quantized_entropy(&chain, &spec, 1, 100_000, 8).unwrap();
    assert!((fine.entropy_nats - 2f64.ln()).abs() < 0.01);
    let root = empirical_quantized_entropy(&chain, &spec, chain.k0, 1000, 8).unwrap();
    assert_eq!(root.entropy_nats, 0.0);
}

#[test]
fn entropies_grow_with_level_and_respect_net_size() {
    let mut rng = seeded(12);
    let points = PointSet::ball_sample(2, 300, &mut rng).unwrap();
    let spec = LinearGaussianSpec::new(2, ActionSet::Finite { points: points.clone() }, Prior::StandardGaussian, 1.0).unwrap();
    let chain = build_quantization_chain(&points, 2.0, 4, K0Rule::Diameter).unwrap();
    let est = empirical_quantized_entropies(&chain, &spec, 20_000, 5).unwrap();
    for e in &est {
        assert!(e.entropy_nats <= (e.net_size as f64).ln() + 1e-12);
    }
    for w in est.windows(2) {
        assert!(w[1].entropy_nats + 2.0 * (w[0].stderr + w[1].stderr) >= w[0].entropy_nats);
    }
    let again = empirical_quantized_entropies(&chain, &spec, 20_000, 5).unwrap();
    assert_eq!(est, again);
}
