use super::specs::{circle_spec, random_finite_spec, rollout_history, singleton_chain};
use super::*;
use crate::env::{FiniteBanditSpec, History, Parameter, RewardPmf};
use crate::nets::PointSet;
use crate::rng::{seeded, stream};
use rand::Rng;

fn binary_spec(p: [[f64; 2]; 2], weight: f64) -> FiniteBanditSpec {
    let actions = PointSet::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let params = vec![
        Parameter { theta: vec![0.0], weight },
        Parameter { theta: vec![1.0], weight: 1.0 - weight },
    ];
    let pmf = |x: f64| RewardPmf::new(vec![0.0, 1.0], vec![1.0 - x, x]).unwrap();
    FiniteBanditSpec::new(
        params,
        actions,
        vec![vec![pmf(p[0][0]), pmf(p[0][1])], vec![pmf(p[1][0]), pmf(p[1][1])]],
    )
    .unwrap()
}

#[test]
fn circle_spec_levels() {
    let spec = circle_spec().unwrap();
    let chain = singleton_chain(&spec, 2.0).unwrap();
    assert_eq!((chain.k0, chain.k_max()), (-1, 1));
    assert_eq!(spec.optimal_action(0).unwrap(), 0);
    assert_eq!(spec.optimal_action(1).unwrap(), 2);
}

#[test]
fn root_difference_is_exactly_zero() {
    let spec = circle_spec().unwrap();
    let chain = singleton_chain(&spec, 2.0).unwrap();
    let mut rng = seeded(3);
    for steps in [0, 2, 6] {
        let h = rollout_history(&spec, steps, &mut rng).unwrap();
        let model = PosteriorModel::new(&spec, &h).unwrap();
        let fam = build_sampling_functions_for(&model, &chain).unwrap();
        assert_eq!(regret_difference(&model, &chain, &fam, chain.k0).unwrap(), 0.0);
        assert_eq!(fam.checks.root_difference, 0.0);
    }
}

#[test]
fn finest_level_is_identity_and_telescopes() {
    let spec = circle_spec().unwrap();
    let chain = singleton_chain(&spec, 2.0).unwrap();
    let model = PosteriorModel::new(&spec, &rollout_history(&spec, 4, &mut seeded(9)).unwrap()).unwrap();
    let fam = build_sampling_functions_for(&model, &chain).unwrap();
    for c in &fam.levels.last().unwrap().cells {
        assert_eq!(fam.law(fam.k_max, c.center).unwrap(), vec![(c.center, 1.0)]);
    }
    let finest = regret_difference(&model, &chain, &fam, fam.k_max).unwrap();
    assert_eq!(finest, model.expected_regret());
    let t = telescoping(&model, &chain, &fam).unwrap();
    assert!(t.gap() <= 1e-12, "{t:?}");
}

#[test]
fn two_by_two_inequalities_on_rollouts() {
    let mut rng = seeded(21);
    let mut built = 0;
    while built < 100 {
        let p = [[rng.random(), rng.random()], [rng.random(), rng.random()]];
        let spec = binary_spec(p, rng.random_range(0.1..0.9));
        let chain = singleton_chain(&spec, 2.0).unwrap();
        let steps = 2 * rng.random_range(0..4);
        let h = rollout_history(&spec, steps, &mut rng).unwrap();
        let fam = build_sampling_functions(&spec, &chain, &h).unwrap();
        assert!(fam.checks.first.iter().chain(&fam.checks.second).all(|c| c.holds()));
        built += 1;
    }
}

#[test]
fn random_specs_construct_and_respect_distances() {
    for i in 0..20 {
        let mut rng = stream(5, i);
        let spec = random_finite_spec(&mut rng, 8, 6, 3).unwrap();
        let chain = singleton_chain(&spec, 2.0).unwrap();
        let h = rollout_history(&spec, 2 * rng.random_range(0..4), &mut rng).unwrap();
        let model = PosteriorModel::new(&spec, &h).unwrap();
        let fam = build_sampling_functions_for(&model, &chain).unwrap();
        assert!(fam.checks.max_center_ratio <= 1.0);
        assert!(fam.checks.max_action_ratio <= 2.0);
        let t = telescoping(&model, &chain, &fam).unwrap();
        assert!(t.gap() <= 1e-12);
    }
}

#[test]
fn coarser_quantization_carries_less_information() {
    let spec = circle_spec().unwrap();
    let chain = singleton_chain(&spec, 2.0).unwrap();
    let model = PosteriorModel::new(&spec, &History::new(2).unwrap()).unwrap();
    for a in 0..8 {
        for b in 0..8 {
            let mut prev = 0.0;
            for k in chain.k0..=chain.k_max() {
                let labels = model.quantized_labels(&chain, Some(k)).unwrap();
                let mi = model.pair_info(&labels, a, b);
                assert!(mi + 1e-12 >= prev);
                prev = mi;
            }
        }
    }
}

#[test]
fn symmetric_spec_has_zero_numerator() {
    // identical reward laws for both parameters: nothing to learn, no regret
    let spec = binary_spec([[0.4, 0.4], [0.7, 0.7]], 0.5);
    let chain = singleton_chain(&spec, 2.0).unwrap();
    let model = PosteriorModel::new(&spec, &History::new(2).unwrap()).unwrap();
    let fam = build_sampling_functions_for(&model, &chain).unwrap();
    let r = chain_link_ratio(&model, &chain, &fam, chain.k_max()).unwrap();
    assert_eq!(r.numerator, 0.0);
    assert!(r.denominator_alt_nats.abs() < 1e-15);
    assert_eq!(r.gamma_alt, None);
}

#[test]
fn circle_ratios_within_bound() {
    let spec = circle_spec().unwrap();
    let chain = singleton_chain(&spec, 2.0).unwrap();
    let mut rng = seeded(8);
    for _ in 0..5 {
        let h = rollout_history(&spec, 2 * rng.random_range(0..5), &mut rng).unwrap();
        let model = PosteriorModel::new(&spec, &h).unwrap();
        let fam = build_sampling_functions_for(&model, &chain).unwrap();
        for r in chain_link_reports(&model, &chain, &fam).unwrap() {
            assert!(r.denominator_nats >= 0.0);
            assert!(r.within_bound(), "{r:?}");
        }
    }
}

#[test]
fn rejects_mismatched_chain() {
    let spec = circle_spec().unwrap();
    let other = PointSet::circle(8, 0.1).unwrap();
    let chain = crate::nets::build_quantization_chain(&other, 2.0, 1, crate::nets::K0Rule::Diameter).unwrap();
    assert!(build_sampling_functions(&spec, &chain, &History::new(2).unwrap()).is_err());
}
