use cbl_core::env::{FiniteBanditSpec, History, Parameter, RewardPmf};
use cbl_core::info::specs::{random_finite_spec, rollout_history, singleton_chain};
use cbl_core::info::{
    disintegrated_cmi, mutual_information, satisfies_reduction, two_point_reduction, JointPMF, PosteriorModel,
    Target,
};
use cbl_core::nets::PointSet;
use cbl_core::rng::stream;
use proptest::prelude::*;
use rand::Rng;

fn reduction_instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], n),
            prop::collection::vec(0.0f64..10.0, n),
            prop::collection::vec(0.0f64..10.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reduction_contract((mut q, f, g) in reduction_instance()) {
        if q.iter().sum::<f64>() == 0.0 {
            q[0] = 1.0;
        }
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|p| *p /= s);
        let t = two_point_reduction(&q, &f, &g).unwrap();
        prop_assert!(satisfies_reduction(&q, &f, &g, &t));
    }
}

fn two_by_two(p: [[f64; 2]; 2], w: f64) -> FiniteBanditSpec {
    let actions = PointSet::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let params = vec![
        Parameter { theta: vec![0.0], weight: w },
        Parameter { theta: vec![1.0], weight: 1.0 - w },
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
fn chain_rule_for_two_pulls() {
    let mut rng = stream(41, 0);
    for _ in 0..200 {
        let p = [[rng.random(), rng.random()], [rng.random(), rng.random()]];
        let spec = two_by_two(p, rng.random_range(0.05..0.95));
        let h = rollout_history(&spec, 2 * rng.random_range(0..3), &mut rng).unwrap();
        let (a, b) = (rng.random_range(0..2), rng.random_range(0..2));
        let both = disintegrated_cmi(&spec, &h, &Target::OptimalAction, &[a, b], &[]).unwrap();
        let first = disintegrated_cmi(&spec, &h, &Target::OptimalAction, &[a], &[]).unwrap();
        let second = disintegrated_cmi(&spec, &h, &Target::OptimalAction, &[b], &[a]).unwrap();
        assert!((both - first - second).abs() <= 1e-12);
        assert!(first >= 0.0 && second >= 0.0);
        let theta = disintegrated_cmi(&spec, &h, &Target::Parameter, &[a, b], &[]).unwrap();
        assert!(theta + 1e-12 >= both);
    }
}

#[test]
fn data_processing_across_levels() {
    for i in 0..20 {
        let mut rng = stream(43, i);
        let spec = random_finite_spec(&mut rng, 8, 6, 3).unwrap();
        let chain = singleton_chain(&spec, 2.0).unwrap();
        let h = rollout_history(&spec, 4, &mut rng).unwrap();
        let model = PosteriorModel::new(&spec, &h).unwrap();
        let n = spec.n_actions();
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let mut prev = 0.0;
        for k in chain.k0..=chain.k_max() {
            let labels = model.quantized_labels(&chain, Some(k)).unwrap();
            let mi = disintegrated_cmi(&spec, &h, &Target::Labels(labels), &[a, b], &[]).unwrap();
            assert!(mi + 1e-12 >= prev);
            prev = mi;
        }
    }
}

#[test]
fn zero_probability_history_is_rejected() {
    let spec = two_by_two([[0.0, 0.0], [0.5, 0.5]], 0.5);
    let mut h = History::new(2).unwrap();
    h.push(0, 1.0);
    h.push(0, 1.0);
    assert!(disintegrated_cmi(&spec, &h, &Target::OptimalAction, &[1], &[]).is_err());
}

#[test]
fn reference_mutual_informations() {
    let j = JointPMF::new(vec![("x".into(), 2), ("y".into(), 2)], vec![0.4, 0.1, 0.1, 0.4]).unwrap();
    assert!((mutual_information(&j).unwrap() - 0.192_745_2).abs() < 1e-6);
}
