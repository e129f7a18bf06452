mod common;

use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

use duel_lab::agents::{
    colstim_select, covariance_update, maxinp_select, maxpairucb_select, mle_solve, objective_gradient, CoLstim,
    DuelingAgent, EstimatorState, FeelGoodThompson, LinearEstimator, MaxInP, MaxPairUcb, Vacdb, VacdbConfig,
};
use duel_lab::env::{generate_instance, FeatureConvention};
use duel_lab::history::DuelStats;
use duel_lab::posterior::{PriorSpec, SgldConfig};
use duel_lab::primitives::{ArmSet, DuelingRecord, FeatureVector, ParamVector, Preference};
use duel_lab::rng::seeded;

use common::*;

#[test]
fn mle_first_order_optimality_on_random_histories() {
    let mut rng = seeded(201);
    for seed in 0..10 {
        let inst = generate_instance(seed, 5, 32, FeatureConvention::RawPm1).unwrap();
        let h = random_history(&mut rng, inst.arms(), 200);
        let stats = DuelStats::from_history(&h);
        let report = mle_solve(&stats, 0.01, 5, None).unwrap();
        assert!(report.gradient_norm < 1e-8);
        // Independent gradient from the definition.
        let th = report.theta.as_slice();
        let mut g: Vec<f64> = th.iter().map(|x| 0.01 * x).collect();
        for (r, arms) in h.iter() {
            let y = r.preference.sign();
            let diff: Vec<f64> = (0..5)
                .map(|i| arms.feature(r.arm1).as_slice()[i] - arms.feature(r.arm2).as_slice()[i])
                .collect();
            let z = y * dot(th, &diff);
            let dz = -1.0 / (1.0 + z.exp());
            for i in 0..5 {
                g[i] += dz * y * diff[i];
            }
        }
        assert!(dot(&g, &g).sqrt() < 1e-7, "independent gradient {g:?}");
    }
}

#[test]
fn newton_objective_decreases() {
    let mut rng = seeded(202);
    for seed in 0..10 {
        let inst = generate_instance(seed, 5, 32, FeatureConvention::RawPm1).unwrap();
        let stats = DuelStats::from_history(&random_history(&mut rng, inst.arms(), 200));
        let report = mle_solve(&stats, 0.001, 5, None).unwrap();
        for w in report.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "{:?}", report.objective_trace);
        }
    }
}

#[test]
fn estimator_is_order_independent() {
    let mut rng = seeded(203);
    let inst = generate_instance(4, 5, 32, FeatureConvention::RawPm1).unwrap();
    let h = random_history(&mut rng, inst.arms(), 60);
    let recs: Vec<DuelingRecord> = h.records().copied().collect();
    let mut fwd = LinearEstimator::new(5, 0.1).unwrap();
    for r in &recs {
        fwd.absorb(r, inst.arms(), 1.0).unwrap();
    }
    let mut rev = LinearEstimator::new(5, 0.1).unwrap();
    for r in recs.iter().rev() {
        rev.absorb(r, inst.arms(), 1.0).unwrap();
    }
    let gap = (&fwd.state().theta_hat.0 - &rev.state().theta_hat.0).norm();
    assert!(gap < 1e-8, "{gap}");
    assert!((&fwd.state().sigma - &rev.state().sigma).amax() < 1e-12);
    let g = objective_gradient(&rev.state().theta_hat, fwd.stats(), 0.1);
    assert!(g.norm() < 1e-8);
}

#[test]
fn determinant_never_decreases() {
    let mut rng = seeded(204);
    let mut sigma = DMatrix::identity(4, 4) * 0.001;
    let mut det = sigma.determinant();
    for _ in 0..50 {
        let p1 = FeatureVector::new(gaussian_vec(&mut rng, 4, 1.0));
        let p2 = FeatureVector::new(gaussian_vec(&mut rng, 4, 1.0));
        sigma = covariance_update(&sigma, &p1, &p2);
        let next = sigma.determinant();
        assert!(next >= det * (1.0 - 1e-12));
        det = next;
    }
}

#[test]
fn maxinp_identity_covariance_picks_farthest_pair() {
    let inst = generate_instance(9, 5, 32, FeatureConvention::RawPm1).unwrap();
    let arms = inst.arms();
    let state = EstimatorState::new(ParamVector::new(vec![0.3, -0.1, 0.2, 0.0, 0.5]), DMatrix::identity(5, 5)).unwrap();
    let all: Vec<usize> = (0..32).collect();
    let far = brute_argmax_pair(&all, |a, b| {
        let d: Vec<f64> = (0..5)
            .map(|i| arms.feature(a).as_slice()[i] - arms.feature(b).as_slice()[i])
            .collect();
        dot(&d, &d).sqrt()
    });
    assert_eq!(maxinp_select(&state, arms, 1e6).unwrap(), far);
}

fn fgts(dim: usize, seeds: [u64; 2]) -> FeelGoodThompson {
    FeelGoodThompson::with_sgld(
        dim,
        1.0,
        0.002,
        PriorSpec::default(),
        SgldConfig::default(),
        [seeded(seeds[0]), seeded(seeds[1])],
    )
    .unwrap()
}

#[test]
fn swapping_chain_seeds_swaps_the_pair() {
    let inst = generate_instance(11, 5, 32, FeatureConvention::RawPm1).unwrap();
    let mut a = fgts(5, [1, 2]);
    let mut b = fgts(5, [2, 1]);
    let (x1, x2) = a.select(inst.arms(), 1).unwrap();
    let (y1, y2) = b.select(inst.arms(), 1).unwrap();
    assert_eq!((x1, x2), (y2, y1));
}

#[test]
fn first_arm_ignores_second_chain() {
    let inst = generate_instance(12, 5, 32, FeatureConvention::RawPm1).unwrap();
    let mut h = Vec::new();
    let mut rng = seeded(13);
    for t in 1..=20 {
        let a1 = rng.random_range(0..32);
        let a2 = rng.random_range(0..32);
        h.push(DuelingRecord::new(t, a1, a2, Preference::First));
    }
    let mut first = None;
    for seed2 in 0..100 {
        let mut agent = fgts(5, [77, 1000 + seed2]);
        for r in &h {
            agent.update(*r, inst.arms()).unwrap();
        }
        let (a1, _) = agent.select(inst.arms(), 21).unwrap();
        assert_eq!(*first.get_or_insert(a1), a1);
    }
}

fn all_agents(dim: usize) -> Vec<Box<dyn DuelingAgent>> {
    vec![
        Box::new(fgts(dim, [3, 4])),
        Box::new(MaxInP::new(dim, 0.001, 0.1).unwrap()),
        Box::new(MaxPairUcb::new(dim, 0.001, 0.1).unwrap()),
        Box::new(CoLstim::new(dim, 0.001, 0.1, 0.1, seeded(5)).unwrap()),
        Box::new(
            Vacdb::new(
                dim,
                VacdbConfig {
                    beta: 0.1,
                    lambda: 0.001,
                    layers: 3,
                },
            )
            .unwrap(),
        ),
    ]
}

#[test]
fn single_arm_sets_give_zero_regret() {
    let arms = Arc::new(ArmSet::from_rows(vec![vec![1.0, -1.0, 1.0]]));
    for mut agent in all_agents(3) {
        for t in 1..=5 {
            assert_eq!(agent.select(&arms, t).unwrap(), (0, 0), "{}", agent.name());
            agent.update(DuelingRecord::new(t, 0, 0, Preference::First), &arms).unwrap();
        }
    }
}

#[test]
fn updates_must_follow_rounds() {
    let inst = generate_instance(1, 3, 8, FeatureConvention::RawPm1).unwrap();
    for mut agent in all_agents(3) {
        agent.update(DuelingRecord::new(1, 0, 1, Preference::First), inst.arms()).unwrap();
        let err = agent
            .update(DuelingRecord::new(3, 0, 1, Preference::First), inst.arms())
            .unwrap_err();
        assert!(matches!(err, duel_lab::Error::Sequencing { expected: 2, got: 3 }));
    }
}

#[test]
fn vacdb_surviving_sets_shrink_monotonically() {
    let inst = generate_instance(14, 4, 16, FeatureConvention::RawPm1).unwrap();
    let mut agent = Vacdb::new(
        4,
        VacdbConfig {
            beta: 0.1,
            lambda: 0.01,
            layers: 4,
        },
    )
    .unwrap();
    let mut noise = seeded(15);
    let mut prev = agent.surviving_sets(inst.arms());
    for t in 1..=400 {
        let (a1, a2) = agent.select(inst.arms(), t).unwrap();
        let p = inst.sample_preference(&mut noise, inst.arms(), a1, a2);
        agent.update(DuelingRecord::new(t, a1, a2, p), inst.arms()).unwrap();
        let now = agent.surviving_sets(inst.arms());
        for (before, after) in prev.iter().zip(&now) {
            assert!(after.iter().all(|a| before.contains(a)), "layer regained an arm at round {t}");
        }
        for w in now.windows(2) {
            assert!(w[1].iter().all(|a| w[0].contains(a)), "layers not nested");
        }
        prev = now;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn selectors_agree_with_brute_force(seed in any::<u64>(), beta_idx in 0usize..4, c in 0.0f64..2.0) {
        let beta = [0.01, 0.1, 1.0, 10.0][beta_idx];
        let mut rng = seeded(seed);
        let inst = generate_instance(seed, 5, 32, FeatureConvention::RawPm1).unwrap();
        let arms = inst.arms();
        let state = random_state(&mut rng, 5);
        let th = state.theta_hat.as_slice().to_vec();
        let s: Vec<f64> = (0..32).map(|a| score(&th, arms, a)).collect();
        let all: Vec<usize> = (0..32).collect();

        let pair = maxpairucb_select(&state, arms, beta);
        prop_assert_eq!(pair, brute_argmax_pair(&all, |a, b| s[a] + s[b] + beta * mahalanobis(&state, arms, a, b)));

        let active: Vec<usize> = all.iter().copied()
            .filter(|&a| all.iter().all(|&b| s[a] - s[b] + beta * mahalanobis(&state, arms, a, b) >= 0.0))
            .collect();
        prop_assert!(!active.is_empty());
        prop_assert_eq!(
            maxinp_select(&state, arms, beta).unwrap(),
            brute_argmax_pair(&active, |a, b| mahalanobis(&state, arms, a, b))
        );

        let (first, second) = colstim_select(&mut rng, &state, arms, beta, c);
        let bonus: Vec<f64> = (0..32).map(|b| s[b] + beta * mahalanobis(&state, arms, b, first)).collect();
        prop_assert_eq!(second, brute_argmax(&bonus));
    }

    #[test]
    fn maxpair_zero_radius_is_greedy(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let inst = generate_instance(seed, 5, 32, FeatureConvention::RawPm1).unwrap();
        let state = random_state(&mut rng, 5);
        let best = inst.arms().argmax(&state.theta_hat);
        prop_assert_eq!(maxpairucb_select(&state, inst.arms(), 0.0), (best, best));
        let mut r2 = rng.clone();
        prop_assert_eq!(colstim_select(&mut r2, &state, inst.arms(), 0.5, 0.0).0, best);
        prop_assert_eq!(colstim_select(&mut rng, &state, inst.arms(), 0.0, 3.0).1, best);
    }
}
