//! Fast self-checks behind the `validate` command. Each check compares a
//! production routine with an independent, slower computation.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::agents::{maxinp_select, maxpairucb_select, EstimatorState};
use crate::env::{generate_instance, BanditInstance, FeatureConvention};
use crate::history::{DuelStats, History};
use crate::model_classes::{finite_posterior, FiniteModelSet, LinearReward};
use crate::posterior::{
    exact_posterior_grid, feel_good_likelihood, potential_from_stats, potential_gradient_from_stats,
    Chain, LikelihoodConfig, PriorSpec,
};
use crate::primitives::{ArmSet, DuelingRecord, ParamVector, Preference};
use crate::rng::{seeded, SimRng};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn gaussian(rng: &mut SimRng, d: usize, scale: f64) -> ParamVector {
    ParamVector::new((0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect())
}

fn random_history(rng: &mut SimRng, arms: &Arc<ArmSet>, n: usize) -> History {
    let mut h = History::new();
    for t in 1..=n as u64 {
        let a1 = rng.random_range(0..arms.len());
        let a2 = rng.random_range(0..arms.len());
        let p = if rng.random::<bool>() { Preference::First } else { Preference::Second };
        h.push(DuelingRecord::new(t, a1, a2, p), arms).expect("valid record");
    }
    h
}

fn gradient_check(rng: &mut SimRng) -> Check {
    let inst = generate_instance(rng.random(), 5, 32, FeatureConvention::RawPm1).unwrap();
    let stats = DuelStats::from_history(&random_history(rng, inst.arms(), 50));
    let lik = LikelihoodConfig::new(1.0, 0.3, Chain::One).unwrap();
    let prior = PriorSpec::default();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let theta = gaussian(rng, 5, 1.0);
        let g = potential_gradient_from_stats(&theta, &stats, &lik, &prior);
        let fd: Vec<f64> = (0..5)
            .map(|i| {
                let mut p = theta.clone();
                let mut m = theta.clone();
                p.0[i] += h;
                m.0[i] -= h;
                (potential_from_stats(&p, &stats, &lik, &prior) - potential_from_stats(&m, &stats, &lik, &prior))
                    / (2.0 * h)
            })
            .collect();
        let err: f64 = g.0.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(err / g.norm().max(1e-8));
    }
    check("gradient vs finite differences", worst <= 1e-5, format!("max relative error {worst:.2e}"))
}

fn decomposition_check(rng: &mut SimRng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let inst = generate_instance(rng.random(), 5, 32, FeatureConvention::RawPm1).unwrap();
        let t1 = gaussian(rng, 5, 1.0);
        let t2 = gaussian(rng, 5, 1.0);
        let (a1, a2) = (inst.arms().argmax(&t1), inst.arms().argmax(&t2));
        worst = worst.max(inst.regret_decomposition_residual(inst.arms(), &t1, &t2, a1, a2));
    }
    check("regret decomposition identity", worst < 1e-9, format!("max residual {worst:.2e}"))
}

fn random_state(rng: &mut SimRng, d: usize) -> EstimatorState {
    let a = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let sigma = &a * a.transpose() + DMatrix::identity(d, d) * 0.1;
    EstimatorState::new(gaussian(rng, d, 1.0), sigma).unwrap()
}

fn bonus(state: &EstimatorState, arms: &ArmSet, a: usize, b: usize) -> f64 {
    let diff = arms.difference(a, b);
    diff.dot(&(&state.sigma_inv * &diff)).max(0.0).sqrt()
}

fn selector_check(rng: &mut SimRng) -> Check {
    let mut mismatches = 0;
    for _ in 0..30 {
        let inst = generate_instance(rng.random(), 4, 12, FeatureConvention::RawPm1).unwrap();
        let arms = inst.arms();
        let state = random_state(rng, 4);
        let beta = 0.5;
        let s = arms.scores(&state.theta_hat);
        let k = arms.len();
        let mut best = (f64::NEG_INFINITY, (0, 0));
        for a in 0..k {
            for b in 0..k {
                let v = s[a] + s[b] + beta * bonus(&state, arms, a, b);
                if v > best.0 + 1e-9 * v.abs().max(1.0) {
                    best = (v, (a, b));
                }
            }
        }
        let got = maxpairucb_select(&state, arms, beta);
        let gv = s[got.0] + s[got.1] + beta * bonus(&state, arms, got.0, got.1);
        if (gv - best.0).abs() > 1e-9 * best.0.abs().max(1.0) {
            mismatches += 1;
        }
        if maxinp_select(&state, arms, beta).is_err() {
            mismatches += 1;
        }
    }
    check("selectors vs brute force", mismatches == 0, format!("{mismatches} mismatches in 30 states"))
}

fn finite_posterior_check(rng: &mut SimRng) -> Check {
    let arms = Arc::new(ArmSet::from_rows(vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![-0.7, 0.7],
        vec![0.5, -0.5],
    ]));
    let history = random_history(rng, &arms, 6);
    let grid: Vec<ParamVector> = (0..7)
        .flat_map(|i| (0..7).map(move |j| ParamVector::new(vec![-1.5 + 0.5 * i as f64, -1.5 + 0.5 * j as f64])))
        .collect();
    let lik = LikelihoodConfig::new(1.0, 0.2, Chain::Two).unwrap();
    let prior = PriorSpec::Gaussian { sigma0: 1.0 };
    let stats = DuelStats::from_history(&history);
    let grid_w = exact_posterior_grid(&stats, &lik, &prior, &grid).unwrap();
    let log_prior: Vec<f64> = grid.iter().map(|g| -prior.neg_log_density(g.as_slice())).collect();
    let max = log_prior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = log_prior.iter().map(|l| (l - max).exp()).sum();
    let prior_w: Vec<f64> = log_prior.iter().map(|l| (l - max).exp() / z).collect();
    let set = FiniteModelSet::new(grid.clone(), prior_w).unwrap();
    let finite_w = finite_posterior(&history, &LinearReward { bound: f64::INFINITY }, &set, &lik).unwrap();
    let gap = grid_w
        .iter()
        .zip(&finite_w)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    // Direct per-record evaluation agrees with the grouped statistics.
    let theta = ParamVector::new(vec![0.3, -0.8]);
    let direct: f64 = history
        .iter()
        .map(|(r, a)| feel_good_likelihood(&theta, r, a, &lik))
        .sum::<f64>()
        + prior.neg_log_density(theta.as_slice());
    let grouped = potential_from_stats(&theta, &stats, &lik, &prior);
    let resum = (direct - grouped).abs() / direct.abs().max(1.0);
    check(
        "finite posterior vs grid posterior",
        gap <= 1e-12 && resum <= 1e-12,
        format!("max weight gap {gap:.2e}, potential re-summation gap {resum:.2e}"),
    )
}

fn feedback_check(rng: &mut SimRng) -> Check {
    let inst: BanditInstance = generate_instance(rng.random(), 5, 32, FeatureConvention::RawPm1).unwrap();
    let arms = inst.arms();
    let n = 20_000;
    let (a1, a2) = (rng.random_range(0..32), rng.random_range(0..32));
    let p = crate::primitives::preference_probability(inst.true_reward(arms, a1), inst.true_reward(arms, a2));
    let wins = (0..n)
        .filter(|_| inst.sample_preference(rng, arms, a1, a2) == Preference::First)
        .count() as f64;
    let z = (wins - n as f64 * p) / (n as f64 * p * (1.0 - p)).sqrt().max(1e-12);
    check("preference sampling frequency", z.abs() < 4.0, format!("z-score {z:.2}"))
}

/// Runs every check with a fixed seed.
pub fn run_checks(seed: u64) -> Vec<Check> {
    let mut rng = seeded(seed);
    vec![
        gradient_check(&mut rng),
        decomposition_check(&mut rng),
        selector_check(&mut rng),
        finite_posterior_check(&mut rng),
        feedback_check(&mut rng),
    ]
}
