//! Independent reference implementations used as test oracles. Everything
//! here is written from the formulas with plain loops and does not call the
//! routines it checks.

#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use duel_lab::agents::EstimatorState;
use duel_lab::history::History;
use duel_lab::posterior::{Chain, LikelihoodConfig};
use duel_lab::primitives::{ArmSet, DuelingRecord, ParamVector, Preference};
use duel_lab::rng::SimRng;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// ln(1 + e^{−z}) evaluated in the obvious stable way.
pub fn softplus_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

pub fn score(theta: &[f64], arms: &ArmSet, a: usize) -> f64 {
    dot(theta, arms.feature(a).as_slice())
}

/// Lʲ(θ, record) straight from its definition.
pub fn likelihood(theta: &[f64], r: &DuelingRecord, arms: &ArmSet, lik: &LikelihoodConfig) -> f64 {
    let y = match r.preference {
        Preference::First => 1.0,
        Preference::Second => -1.0,
    };
    let gap = score(theta, arms, r.arm1) - score(theta, arms, r.arm2);
    let opponent = match lik.chain {
        Chain::One => r.arm2,
        Chain::Two => r.arm1,
    };
    let mut best = f64::NEG_INFINITY;
    for a in 0..arms.len() {
        best = best.max(score(theta, arms, a) - score(theta, arms, opponent));
    }
    lik.eta * softplus_neg(y * gap) - lik.mu * best
}

/// Σ Lʲ + ‖θ‖²/(2σ₀²), summed record by record.
pub fn potential(theta: &[f64], history: &History, lik: &LikelihoodConfig, sigma0: f64) -> f64 {
    let mut total = 0.0;
    for (r, arms) in history.iter() {
        total += likelihood(theta, r, arms, lik);
    }
    total + dot(theta, theta) / (2.0 * sigma0 * sigma0)
}

pub fn gaussian_vec(rng: &mut SimRng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn random_history(rng: &mut SimRng, arms: &Arc<ArmSet>, n: usize) -> History {
    let mut h = History::new();
    for t in 1..=n as u64 {
        let a1 = rng.random_range(0..arms.len());
        let a2 = rng.random_range(0..arms.len());
        let p = if rng.random::<bool>() {
            Preference::First
        } else {
            Preference::Second
        };
        h.push(DuelingRecord::new(t, a1, a2, p), arms).unwrap();
    }
    h
}

/// Random SPD Σ and θ̂.
pub fn random_state(rng: &mut SimRng, d: usize) -> EstimatorState {
    let a = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let sigma = &a * a.transpose() + DMatrix::identity(d, d) * 0.05;
    EstimatorState::new(ParamVector::new(gaussian_vec(rng, d, 1.0)), sigma).unwrap()
}

/// ‖φ(a) − φ(b)‖ in the Σ⁻¹ norm, from an explicit inverse.
pub fn mahalanobis(state: &EstimatorState, arms: &ArmSet, a: usize, b: usize) -> f64 {
    let inv = state.sigma.clone().try_inverse().unwrap();
    let d = arms.dim();
    let fa = arms.feature(a).as_slice();
    let fb = arms.feature(b).as_slice();
    let mut q = 0.0;
    for i in 0..d {
        for j in 0..d {
            q += (fa[i] - fb[i]) * inv[(i, j)] * (fa[j] - fb[j]);
        }
    }
    q.max(0.0).sqrt()
}

const TIE: f64 = 1e-12;

/// Lowest index whose value is within the tie tolerance of the maximum.
pub fn brute_argmax(values: &[f64]) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = best - TIE * best.abs().max(1.0);
    (0..values.len()).find(|&i| values[i] >= floor).unwrap()
}

/// Lowest lexicographic pair within the tie tolerance of the maximum.
pub fn brute_argmax_pair(cands: &[usize], f: impl Fn(usize, usize) -> f64) -> (usize, usize) {
    let mut best = f64::NEG_INFINITY;
    for &a in cands {
        for &b in cands {
            best = best.max(f(a, b));
        }
    }
    let floor = best - TIE * best.abs().max(1.0);
    let mut sorted = cands.to_vec();
    sorted.sort_unstable();
    for &a in &sorted {
        for &b in &sorted {
            if f(a, b) >= floor {
                return (a, b);
            }
        }
    }
    unreachable!()
}

/// Total-variation distance between two discrete distributions.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
