//! General reward classes and exact posteriors over finite model sets.
//!
//! The Feel-Good likelihood generalizes to any reward family r_θ:
//!
//! Lʲ(θ) = η·σ(y·Δr_θ(a¹, a²)) − μ·max_a' Δr_θ(a', a³⁻ʲ),
//!
//! and arms are chosen as argmax_a r_θ(a). When Θ is finite the posterior
//! can be normalized exactly, so no sampler is needed.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::history::History;
use crate::posterior::{normalize_log_weights, LikelihoodConfig};
use crate::primitives::{argmax_lowest, link_sigma, reward, ArmSet, DuelingRecord, ParamVector};

/// A family of reward functions {r_θ} with |r_θ| ≤ [`RewardClass::bound`].
pub trait RewardClass {
    type Param;

    /// r_θ(x, a) for arm `arm` of the action set `arms`.
    fn evaluate(&self, theta: &Self::Param, arms: &ArmSet, arm: usize) -> f64;

    /// Uniform bound B on |r_θ|.
    fn bound(&self) -> f64;

    fn rewards(&self, theta: &Self::Param, arms: &ArmSet) -> Vec<f64> {
        (0..arms.len()).map(|a| self.evaluate(theta, arms, a)).collect()
    }
}

/// r_θ(a) = ⟨θ, φ(a)⟩.
#[derive(Clone, Copy, Debug)]
pub struct LinearReward {
    pub bound: f64,
}

impl RewardClass for LinearReward {
    type Param = ParamVector;

    fn evaluate(&self, theta: &ParamVector, arms: &ArmSet, arm: usize) -> f64 {
        reward(theta, arms.feature(arm))
    }

    fn bound(&self) -> f64 {
        self.bound
    }
}

/// r_θ(a) = B·tanh(⟨θ, φ(a)⟩): a bounded single-index model.
#[derive(Clone, Copy, Debug)]
pub struct TanhReward {
    pub scale: f64,
}

impl RewardClass for TanhReward {
    type Param = ParamVector;

    fn evaluate(&self, theta: &ParamVector, arms: &ArmSet, arm: usize) -> f64 {
        self.scale * reward(theta, arms.feature(arm)).tanh()
    }

    fn bound(&self) -> f64 {
        self.scale
    }
}

/// Lʲ(θ, record) for an arbitrary reward class.
pub fn generalized_likelihood<C: RewardClass>(
    theta: &C::Param,
    record: &DuelingRecord,
    arms: &ArmSet,
    class: &C,
    lik: &LikelihoodConfig,
) -> f64 {
    let r = class.rewards(theta, arms);
    let y = record.preference.sign();
    let data = lik.eta * link_sigma(y * (r[record.arm1] - r[record.arm2]));
    let best = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    data - lik.mu * (best - r[lik.chain.opposing_arm(record)])
}

/// A finite parameter set Θ = {θ_1, …, θ_N} with prior weights.
#[derive(Clone, Debug)]
pub struct FiniteModelSet<P> {
    models: Vec<P>,
    prior: Vec<f64>,
}

impl<P> FiniteModelSet<P> {
    /// Prior entries must be nonnegative and sum to 1 within 1e−12.
    pub fn new(models: Vec<P>, prior: Vec<f64>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::InvalidConfig("model set is empty".into()));
        }
        if models.len() != prior.len() {
            return Err(Error::InvalidConfig(format!(
                "{} models but {} prior weights",
                models.len(),
                prior.len()
            )));
        }
        if prior.iter().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::InvalidConfig("prior weights must be nonnegative".into()));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("prior sums to {total}, not 1")));
        }
        Ok(Self { models, prior })
    }

    pub fn uniform(models: Vec<P>) -> Result<Self> {
        let n = models.len();
        Self::new(models, vec![1.0 / n as f64; n])
    }

    pub fn models(&self) -> &[P] {
        &self.models
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

/// Unnormalized log weights ln prior_n − Σ_records Lʲ(θ_n, record).
pub fn finite_log_weights<C: RewardClass>(
    history: &History,
    class: &C,
    set: &FiniteModelSet<C::Param>,
    lik: &LikelihoodConfig,
) -> Vec<f64> {
    set.models
        .iter()
        .zip(&set.prior)
        .map(|(theta, &p)| {
            let evidence: f64 = history
                .iter()
                .map(|(record, arms)| generalized_likelihood(theta, record, arms, class, lik))
                .sum();
            p.ln() - evidence
        })
        .collect()
}

/// Exact posterior weights over a finite model set.
pub fn finite_posterior<C: RewardClass>(
    history: &History,
    class: &C,
    set: &FiniteModelSet<C::Param>,
    lik: &LikelihoodConfig,
) -> Result<Vec<f64>> {
    normalize_log_weights(&finite_log_weights(history, class, set, lik))
}

/// Draws two independent models from the posterior weights and returns
/// each one's best arm (lowest index on ties).
pub fn finite_fgts_select<C: RewardClass, R: Rng + ?Sized>(
    rng: &mut R,
    set: &FiniteModelSet<C::Param>,
    weights: &[f64],
    class: &C,
    arms: &ArmSet,
) -> Result<(usize, usize)> {
    let (m1, m2) = finite_draw_pair(rng, weights)?;
    let a1 = argmax_lowest(&class.rewards(&set.models[m1], arms));
    let a2 = argmax_lowest(&class.rewards(&set.models[m2], arms));
    Ok((a1, a2))
}

/// Two independent model indices drawn from `weights`.
pub fn finite_draw_pair<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> Result<(usize, usize)> {
    let dist = WeightedIndex::new(weights)
        .map_err(|e| Error::InvalidConfig(format!("invalid posterior weights: {e}")))?;
    Ok((dist.sample(rng), dist.sample(rng)))
}
