//! Feel-Good posterior over the linear reward parameter.
//!
//! For chain j the posterior is p^j(θ | S) ∝ exp(−I(θ)) with potential
//!
//! I(θ) = Σ_records Lʲ(θ, record) − ln p₀(θ),
//! Lʲ(θ) = η·σ(y⟨θ, φ(a¹) − φ(a²)⟩) − μ·max_a' ⟨θ, φ(a') − φ(a³⁻ʲ)⟩.
//!
//! Samples are drawn with unadjusted Langevin steps
//! θ ← θ − δ∇I(θ) + √(2δ)ξ, and [`exact_posterior_grid`] evaluates the same
//! density on a finite grid for validation.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::{DuelStats, History};
use crate::primitives::{
    argmax_lowest, link_sigma, link_sigma_prime, ArmSet, DuelingRecord, ParamVector,
};

/// Which of the two posterior chains a likelihood belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chain {
    One,
    Two,
}

impl Chain {
    pub fn index(self) -> usize {
        match self {
            Chain::One => 0,
            Chain::Two => 1,
        }
    }

    pub fn other(self) -> Chain {
        match self {
            Chain::One => Chain::Two,
            Chain::Two => Chain::One,
        }
    }

    /// a³⁻ʲ: the arm the other chain played in `record`.
    pub fn opposing_arm(self, record: &DuelingRecord) -> usize {
        match self {
            Chain::One => record.arm2,
            Chain::Two => record.arm1,
        }
    }
}

/// (η, μ, j) of the Feel-Good likelihood.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodConfig {
    pub eta: f64,
    pub mu: f64,
    pub chain: Chain,
}

impl LikelihoodConfig {
    pub fn new(eta: f64, mu: f64, chain: Chain) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidConfig(format!("eta must be positive, got {eta}")));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidConfig(format!("mu must be nonnegative, got {mu}")));
        }
        Ok(Self { eta, mu, chain })
    }

    pub fn with_chain(self, chain: Chain) -> Self {
        Self { chain, ..self }
    }
}

/// Langevin schedule: the step size for bandit round r is
/// `step0 · decay^(r − 1)`, held fixed for that round's `inner_steps` moves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgldConfig {
    pub step0: f64,
    pub decay: f64,
    pub inner_steps: usize,
    pub warm_start: bool,
}

impl Default for SgldConfig {
    fn default() -> Self {
        Self {
            step0: 0.005,
            decay: 0.99,
            inner_steps: 100,
            warm_start: true,
        }
    }
}

impl SgldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step0 > 0.0 && self.step0.is_finite()) {
            return Err(Error::InvalidConfig("SGLD step0 must be positive".into()));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidConfig("SGLD decay must lie in (0, 1]".into()));
        }
        if self.inner_steps == 0 {
            return Err(Error::InvalidConfig("SGLD inner_steps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn step_size(&self, round: u64) -> f64 {
        let exponent = round.saturating_sub(1).min(i32::MAX as u64) as i32;
        self.step0 * self.decay.powi(exponent)
    }
}

/// Prior p₀ over θ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PriorSpec {
    /// N(0, σ₀² I), untruncated.
    Gaussian { sigma0: f64 },
    /// Uniform on {‖θ‖ ≤ radius}. Langevin iterates are projected back onto
    /// the ball.
    UniformBall { radius: f64 },
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec::Gaussian { sigma0: 1.0 }
    }
}

impl PriorSpec {
    /// −ln p₀(θ) up to an additive constant; +∞ outside a ball prior.
    pub fn neg_log_density(&self, theta: &[f64]) -> f64 {
        let sq: f64 = theta.iter().map(|x| x * x).sum();
        match *self {
            PriorSpec::Gaussian { sigma0 } => sq / (2.0 * sigma0 * sigma0),
            PriorSpec::UniformBall { radius } => {
                if sq <= radius * radius {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Adds ∇(−ln p₀)(θ) to `out`.
    fn add_gradient(&self, theta: &[f64], out: &mut [f64]) {
        if let PriorSpec::Gaussian { sigma0 } = *self {
            let inv = 1.0 / (sigma0 * sigma0);
            for (o, t) in out.iter_mut().zip(theta) {
                *o += t * inv;
            }
        }
    }

    fn project(&self, theta: &mut [f64]) {
        if let PriorSpec::UniformBall { radius } = *self {
            let n = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > radius {
                let s = radius / n;
                theta.iter_mut().for_each(|x| *x *= s);
            }
        }
    }
}

/// Lʲ(θ, record) evaluated directly on the record's action set.
pub fn feel_good_likelihood(
    theta: &ParamVector,
    record: &DuelingRecord,
    arms: &ArmSet,
    lik: &LikelihoodConfig,
) -> f64 {
    let scores = arms.scores(theta);
    let y = record.preference.sign();
    let data = lik.eta * link_sigma(y * (scores[record.arm1] - scores[record.arm2]));
    if lik.mu == 0.0 {
        return data;
    }
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    data - lik.mu * (best - scores[lik.chain.opposing_arm(record)])
}

/// Reusable buffers for potential and gradient evaluation.
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    scores: Vec<f64>,
    coef: Vec<f64>,
}

/// Data part Σ Lʲ of the potential, from grouped statistics.
fn data_potential(theta: &[f64], stats: &DuelStats, lik: &LikelihoodConfig, ws: &mut Workspace) -> f64 {
    let chain = lik.chain.index();
    let mut total = 0.0;
    for ctx in stats.contexts() {
        ctx.arms().scores_into(theta, &mut ws.scores);
        let s = &ws.scores;
        for p in ctx.pairs() {
            total += p.weight * lik.eta * link_sigma(s[p.winner] - s[p.loser]);
        }
        if lik.mu != 0.0 {
            let best = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let opp: f64 = ctx
                .opponent_counts(chain)
                .iter()
                .zip(s)
                .map(|(c, v)| c * v)
                .sum();
            total -= lik.mu * (ctx.rounds() * best - opp);
        }
    }
    total
}

/// Writes ∇I(θ) into `out`.
///
/// The max term is piecewise linear in θ; its gradient uses the current
/// argmax arm, which is an exact subgradient.
fn gradient_into(
    theta: &[f64],
    stats: &DuelStats,
    lik: &LikelihoodConfig,
    prior: &PriorSpec,
    ws: &mut Workspace,
    out: &mut [f64],
) {
    out.iter_mut().for_each(|x| *x = 0.0);
    let chain = lik.chain.index();
    for ctx in stats.contexts() {
        let arms = ctx.arms();
        arms.scores_into(theta, &mut ws.scores);
        ws.coef.clear();
        ws.coef.resize(arms.len(), 0.0);
        let s = &ws.scores;
        for p in ctx.pairs() {
            if p.winner == p.loser {
                continue;
            }
            let g = p.weight * lik.eta * link_sigma_prime(s[p.winner] - s[p.loser]);
            ws.coef[p.winner] += g;
            ws.coef[p.loser] -= g;
        }
        if lik.mu != 0.0 {
            let best = argmax_lowest(s);
            ws.coef[best] -= lik.mu * ctx.rounds();
            for (c, n) in ws.coef.iter_mut().zip(ctx.opponent_counts(chain)) {
                *c += lik.mu * n;
            }
        }
        for (c, f) in ws.coef.iter().zip(arms.features()) {
            if *c != 0.0 {
                for (o, x) in out.iter_mut().zip(f.as_slice()) {
                    *o += c * x;
                }
            }
        }
    }
    prior.add_gradient(theta, out);
}

/// I(θ) from grouped statistics.
pub fn potential_from_stats(
    theta: &ParamVector,
    stats: &DuelStats,
    lik: &LikelihoodConfig,
    prior: &PriorSpec,
) -> f64 {
    let mut ws = Workspace::default();
    data_potential(theta.as_slice(), stats, lik, &mut ws) + prior.neg_log_density(theta.as_slice())
}

/// I(θ) = Σ Lʲ(θ, record) − ln p₀(θ), up to an additive constant.
pub fn potential(
    theta: &ParamVector,
    history: &History,
    lik: &LikelihoodConfig,
    prior: &PriorSpec,
) -> f64 {
    potential_from_stats(theta, &DuelStats::from_history(history), lik, prior)
}

pub fn potential_gradient_from_stats(
    theta: &ParamVector,
    stats: &DuelStats,
    lik: &LikelihoodConfig,
    prior: &PriorSpec,
) -> ParamVector {
    let mut out = vec![0.0; theta.dim()];
    gradient_into(
        theta.as_slice(),
        stats,
        lik,
        prior,
        &mut Workspace::default(),
        &mut out,
    );
    ParamVector::new(out)
}

/// ∇I(θ).
pub fn potential_gradient(
    theta: &ParamVector,
    history: &History,
    lik: &LikelihoodConfig,
    prior: &PriorSpec,
) -> ParamVector {
    potential_gradient_from_stats(theta, &DuelStats::from_history(history), lik, prior)
}

/// Runs `sgld.inner_steps` Langevin moves from `init` at the step size of
/// bandit round `round` and returns the last iterate.
#[allow(clippy::too_many_arguments)]
pub fn sgld_sample<R: Rng + ?Sized>(
    rng: &mut R,
    init: &ParamVector,
    stats: &DuelStats,
    lik: &LikelihoodConfig,
    prior: &PriorSpec,
    sgld: &SgldConfig,
    round: u64,
    ws: &mut Workspace,
) -> Result<ParamVector> {
    assert!(round >= 1, "rounds are numbered from 1");
    let d = init.dim();
    let step = sgld.step_size(round);
    let noise = (2.0 * step).sqrt();
    let mut theta = init.0.as_slice().to_vec();
    let mut grad = vec![0.0; d];
    for _ in 0..sgld.inner_steps {
        gradient_into(&theta, stats, lik, prior, ws, &mut grad);
        for (t, g) in theta.iter_mut().zip(&grad) {
            let xi: f64 = rng.sample(StandardNormal);
            *t += -step * g + noise * xi;
        }
        prior.project(&mut theta);
        if !theta.iter().all(|x| x.is_finite()) {
            return Err(Error::SamplerDiverged { round });
        }
    }
    Ok(ParamVector(DVector::from_vec(theta)))
}

/// Posterior weights ∝ exp(−I(θ_g)) over a finite grid, normalized with
/// log-sum-exp.
pub fn exact_posterior_grid(
    stats: &DuelStats,
    lik: &LikelihoodConfig,
    prior: &PriorSpec,
    grid: &[ParamVector],
) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let log_w: Vec<f64> = grid
        .iter()
        .map(|g| -potential_from_stats(g, stats, lik, prior))
        .collect();
    normalize_log_weights(&log_w)
}

/// exp(l_i) / Σ exp(l_j), computed stably. Entries of −∞ get weight 0.
pub fn normalize_log_weights(log_w: &[f64]) -> Result<Vec<f64>> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NoSupport);
    }
    let shifted: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = shifted.iter().sum();
    Ok(shifted.into_iter().map(|w| w / total).collect())
}
