//! Feel-Good Thompson sampling for contextual dueling bandits.
//!
//! Each round draws θ¹ ~ p¹(· | S) and θ² ~ p²(· | S) independently and plays
//! aʲ = argmax_a ⟨θʲ, φ(a)⟩. The two posteriors differ only in which arm
//! the Feel-Good term measures against.

use std::sync::Arc;

use crate::agents::{DuelingAgent, RoundCounter};
use crate::error::Result;
use crate::history::DuelStats;
use crate::posterior::{sgld_sample, Chain, LikelihoodConfig, PriorSpec, SgldConfig, Workspace};
use crate::primitives::{ArmSet, DuelingRecord, ParamVector};
use crate::rng::SimRng;

/// Source of posterior draws for one chain.
pub trait PosteriorSampler: Send {
    fn sample(
        &mut self,
        stats: &DuelStats,
        lik: &LikelihoodConfig,
        round: u64,
    ) -> Result<ParamVector>;
}

/// Langevin sampler for a single chain, with its own noise stream and
/// optional warm start from the previous round's draw.
pub struct SgldSampler {
    prior: PriorSpec,
    sgld: SgldConfig,
    rng: SimRng,
    state: ParamVector,
    workspace: Workspace,
}

impl SgldSampler {
    pub fn new(dim: usize, prior: PriorSpec, sgld: SgldConfig, rng: SimRng) -> Result<Self> {
        sgld.validate()?;
        Ok(Self {
            prior,
            sgld,
            rng,
            state: ParamVector::zeros(dim),
            workspace: Workspace::default(),
        })
    }
}

impl PosteriorSampler for SgldSampler {
    fn sample(&mut self, stats: &DuelStats, lik: &LikelihoodConfig, round: u64) -> Result<ParamVector> {
        let init = if self.sgld.warm_start {
            self.state.clone()
        } else {
            ParamVector::zeros(self.state.dim())
        };
        let theta = sgld_sample(
            &mut self.rng,
            &init,
            stats,
            lik,
            &self.prior,
            &self.sgld,
            round,
            &mut self.workspace,
        )?;
        self.state = theta.clone();
        Ok(theta)
    }
}

/// The agent. Generic over the sampler so tests can substitute a fixed one.
pub struct FeelGoodThompson<S: PosteriorSampler = SgldSampler> {
    eta: f64,
    mu: f64,
    samplers: [S; 2],
    stats: DuelStats,
    last_samples: Option<(ParamVector, ParamVector)>,
    rounds: RoundCounter,
}

impl FeelGoodThompson<SgldSampler> {
    /// Langevin-backed agent; `chain_rngs` drive chains one and two.
    pub fn with_sgld(
        dim: usize,
        eta: f64,
        mu: f64,
        prior: PriorSpec,
        sgld: SgldConfig,
        chain_rngs: [SimRng; 2],
    ) -> Result<Self> {
        let [r1, r2] = chain_rngs;
        Self::new(
            eta,
            mu,
            [
                SgldSampler::new(dim, prior, sgld, r1)?,
                SgldSampler::new(dim, prior, sgld, r2)?,
            ],
        )
    }
}

impl<S: PosteriorSampler> FeelGoodThompson<S> {
    pub fn new(eta: f64, mu: f64, samplers: [S; 2]) -> Result<Self> {
        LikelihoodConfig::new(eta, mu, Chain::One)?;
        Ok(Self {
            eta,
            mu,
            samplers,
            stats: DuelStats::new(),
            last_samples: None,
            rounds: RoundCounter::default(),
        })
    }

    pub fn likelihood(&self, chain: Chain) -> LikelihoodConfig {
        LikelihoodConfig {
            eta: self.eta,
            mu: self.mu,
            chain,
        }
    }

    /// The (θ¹, θ²) drawn by the most recent `select`.
    pub fn last_samples(&self) -> Option<&(ParamVector, ParamVector)> {
        self.last_samples.as_ref()
    }

    pub fn stats(&self) -> &DuelStats {
        &self.stats
    }
}

impl<S: PosteriorSampler> DuelingAgent for FeelGoodThompson<S> {
    fn name(&self) -> &'static str {
        "fgts"
    }

    fn select(&mut self, arms: &Arc<ArmSet>, round: u64) -> Result<(usize, usize)> {
        let lik1 = self.likelihood(Chain::One);
        let lik2 = self.likelihood(Chain::Two);
        let [s1, s2] = &mut self.samplers;
        let theta1 = s1.sample(&self.stats, &lik1, round)?;
        let theta2 = s2.sample(&self.stats, &lik2, round)?;
        let pair = (arms.argmax(&theta1), arms.argmax(&theta2));
        self.last_samples = Some((theta1, theta2));
        Ok(pair)
    }

    fn update(&mut self, record: DuelingRecord, arms: &Arc<ArmSet>) -> Result<()> {
        self.rounds.advance(&record)?;
        self.stats.push(&record, arms, 1.0);
        Ok(())
    }

    fn posterior_draws(&self) -> Option<(&ParamVector, &ParamVector)> {
        self.last_samples.as_ref().map(|(a, b)| (a, b))
    }
}

/// Returns a fixed parameter regardless of the data.
#[derive(Clone, Debug)]
pub struct FixedSampler(pub ParamVector);

impl PosteriorSampler for FixedSampler {
    fn sample(&mut self, _: &DuelStats, _: &LikelihoodConfig, _: u64) -> Result<ParamVector> {
        Ok(self.0.clone())
    }
}
