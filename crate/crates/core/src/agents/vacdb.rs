//! Layered arm elimination in the style of VACDB.
//!
//! Layer ℓ (1-based) has its own weighted estimator (θ̂_ℓ, Σ_ℓ) and an
//! uncertainty threshold 2^{−ℓ}. Each round walks the layers from the top:
//!
//! * if some surviving pair has ‖φ(x) − φ(y)‖_{Σ_ℓ⁻¹} above the threshold,
//!   play the MaxPairUCB pair within the survivors of this layer and credit
//!   the observation to layer ℓ with weight min(1, 2^{−ℓ} / bonus);
//! * otherwise eliminate survivors whose estimated reward trails the layer
//!   leader by more than 2·β·2^{−ℓ} and descend.
//!
//! The last layer always plays. Eliminations are remembered per layer, so a
//! layer's surviving set only shrinks while the action set stays the same.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::agents::covariance::LinearEstimator;
use crate::agents::{DuelingAgent, RoundCounter};
use crate::error::{Error, Result};
use crate::primitives::{argmax_pair, ArmSet, DuelingRecord};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VacdbConfig {
    pub beta: f64,
    pub lambda: f64,
    pub layers: usize,
}

impl VacdbConfig {
    /// ⌈log₂ √T⌉ layers, at least one.
    pub fn default_layers(horizon: u64) -> usize {
        ((horizon.max(2) as f64).log2() / 2.0).ceil().max(1.0) as usize
    }
}

pub struct Vacdb {
    config: VacdbConfig,
    layers: Vec<LinearEstimator>,
    // eliminated[ℓ]: arms removed when descending from layer ℓ to ℓ + 1.
    eliminated: Vec<BTreeSet<usize>>,
    context: Option<Arc<ArmSet>>,
    pending: Option<(usize, f64)>,
    rounds: RoundCounter,
}

impl Vacdb {
    pub fn new(dim: usize, config: VacdbConfig) -> Result<Self> {
        if config.layers == 0 {
            return Err(Error::InvalidConfig("VACDB needs at least one layer".into()));
        }
        if !(config.beta >= 0.0 && config.beta.is_finite()) {
            return Err(Error::InvalidConfig("VACDB beta must be nonnegative".into()));
        }
        let layers = (0..config.layers)
            .map(|_| LinearEstimator::new(dim, config.lambda))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config,
            layers,
            eliminated: vec![BTreeSet::new(); config.layers],
            context: None,
            pending: None,
            rounds: RoundCounter::default(),
        })
    }

    pub fn threshold(layer: usize) -> f64 {
        0.5f64.powi(layer as i32 + 1)
    }

    /// Surviving arms at every layer for the current action set.
    pub fn surviving_sets(&self, arms: &ArmSet) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.layers.len());
        let mut cand: Vec<usize> = (0..arms.len()).collect();
        for layer in 0..self.layers.len() {
            out.push(cand.clone());
            if layer + 1 < self.layers.len() {
                cand.retain(|a| !self.eliminated[layer].contains(a));
            }
        }
        out
    }

    pub fn layer_estimator(&self, layer: usize) -> &LinearEstimator {
        &self.layers[layer]
    }

    fn reset_if_new_context(&mut self, arms: &Arc<ArmSet>) {
        let same = self
            .context
            .as_ref()
            .is_some_and(|c| Arc::ptr_eq(c, arms) || **c == **arms);
        if !same {
            self.eliminated.iter_mut().for_each(BTreeSet::clear);
            self.context = Some(Arc::clone(arms));
        }
    }
}

impl DuelingAgent for Vacdb {
    fn name(&self) -> &'static str {
        "vacdb"
    }

    fn select(&mut self, arms: &Arc<ArmSet>, _round: u64) -> Result<(usize, usize)> {
        self.reset_if_new_context(arms);
        let beta = self.config.beta;
        let last = self.layers.len() - 1;
        let mut cand: Vec<usize> = (0..arms.len()).collect();
        for layer in 0..=last {
            let state = self.layers[layer].state();
            let scores = arms.scores(&state.theta_hat);
            let bonus = state.bonuses(arms);
            let threshold = Self::threshold(layer);
            let uncertain = cand
                .iter()
                .any(|&x| cand.iter().any(|&y| bonus.get(x, y) > threshold));
            if uncertain || layer == last {
                let (x, y) = argmax_pair(&cand, |a, b| scores[a] + scores[b] + beta * bonus.get(a, b));
                let b = bonus.get(x, y);
                let weight = if b > threshold { threshold / b } else { 1.0 };
                self.pending = Some((layer, weight));
                return Ok((x, y));
            }
            let keep: Vec<usize> = cand
                .iter()
                .copied()
                .filter(|a| !self.eliminated[layer].contains(a))
                .collect();
            // Stale eliminations can empty the set after a higher layer
            // shrank; fall back to the current candidates then.
            let pool = if keep.is_empty() { cand.clone() } else { keep };
            let leader = pool
                .iter()
                .map(|&a| scores[a])
                .fold(f64::NEG_INFINITY, f64::max);
            let margin = 2.0 * beta * threshold;
            let mut next = Vec::with_capacity(pool.len());
            for a in pool {
                if leader - scores[a] > margin {
                    self.eliminated[layer].insert(a);
                } else {
                    next.push(a);
                }
            }
            cand = next;
        }
        unreachable!("the last layer always selects")
    }

    fn update(&mut self, record: DuelingRecord, arms: &Arc<ArmSet>) -> Result<()> {
        self.rounds.advance(&record)?;
        let (layer, weight) = self.pending.take().unwrap_or((0, 1.0));
        self.layers[layer].absorb(&record, arms, weight)
    }
}
