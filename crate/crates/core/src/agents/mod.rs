//! Dueling agents: Feel-Good Thompson sampling and the UCB-style baselines.
//!
//! Agents only ever see the [`ArmSet`] of a round, never the environment's
//! hidden parameter.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::primitives::{ArmSet, DuelingRecord, ParamVector};

pub mod baselines;
pub mod covariance;
pub mod fgts;
pub mod mle;
pub mod vacdb;

pub use baselines::{colstim_select, maxinp_select, maxpairucb_select, CoLstim, MaxInP, MaxPairUcb};
pub use covariance::{covariance_update, BonusTable, EstimatorState, LinearEstimator};
pub use fgts::{FeelGoodThompson, FixedSampler, PosteriorSampler, SgldSampler};
pub use mle::{mle_estimate, mle_solve, objective_gradient, MleReport};
pub use vacdb::{Vacdb, VacdbConfig};

/// The select/update loop every algorithm implements.
pub trait DuelingAgent: Send {
    fn name(&self) -> &'static str;

    /// Chooses (a¹, a²) for `round`. May advance internal random streams but
    /// does not change what the agent has learned.
    fn select(&mut self, arms: &Arc<ArmSet>, round: u64) -> Result<(usize, usize)>;

    /// Absorbs the environment's response to the last selection.
    fn update(&mut self, record: DuelingRecord, arms: &Arc<ArmSet>) -> Result<()>;

    /// The two models behind the last selection, for samplers that have them.
    fn posterior_draws(&self) -> Option<(&ParamVector, &ParamVector)> {
        None
    }
}

/// Enforces that updates arrive for rounds 1, 2, 3, … in order.
#[derive(Clone, Copy, Debug, Default)]
pub struct RoundCounter {
    last: u64,
}

impl RoundCounter {
    pub fn advance(&mut self, record: &DuelingRecord) -> Result<()> {
        let expected = self.last + 1;
        if record.round != expected {
            return Err(Error::Sequencing {
                expected,
                got: record.round,
            });
        }
        self.last = expected;
        Ok(())
    }

    pub fn last(&self) -> u64 {
        self.last
    }
}
