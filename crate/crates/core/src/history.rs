//! Interaction history and its grouped sufficient statistics.
//!
//! Every likelihood in this crate depends on a record only through the
//! ordered (winner, loser) pair and the opposing arm of each chain, and on θ
//! only through the arm scores ⟨θ, φ(a)⟩. [`DuelStats`] keeps those counts
//! per action set, so evaluating a potential or its gradient costs
//! O(K·d + distinct pairs) instead of O(t·d).

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::primitives::{ArmSet, DuelingRecord};

#[derive(Clone, Debug)]
struct Entry {
    record: DuelingRecord,
    context: usize,
}

/// Ordered, append-only list of dueling records together with the action
/// set each record was played on.
#[derive(Clone, Debug, Default)]
pub struct History {
    entries: Vec<Entry>,
    contexts: Vec<Arc<ArmSet>>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record. Rounds must be strictly increasing and the arm
    /// indices must be valid for `arms`.
    pub fn push(&mut self, record: DuelingRecord, arms: &Arc<ArmSet>) -> Result<()> {
        if let Some(last) = self.entries.last() {
            if record.round <= last.record.round {
                return Err(Error::Sequencing {
                    expected: last.record.round + 1,
                    got: record.round,
                });
            }
        }
        if record.arm1 >= arms.len() || record.arm2 >= arms.len() {
            return Err(Error::InvalidConfig(format!(
                "record {record} references an arm outside a set of {}",
                arms.len()
            )));
        }
        let context = match self.contexts.last() {
            Some(c) if Arc::ptr_eq(c, arms) || **c == **arms => self.contexts.len() - 1,
            _ => {
                self.contexts.push(Arc::clone(arms));
                self.contexts.len() - 1
            }
        };
        self.entries.push(Entry { record, context });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last_round(&self) -> Option<u64> {
        self.entries.last().map(|e| e.record.round)
    }

    /// Records paired with the action set they were played on.
    pub fn iter(&self) -> impl Iterator<Item = (&DuelingRecord, &Arc<ArmSet>)> + '_ {
        self.entries
            .iter()
            .map(|e| (&e.record, &self.contexts[e.context]))
    }

    pub fn records(&self) -> impl Iterator<Item = &DuelingRecord> + '_ {
        self.entries.iter().map(|e| &e.record)
    }
}

/// Weighted count of one ordered (winner, loser) pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCount {
    pub winner: usize,
    pub loser: usize,
    pub weight: f64,
}

/// Sufficient statistics of the records played on one action set.
#[derive(Clone, Debug)]
pub struct ContextStats {
    arms: Arc<ArmSet>,
    pairs: Vec<PairCount>,
    index: HashMap<(usize, usize), usize>,
    rounds: f64,
    // opponents[0][a]: times arm a was played second (the opposing arm of
    // chain 1); opponents[1][a]: times it was played first.
    opponents: [Vec<f64>; 2],
}

impl ContextStats {
    fn new(arms: Arc<ArmSet>) -> Self {
        let k = arms.len();
        Self {
            arms,
            pairs: Vec::new(),
            index: HashMap::new(),
            rounds: 0.0,
            opponents: [vec![0.0; k], vec![0.0; k]],
        }
    }

    pub fn arms(&self) -> &Arc<ArmSet> {
        &self.arms
    }

    pub fn pairs(&self) -> &[PairCount] {
        &self.pairs
    }

    /// Number of records played on this action set.
    pub fn rounds(&self) -> f64 {
        self.rounds
    }

    /// Per-arm count of being the opposing arm for chain index `chain` (0 or 1).
    pub fn opponent_counts(&self, chain: usize) -> &[f64] {
        &self.opponents[chain]
    }
}

/// Grouped sufficient statistics of a history.
///
/// The state after absorbing a set of records does not depend on the order
/// they arrived in, up to the order of floating-point additions.
#[derive(Clone, Debug, Default)]
pub struct DuelStats {
    contexts: Vec<ContextStats>,
    records: usize,
}

impl DuelStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_history(history: &History) -> Self {
        let mut stats = Self::new();
        for (record, arms) in history.iter() {
            stats.push(record, arms, 1.0);
        }
        stats
    }

    /// Absorbs one record. `weight` scales its logistic term; the opposing-arm
    /// counts always grow by one.
    pub fn push(&mut self, record: &DuelingRecord, arms: &Arc<ArmSet>, weight: f64) {
        let needs_new = match self.contexts.last() {
            Some(c) => !(Arc::ptr_eq(&c.arms, arms) || *c.arms == **arms),
            None => true,
        };
        if needs_new {
            self.contexts.push(ContextStats::new(Arc::clone(arms)));
        }
        let ctx = self.contexts.last_mut().expect("context present");
        let key = record.winner_loser();
        match ctx.index.get(&key) {
            Some(&i) => ctx.pairs[i].weight += weight,
            None => {
                ctx.index.insert(key, ctx.pairs.len());
                ctx.pairs.push(PairCount {
                    winner: key.0,
                    loser: key.1,
                    weight,
                });
            }
        }
        ctx.rounds += 1.0;
        ctx.opponents[0][record.arm2] += 1.0;
        ctx.opponents[1][record.arm1] += 1.0;
        self.records += 1;
    }

    pub fn contexts(&self) -> &[ContextStats] {
        &self.contexts
    }

    pub fn len(&self) -> usize {
        self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records == 0
    }

    pub fn dim(&self) -> Option<usize> {
        self.contexts.first().map(|c| c.arms.dim())
    }
}
