use crate::env::RegretTrace;
use crate::error::{Error, Result};

/// Per-round mean and sample standard deviation of cumulative regret.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateTrace {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub runs: usize,
}

impl AggregateTrace {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_std(&self) -> f64 {
        self.std.last().copied().unwrap_or(0.0)
    }

    /// Mean cumulative regret after `round` rounds (1-based).
    pub fn mean_at(&self, round: usize) -> f64 {
        self.mean[round - 1]
    }
}

/// Welford accumulation per round; std uses divisor n − 1 (0 for one run).
pub fn aggregate(traces: &[RegretTrace]) -> Result<AggregateTrace> {
    let first = traces
        .first()
        .ok_or_else(|| Error::Aggregation("no traces to aggregate".into()))?;
    let len = first.len();
    if let Some(bad) = traces.iter().position(|t| t.len() != len) {
        return Err(Error::Aggregation(format!(
            "trace {bad} has {} rounds, expected {len}",
            traces[bad].len()
        )));
    }
    let mut mean = vec![0.0; len];
    let mut m2 = vec![0.0; len];
    for (n, trace) in traces.iter().enumerate() {
        let count = (n + 1) as f64;
        for (i, &x) in trace.cumulative().iter().enumerate() {
            let delta = x - mean[i];
            mean[i] += delta / count;
            m2[i] += delta * (x - mean[i]);
        }
    }
    let runs = traces.len();
    let std = if runs > 1 {
        m2.iter().map(|s| (s / (runs - 1) as f64).max(0.0).sqrt()).collect()
    } else {
        vec![0.0; len]
    };
    Ok(AggregateTrace { mean, std, runs })
}
