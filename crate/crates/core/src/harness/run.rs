//! Seeded simulation runs.

use std::sync::Arc;

use rayon::prelude::*;

use crate::agents::{CoLstim, DuelingAgent, FeelGoodThompson, MaxInP, MaxPairUcb, Vacdb, VacdbConfig};
use crate::env::{ArmSchedule, BanditInstance, RegretTrace};
use crate::error::{Error, Result};
use crate::harness::config::{Algo, ExperimentConfig};
use crate::primitives::{ArmSet, DuelingRecord, Preference};
use crate::rng::{run_key, stream_rng, Stream};

/// Result of one completed run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub trace: RegretTrace,
    pub records: Vec<DuelingRecord>,
    /// Largest residual of the regret decomposition over the run, for agents
    /// that expose their posterior draws.
    pub max_decomposition_residual: Option<f64>,
}

/// One run's outcome, successful or not.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub run: usize,
    pub key: u64,
    pub instance_fingerprint: u64,
    pub result: std::result::Result<RunReport, String>,
}

/// All runs of an experiment, ordered by run index.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub runs: Vec<RunOutcome>,
}

impl ExperimentOutcome {
    pub fn traces(&self) -> Vec<RegretTrace> {
        self.runs
            .iter()
            .filter_map(|r| r.result.as_ref().ok().map(|rep| rep.trace.clone()))
            .collect()
    }

    pub fn failures(&self) -> Vec<(usize, String)> {
        self.runs
            .iter()
            .filter_map(|r| r.result.as_ref().err().map(|e| (r.run, e.clone())))
            .collect()
    }
}

/// Builds the agent for `config` with streams derived from `key`.
pub fn build_agent(config: &ExperimentConfig, key: u64) -> Result<Box<dyn DuelingAgent>> {
    let d = config.dim;
    Ok(match config.algo {
        Algo::Fgts => Box::new(FeelGoodThompson::with_sgld(
            d,
            config.eta(),
            config.mu(),
            config.prior,
            config.sgld,
            [stream_rng(key, Stream::ChainOne), stream_rng(key, Stream::ChainTwo)],
        )?),
        Algo::MaxInP => Box::new(MaxInP::new(d, config.lambda, config.beta)?),
        Algo::MaxPairUcb => Box::new(MaxPairUcb::new(d, config.lambda, config.beta)?),
        Algo::CoLstim => Box::new(CoLstim::new(
            d,
            config.lambda,
            config.beta,
            config.perturbation,
            stream_rng(key, Stream::Agent),
        )?),
        Algo::Vacdb => Box::new(Vacdb::new(
            d,
            VacdbConfig {
                beta: config.beta,
                lambda: config.lambda,
                layers: config.layers(),
            },
        )?),
    })
}

/// The instance of run `run`. Depends only on the master seed, the run
/// index, and the instance shape, so every algorithm sees the same one.
pub fn run_instance(config: &ExperimentConfig, run: usize) -> Result<BanditInstance> {
    let key = run_key(config.master_seed, run as u64);
    BanditInstance::generate(
        &mut stream_rng(key, Stream::Instance),
        config.dim,
        config.arms,
        config.convention,
    )
}

enum Feedback<'a> {
    Sampled,
    Recorded(&'a [DuelingRecord]),
}

fn drive(config: &ExperimentConfig, run: usize, feedback: Feedback<'_>) -> Result<RunReport> {
    let key = run_key(config.master_seed, run as u64);
    let instance = run_instance(config, run)?;
    let mut agent = build_agent(config, key)?;
    let mut noise = stream_rng(key, Stream::Feedback);
    let mut arm_rng = stream_rng(key, Stream::ArmResample);
    let horizon = config.rounds as usize;
    let mut trace = RegretTrace::with_capacity(horizon);
    let mut records = Vec::with_capacity(horizon);
    let mut max_residual: Option<f64> = None;

    for round in 1..=config.rounds {
        let arms: Arc<ArmSet> = match config.schedule {
            ArmSchedule::Fixed => Arc::clone(instance.arms()),
            ArmSchedule::ResamplePerRound => instance.resample_arms(&mut arm_rng)?,
        };
        let (a1, a2) = agent.select(&arms, round)?;
        trace.push(instance.per_round_regret(&arms, a1, a2));
        if let Some((t1, t2)) = agent.posterior_draws() {
            let r = instance.regret_decomposition_residual(&arms, t1, t2, a1, a2);
            max_residual = Some(max_residual.map_or(r, |m| m.max(r)));
        }
        let preference: Preference = match feedback {
            Feedback::Sampled => instance.sample_preference(&mut noise, &arms, a1, a2),
            Feedback::Recorded(recs) => {
                let rec = recs.get(round as usize - 1).ok_or_else(|| {
                    Error::InvalidConfig(format!("recording ends before round {round}"))
                })?;
                if (rec.arm1, rec.arm2) != (a1, a2) {
                    return Err(Error::Internal(format!(
                        "replay diverged at round {round}: recorded ({}, {}), selected ({a1}, {a2})",
                        rec.arm1, rec.arm2
                    )));
                }
                rec.preference
            }
        };
        let record = DuelingRecord::new(round, a1, a2, preference);
        agent.update(record, &arms)?;
        records.push(record);
    }
    Ok(RunReport {
        trace,
        records,
        max_decomposition_residual: max_residual,
    })
}

/// Simulates run `run` of `config`.
pub fn run_single(config: &ExperimentConfig, run: usize) -> RunOutcome {
    let key = run_key(config.master_seed, run as u64);
    let fingerprint = run_instance(config, run)
        .map(|i| i.fingerprint())
        .unwrap_or(0);
    RunOutcome {
        run,
        key,
        instance_fingerprint: fingerprint,
        result: drive(config, run, Feedback::Sampled).map_err(|e| e.to_string()),
    }
}

/// Re-runs `run` feeding back the recorded preferences instead of sampling
/// them; fails if the agent's choices depart from the recording.
pub fn replay_run(config: &ExperimentConfig, run: usize, records: &[DuelingRecord]) -> Result<RunReport> {
    drive(config, run, Feedback::Recorded(records))
}

/// Executes every run of `config`. The outcome does not depend on the
/// number of worker threads.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let indices: Vec<usize> = (0..config.runs).collect();
    let runs: Vec<RunOutcome> = match config.threads {
        1 => indices.iter().map(|&r| run_single(config, r)).collect(),
        0 => indices.par_iter().map(|&r| run_single(config, r)).collect(),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(|| indices.par_iter().map(|&r| run_single(config, r)).collect()),
    };
    Ok(ExperimentOutcome {
        config: config.clone(),
        runs,
    })
}
