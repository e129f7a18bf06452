//! The α ablation and the baseline tuning sweep.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::aggregate::{aggregate, AggregateTrace};
use crate::harness::config::{Algo, ExperimentConfig, HYPERPARAMETER_GRID};
use crate::harness::output::{emit_csv, write_manifest};
use crate::harness::run::{run_experiment, ExperimentOutcome};

/// One α of an ablation.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub alpha: f64,
    pub aggregate: AggregateTrace,
    /// Instance hash per run, identical across α by construction.
    pub fingerprints: Vec<u64>,
    pub failures: Vec<(usize, String)>,
}

fn aggregate_outcome(outcome: &ExperimentOutcome) -> Result<AggregateTrace> {
    aggregate(&outcome.traces())
}

/// Runs FGTS once per α, all on the same seeds. With `out_dir`, writes
/// `alpha_<α>.csv` and a manifest per α, plus `summary.csv`.
pub fn ablation_sweep(base: &ExperimentConfig, alphas: &[f64], out_dir: Option<&Path>) -> Result<Vec<SweepPoint>> {
    if alphas.is_empty() {
        return Err(Error::InvalidConfig("no alpha values given".into()));
    }
    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let config = ExperimentConfig {
            algo: Algo::Fgts,
            alpha,
            ..base.clone()
        };
        let outcome = run_experiment(&config)?;
        let agg = aggregate_outcome(&outcome)?;
        if let Some(dir) = out_dir {
            let csv = dir.join(format!("alpha_{alpha}.csv"));
            emit_csv(&agg, &csv)?;
            write_manifest(&outcome, &dir.join(format!("alpha_{alpha}.manifest.toml")), Some(&csv))?;
        }
        points.push(SweepPoint {
            alpha,
            aggregate: agg,
            fingerprints: outcome.runs.iter().map(|r| r.instance_fingerprint).collect(),
            failures: outcome.failures(),
        });
    }
    if let Some(dir) = out_dir {
        let path = dir.join("summary.csv");
        fs::write(&path, summary_csv(&points)).map_err(|e| Error::Io { path, source: e })?;
    }
    Ok(points)
}

pub fn summary_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("alpha,final_mean_cum_regret,final_std_cum_regret,failed_runs\n");
    for p in points {
        s.push_str(&format!(
            "{},{:.16e},{:.16e},{}\n",
            p.alpha,
            p.aggregate.final_mean(),
            p.aggregate.final_std(),
            p.failures.len()
        ));
    }
    s
}

/// Best configuration of a baseline found on the tuning grid.
#[derive(Clone, Debug)]
pub struct TunedResult {
    pub config: ExperimentConfig,
    pub aggregate: AggregateTrace,
    /// Final mean regret of every grid point tried, in order.
    pub tried: Vec<(String, f64)>,
}

/// Candidate configurations of `algo` on the tuning grid: β for the UCB
/// methods, β × c for CoLSTIM, α for FGTS.
pub fn tuning_candidates(base: &ExperimentConfig, algo: Algo) -> Vec<ExperimentConfig> {
    let with = |f: &dyn Fn(&mut ExperimentConfig)| {
        let mut c = ExperimentConfig { algo, ..base.clone() };
        f(&mut c);
        c
    };
    match algo {
        Algo::Fgts => HYPERPARAMETER_GRID.iter().map(|&a| with(&|c| c.alpha = a)).collect(),
        Algo::CoLstim => HYPERPARAMETER_GRID
            .iter()
            .flat_map(|&p| HYPERPARAMETER_GRID.iter().map(move |&b| (p, b)))
            .map(|(p, b)| {
                with(&|c| {
                    c.perturbation = p;
                    c.beta = b;
                })
            })
            .collect(),
        _ => HYPERPARAMETER_GRID.iter().map(|&b| with(&|c| c.beta = b)).collect(),
    }
}

/// Runs every candidate and keeps the one with the lowest final mean regret
/// (first wins on ties).
pub fn tune(base: &ExperimentConfig, algo: Algo) -> Result<TunedResult> {
    let mut best: Option<(ExperimentConfig, AggregateTrace)> = None;
    let mut tried = Vec::new();
    for config in tuning_candidates(base, algo) {
        let agg = aggregate_outcome(&run_experiment(&config)?)?;
        tried.push((config.label(), agg.final_mean()));
        if best.as_ref().is_none_or(|(_, b)| agg.final_mean() < b.final_mean()) {
            best = Some((config, agg));
        }
    }
    let (config, aggregate) = best.ok_or(Error::EmptyGrid)?;
    Ok(TunedResult {
        config,
        aggregate,
        tried,
    })
}
