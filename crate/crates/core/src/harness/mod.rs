//! Experiment runner: configuration, seeded multi-run execution,
//! aggregation, CSV and manifest output, and parameter sweeps.

pub mod aggregate;
pub mod config;
pub mod output;
pub mod run;
pub mod sweep;
pub mod validate;

pub use aggregate::{aggregate, AggregateTrace};
pub use config::{Algo, ExperimentConfig, Preset, HYPERPARAMETER_GRID};
pub use output::{emit_csv, read_csv, write_manifest};
pub use run::{build_agent, replay_run, run_experiment, run_instance, run_single, ExperimentOutcome, RunOutcome, RunReport};
pub use sweep::{ablation_sweep, tune, tuning_candidates, SweepPoint, TunedResult};
