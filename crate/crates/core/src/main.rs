use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use duel_lab::env::{ArmSchedule, FeatureConvention};
use duel_lab::harness::output::manifest_path;
use duel_lab::harness::validate::run_checks;
use duel_lab::harness::{
    ablation_sweep, aggregate, emit_csv, run_experiment, write_manifest, Algo, ExperimentConfig, Preset,
};
use duel_lab::posterior::{PriorSpec, SgldConfig};

#[derive(Parser)]
#[command(name = "duel-lab", version, about = "Contextual dueling bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm for several seeded runs and write the aggregate CSV.
    Bench {
        #[arg(long, default_value = "fgts")]
        algo: String,
        #[command(flatten)]
        common: Common,
        /// Output CSV; a manifest is written next to it.
        #[arg(long, default_value = "regret.csv")]
        out: PathBuf,
    },
    /// Run FGTS once per α with paired seeds.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.1,1")]
        alphas: Vec<f64>,
        #[command(flatten)]
        common: Common,
        /// Output directory for per-α CSVs and the summary.
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Run the built-in oracle checks.
    Validate {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Raw,
    Unit,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    PaperExperiment,
    Theory,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Fixed,
    Resample,
}

#[derive(Args)]
struct Common {
    #[arg(long = "d", default_value_t = 10)]
    dim: usize,
    #[arg(long = "T", default_value_t = 2500)]
    rounds: u64,
    #[arg(long = "K", default_value_t = 32)]
    arms: usize,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 0.001)]
    lambda: f64,
    /// CoLSTIM perturbation scale c.
    #[arg(long, default_value_t = 0.1)]
    perturbation: f64,
    #[arg(long, value_enum, default_value = "paper-experiment")]
    preset: PresetArg,
    #[arg(long, value_enum, default_value = "raw")]
    convention: ConventionArg,
    #[arg(long, value_enum, default_value = "fixed")]
    schedule: ScheduleArg,
    #[arg(long, default_value_t = 0.005)]
    step0: f64,
    #[arg(long, default_value_t = 0.99)]
    decay: f64,
    #[arg(long, default_value_t = 100)]
    inner_steps: usize,
    /// Restart every Langevin chain at zero instead of the previous draw.
    #[arg(long)]
    cold_start: bool,
    /// Prior scale σ₀ of the Gaussian prior.
    #[arg(long, default_value_t = 1.0)]
    sigma0: f64,
    #[arg(long)]
    vacdb_layers: Option<usize>,
    /// Worker threads across runs (0: all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl Common {
    fn config(&self, algo: Algo) -> ExperimentConfig {
        ExperimentConfig {
            rounds: self.rounds,
            arms: self.arms,
            runs: self.runs,
            master_seed: self.seed,
            preset: match self.preset {
                PresetArg::PaperExperiment => Preset::PaperExperiment,
                PresetArg::Theory => Preset::Theory,
            },
            alpha: self.alpha,
            beta: self.beta,
            lambda: self.lambda,
            perturbation: self.perturbation,
            vacdb_layers: self.vacdb_layers,
            sgld: SgldConfig {
                step0: self.step0,
                decay: self.decay,
                inner_steps: self.inner_steps,
                warm_start: !self.cold_start,
            },
            prior: PriorSpec::Gaussian { sigma0: self.sigma0 },
            convention: match self.convention {
                ConventionArg::Raw => FeatureConvention::RawPm1,
                ConventionArg::Unit => FeatureConvention::UnitNormalized,
            },
            schedule: match self.schedule {
                ScheduleArg::Fixed => ArmSchedule::Fixed,
                ScheduleArg::Resample => ArmSchedule::ResamplePerRound,
            },
            threads: self.threads,
            ..ExperimentConfig::paper_experiment(algo, self.dim)
        }
    }
}

fn bench(algo: &str, common: &Common, out: PathBuf) -> duel_lab::Result<bool> {
    let config = common.config(algo.parse()?);
    let outcome = run_experiment(&config)?;
    for (run, err) in outcome.failures() {
        eprintln!("run {run} failed: {err}");
    }
    let agg = aggregate(&outcome.traces())?;
    emit_csv(&agg, &out)?;
    let manifest = manifest_path(&out);
    write_manifest(&outcome, &manifest, Some(&out))?;
    println!(
        "{}: final mean cumulative regret {:.4} (std {:.4}) over {} runs",
        config.label(),
        agg.final_mean(),
        agg.final_std(),
        agg.runs
    );
    println!("wrote {} and {}", out.display(), manifest.display());
    Ok(outcome.failures().is_empty())
}

fn sweep(alphas: &[f64], common: &Common, out: PathBuf) -> duel_lab::Result<bool> {
    let base = common.config(Algo::Fgts);
    let points = ablation_sweep(&base, alphas, Some(&out))?;
    let mut clean = true;
    for p in &points {
        println!(
            "alpha={}: final mean cumulative regret {:.4} (std {:.4})",
            p.alpha,
            p.aggregate.final_mean(),
            p.aggregate.final_std()
        );
        for (run, err) in &p.failures {
            eprintln!("alpha={} run {run} failed: {err}", p.alpha);
            clean = false;
        }
    }
    println!("wrote {}", out.display());
    Ok(clean)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench { algo, common, out } => bench(&algo, &common, out),
        Command::Sweep { alphas, common, out } => sweep(&alphas, &common, out),
        Command::Validate { seed } => {
            let checks = run_checks(seed);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(checks.iter().all(|c| c.passed))
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
