use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use stitchkit_core::harness::{
    derive_seed, observe, run_experiment, Ablation, ExperimentConfig, ExperimentReport, MetricsReport, TrialConfig,
};

use crate::{load_config, set, write_json, CmdResult, Failure};

#[derive(Clone, Copy, ValueEnum)]
pub enum AblationArg {
    Full,
    NoEkf,
    NoThread,
}

impl From<AblationArg> for Ablation {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::Full => Ablation::Full,
            AblationArg::NoEkf => Ablation::NoEkf,
            AblationArg::NoThread => Ablation::NoThread,
        }
    }
}

/// Overrides shared by `simulate` and `benchmark`, applied on top of the
/// trial config.
#[derive(Args)]
pub struct TrialFlags {
    /// Sutures planned per trial.
    #[arg(long)]
    sutures: Option<usize>,
    /// Per-axis needle cloud noise (mm).
    #[arg(long)]
    sigma: Option<f64>,
    /// Specular dropout probability.
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    grasp_tolerance: Option<f64>,
    #[arg(long)]
    insertion_tolerance: Option<f64>,
    #[arg(long)]
    tangle_raw: Option<f64>,
    #[arg(long)]
    tangle_swept: Option<f64>,
    #[arg(long)]
    snap_prob: Option<f64>,
    /// Skip the handover and pre-insertion alignment steps.
    #[arg(long)]
    no_alignment: bool,
}

impl TrialFlags {
    fn apply(&self, t: &mut TrialConfig) {
        set(&mut t.n_sutures, self.sutures);
        set(&mut t.noise.sigma, self.sigma);
        set(&mut t.noise.specular_dropout, self.dropout);
        set(&mut t.failure.grasp_tolerance, self.grasp_tolerance);
        set(&mut t.failure.insertion_height_tolerance, self.insertion_tolerance);
        set(&mut t.failure.tangle_prob_raw, self.tangle_raw);
        set(&mut t.failure.tangle_prob_swept, self.tangle_swept);
        set(&mut t.failure.alignment_snap_prob, self.snap_prob);
        if self.no_alignment {
            t.enable_alignment = false;
        }
    }
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Experiment config JSON (`trials`, `seed`, `trial`); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    ablation: Option<AblationArg>,
    #[command(flatten)]
    trial: TrialFlags,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::config(anyhow::anyhow!("{e}"))
}

fn experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, Failure> {
    run_experiment(cfg).map_err(invalid)
}

pub fn run(args: SimulateArgs) -> CmdResult {
    let mut cfg: ExperimentConfig = load_config(args.config.as_deref())?;
    set(&mut cfg.trials, args.trials);
    set(&mut cfg.seed, args.seed);
    args.trial.apply(&mut cfg.trial);
    if let Some(a) = args.ablation {
        cfg.trial = cfg.trial.with_ablation(a.into());
    }
    let report = experiment(&cfg)?;
    write_json(&report, args.out.as_ref())?;
    if args.out.is_some() {
        let m = &report.metrics;
        println!(
            "{} trials: {:.2} ± {:.2} sutures, closure {:.1}%, errors A{} T{} I{} M{}",
            m.trials,
            m.avg_sutures,
            m.std_sutures,
            m.wound_gap_closure_rate,
            m.errors.a,
            m.errors.t,
            m.errors.i,
            m.errors.m
        );
    }
    Ok(())
}

#[derive(Args)]
pub struct BenchmarkArgs {
    /// Trial config JSON; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trials per ablation arm.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Needle scenes for the estimator comparison.
    #[arg(long, default_value_t = 200)]
    scenes: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    trial: TrialFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct PairedGap {
    /// Mean of full minus arm sutures over paired seeds.
    mean_gap: f64,
    /// Paired t statistic with `df` degrees of freedom.
    t: f64,
    df: usize,
}

#[derive(Serialize)]
struct EstimatorComparison {
    scenes: usize,
    threshold_mm: f64,
    filtered_success_rate: f64,
    single_shot_success_rate: f64,
}

#[derive(Serialize)]
struct BenchmarkReport {
    estimator: EstimatorComparison,
    full: MetricsReport,
    no_ekf: MetricsReport,
    no_thread: MetricsReport,
    gap_no_ekf: PairedGap,
    gap_no_thread: PairedGap,
    /// T errors with the sweep over T errors without it.
    thread_error_ratio: f64,
}

fn paired(full: &ExperimentReport, arm: &ExperimentReport) -> PairedGap {
    let d: Vec<f64> = full
        .per_trial
        .iter()
        .zip(&arm.per_trial)
        .map(|(a, b)| a.sutures_succeeded as f64 - b.sutures_succeeded as f64)
        .collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let t = if var > 0.0 { mean / (var / n).sqrt() } else { f64::NAN };
    PairedGap {
        mean_gap: mean,
        t,
        df: d.len().saturating_sub(1),
    }
}

pub fn benchmark(args: BenchmarkArgs) -> CmdResult {
    let mut base: TrialConfig = load_config(args.config.as_deref())?;
    args.trial.apply(&mut base);
    base.validate().map_err(invalid)?;
    if args.trials < 2 || args.scenes == 0 {
        return Err(invalid("benchmark needs at least 2 trials and 1 scene"));
    }

    let threshold = base.failure.estimate_success_threshold;
    let (mut filtered, mut single) = (0usize, 0usize);
    let with_ekf = base.with_ablation(Ablation::Full);
    let without = base.with_ablation(Ablation::NoEkf);
    for k in 0..args.scenes as u64 {
        let seed = derive_seed(args.seed, k);
        filtered += usize::from(observe(&with_ekf, seed).succeeded(threshold));
        single += usize::from(observe(&without, seed).succeeded(threshold));
    }
    let rate = |c: usize| 100.0 * c as f64 / args.scenes as f64;

    let arm = |a: Ablation| {
        experiment(&ExperimentConfig {
            trials: args.trials,
            seed: args.seed,
            trial: base.with_ablation(a),
        })
    };
    let (full, no_ekf, no_thread) = (arm(Ablation::Full)?, arm(Ablation::NoEkf)?, arm(Ablation::NoThread)?);
    let report = BenchmarkReport {
        estimator: EstimatorComparison {
            scenes: args.scenes,
            threshold_mm: threshold,
            filtered_success_rate: rate(filtered),
            single_shot_success_rate: rate(single),
        },
        gap_no_ekf: paired(&full, &no_ekf),
        gap_no_thread: paired(&full, &no_thread),
        thread_error_ratio: full.metrics.errors.t as f64 / no_thread.metrics.errors.t.max(1) as f64,
        full: full.metrics,
        no_ekf: no_ekf.metrics,
        no_thread: no_thread.metrics,
    };
    write_json(&report, args.out.as_ref())
}
