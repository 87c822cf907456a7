//! Runs the three ablation arms on paired seeds and prints their metrics.
//!
//! `cargo run --release --example calibrate -- [trials] [seed] [failure-params-json]`

use stitchkit_core::harness::{run_experiment, Ablation, ExperimentConfig, TrialConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);
    let mut base = TrialConfig::default();
    if let Some(json) = args.next() {
        base.failure = serde_json::from_str(&json).expect("failure params JSON");
    }

    let run = |ablation| {
        let cfg = ExperimentConfig {
            trials,
            seed,
            trial: base.with_ablation(ablation),
        };
        run_experiment(&cfg).expect("valid default config")
    };
    let full = run(Ablation::Full);
    for (name, arm) in [
        ("full", &full),
        ("no-ekf", &run(Ablation::NoEkf)),
        ("no-thread", &run(Ablation::NoThread)),
    ] {
        let m = &arm.metrics;
        println!(
            "{name:>9}: sutures {:.2} ± {:.2}  single {:.1}%  closure {:.1}%  A {} T {} I {} M {}  estimates {:.1}%",
            m.avg_sutures,
            m.std_sutures,
            m.single_suture_success_rate,
            m.wound_gap_closure_rate,
            m.errors.a,
            m.errors.t,
            m.errors.i,
            m.errors.m,
            m.needle_estimate_success_rate,
        );
        if name != "full" {
            let d: Vec<f64> = full
                .per_trial
                .iter()
                .zip(&arm.per_trial)
                .map(|(a, b)| a.sutures_succeeded as f64 - b.sutures_succeeded as f64)
                .collect();
            let n = d.len() as f64;
            let mean = d.iter().sum::<f64>() / n;
            let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            println!("           paired gap {mean:.2}, t = {:.2}", mean / (sd / n.sqrt()));
        }
    }
}
