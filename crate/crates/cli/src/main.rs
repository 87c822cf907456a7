//! `stitchkit`: scene generation, needle estimation, suture planning and
//! Monte-Carlo simulation from the command line.
//!
//! Exit status is 0 on success, 2 when the configuration or arguments are
//! invalid and 1 when a valid run fails.

mod estimate;
mod gen;
mod plan;
mod simulate;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "stitchkit",
    version,
    about = "Needle estimation, suture planning and trial simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic scene bundle: needle clouds, mask, depth, wound clouds and oracle.
    Gen(gen::GenArgs),
    /// Estimate a needle pose from one or more segmented needle clouds.
    Estimate(estimate::EstimateArgs),
    /// Build a wound model from three clouds and plan the sutures.
    Plan(plan::PlanArgs),
    /// Run seeded suturing trials and write the metrics report.
    Simulate(simulate::SimulateArgs),
    /// Compare the ablation arms and the filter against single-shot estimates.
    Benchmark(simulate::BenchmarkArgs),
}

/// A failed command, split by exit status.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

impl Failure {
    pub fn config(e: impl Into<anyhow::Error>) -> Self {
        Failure::Config(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

pub type CmdResult = Result<(), Failure>;

/// Reads a JSON config, or the default when no path is given. Unknown or
/// malformed content is a configuration error.
pub fn load_config<C: DeserializeOwned + Default>(path: Option<&Path>) -> Result<C, Failure> {
    match path {
        None => Ok(C::default()),
        Some(p) => read_json(p),
    }
}

pub fn read_json<C: DeserializeOwned>(path: &Path) -> Result<C, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::config)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::config)
}

/// Pretty JSON to `out`, or to stdout without one.
pub fn write_json<V: Serialize>(value: &V, out: Option<&PathBuf>) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).context("serializing output")?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Replaces `target` when the flag was given.
pub fn set<T>(target: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *target = v;
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen::run(a),
        Command::Estimate(a) => estimate::run(a),
        Command::Plan(a) => plan::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Benchmark(a) => simulate::benchmark(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("stitchkit: configuration error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("stitchkit: {e:#}");
            ExitCode::from(1)
        }
    }
}
