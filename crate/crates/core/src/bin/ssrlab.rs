use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ssrlab::agents::AlgorithmId;
use ssrlab::harness::{run_experiment, EnvKind, ExperimentConfig};
use ssrlab::Error;

#[derive(Parser)]
#[command(name = "ssrlab", version, about = "Tabular exploration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write regret.csv, config.json (and diagnostics.jsonl).
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_env)]
    env: Option<EnvKind>,
    /// Deep-sea size.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mask_seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    goal_reward: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    states: Option<usize>,
    #[arg(long)]
    actions: Option<usize>,
    #[arg(long)]
    env_seed: Option<u64>,
    /// ssr_ho, ssr_be, rlsvi_ho, rlsvi_be or ucbvi_ho.
    #[arg(long)]
    algo: Option<AlgorithmId>,
    #[arg(long)]
    episodes: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise_scale: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-episode diagnostics.
    #[arg(long)]
    diagnostics: bool,
    /// Leave RLSVI values unclipped.
    #[arg(long)]
    no_rlsvi_clip: bool,
}

fn parse_env(s: &str) -> Result<EnvKind, String> {
    match s {
        "deep_sea" => Ok(EnvKind::DeepSea),
        "random" => Ok(EnvKind::Random),
        other => Err(format!(
            "unknown env {other:?} (expected deep_sea or random)"
        )),
    }
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field { c.$field = v; }
            )*};
        }
        take!(
            env,
            n,
            mask_seed,
            goal_reward,
            horizon,
            states,
            actions,
            env_seed,
            algo,
            episodes,
            trials,
            seed
        );
        if self.noise_scale.is_some() {
            c.noise_scale = self.noise_scale;
        }
        if self.out.is_some() {
            c.out = self.out;
        }
        c.diagnostics |= self.diagnostics;
        if self.no_rlsvi_clip {
            c.rlsvi_clip = false;
        }
        if c.out.is_none() {
            return Err(Error::Config(
                "an output directory is required (--out)".into(),
            ));
        }
        c.validate()?;
        Ok(c)
    }
}

fn exit_code(err: &Error) -> ExitCode {
    match err {
        Error::Io { .. } => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    let Cli { command } = Cli::parse();
    let Command::Run(args) = command;
    let config = match args.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match run_experiment(&config) {
        Ok(result) => {
            let last = result.curve.mean.last().copied().unwrap_or(0.0);
            println!(
                "{} on {:?}: {} trials x {} episodes, mean final regret {last:.4}",
                config.algo, config.env, config.trials, config.episodes
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
