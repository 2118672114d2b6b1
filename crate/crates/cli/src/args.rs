use std::net::IpAddr;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use feudalgain::harness::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(
    name = "feudalgain",
    version,
    about = "Feudal dialogue policies with information-gain rewards"
)]
#[command(args_conflicts_with_subcommands = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub serve: ServeArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one policy variant per seed and record learning curves.
    Train(RunArgs),
    /// Evaluate a stored checkpoint greedily.
    Evaluate(EvaluateArgs),
    /// Train every ablation variant on the same environment and seeds.
    Ablate(RunArgs),
    /// Compare FeudalGain and Feudal+NN across semantic error rates.
    Sweep(SweepArgs),
    /// Render SVG plots from the CSV files of a run directory.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Start the trial HTTP service.
    #[arg(long)]
    pub serve: bool,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Policy to serve: `id=path`, a checkpoint path, `scripted-oracle` or
    /// `always-bye`. Repeatable.
    #[arg(long = "checkpoint")]
    pub checkpoints: Vec<String>,
    /// Domain for the built-in policies.
    #[arg(long, default_value = "cr")]
    pub domain: String,
    /// Append-only questionnaire log.
    #[arg(long, default_value = "trial_log.jsonl")]
    pub log: PathBuf,
    /// Template file replacing the bundled templates.
    #[arg(long)]
    pub templates: Option<PathBuf>,
}

/// Experiment settings: a TOML file with individual flags layered on top.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// env1 .. env6
    #[arg(long)]
    pub env: Option<String>,
    /// cr or sfr
    #[arg(long)]
    pub domain: Option<String>,
    /// feudalgain, feudal, feudal-nn or feudal-nn-ig
    #[arg(long)]
    pub mode: Option<String>,
    /// Run a single seed.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Run seeds 0..N.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Information-gain threshold.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub no_pass: bool,
    #[arg(long)]
    pub no_ig: bool,
    #[arg(long)]
    pub no_masks: bool,
    /// Semantic error rate replacing the environment's.
    #[arg(long)]
    pub error_rate: Option<f64>,
    /// Training dialogues per seed.
    #[arg(long)]
    pub dialogues: Option<u64>,
    #[arg(long)]
    pub eval_every: Option<u64>,
    #[arg(long)]
    pub eval_dialogues: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Re-run seeds whose results already exist.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub checkpoint_in: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Metrics CSV to write; defaults to `<output>/evaluation.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.15, 0.30])]
    pub rates: Vec<f64>,
    /// Dialogue counts to evaluate at; defaults to the configured schedule.
    #[arg(long, value_delimiter = ',')]
    pub at: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, default_value = "runs")]
    pub input: PathBuf,
    /// Defaults to `<input>/plots`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    /// Defaults, then the config file, then flags.
    pub fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)
                .with_context(|| format!("reading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        self.apply(&mut c);
        c.validate()?;
        Ok(c)
    }

    pub fn apply(&self, c: &mut ExperimentConfig) {
        if let Some(v) = &self.env {
            c.env = v.clone();
        }
        if let Some(v) = &self.domain {
            c.domain = v.clone();
        }
        if let Some(v) = &self.mode {
            c.mode = v.clone();
        }
        if let Some(s) = self.seed {
            c.seeds = vec![s];
        }
        if let Some(n) = self.seeds {
            c.seeds = (0..n).collect();
        }
        if let Some(d) = self.delta {
            c.delta = d;
        }
        c.no_pass |= self.no_pass;
        c.no_ig |= self.no_ig;
        c.no_masks |= self.no_masks;
        if self.error_rate.is_some() {
            c.error_rate = self.error_rate;
        }
        if let Some(n) = self.dialogues {
            c.train_dialogues = n;
        }
        if let Some(n) = self.eval_every {
            c.eval_every = n;
        }
        if let Some(n) = self.eval_dialogues {
            c.eval_dialogues = n;
        }
        if let Some(p) = &self.output {
            c.output_dir = p.clone();
        }
        c.force |= self.force;
    }
}
