use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::metrics::{mean_std, read_csv, write_csv, LossRow, MetricsRow, SweepRow};
use crate::dialogue::{run_dialogue_with_goal, DialogueConfig, DialoguePolicy, SelectionMode};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::feudal::{Checkpoint, PolicySet, Variant};
use crate::rng::{stream, Stream};
use crate::usersim::{sample_goal, EnvProfile};

/// Aggregate of a batch of evaluation dialogues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    pub success_rate: f64,
    pub avg_extrinsic_reward: f64,
    pub avg_turns: f64,
}

/// Runs `n` greedy dialogues with fresh goals from the evaluation streams of
/// `seed`. The same `(seed, n)` always yields the same goals.
pub fn evaluate_policy(
    policy: &mut dyn DialoguePolicy,
    env: &EnvProfile,
    domain: &Domain,
    dcfg: &DialogueConfig,
    n: u64,
    seed: u64,
) -> Result<EvalSummary> {
    let (mut successes, mut reward, mut turns) = (0u64, 0.0, 0usize);
    for j in 0..n {
        let goal = sample_goal(
            &domain.ontology,
            &domain.db,
            &mut stream(seed, Stream::EvalGoals, j),
        );
        let ep = run_dialogue_with_goal(
            policy,
            env,
            domain,
            goal,
            &mut stream(seed, Stream::EvalUser, j),
            &mut stream(seed, Stream::EvalPolicy, j),
            dcfg,
            SelectionMode::Eval,
        )?;
        successes += ep.success as u64;
        reward += ep.total_reward();
        turns += ep.len();
    }
    let n = n.max(1) as f64;
    Ok(EvalSummary {
        success_rate: successes as f64 / n,
        avg_extrinsic_reward: reward / n,
        avg_turns: turns as f64 / n,
    })
}

/// Everything one training seed produced.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    pub losses: Vec<LossRow>,
    pub policy: PolicySet,
}

/// Label of the configured environment, marking overridden error rates
/// and masks.
pub fn env_label(cfg: &ExperimentConfig) -> Result<String> {
    let env = cfg.env_profile()?;
    let mut label = env.to_string();
    if cfg.error_rate.is_some() {
        label.push_str(&format!("-e{:.2}", env.semantic_error_rate));
    }
    if cfg.no_masks {
        label.push_str("-nomask");
    }
    Ok(label)
}

/// Trains one seed, evaluating after each dialogue count in `checkpoints`.
pub fn train_seed(cfg: &ExperimentConfig, seed: u64, checkpoints: &[u64]) -> Result<SeedRun> {
    let env = cfg.env_profile()?;
    let domain = cfg.load_domain()?;
    let variant = cfg.variant()?;
    let dcfg = cfg.dialogue_config();
    let mode = variant.label();
    let env_name = env_label(cfg)?;
    let mut policy = PolicySet::new(
        variant,
        cfg.policy_config(),
        &domain,
        &mut stream(seed, Stream::Init, 0),
    )?;
    let last = checkpoints.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::new();
    let mut losses = Vec::new();
    for i in 0..last {
        let goal = sample_goal(
            &domain.ontology,
            &domain.db,
            &mut stream(seed, Stream::Goals, i),
        );
        let ep = run_dialogue_with_goal(
            &mut policy,
            &env,
            &domain,
            goal,
            &mut stream(seed, Stream::User, i),
            &mut stream(seed, Stream::Policy, i),
            &dcfg,
            SelectionMode::Train,
        )?;
        let mut learn_rng = stream(seed, Stream::Learn, i);
        let stats = policy
            .learn(&ep, &domain, env.action_masks, &mut learn_rng)
            .map_err(|e| Error::Mode(format!("seed {seed}, dialogue {i}: {e}")))?;
        if cfg.loss_every > 0 && (i + 1) % cfg.loss_every == 0 {
            losses.push(LossRow {
                seed,
                mode: mode.clone(),
                dialogue: i + 1,
                batch_loss: stats.pi_i_loss,
                replay_loss: policy.pi_i_replay_loss(&mut learn_rng)?,
            });
        }
        if checkpoints.contains(&(i + 1)) {
            let s = evaluate_policy(&mut policy, &env, &domain, &dcfg, cfg.eval_dialogues, seed)?;
            log::info!(
                "{mode} {env_name} seed {seed}: {} dialogues, success {:.3}, reward {:.2}",
                i + 1,
                s.success_rate,
                s.avg_extrinsic_reward
            );
            rows.push(MetricsRow {
                seed,
                env: env_name.clone(),
                mode: mode.clone(),
                checkpoint: i + 1,
                success_rate: s.success_rate,
                avg_extrinsic_reward: s.avg_extrinsic_reward,
                avg_turns: s.avg_turns,
            });
        }
    }
    Ok(SeedRun {
        seed,
        rows,
        losses,
        policy,
    })
}

fn run_stem(mode: &str, env: &str, seed: u64) -> String {
    format!("{mode}_{env}_seed{seed}")
}

/// Paths written by a training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub rows: Vec<MetricsRow>,
    pub metrics_path: PathBuf,
    pub checkpoints: Vec<PathBuf>,
}

/// Trains every configured seed (in parallel), writing per-seed metrics,
/// loss logs and final checkpoints under `output_dir`, then the merged
/// `metrics.csv`. Seeds with existing metrics are skipped unless `force`.
pub fn train(cfg: &ExperimentConfig) -> Result<TrainReport> {
    train_into(cfg, &cfg.output_dir.join("metrics.csv"))
}

fn train_into(cfg: &ExperimentConfig, merged: &Path) -> Result<TrainReport> {
    cfg.validate()?;
    let mode = cfg.variant()?.label();
    let env = env_label(cfg)?;
    let out = &cfg.output_dir;
    let checkpoints = cfg.checkpoints();
    let per_seed: Vec<Result<(Vec<MetricsRow>, PathBuf)>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let stem = run_stem(&mode, &env, seed);
            let metrics = out.join("seeds").join(format!("{stem}.csv"));
            let ckpt = out.join("checkpoints").join(format!("{stem}.json"));
            if metrics.exists() && !cfg.force {
                log::info!("{} exists; skipping seed {seed}", metrics.display());
                return Ok((read_csv(&metrics)?, ckpt));
            }
            let run = train_seed(cfg, seed, &checkpoints)?;
            Checkpoint::from(&run.policy).save(&ckpt)?;
            if cfg.loss_every > 0 {
                write_csv(out.join("loss").join(format!("{stem}.csv")), &run.losses)?;
            }
            write_csv(&metrics, &run.rows)?;
            Ok((run.rows, ckpt))
        })
        .collect();
    let mut rows = Vec::new();
    let mut ckpts = Vec::new();
    for r in per_seed {
        let (r, c) = r?;
        rows.extend(r);
        ckpts.push(c);
    }
    write_csv(merged, &rows)?;
    Ok(TrainReport {
        rows,
        metrics_path: merged.to_path_buf(),
        checkpoints: ckpts,
    })
}

/// Greedy evaluation of a stored checkpoint; no learning.
pub fn evaluate_checkpoint(
    checkpoint: &Checkpoint,
    env: &EnvProfile,
    domain: &Domain,
    dcfg: &DialogueConfig,
    n: u64,
    seed: u64,
) -> Result<MetricsRow> {
    let mut policy = checkpoint.to_policy(domain)?;
    let s = evaluate_policy(policy.as_mut(), env, domain, dcfg, n, seed)?;
    let checkpoint_dialogues = match checkpoint {
        Checkpoint::Learned(p) => p.dialogues,
        _ => 0,
    };
    Ok(MetricsRow {
        seed,
        env: env.to_string(),
        mode: checkpoint.label(),
        checkpoint: checkpoint_dialogues,
        success_rate: s.success_rate,
        avg_extrinsic_reward: s.avg_extrinsic_reward,
        avg_turns: s.avg_turns,
    })
}

/// The variants compared in the ablation study.
pub fn ablation_variants() -> [Variant; 4] {
    [
        Variant::FEUDALGAIN,
        Variant::FEUDAL_NN,
        Variant::FEUDAL,
        Variant::FEUDAL.without_pass(),
    ]
}

/// Trains every ablation variant on the configured environment with the
/// same seeds (hence the same training goals) and writes `ablation.csv`.
pub fn run_ablation_suite(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    let mut rows = Vec::new();
    for v in ablation_variants() {
        let mut c = cfg.clone();
        c.mode = v.label();
        c.no_pass = false;
        c.no_ig = false;
        let merged = cfg.output_dir.join(format!("metrics_{}.csv", v.label()));
        rows.extend(train_into(&c, &merged)?.rows);
    }
    write_csv(cfg.output_dir.join("ablation.csv"), &rows)?;
    Ok(rows)
}

/// FeudalGain against Feudal+NN for each semantic error rate, evaluated
/// after each dialogue count in `checkpoints`. Writes `sweep.csv`.
pub fn run_noise_sweep(
    cfg: &ExperimentConfig,
    rates: &[f64],
    checkpoints: &[u64],
) -> Result<Vec<SweepRow>> {
    if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::Config(format!("error rate {r} outside [0, 1]")));
    }
    if checkpoints.is_empty() {
        return Err(Error::Config(
            "noise sweep needs at least one checkpoint".into(),
        ));
    }
    let mut out = Vec::new();
    for &rate in rates {
        for v in [Variant::FEUDALGAIN, Variant::FEUDAL_NN] {
            let mut c = cfg.clone();
            c.mode = v.label();
            c.no_pass = false;
            c.no_ig = false;
            c.error_rate = Some(rate);
            c.validate()?;
            let runs: Vec<Result<SeedRun>> = c
                .seeds
                .par_iter()
                .map(|&seed| train_seed(&c, seed, checkpoints))
                .collect();
            let runs: Vec<SeedRun> = runs.into_iter().collect::<Result<_>>()?;
            for &cp in checkpoints {
                let cells: Vec<&MetricsRow> = runs
                    .iter()
                    .flat_map(|r| r.rows.iter())
                    .filter(|r| r.checkpoint == cp)
                    .collect();
                let succ: Vec<f64> = cells.iter().map(|r| r.success_rate).collect();
                let rew: Vec<f64> = cells.iter().map(|r| r.avg_extrinsic_reward).collect();
                let (success_mean, success_std) = mean_std(&succ);
                out.push(SweepRow {
                    error_rate: rate,
                    mode: v.label(),
                    checkpoint: cp,
                    seeds: cells.len(),
                    success_mean,
                    success_std,
                    reward_mean: mean_std(&rew).0,
                });
            }
        }
    }
    write_csv(cfg.output_dir.join("sweep.csv"), &out)?;
    Ok(out)
}
