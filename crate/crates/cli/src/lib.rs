//! Command-line front end for training, evaluating and serving policies.

pub mod args;
pub mod plot;

use std::fs;
use std::net::SocketAddr;
use std::path::Path;

use anyhow::{bail, Context, Result};
use feudalgain::feudal::Checkpoint;
use feudalgain::harness::{
    evaluate_checkpoint, run_ablation_suite, run_noise_sweep, success_by_checkpoint, train,
    write_csv, ExperimentConfig, MetricsRow,
};
use feudalgain_service::{load_policy, Templates, TrialService};

pub use args::{Cli, Command};

fn print_curve(rows: &[MetricsRow]) {
    for (mode, cp, s) in success_by_checkpoint(rows) {
        println!("{mode:>16} {cp:>6} dialogues  success {s:.3}");
    }
}

fn copy_checkpoint(from: &Path, to: &Path) -> Result<()> {
    if let Some(dir) = to.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::copy(from, to)
        .with_context(|| format!("copying {} to {}", from.display(), to.display()))?;
    Ok(())
}

pub fn run_train(run: &args::RunArgs) -> Result<()> {
    if run.checkpoint_in.is_some() {
        bail!("train always starts from fresh parameters; use `evaluate --checkpoint-in`");
    }
    let cfg = run.config()?;
    let report = train(&cfg)?;
    print_curve(&report.rows);
    println!("metrics: {}", report.metrics_path.display());
    if let Some(out) = &run.checkpoint_out {
        if report.checkpoints.len() > 1 {
            log::warn!("several seeds trained; exporting seed {}", cfg.seeds[0]);
        }
        copy_checkpoint(&report.checkpoints[0], out)?;
        println!("checkpoint: {}", out.display());
    }
    Ok(())
}

/// Evaluates `--checkpoint-in` once per configured seed.
pub fn run_evaluate(a: &args::EvaluateArgs) -> Result<Vec<MetricsRow>> {
    let cfg: ExperimentConfig = a.run.config()?;
    let path = a
        .run
        .checkpoint_in
        .as_ref()
        .context("evaluate needs --checkpoint-in")?;
    let checkpoint = Checkpoint::load(path)?;
    let env = cfg.env_profile()?;
    let domain = cfg.load_domain()?;
    let dcfg = cfg.dialogue_config();
    let rows = cfg
        .seeds
        .iter()
        .map(|&seed| {
            evaluate_checkpoint(&checkpoint, &env, &domain, &dcfg, cfg.eval_dialogues, seed)
        })
        .collect::<feudalgain::Result<Vec<_>>>()?;
    for r in &rows {
        println!(
            "seed {:>3}  success {:.3}  reward {:.2}  turns {:.2}",
            r.seed, r.success_rate, r.avg_extrinsic_reward, r.avg_turns
        );
    }
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| cfg.output_dir.join("evaluation.csv"));
    write_csv(&out, &rows)?;
    println!("metrics: {}", out.display());
    Ok(rows)
}

pub fn run_ablate(run: &args::RunArgs) -> Result<()> {
    let cfg = run.config()?;
    let rows = run_ablation_suite(&cfg)?;
    print_curve(&rows);
    println!("metrics: {}", cfg.output_dir.join("ablation.csv").display());
    Ok(())
}

pub fn run_sweep(a: &args::SweepArgs) -> Result<()> {
    let cfg = a.run.config()?;
    let at = if a.at.is_empty() {
        cfg.checkpoints()
    } else {
        a.at.clone()
    };
    for r in run_noise_sweep(&cfg, &a.rates, &at)? {
        println!(
            "e={:.2} {:>12} {:>6}  success {:.3} ± {:.3}",
            r.error_rate, r.mode, r.checkpoint, r.success_mean, r.success_std
        );
    }
    println!("metrics: {}", cfg.output_dir.join("sweep.csv").display());
    Ok(())
}

pub fn run_plot(a: &args::PlotArgs) -> Result<()> {
    let out = a.out.clone().unwrap_or_else(|| a.input.join("plots"));
    let written = plot::plot_run_dir(&a.input, &out)?;
    if written.is_empty() {
        bail!(
            "no metrics, loss or sweep CSV files under {}",
            a.input.display()
        );
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

pub fn build_service(s: &args::ServeArgs) -> Result<TrialService> {
    if s.checkpoints.is_empty() {
        bail!("--serve needs at least one --checkpoint");
    }
    let templates = s.templates.as_ref().map(Templates::load).transpose()?;
    let policies = s
        .checkpoints
        .iter()
        .map(|spec| {
            let entry = load_policy(spec, &s.domain)?;
            Ok(match &templates {
                Some(t) => entry.with_templates(t.clone()),
                None => entry,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialService::new(policies, &s.log)?)
}

pub fn run_serve(s: &args::ServeArgs) -> Result<()> {
    let service = build_service(s)?;
    let addr = SocketAddr::new(s.host, s.port);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(feudalgain_service::serve(service, addr))?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Some(Command::Train(a)) => run_train(&a),
        Some(Command::Evaluate(a)) => run_evaluate(&a).map(|_| ()),
        Some(Command::Ablate(a)) => run_ablate(&a),
        Some(Command::Sweep(a)) => run_sweep(&a),
        Some(Command::Plot(a)) => run_plot(&a),
        None if cli.serve.serve => run_serve(&cli.serve),
        None => bail!("nothing to do: pass a subcommand or --serve (see --help)"),
    }
}
