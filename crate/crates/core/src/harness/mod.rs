//! Training, evaluation and experiment orchestration.
//!
//! Every training dialogue `i` of seed `s` draws its goal, user behaviour,
//! policy exploration and learner sampling from separate streams keyed by
//! `(s, i)`, so variants trained with the same seed see the same goals and
//! reruns are bit-identical. Evaluation uses its own streams, giving every
//! checkpoint the same evaluation goals.

mod config;
mod metrics;
mod train;

pub use config::ExperimentConfig;
pub use metrics::{
    mean_std, read_csv, success_by_checkpoint, write_csv, LossRow, MetricsRow, SweepRow,
};
pub use train::{
    ablation_variants, env_label, evaluate_checkpoint, evaluate_policy, run_ablation_suite,
    run_noise_sweep, train, train_seed, EvalSummary, SeedRun, TrainReport,
};
