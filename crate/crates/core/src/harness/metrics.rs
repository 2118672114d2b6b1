use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

fn fixed4<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:.4}"))
}

/// Evaluation result of one policy at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub env: String,
    pub mode: String,
    /// Training dialogues seen before evaluation.
    pub checkpoint: u64,
    #[serde(serialize_with = "fixed4")]
    pub success_rate: f64,
    #[serde(serialize_with = "fixed4")]
    pub avg_extrinsic_reward: f64,
    #[serde(serialize_with = "fixed4")]
    pub avg_turns: f64,
}

/// π_i loss after one training dialogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub seed: u64,
    pub mode: String,
    pub dialogue: u64,
    /// Mean loss of the dialogue's training batches.
    pub batch_loss: Option<f64>,
    /// Loss on a fresh replay sample.
    pub replay_loss: Option<f64>,
}

/// One cell of a noise sweep, averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(serialize_with = "fixed4")]
    pub error_rate: f64,
    pub mode: String,
    pub checkpoint: u64,
    pub seeds: usize,
    #[serde(serialize_with = "fixed4")]
    pub success_mean: f64,
    #[serde(serialize_with = "fixed4")]
    pub success_std: f64,
    #[serde(serialize_with = "fixed4")]
    pub reward_mean: f64,
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean success rate per (mode, checkpoint) over seeds, sorted by mode then checkpoint.
pub fn success_by_checkpoint(rows: &[MetricsRow]) -> Vec<(String, u64, f64)> {
    let mut groups: std::collections::BTreeMap<(String, u64), Vec<f64>> = Default::default();
    for r in rows {
        groups
            .entry((r.mode.clone(), r.checkpoint))
            .or_default()
            .push(r.success_rate);
    }
    groups
        .into_iter()
        .map(|((mode, cp), xs)| (mode, cp, mean_std(&xs).0))
        .collect()
}
