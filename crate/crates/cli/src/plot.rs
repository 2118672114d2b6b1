//! SVG plots of learning curves, π_i loss and noise sweeps.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use feudalgain::harness::{mean_std, read_csv, LossRow, MetricsRow, SweepRow};
use plotters::prelude::*;

const SIZE: (u32, u32) = (800, 500);
const LOSS_WINDOW: usize = 50;

fn colour(i: usize) -> RGBColor {
    const PALETTE: [RGBColor; 6] = [
        RGBColor(31, 119, 180),
        RGBColor(214, 39, 40),
        RGBColor(44, 160, 44),
        RGBColor(255, 127, 14),
        RGBColor(148, 103, 189),
        RGBColor(140, 86, 75),
    ];
    PALETTE[i % PALETTE.len()]
}

type Series = Vec<(String, Vec<(f64, f64)>)>;

fn line_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &Series,
    y_range: Option<(f64, f64)>,
) -> Result<()> {
    let xs = series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.0));
    let ys = series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.1));
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    let (y0, y1) = y_range.unwrap_or_else(|| {
        let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
            (a.min(y), b.max(y))
        });
        let pad = ((hi - lo) * 0.05).max(1e-6);
        (lo - pad, hi + pad)
    });
    if !x0.is_finite() || !y0.is_finite() {
        anyhow::bail!("nothing to plot for {}", path.display());
    }
    let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };

    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(55)
        .build_cartesian_2d(x0..x1, y0..y1)?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()?;
    for (i, (name, pts)) in series.iter().enumerate() {
        let c = colour(i);
        chart
            .draw_series(LineSeries::new(pts.iter().copied(), c.stroke_width(2)))?
            .label(name.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], c.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .position(SeriesLabelPosition::LowerRight)
        .draw()?;
    root.present()?;
    Ok(())
}

/// Mean success rate over seeds against training dialogues, one line per mode.
pub fn learning_curves(rows: &[MetricsRow], path: &Path, title: &str) -> Result<()> {
    let mut groups: BTreeMap<&str, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        groups
            .entry(r.mode.as_str())
            .or_default()
            .entry(r.checkpoint)
            .or_default()
            .push(r.success_rate);
    }
    let series = groups
        .into_iter()
        .map(|(mode, cps)| {
            let pts = cps
                .into_iter()
                .map(|(cp, xs)| (cp as f64, mean_std(&xs).0))
                .collect();
            (mode.to_string(), pts)
        })
        .collect();
    line_chart(
        path,
        title,
        "training dialogues",
        "success rate",
        &series,
        Some((0.0, 1.0)),
    )
}

/// Moving average of π_i's replay loss (batch loss where no replay loss was logged).
pub fn loss_curve(rows: &[LossRow], path: &Path, title: &str) -> Result<()> {
    let mut by_seed: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        if let Some(l) = r.replay_loss.or(r.batch_loss).filter(|l| l.is_finite()) {
            by_seed
                .entry(r.seed)
                .or_default()
                .push((r.dialogue as f64, l));
        }
    }
    let series = by_seed
        .into_iter()
        .map(|(seed, pts)| {
            let smoothed = pts
                .iter()
                .enumerate()
                .map(|(i, &(x, _))| {
                    let from = i.saturating_sub(LOSS_WINDOW - 1);
                    let w = &pts[from..=i];
                    (x, w.iter().map(|p| p.1).sum::<f64>() / w.len() as f64)
                })
                .collect();
            (format!("seed {seed}"), smoothed)
        })
        .collect();
    line_chart(path, title, "training dialogue", "loss", &series, None)
}

/// Final-checkpoint success rate against semantic error rate, one line per mode.
pub fn sweep_curve(rows: &[SweepRow], path: &Path) -> Result<()> {
    let last = rows.iter().map(|r| r.checkpoint).max().unwrap_or(0);
    let mut groups: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.checkpoint == last) {
        groups
            .entry(r.mode.as_str())
            .or_default()
            .push((r.error_rate, r.success_mean));
    }
    let series = groups
        .into_iter()
        .map(|(m, mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (m.to_string(), pts)
        })
        .collect();
    let title = format!("Success after {last} dialogues");
    line_chart(
        path,
        &title,
        "semantic error rate",
        "success rate",
        &series,
        Some((0.0, 1.0)),
    )
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Plots every recognised CSV under `input` into `out`; returns the SVGs written.
///
/// `metrics*.csv`, `ablation.csv` and `evaluation.csv` become learning
/// curves, `loss/*.csv` loss curves and `sweep.csv` the noise-sweep plot.
pub fn plot_run_dir(input: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    for file in csv_files(input)? {
        let name = stem(&file);
        let target = out.join(format!("{name}.svg"));
        if name == "sweep" {
            let rows: Vec<SweepRow> = read_csv(&file)?;
            if rows.is_empty() {
                continue;
            }
            sweep_curve(&rows, &target)?;
        } else if name.starts_with("metrics") || name == "ablation" || name == "evaluation" {
            let rows: Vec<MetricsRow> = read_csv(&file)?;
            if rows.is_empty() {
                continue;
            }
            let env = rows[0].env.clone();
            learning_curves(&rows, &target, &format!("{name} ({env})"))?;
        } else {
            continue;
        }
        written.push(target);
    }
    for file in csv_files(&input.join("loss"))? {
        let rows: Vec<LossRow> = read_csv(&file)?;
        if rows
            .iter()
            .all(|r| r.replay_loss.or(r.batch_loss).is_none())
        {
            continue;
        }
        let name = stem(&file);
        let target = out.join(format!("loss_{name}.svg"));
        loss_curve(&rows, &target, &format!("π_i loss: {name}"))?;
        written.push(target);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(mode: &str, seed: u64, cp: u64, s: f64) -> MetricsRow {
        MetricsRow {
            seed,
            env: "env1".into(),
            mode: mode.into(),
            checkpoint: cp,
            success_rate: s,
            avg_extrinsic_reward: 0.0,
            avg_turns: 5.0,
        }
    }

    #[test]
    fn learning_curve_svg() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.svg");
        let rows = vec![
            row("feudalgain", 0, 100, 0.4),
            row("feudalgain", 1, 100, 0.6),
            row("feudal", 0, 100, 0.2),
            row("feudalgain", 0, 200, 0.9),
            row("feudal", 0, 200, 0.5),
        ];
        learning_curves(&rows, &path, "test").unwrap();
        let svg = fs::read_to_string(&path).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("feudalgain"));
        assert!(svg.contains("success rate"));
    }

    #[test]
    fn empty_input_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(learning_curves(&[], &dir.path().join("x.svg"), "t").is_err());
    }
}
