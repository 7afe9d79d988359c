//! `evaluate` compares prediction and ground-truth depth directories;
//! `predict` fits a non-learned baseline on a feature directory's training
//! split and writes predictions for its test split.

use std::path::Path;

use anyhow::Context;
use depthcue::evaluate::{
    aggregate_reports, compute_metrics, AggregateReport, Aggregation, Baseline, BaselineKind,
    ValidMask, CSV_HEADER,
};
use depthcue::imgcore::{load_depth, load_pair};
use depthcue::{io, DepthConvention, DepthMap, Error, SamplePair};
use rayon::prelude::*;
use serde::Serialize;

use crate::fsutil::{csv_bytes, json_bytes, list_pngs};

/// Predictions are floored at the smallest positive 16-bit depth so that
/// log and ratio metrics stay finite.
pub const PRED_FLOOR: f64 = 1.0 / 65535.0;

#[derive(Debug, Clone)]
pub struct EvaluateConfig<'a> {
    pub pred_dir: &'a Path,
    pub gt_dir: &'a Path,
    pub out: &'a Path,
    pub aggregation: Aggregation,
    /// First column of `report.csv`.
    pub label: &'a str,
    pub jobs: usize,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    label: &'a str,
    image_count: usize,
    aggregate: &'a AggregateReport,
}

fn evaluate_one(
    pred_path: &Path,
    gt_path: &Path,
) -> depthcue::Result<depthcue::evaluate::MetricsReport> {
    let gt = load_depth(gt_path)?.to_unit();
    let pred = load_depth(pred_path)?.to_unit();
    let pred = DepthMap::new(
        pred.width(),
        pred.height(),
        DepthConvention::UnitReal,
        pred.values().iter().map(|v| v.max(PRED_FLOOR)).collect(),
    )?;
    compute_metrics(&pred, &gt, &ValidMask::from_gt(&gt))
}

pub fn evaluate(cfg: &EvaluateConfig) -> anyhow::Result<AggregateReport> {
    let preds = list_pngs(cfg.pred_dir)?;
    let gts = list_pngs(cfg.gt_dir)?;
    if let Some(id) = gts.keys().find(|id| !preds.contains_key(*id)) {
        return Err(Error::IdMismatch(format!(
            "{id} has no prediction in {}",
            cfg.pred_dir.display()
        ))
        .into());
    }
    if let Some(id) = preds.keys().find(|id| !gts.contains_key(*id)) {
        return Err(Error::IdMismatch(format!(
            "{id} has no ground truth in {}",
            cfg.gt_dir.display()
        ))
        .into());
    }
    if gts.is_empty() {
        return Err(
            Error::EmptyDataset(format!("no depth maps in {}", cfg.gt_dir.display())).into(),
        );
    }

    let ids: Vec<&String> = gts.keys().collect();
    let results: Vec<_> = crate::with_pool(cfg.jobs, || {
        ids.par_iter()
            .map(|id| evaluate_one(&preds[*id], &gts[*id]))
            .collect()
    })?;
    let mut reports = Vec::with_capacity(ids.len());
    for (id, r) in ids.iter().zip(results) {
        reports.push(r.with_context(|| format!("image {id}"))?);
    }
    let aggregate = aggregate_reports(&reports, cfg.aggregation)?;

    let rows: Vec<Vec<String>> = ids
        .iter()
        .zip(&reports)
        .map(|(id, r)| {
            let mut row = vec![id.to_string()];
            row.extend(r.values().iter().map(|v| format!("{v:.6}")));
            row.push(r.pixel_count.to_string());
            row
        })
        .collect();
    let per_image = csv_bytes(
        &["id", "a1", "a2", "a3", "log10", "rel", "rmse", "pixels"],
        &rows,
    )?;
    io::write_atomic(&cfg.out.join("per_image.csv"), &per_image)?;
    let summary = format!("{CSV_HEADER}\n{}\n", aggregate.csv_row(cfg.label));
    io::write_atomic(&cfg.out.join("report.csv"), summary.as_bytes())?;
    let report = ReportFile {
        label: cfg.label,
        image_count: ids.len(),
        aggregate: &aggregate,
    };
    io::write_atomic(&cfg.out.join("report.json"), &json_bytes(&report)?)?;
    eprintln!(
        "evaluate: {} images, a1 {:.2}, rmse {:.4}",
        ids.len(),
        aggregate.report.a1,
        aggregate.report.rmse
    );
    Ok(aggregate)
}

fn load_split(dir: &Path) -> depthcue::Result<Vec<SamplePair>> {
    list_pngs(&dir.join("images"))?
        .into_iter()
        .map(|(id, path)| load_pair(&path, &dir.join("depths").join(format!("{id}.png"))))
        .collect()
}

/// Fits `kind` on `<feature_dir>/train` and writes `<out>/pred/<id>.png`
/// and `<out>/gt/<id>.png` for every image of `<feature_dir>/test`.
pub fn predict(
    feature_dir: &Path,
    out: &Path,
    kind: BaselineKind,
    jobs: usize,
) -> anyhow::Result<usize> {
    let train = load_split(&feature_dir.join("train")).context("loading training split")?;
    if train.is_empty() {
        return Err(Error::EmptyDataset("training split has no images".into()).into());
    }
    let mut model = Baseline::new(kind);
    model.fit(&train)?;
    drop(train);

    let test_dir = feature_dir.join("test");
    let ids: Vec<(String, std::path::PathBuf)> =
        list_pngs(&test_dir.join("images"))?.into_iter().collect();
    let results: Vec<depthcue::Result<()>> = crate::with_pool(jobs, || {
        ids.par_iter()
            .map(|(id, path)| {
                let pair = load_pair(path, &test_dir.join("depths").join(format!("{id}.png")))?;
                let pred = model.predict(&pair.rgb)?;
                io::write_depth_png(&out.join("pred").join(format!("{id}.png")), &pred)?;
                io::write_depth_png(
                    &out.join("gt").join(format!("{id}.png")),
                    &pair.depth.to_unit(),
                )
            })
            .collect()
    })?;
    for ((id, _), r) in ids.iter().zip(results) {
        r.with_context(|| format!("image {id}"))?;
    }
    eprintln!("predict: {} test images -> {}", ids.len(), out.display());
    Ok(ids.len())
}
