//! Progressive day-by-day evaluation: per-day confusion reports, pooled
//! ROC/AUC, single-feature baselines, and cross-event transfer runs.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::ProtestEvent;
use crate::error::{Error, Result};
use crate::featmat::{FeatureId, FeatureMask, FeatureMatrix};
use crate::models::{fit_with_cutoff, ClassifierKind, FittedModel, ModelConfig};
use crate::region::RegionCode;

/// One region's scored prediction for one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionLabel {
    pub region: RegionCode,
    pub date: NaiveDate,
    pub probability: f64,
    /// 1 iff probability exceeds the model cutoff.
    pub label: u8,
}

/// Confusion counts and rates for one prediction day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyReport {
    pub date: NaiveDate,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tpr: f64,
    pub tnr: f64,
    pub accuracy: f64,
}

impl DailyReport {
    pub fn from_counts(date: NaiveDate, tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let total = tp + fp + tn + fn_;
        // a day with no actual positives (or negatives) scores a perfect
        // rate by convention
        let tpr = if tp + fn_ == 0 {
            1.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let tnr = if tn + fp == 0 {
            1.0
        } else {
            tn as f64 / (tn + fp) as f64
        };
        DailyReport {
            date,
            tp,
            fp,
            tn,
            fn_,
            tpr,
            tnr,
            accuracy: (tp + tn) as f64 / total as f64,
        }
    }
}

/// Confusion metrics for one day's predictions against the ground truth.
/// Requires exactly one prediction per region.
pub fn daily_metrics(
    predictions: &[PredictionLabel],
    truth: &BTreeSet<ProtestEvent>,
    date: NaiveDate,
    regions: &[RegionCode],
) -> Result<DailyReport> {
    let mut seen: BTreeSet<RegionCode> = BTreeSet::new();
    for p in predictions {
        if p.date != date {
            return Err(Error::Schema(format!(
                "prediction dated {} in a {} report",
                p.date, date
            )));
        }
        if !seen.insert(p.region) {
            return Err(Error::Schema(format!(
                "duplicate prediction for region {}",
                p.region
            )));
        }
    }
    for &region in regions {
        if !seen.contains(&region) {
            return Err(Error::Schema(format!(
                "missing prediction for region {region} on {date}"
            )));
        }
    }
    if seen.len() != regions.len() {
        return Err(Error::Schema(format!(
            "{} predictions for {} regions",
            seen.len(),
            regions.len()
        )));
    }

    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for p in predictions {
        let actual = truth.contains(&ProtestEvent {
            date,
            region: p.region,
        });
        match (p.label == 1, actual) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(DailyReport::from_counts(date, tp, fp, tn, fn_))
}

/// One point of the ROC sweep: predictions are positive at scores >= the
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Threshold sweep over the distinct scores (ties share a point) with
/// trapezoidal AUC. Needs at least one positive and one negative label.
pub fn roc(scores: &[(f64, u8)]) -> Result<RocCurve> {
    let positives = scores.iter().filter(|(_, y)| *y == 1).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Invalid(
            "ROC needs both classes in the scored set".into(),
        ));
    }

    let mut sorted: Vec<(f64, u8)> = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![RocPoint {
        threshold: 1.0,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        });
    }

    let mut auc = 0.0;
    for pair in points.windows(2) {
        auc += (pair[1].fpr - pair[0].fpr) * (pair[1].tpr + pair[0].tpr) / 2.0;
    }
    Ok(RocCurve { points, auc })
}

/// Independent AUC oracle: the Mann-Whitney pair statistic with half
/// credit for ties.
pub fn mann_whitney_auc(scores: &[(f64, u8)]) -> Result<f64> {
    let positives: Vec<f64> = scores.iter().filter(|(_, y)| *y == 1).map(|(s, _)| *s).collect();
    let negatives: Vec<f64> = scores.iter().filter(|(_, y)| *y == 0).map(|(s, _)| *s).collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Invalid(
            "AUC needs both classes in the scored set".into(),
        ));
    }
    let mut credit = 0.0;
    for &p in &positives {
        for &n in &negatives {
            credit += match p.total_cmp(&n) {
                std::cmp::Ordering::Greater => 1.0,
                std::cmp::Ordering::Equal => 0.5,
                std::cmp::Ordering::Less => 0.0,
            };
        }
    }
    Ok(credit / (positives.len() * negatives.len()) as f64)
}

/// Result of a progressive or transfer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub reports: Vec<DailyReport>,
    pub roc: RocCurve,
    /// Training-set size used for each prediction day, in report order.
    pub training_sizes: Vec<usize>,
}

/// The progressive protocol: for every day in `[start_date, end_date]`,
/// retrain from scratch on all strictly earlier rows, predict the day,
/// then fold the day's rows into future training data. All per-day scores
/// pool into a single ROC curve.
pub fn progressive_run(
    matrix: &FeatureMatrix,
    truth: &BTreeSet<ProtestEvent>,
    kind: ClassifierKind,
    mask: FeatureMask,
    start_date: NaiveDate,
    end_date: NaiveDate,
    cfg: &ModelConfig,
) -> Result<RunOutcome> {
    if mask.is_empty() {
        return Err(Error::Invalid("empty feature mask".into()));
    }
    let regions = matrix.regions();
    let dates: Vec<NaiveDate> = matrix
        .dates()
        .into_iter()
        .filter(|d| *d >= start_date && *d <= end_date)
        .collect();
    if dates.is_empty() {
        return Err(Error::Invalid(format!(
            "no matrix rows between {start_date} and {end_date}"
        )));
    }
    if !matrix.rows().iter().any(|r| r.date < dates[0]) {
        return Err(Error::Invalid(format!(
            "no training rows before first prediction day {}",
            dates[0]
        )));
    }

    let mut reports = Vec::new();
    let mut training_sizes = Vec::new();
    let mut pooled: Vec<(f64, u8)> = Vec::new();
    for &day in &dates {
        let (train_rows, train_labels) = matrix.project(mask, |r| r.date < day);
        training_sizes.push(train_rows.len());
        let model = fit_with_cutoff(kind, &train_rows, &train_labels, cfg)?;

        let mut predictions = Vec::with_capacity(regions.len());
        for row in matrix.rows().iter().filter(|r| r.date == day) {
            let masked: Vec<f64> = mask.indices().iter().map(|&i| row.features[i]).collect();
            let (probability, label) = model.predict(&masked)?;
            predictions.push(PredictionLabel {
                region: row.region,
                date: day,
                probability,
                label,
            });
            let actual = truth.contains(&ProtestEvent {
                date: day,
                region: row.region,
            });
            pooled.push((probability, u8::from(actual)));
        }
        reports.push(daily_metrics(&predictions, truth, day, &regions)?);
    }

    Ok(RunOutcome {
        reports,
        roc: roc(&pooled)?,
        training_sizes,
    })
}

/// Train once on all of `train`, evaluate on every day of `test`. The test
/// matrix's own labels are the ground truth.
pub fn transfer_run(
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    kind: ClassifierKind,
    mask: FeatureMask,
    cfg: &ModelConfig,
) -> Result<(RunOutcome, FittedModel)> {
    if mask.is_empty() {
        return Err(Error::Invalid("empty feature mask".into()));
    }
    if test.is_empty() {
        return Err(Error::Invalid("nothing to predict: test matrix is empty".into()));
    }
    if train.is_empty() {
        return Err(Error::Invalid("no training rows".into()));
    }

    let (train_rows, train_labels) = train.project(mask, |_| true);
    let model = fit_with_cutoff(kind, &train_rows, &train_labels, cfg)?;
    let truth = test.truth();
    let regions = test.regions();

    let mut reports = Vec::new();
    let mut pooled = Vec::new();
    let training_size = train_rows.len();
    let mut sizes = Vec::new();
    for day in test.dates() {
        let mut predictions = Vec::new();
        for row in test.rows().iter().filter(|r| r.date == day) {
            let masked: Vec<f64> = mask.indices().iter().map(|&i| row.features[i]).collect();
            let (probability, label) = model.predict(&masked)?;
            predictions.push(PredictionLabel {
                region: row.region,
                date: day,
                probability,
                label,
            });
            pooled.push((probability, row.label));
        }
        reports.push(daily_metrics(&predictions, &truth, day, &regions)?);
        sizes.push(training_size);
    }

    Ok((
        RunOutcome {
            reports,
            roc: roc(&pooled)?,
            training_sizes: sizes,
        },
        model,
    ))
}

/// Progressive runs with each feature alone, Table-A4 style.
pub fn single_feature_baselines(
    matrix: &FeatureMatrix,
    truth: &BTreeSet<ProtestEvent>,
    features: &[FeatureId],
    kind: ClassifierKind,
    start_date: NaiveDate,
    end_date: NaiveDate,
    cfg: &ModelConfig,
) -> Result<Vec<(FeatureId, RunOutcome)>> {
    if features.is_empty() {
        return Err(Error::Invalid("no baseline features requested".into()));
    }
    features
        .iter()
        .map(|&id| {
            progressive_run(
                matrix,
                truth,
                kind,
                FeatureMask::single(id),
                start_date,
                end_date,
                cfg,
            )
            .map(|outcome| (id, outcome))
        })
        .collect()
}

/// `report.json`: run metadata plus one entry per prediction day.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub classifier: String,
    pub features: String,
    pub seed: u64,
    pub auc: f64,
    pub training_sizes: Vec<usize>,
    pub days: Vec<DailyReport>,
}

impl RunReport {
    pub fn new(kind: ClassifierKind, mask: FeatureMask, seed: u64, outcome: &RunOutcome) -> Self {
        RunReport {
            classifier: kind.to_string(),
            features: mask.to_string(),
            seed,
            auc: outcome.roc.auc,
            training_sizes: outcome.training_sizes.clone(),
            days: outcome.reports.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("serializing report: {e}")))?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }
}

/// `roc.csv`: threshold/fpr/tpr rows plus a trailing `# auc=` comment.
pub fn write_roc_csv(curve: &RocCurve, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "threshold,fpr,tpr")?;
    for p in &curve.points {
        writeln!(out, "{:.6},{:.6},{:.6}", p.threshold, p.fpr, p.tpr)?;
    }
    writeln!(out, "# auc={:.6}", curve.auc)?;
    out.flush()?;
    Ok(())
}

/// Render reports as the Tables 2/3-shaped grid: one column per day,
/// TPR/TNR/accuracy rows.
pub fn format_report_grid(reports: &[DailyReport]) -> String {
    let mut header = String::from("measure");
    for r in reports {
        header.push_str(&format!(",{}", r.date));
    }
    let mut tpr = String::from("tpr");
    let mut tnr = String::from("tnr");
    let mut acc = String::from("accuracy");
    for r in reports {
        tpr.push_str(&format!(",{:.2}%", r.tpr * 100.0));
        tnr.push_str(&format!(",{:.2}%", r.tnr * 100.0));
        acc.push_str(&format!(",{:.2}%", r.accuracy * 100.0));
    }
    format!("{header}\n{tpr}\n{tnr}\n{acc}\n")
}
