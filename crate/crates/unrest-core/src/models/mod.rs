//! From-scratch binary classifiers and the OneR probability cutoff.
//!
//! Logistic regression (IRLS) is the primary model; Gaussian naive Bayes,
//! a gain-ratio decision tree, and a linear SVM cover the comparison runs.
//! Every fit returns the same [`FittedModel`] shape: parameters, the
//! feature standardizer, and a probability cutoff.

mod logit;
mod naive_bayes;
mod svm;
mod tree;

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use logit::{fit_logit, penalized_gradient, penalized_log_likelihood, LogitConfig};
pub use naive_bayes::{fit_naive_bayes, NbConfig};
pub use svm::{fit_linear_svm, SvmConfig};
pub use tree::{fit_tree, TreeConfig, TreeNode};

/// Which classifier family a model belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Logit,
    NaiveBayes,
    Tree,
    LinearSvm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::Logit,
        ClassifierKind::NaiveBayes,
        ClassifierKind::Tree,
        ClassifierKind::LinearSvm,
    ];
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ClassifierKind::Logit => "logit",
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::Tree => "tree",
            ClassifierKind::LinearSvm => "svm",
        };
        f.write_str(name)
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "logit" | "lr" => Ok(ClassifierKind::Logit),
            "nb" | "naive_bayes" => Ok(ClassifierKind::NaiveBayes),
            "tree" | "c45" => Ok(ClassifierKind::Tree),
            "svm" | "linear_svm" => Ok(ClassifierKind::LinearSvm),
            other => Err(Error::Invalid(format!(
                "unknown classifier {other:?}, expected logit|nb|tree|svm"
            ))),
        }
    }
}

/// Per-feature mean/std computed on training data and applied before the
/// linear models. Constant columns standardize to exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    const STD_FLOOR: f64 = 1e-9;

    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut means = vec![0.0; dim];
        let mut stds = vec![1.0; dim];
        for j in 0..dim {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            if std > Self::STD_FLOOR {
                means[j] = mean;
                stds[j] = std;
            } else {
                // degenerate column: map the constant to exactly zero
                let lo = rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
                let hi = rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
                means[j] = if lo == hi { lo } else { mean };
                stds[j] = 1.0;
            }
        }
        Standardizer { means, stds }
    }

    /// Pass-through standardizer for models fit on raw features.
    pub fn identity(dim: usize) -> Self {
        Standardizer {
            means: vec![0.0; dim],
            stds: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

/// Model parameters, tagged by kind so `model.json` is self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Logit {
        weights: Vec<f64>,
        intercept: f64,
    },
    NaiveBayes {
        priors: Vec<f64>,
        means: Vec<Vec<f64>>,
        variances: Vec<Vec<f64>>,
    },
    Tree {
        nodes: Vec<TreeNode>,
    },
    LinearSvm {
        weights: Vec<f64>,
        intercept: f64,
    },
}

/// A trained classifier plus everything needed to score new rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    #[serde(flatten)]
    pub params: ModelParams,
    pub standardizer: Standardizer,
    /// OneR probability cutoff; predictions are positive above it.
    pub cutoff: f64,
    /// False when an iterative fit hit its iteration cap.
    pub converged: bool,
}

impl FittedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.params {
            ModelParams::Logit { .. } => ClassifierKind::Logit,
            ModelParams::NaiveBayes { .. } => ClassifierKind::NaiveBayes,
            ModelParams::Tree { .. } => ClassifierKind::Tree,
            ModelParams::LinearSvm { .. } => ClassifierKind::LinearSvm,
        }
    }

    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    /// Probability of the positive class for one feature row.
    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.dim() {
            return Err(Error::Schema(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.dim()
            )));
        }
        let z = self.standardizer.transform(row);
        let p = match &self.params {
            ModelParams::Logit { weights, intercept }
            | ModelParams::LinearSvm { weights, intercept } => {
                let score: f64 = weights.iter().zip(&z).map(|(w, x)| w * x).sum::<f64>() + intercept;
                probability(score)
            }
            ModelParams::NaiveBayes {
                priors,
                means,
                variances,
            } => naive_bayes::posterior(priors, means, variances, &z),
            ModelParams::Tree { nodes } => tree::predict(nodes, &z),
        };
        Ok(p)
    }

    /// Probability and the binary label implied by the cutoff.
    pub fn predict(&self, row: &[f64]) -> Result<(f64, u8)> {
        let p = self.predict_proba(row)?;
        Ok((p, u8::from(p > self.cutoff)))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("serializing model: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("model json: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Stable logistic with output clamped inside (0, 1).
pub(crate) fn probability(score: f64) -> f64 {
    let p = if score >= 0.0 {
        1.0 / (1.0 + (-score).exp())
    } else {
        let e = score.exp();
        e / (1.0 + e)
    };
    p.clamp(1e-12, 1.0 - 1e-12)
}

/// Hyperparameters for every classifier family.
#[derive(Debug, Clone, Default)]
pub struct ModelConfig {
    pub logit: LogitConfig,
    pub naive_bayes: NbConfig,
    pub tree: TreeConfig,
    pub svm: SvmConfig,
}

pub(crate) fn validate_training_input(rows: &[Vec<f64>], labels: &[u8]) -> Result<usize> {
    if rows.len() != labels.len() {
        return Err(Error::Schema(format!(
            "{} rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    if rows.is_empty() {
        return Err(Error::Invalid("no training rows".into()));
    }
    let dim = rows[0].len();
    for row in rows {
        if row.len() != dim {
            return Err(Error::Schema("ragged feature rows".into()));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite feature value".into()));
        }
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::Invalid("labels must be 0 or 1".into()));
    }
    Ok(dim)
}

/// Train a classifier of the requested kind.
pub fn fit(
    kind: ClassifierKind,
    rows: &[Vec<f64>],
    labels: &[u8],
    cfg: &ModelConfig,
) -> Result<FittedModel> {
    match kind {
        ClassifierKind::Logit => fit_logit(rows, labels, &cfg.logit),
        ClassifierKind::NaiveBayes => fit_naive_bayes(rows, labels, &cfg.naive_bayes),
        ClassifierKind::Tree => fit_tree(rows, labels, &cfg.tree),
        ClassifierKind::LinearSvm => fit_linear_svm(rows, labels, &cfg.svm),
    }
}

/// Train, then pick the OneR cutoff on the training scores.
pub fn fit_with_cutoff(
    kind: ClassifierKind,
    rows: &[Vec<f64>],
    labels: &[u8],
    cfg: &ModelConfig,
) -> Result<FittedModel> {
    let mut model = fit(kind, rows, labels, cfg)?;
    let probs: Vec<f64> = rows
        .iter()
        .map(|r| model.predict_proba(r))
        .collect::<Result<_>>()?;
    model.cutoff = oner_cutoff(&probs, labels);
    Ok(model)
}

/// The single-rule cutoff: scan the candidate set (0, 1, and midpoints of
/// adjacent distinct scores) for the threshold maximizing training
/// accuracy, breaking ties by higher TPR and then by the lower cutoff.
pub fn oner_cutoff(probs: &[f64], labels: &[u8]) -> f64 {
    assert!(!probs.is_empty(), "oner_cutoff needs at least one score");
    assert_eq!(probs.len(), labels.len());

    let mut pairs: Vec<(f64, u8)> = probs.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let positives = labels.iter().filter(|&&y| y == 1).count();

    let mut candidates = vec![0.0];
    for window in pairs.windows(2) {
        if window[0].0 < window[1].0 {
            candidates.push((window[0].0 + window[1].0) / 2.0);
        }
    }
    candidates.push(1.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // walk candidates ascending, tracking counts at or below the cutoff;
    // ties compare as integers so the scan is exact
    let mut best = (0usize, 0usize, 0.0f64); // (correct, tp, cutoff)
    let mut first = true;
    let mut idx = 0;
    let mut pos_le = 0usize;
    let mut neg_le = 0usize;
    for &cutoff in &candidates {
        while idx < pairs.len() && pairs[idx].0 <= cutoff {
            if pairs[idx].1 == 1 {
                pos_le += 1;
            } else {
                neg_le += 1;
            }
            idx += 1;
        }
        let tp = positives - pos_le;
        let correct = tp + neg_le;
        if first || correct > best.0 || (correct == best.0 && tp > best.1) {
            best = (correct, tp, cutoff);
            first = false;
        }
    }
    best.2
}
