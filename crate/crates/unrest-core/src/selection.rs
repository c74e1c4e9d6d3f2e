//! Wrapper feature-subset selection: best-first search over add-one
//! expansions, scored by stratified k-fold cross-validated accuracy of the
//! actual classifier, plus the per-fold inclusion report.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featmat::{FeatureId, FeatureMask, FEATURE_COUNT};
use crate::models::{fit_with_cutoff, ClassifierKind, ModelConfig};

/// Score improvements below this are treated as stale.
const IMPROVEMENT_EPS: f64 = 1e-6;

/// A scored feature subset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetEvaluation {
    pub subset: FeatureMask,
    pub cv_accuracy: f64,
    pub fold_count: usize,
}

/// Fraction of outer folds whose best subset contained each feature.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport {
    pub fold_count: usize,
    /// Indexed by feature; each value is a multiple of 1/fold_count.
    pub fractions: [f64; FEATURE_COUNT],
}

#[derive(Debug, Clone)]
pub struct SelectionConfig {
    pub folds: usize,
    /// Consecutive expansions without improvement before the search stops.
    pub stale_limit: usize,
    pub seed: u64,
    pub models: ModelConfig,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            folds: 10,
            stale_limit: 5,
            seed: 42,
            models: ModelConfig::default(),
        }
    }
}

/// Deterministic stratified folds: indices of each class are shuffled with
/// the seeded generator and dealt round-robin, preserving the label ratio.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment: Vec<Vec<usize>> = vec![Vec::new(); folds];
    for class in [0u8, 1u8] {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == class)
            .map(|(i, _)| i)
            .collect();
        members.shuffle(&mut rng);
        for (k, idx) in members.into_iter().enumerate() {
            assignment[k % folds].push(idx);
        }
    }
    for fold in &mut assignment {
        fold.sort_unstable();
    }
    assignment
}

/// Mean per-fold accuracy of the classifier restricted to `subset`. The
/// empty subset scores the majority-class predictor of each training fold.
fn cv_accuracy(
    rows: &[Vec<f64>],
    labels: &[u8],
    subset: FeatureMask,
    kind: ClassifierKind,
    folds: &[Vec<usize>],
    models: &ModelConfig,
) -> Result<f64> {
    let indices = subset.indices();
    let mut fold_accuracies = Vec::with_capacity(folds.len());
    for (k, test_fold) in folds.iter().enumerate() {
        if test_fold.is_empty() {
            continue;
        }
        let mut train_rows = Vec::new();
        let mut train_labels = Vec::new();
        for (j, fold) in folds.iter().enumerate() {
            if j == k {
                continue;
            }
            for &i in fold {
                train_rows.push(indices.iter().map(|&c| rows[i][c]).collect::<Vec<f64>>());
                train_labels.push(labels[i]);
            }
        }
        if train_rows.is_empty() {
            continue;
        }

        let correct = if subset.is_empty() {
            let positives = train_labels.iter().filter(|&&y| y == 1).count();
            let majority = u8::from(positives * 2 > train_labels.len());
            test_fold.iter().filter(|&&i| labels[i] == majority).count()
        } else {
            let model = fit_with_cutoff(kind, &train_rows, &train_labels, models)?;
            let mut hits = 0;
            for &i in test_fold {
                let row: Vec<f64> = indices.iter().map(|&c| rows[i][c]).collect();
                let (_, pred) = model.predict(&row)?;
                if pred == labels[i] {
                    hits += 1;
                }
            }
            hits
        };
        fold_accuracies.push(correct as f64 / test_fold.len() as f64);
    }
    if fold_accuracies.is_empty() {
        return Err(Error::Invalid("no scoreable folds".into()));
    }
    Ok(fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64)
}

/// Best-first search from the empty set. Neighbors are add-one-feature
/// expansions; the search stops after `stale_limit` consecutive expansions
/// that fail to improve the best score.
pub fn wrapper_select(
    rows: &[Vec<f64>],
    labels: &[u8],
    kind: ClassifierKind,
    cfg: &SelectionConfig,
) -> Result<SubsetEvaluation> {
    if rows.is_empty() {
        return Err(Error::Invalid("wrapper selection on an empty matrix".into()));
    }
    if cfg.folds < 2 {
        return Err(Error::Invalid("wrapper selection needs at least 2 folds".into()));
    }
    let folds = stratified_folds(labels, cfg.folds, cfg.seed);
    let score = |subset: FeatureMask| -> Result<f64> {
        cv_accuracy(rows, labels, subset, kind, &folds, &cfg.models)
    };

    let start = FeatureMask::EMPTY;
    let start_score = score(start)?;
    let mut best = SubsetEvaluation {
        subset: start,
        cv_accuracy: start_score,
        fold_count: cfg.folds,
    };

    // open list ordered by (score desc, bits asc); small enough to rescan
    let mut open: Vec<(f64, FeatureMask)> = vec![(start_score, start)];
    let mut visited: HashSet<u8> = HashSet::from([start.bits()]);
    let mut stale = 0usize;

    while stale < cfg.stale_limit {
        let Some(pos) = open
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.0.total_cmp(&b.0).then(b.1.bits().cmp(&a.1.bits())))
            .map(|(i, _)| i)
        else {
            break;
        };
        let (_, node) = open.swap_remove(pos);

        let mut improved = false;
        for id in FeatureId::ALL {
            if node.contains(id) {
                continue;
            }
            let child = node.with(id);
            if !visited.insert(child.bits()) {
                continue;
            }
            let child_score = score(child)?;
            open.push((child_score, child));
            if child_score > best.cv_accuracy + IMPROVEMENT_EPS {
                best = SubsetEvaluation {
                    subset: child,
                    cv_accuracy: child_score,
                    fold_count: cfg.folds,
                };
                improved = true;
            }
        }
        if improved {
            stale = 0;
        } else {
            stale += 1;
        }
    }
    Ok(best)
}

/// Run the wrapper once per held-out fold (on the remaining folds' data)
/// and report how often each feature makes the best subset.
pub fn fold_inclusion(
    rows: &[Vec<f64>],
    labels: &[u8],
    kind: ClassifierKind,
    cfg: &SelectionConfig,
) -> Result<InclusionReport> {
    if rows.is_empty() {
        return Err(Error::Invalid("fold inclusion on an empty matrix".into()));
    }
    let outer = stratified_folds(labels, cfg.folds, cfg.seed);
    let mut counts = [0usize; FEATURE_COUNT];
    for (k, held_out) in outer.iter().enumerate() {
        let held: HashSet<usize> = held_out.iter().copied().collect();
        let mut fold_rows = Vec::new();
        let mut fold_labels = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if !held.contains(&i) {
                fold_rows.push(row.clone());
                fold_labels.push(labels[i]);
            }
        }
        let inner_cfg = SelectionConfig {
            seed: cfg.seed.wrapping_add(1 + k as u64),
            models: cfg.models.clone(),
            ..*cfg
        };
        let evaluation = wrapper_select(&fold_rows, &fold_labels, kind, &inner_cfg)?;
        for id in evaluation.subset.ids() {
            counts[id.index()] += 1;
        }
    }
    let mut fractions = [0.0; FEATURE_COUNT];
    for (f, &c) in fractions.iter_mut().zip(&counts) {
        *f = c as f64 / cfg.folds as f64;
    }
    Ok(InclusionReport {
        fold_count: cfg.folds,
        fractions,
    })
}

/// JSON artifact combining the selected subset and the inclusion report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    pub classifier: String,
    pub folds: usize,
    pub seed: u64,
    pub best_subset: Vec<String>,
    pub cv_accuracy: f64,
    /// Per-feature inclusion percentage, f1..f7.
    pub inclusion_pct: Vec<f64>,
}

impl SelectionReport {
    pub fn new(
        kind: ClassifierKind,
        cfg: &SelectionConfig,
        best: &SubsetEvaluation,
        inclusion: &InclusionReport,
    ) -> Self {
        SelectionReport {
            classifier: kind.to_string(),
            folds: cfg.folds,
            seed: cfg.seed,
            best_subset: best.subset.ids().map(|id| id.to_string()).collect(),
            cv_accuracy: best.cv_accuracy,
            inclusion_pct: inclusion.fractions.iter().map(|f| f * 100.0).collect(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("serializing selection report: {e}")))?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }
}
