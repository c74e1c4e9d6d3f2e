//! Gaussian naive Bayes with per-feature variance flooring.

use crate::error::Result;

use super::{validate_training_input, FittedModel, ModelParams, Standardizer};

#[derive(Debug, Clone)]
pub struct NbConfig {
    pub var_floor: f64,
}

impl Default for NbConfig {
    fn default() -> Self {
        NbConfig { var_floor: 1e-9 }
    }
}

/// Class priors are empirical frequencies; a class absent from training
/// gets prior zero and the model predicts the other class always.
pub fn fit_naive_bayes(rows: &[Vec<f64>], labels: &[u8], cfg: &NbConfig) -> Result<FittedModel> {
    let dim = validate_training_input(rows, labels)?;
    let n = rows.len() as f64;

    let mut priors = vec![0.0; 2];
    let mut means = vec![vec![0.0; dim]; 2];
    let mut variances = vec![vec![cfg.var_floor.max(1e-300); dim]; 2];
    for class in 0..2u8 {
        let members: Vec<&Vec<f64>> = rows
            .iter()
            .zip(labels)
            .filter(|(_, &y)| y == class)
            .map(|(r, _)| r)
            .collect();
        priors[class as usize] = members.len() as f64 / n;
        if members.is_empty() {
            continue;
        }
        let m = members.len() as f64;
        for j in 0..dim {
            let mean = members.iter().map(|r| r[j]).sum::<f64>() / m;
            let var = members.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / m;
            means[class as usize][j] = mean;
            variances[class as usize][j] = var.max(cfg.var_floor);
        }
    }

    Ok(FittedModel {
        params: ModelParams::NaiveBayes {
            priors,
            means,
            variances,
        },
        standardizer: Standardizer::identity(dim),
        cutoff: 0.5,
        converged: true,
    })
}

/// Posterior P(y=1 | x) via Bayes rule in log space.
pub(crate) fn posterior(
    priors: &[f64],
    means: &[Vec<f64>],
    variances: &[Vec<f64>],
    row: &[f64],
) -> f64 {
    if priors[1] == 0.0 {
        return 0.0;
    }
    if priors[0] == 0.0 {
        return 1.0;
    }
    let log_joint = |class: usize| -> f64 {
        let mut l = priors[class].ln();
        for (j, &x) in row.iter().enumerate() {
            let var = variances[class][j];
            let diff = x - means[class][j];
            l += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - diff * diff / (2.0 * var);
        }
        l
    };
    let l0 = log_joint(0);
    let l1 = log_joint(1);
    // 1 / (1 + exp(l0 - l1)), clamped inside (0,1)
    super::probability(l1 - l0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrored_classes_meet_at_half() {
        let rows = vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]];
        let labels = vec![0, 0, 1, 1];
        let model = fit_naive_bayes(&rows, &labels, &NbConfig::default()).unwrap();
        let p = model.predict_proba(&[0.0]).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_class_predicts_it_always() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![1, 1, 1];
        let model = fit_naive_bayes(&rows, &labels, &NbConfig::default()).unwrap();
        assert_eq!(model.predict_proba(&[-100.0]).unwrap(), 1.0);
        assert_eq!(model.predict_proba(&[5.0]).unwrap(), 1.0);
    }

    #[test]
    fn four_point_fixture_matches_direct_density_arithmetic() {
        // class 0 at {-1, -3}, class 1 at {1, 3}: mu = -/+2, var = 1
        let rows = vec![vec![-1.0], vec![-3.0], vec![1.0], vec![3.0]];
        let labels = vec![0, 0, 1, 1];
        let model = fit_naive_bayes(&rows, &labels, &NbConfig::default()).unwrap();

        let density = |x: f64, mu: f64| {
            (-((x - mu) * (x - mu)) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        for x in [-2.5, -1.0, 0.0, 0.7, 1.0, 4.0] {
            let expected = 0.5 * density(x, 2.0)
                / (0.5 * density(x, -2.0) + 0.5 * density(x, 2.0));
            let p = model.predict_proba(&[x]).unwrap();
            assert!((p - expected).abs() < 1e-9, "x={x}: {p} vs {expected}");
        }
    }

    #[test]
    fn variance_floor_handles_constant_features() {
        let rows = vec![vec![1.0, 5.0], vec![1.0, 7.0], vec![2.0, 1.0], vec![2.0, 2.0]];
        let labels = vec![0, 0, 1, 1];
        let model = fit_naive_bayes(&rows, &labels, &NbConfig::default()).unwrap();
        let p = model.predict_proba(&[1.0, 6.0]).unwrap();
        assert!(p.is_finite());
        assert!(p < 0.5);
    }

    #[test]
    fn order_invariant() {
        let rows = vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]];
        let labels = vec![0, 0, 1, 1];
        let a = fit_naive_bayes(&rows, &labels, &NbConfig::default()).unwrap();
        let rows_rev: Vec<Vec<f64>> = rows.iter().rev().cloned().collect();
        let labels_rev: Vec<u8> = labels.iter().rev().copied().collect();
        let b = fit_naive_bayes(&rows_rev, &labels_rev, &NbConfig::default()).unwrap();
        for x in [-1.5, 0.0, 0.9] {
            assert!(
                (a.predict_proba(&[x]).unwrap() - b.predict_proba(&[x]).unwrap()).abs() < 1e-12
            );
        }
    }
}
