//! Linear SVM trained with Pegasos-style hinge-loss subgradient descent.
//! The probability surrogate is the logistic of the margin; only the
//! binary predictions are comparable to the other classifiers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

use super::{validate_training_input, FittedModel, ModelParams, Standardizer};

#[derive(Debug, Clone)]
pub struct SvmConfig {
    /// L2 regularization strength.
    pub reg: f64,
    pub epochs: usize,
    /// Seed for the per-epoch sample order; fits are deterministic given it.
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            reg: 0.01,
            epochs: 200,
            seed: 7,
        }
    }
}

pub fn fit_linear_svm(rows: &[Vec<f64>], labels: &[u8], cfg: &SvmConfig) -> Result<FittedModel> {
    let dim = validate_training_input(rows, labels)?;
    let standardizer = Standardizer::fit(rows);
    let z = standardizer.transform_all(rows);
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut weights = vec![0.0; dim];
    let mut intercept = 0.0;
    let mut order: Vec<usize> = (0..z.len()).collect();
    let mut t = 0usize;

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (cfg.reg * t as f64);
            let margin = y[i]
                * (weights.iter().zip(&z[i]).map(|(w, x)| w * x).sum::<f64>() + intercept);
            let shrink = 1.0 - eta * cfg.reg;
            for w in weights.iter_mut() {
                *w *= shrink;
            }
            if margin < 1.0 {
                for (w, &x) in weights.iter_mut().zip(&z[i]) {
                    *w += eta * y[i] * x;
                }
                intercept += eta * y[i];
            }
        }
    }

    Ok(FittedModel {
        params: ModelParams::LinearSvm { weights, intercept },
        standardizer,
        cutoff: 0.5,
        converged: true,
    })
}
