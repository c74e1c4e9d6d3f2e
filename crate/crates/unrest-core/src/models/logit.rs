//! Ridge-penalized logistic regression fit by iteratively reweighted
//! least squares (Newton steps on the penalized Bernoulli log-likelihood).
//! The intercept is unpenalized.

use crate::error::{Error, Result};

use super::{
    probability, validate_training_input, FittedModel, ModelParams, Standardizer,
};

#[derive(Debug, Clone)]
pub struct LogitConfig {
    /// L2 penalty on the weights; keeps separable fits finite.
    pub ridge: f64,
    /// Convergence threshold on the max-abs gradient component.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogitConfig {
    fn default() -> Self {
        LogitConfig {
            ridge: 1e-4,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

/// Penalized Bernoulli log-likelihood at (weights, intercept):
/// sum_i [y_i z_i - softplus(z_i)] - ridge/2 * |weights|^2.
pub fn penalized_log_likelihood(
    weights: &[f64],
    intercept: f64,
    rows: &[Vec<f64>],
    labels: &[u8],
    ridge: f64,
) -> f64 {
    let mut ll = 0.0;
    for (row, &y) in rows.iter().zip(labels) {
        let z: f64 = weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + intercept;
        // softplus(z) = ln(1 + e^z), computed without overflow
        let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
        ll += f64::from(y) * z - softplus;
    }
    ll - 0.5 * ridge * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`penalized_log_likelihood`]; returns
/// (weight gradient, intercept gradient).
pub fn penalized_gradient(
    weights: &[f64],
    intercept: f64,
    rows: &[Vec<f64>],
    labels: &[u8],
    ridge: f64,
) -> (Vec<f64>, f64) {
    let dim = weights.len();
    let mut grad_w = vec![0.0; dim];
    let mut grad_b = 0.0;
    for (row, &y) in rows.iter().zip(labels) {
        let z: f64 = weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + intercept;
        let residual = f64::from(y) - probability(z);
        for (g, &x) in grad_w.iter_mut().zip(row) {
            *g += residual * x;
        }
        grad_b += residual;
    }
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g -= ridge * w;
    }
    (grad_w, grad_b)
}

/// Gaussian elimination with partial pivoting on a dense system.
#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty pivot range");
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::Internal("singular IRLS system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = b[row];
        for k in (row + 1)..n {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
    }
    Ok(x)
}

/// Fit by IRLS on standardized features. Hitting the iteration cap flags
/// the model as unconverged but is not an error.
#[allow(clippy::needless_range_loop)]
pub fn fit_logit(rows: &[Vec<f64>], labels: &[u8], cfg: &LogitConfig) -> Result<FittedModel> {
    let dim = validate_training_input(rows, labels)?;
    if rows.len() < 2 {
        return Err(Error::Invalid("logit fit needs at least two rows".into()));
    }
    if cfg.ridge <= 0.0 {
        return Err(Error::Invalid("ridge must be positive".into()));
    }

    let standardizer = Standardizer::fit(rows);
    let z = standardizer.transform_all(rows);

    let mut weights = vec![0.0; dim];
    let mut intercept = 0.0;
    let mut converged = false;

    for _ in 0..cfg.max_iter {
        let (grad_w, grad_b) = penalized_gradient(&weights, intercept, &z, labels, cfg.ridge);
        let grad_max = grad_w
            .iter()
            .chain(std::iter::once(&grad_b))
            .fold(0.0f64, |acc, g| acc.max(g.abs()));
        if grad_max < cfg.tol {
            converged = true;
            break;
        }

        // Hessian of the negative objective: X'WX + ridge on the weight
        // diagonal, intercept as the last coordinate
        let n_params = dim + 1;
        let mut hessian = vec![vec![0.0; n_params]; n_params];
        for row in &z {
            let score: f64 =
                weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + intercept;
            let p = probability(score);
            let w_i = p * (1.0 - p);
            for j in 0..dim {
                let zj = w_i * row[j];
                for k in j..dim {
                    hessian[j][k] += zj * row[k];
                }
                hessian[j][dim] += zj;
            }
            hessian[dim][dim] += w_i;
        }
        for j in 0..dim {
            hessian[j][j] += cfg.ridge;
            for k in (j + 1)..dim {
                hessian[k][j] = hessian[j][k];
            }
            hessian[dim][j] = hessian[j][dim];
        }

        let mut rhs = grad_w.clone();
        rhs.push(grad_b);
        let delta = solve(hessian, rhs)?;
        for (w, d) in weights.iter_mut().zip(&delta) {
            *w += d;
        }
        intercept += delta[dim];
    }

    if !converged {
        log::warn!(
            "logit fit hit the {}-iteration cap without reaching tol {}",
            cfg.max_iter,
            cfg.tol
        );
    }
    if weights.iter().any(|w| !w.is_finite()) || !intercept.is_finite() {
        return Err(Error::Internal("logit fit produced non-finite parameters".into()));
    }

    Ok(FittedModel {
        params: ModelParams::Logit { weights, intercept },
        standardizer,
        cutoff: 0.5,
        converged,
    })
}
