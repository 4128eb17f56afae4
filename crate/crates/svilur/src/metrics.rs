//! Prediction-error metrics, improvement percentages, and feature-pollutant
//! correlations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {true_len} targets vs {pred_len} predictions")]
    LengthMismatch { true_len: usize, pred_len: usize },
    #[error("empty input")]
    Empty,
    #[error("MAPE undefined: every target is zero")]
    AllTargetsZero,
    #[error("R² undefined: targets are constant and residuals nonzero")]
    ConstantTargets,
}

/// The five evaluation metrics for one prediction vector.
///
/// `mse` is in squared target units, `mae` and `rmse` in target units,
/// `mape` in percent, `r2` dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub mae: f64,
    pub rmse: f64,
    pub mape: f64,
    pub r2: f64,
}

/// Compute MSE, MAE, RMSE, MAPE, and R² for `y_pred` against `y_true`.
///
/// MAPE averages `|y-ŷ|/|y|` over the nonzero targets only and errors out
/// when every target is zero. R² uses the mean of `y_true` itself in the
/// total sum of squares; a perfect fit on constant targets reports R² = 1,
/// an imperfect one is an error.
pub fn compute_metrics(y_true: &[f64], y_pred: &[f64]) -> Result<MetricsReport, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            true_len: y_true.len(),
            pred_len: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = y_true.len() as f64;
    let mut sq_sum = 0.0;
    let mut abs_sum = 0.0;
    let mut ape_sum = 0.0;
    let mut ape_n = 0usize;
    for (&y, &yh) in y_true.iter().zip(y_pred) {
        let d = y - yh;
        sq_sum += d * d;
        abs_sum += d.abs();
        if y != 0.0 {
            ape_sum += d.abs() / y.abs();
            ape_n += 1;
        }
    }
    if ape_n == 0 {
        return Err(MetricsError::AllTargetsZero);
    }
    let mse = sq_sum / n;
    let mae = abs_sum / n;
    let rmse = mse.sqrt();
    let mape = 100.0 * ape_sum / ape_n as f64;

    let mean = y_true.iter().sum::<f64>() / n;
    let tss: f64 = y_true.iter().map(|&y| (y - mean) * (y - mean)).sum();
    let r2 = if tss == 0.0 {
        if sq_sum == 0.0 {
            1.0
        } else {
            return Err(MetricsError::ConstantTargets);
        }
    } else {
        1.0 - sq_sum / tss
    };

    Ok(MetricsReport {
        mse,
        mae,
        rmse,
        mape,
        r2,
    })
}

/// Percentage MSE improvement of a model over a baseline:
/// `100·(mse_baseline − mse_model)/mse_model`.
pub fn improvement_pct(mse_baseline: f64, mse_model: f64) -> f64 {
    100.0 * (mse_baseline - mse_model) / mse_model
}

/// Pearson correlation between each feature column and each target column.
///
/// Entry `[i][j]` is r for (feature i, target j); `None` where either column
/// is constant.
pub fn correlation_matrix(features: &[Vec<f64>], targets: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    features
        .iter()
        .map(|f| targets.iter().map(|t| pearson(f, t)).collect())
        .collect()
}

/// Pearson r of two equal-length columns; `None` if either is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "pearson requires equal lengths");
    let n = a.len() as f64;
    if a.is_empty() {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        None
    } else {
        Some(cov / (va.sqrt() * vb.sqrt()))
    }
}
