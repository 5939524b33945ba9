//! Regression quality measures: both R-squared conventions, RMSE, and MAE.

use serde::{Deserialize, Serialize};

use crate::error::{AnfisError, Result};

/// Both R-squared conventions for one prediction/actual pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RSquared {
    /// 1 - SS_res / SS_tot.
    pub determination: f64,
    /// Squared sample correlation, in [0, 1].
    pub pearson_sq: f64,
    /// Set when the actual vector is constant; pearson_sq is then reported
    /// as 0 and determination is 1.0 only if predictions match exactly,
    /// otherwise negative infinity.
    pub degenerate: bool,
}

/// Summary statistics attached to one evaluated model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub r2_determination: f64,
    pub r2_pearson: f64,
    pub rmse: f64,
    pub mae: f64,
    pub n: usize,
}

fn check_lengths(pred: &[f64], actual: &[f64], min: usize) -> Result<()> {
    if pred.len() != actual.len() {
        return Err(AnfisError::Shape {
            what: "prediction vector".into(),
            expected: actual.len(),
            got: pred.len(),
        });
    }
    if pred.len() < min {
        return Err(AnfisError::Shape {
            what: "metric input".into(),
            expected: min,
            got: pred.len(),
        });
    }
    Ok(())
}

/// Coefficient of determination and squared Pearson correlation.
pub fn r_squared(pred: &[f64], actual: &[f64]) -> Result<RSquared> {
    check_lengths(pred, actual, 2)?;
    let n = actual.len() as f64;
    let mean_a: f64 = actual.iter().sum::<f64>() / n;
    let mean_p: f64 = pred.iter().sum::<f64>() / n;

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let mut cov = 0.0;
    let mut var_p = 0.0;
    for (p, a) in pred.iter().zip(actual) {
        let da = a - mean_a;
        let dp = p - mean_p;
        ss_res += (a - p) * (a - p);
        ss_tot += da * da;
        cov += da * dp;
        var_p += dp * dp;
    }

    if ss_tot == 0.0 {
        return Ok(RSquared {
            determination: if ss_res == 0.0 { 1.0 } else { f64::NEG_INFINITY },
            pearson_sq: 0.0,
            degenerate: true,
        });
    }
    let pearson_sq = if var_p == 0.0 {
        0.0
    } else {
        (cov * cov / (ss_tot * var_p)).clamp(0.0, 1.0)
    };
    Ok(RSquared {
        determination: 1.0 - ss_res / ss_tot,
        pearson_sq,
        degenerate: false,
    })
}

/// Root-mean-square residual.
pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(pred, actual, 1)?;
    let sum: f64 = pred
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok((sum / pred.len() as f64).sqrt())
}

/// Mean-absolute residual.
pub fn mae(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(pred, actual, 1)?;
    let sum: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum();
    Ok(sum / pred.len() as f64)
}

/// Bundle all measures for one prediction/actual pair.
pub fn metric_report(pred: &[f64], actual: &[f64]) -> Result<MetricReport> {
    let r2 = r_squared(pred, actual)?;
    Ok(MetricReport {
        r2_determination: r2.determination,
        r2_pearson: r2.pearson_sq,
        rmse: rmse(pred, actual)?,
        mae: mae(pred, actual)?,
        n: pred.len(),
    })
}
