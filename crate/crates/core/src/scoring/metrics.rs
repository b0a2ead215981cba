use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("correlation needs at least 2 points".into()));
    }
    let mx = crate::linalg::mean(x);
    let my = crate::linalg::mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::UndefinedCorrelation("first series has zero variance"));
    }
    if syy == 0.0 {
        return Err(Error::UndefinedCorrelation("second series has zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn mae(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("MAE needs at least 1 point".into()));
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>() / x.len() as f64)
}

/// Spearman-Brown step-up of a half-length reliability.
pub fn spearman_brown(r: f64) -> f64 {
    2.0 * r / (1.0 + r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionPair {
    pub participant_id: String,
    pub truth: f64,
    pub predicted: f64,
}

/// Headline metrics plus the pairs they were computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `None` when the predictions (or truths) are constant.
    pub pearson_r: Option<f64>,
    pub mae: f64,
    pub n: usize,
    pub pairs: Vec<PredictionPair>,
}

impl EvalReport {
    pub fn from_pairs(pairs: Vec<PredictionPair>) -> Result<Self> {
        let truth: Vec<f64> = pairs.iter().map(|p| p.truth).collect();
        let pred: Vec<f64> = pairs.iter().map(|p| p.predicted).collect();
        let mae = mae(&truth, &pred)?;
        let pearson_r = match pearson_r(&truth, &pred) {
            Ok(r) => Some(r),
            Err(Error::UndefinedCorrelation(_)) | Err(Error::InvalidArgument(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(EvalReport {
            pearson_r,
            mae,
            n: pairs.len(),
            pairs,
        })
    }
}
