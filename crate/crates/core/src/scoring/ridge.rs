//! Ridge regression with an unpenalized intercept, and the scaler-plus-ridge
//! predictor used for external test scores.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::linalg::{center_columns, column_means, matrix_from_rows, solve_spd, spd_is_well_conditioned};
use crate::scoring::prototype::{fit_zscaler_unchecked, ScalerArtifact, ZScaler};

/// Minimizes `sum (y - b - x.theta)^2 + lambda * |theta|^2` over `theta` and
/// an unpenalized `b`, by centering. Uses the `d x d` normal equations when
/// `d <= n` and the equivalent `n x n` kernel form otherwise.
pub fn ridge_solve<R: AsRef<[f64]>>(x: &[R], y: &[f64], lambda: f64) -> Result<(Vec<f64>, f64)> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge penalty must be finite and >= 0, got {lambda}")));
    }
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidArgument(format!("{} rows for {} targets", x.len(), y.len())));
    }
    let n = x.len();
    let d = x[0].as_ref().len();
    if x.iter().any(|r| r.as_ref().len() != d) {
        return Err(Error::InvalidArgument("ragged design matrix".into()));
    }
    let mut xm = matrix_from_rows(x, d);
    let means = column_means(&xm);
    center_columns(&mut xm, &means);
    let y_mean = crate::linalg::mean(y);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let rank_deficient = || {
        Error::Numeric(format!(
            "ridge system with lambda = 0 is rank-deficient ({n} samples, {d} features); use lambda > 0"
        ))
    };

    let theta = if d == 0 {
        DVector::zeros(0)
    } else if d <= n {
        let mut gram = xm.transpose() * &xm;
        for i in 0..d {
            gram[(i, i)] += lambda;
        }
        if lambda == 0.0 && !spd_is_well_conditioned(&gram) {
            return Err(rank_deficient());
        }
        let rhs = xm.transpose() * &yc;
        solve_spd(gram, &rhs).ok_or_else(|| {
            if lambda == 0.0 {
                rank_deficient()
            } else {
                Error::Numeric("ridge normal equations could not be solved".into())
            }
        })?
    } else {
        if lambda == 0.0 {
            return Err(rank_deficient());
        }
        let kernel = &xm * xm.transpose() + DMatrix::identity(n, n) * lambda;
        let alpha = solve_spd(kernel, &yc).ok_or_else(|| Error::Numeric("ridge kernel system could not be solved".into()))?;
        xm.transpose() * alpha
    };
    let intercept = y_mean - theta.dot(&means);
    Ok((theta.iter().copied().collect(), intercept))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub names: Arc<Vec<String>>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
}

/// Fits ridge weights on `train`; with `natives = Some((vectors, max_score))`
/// the native vectors are appended as extra rows at the top score.
pub fn ridge_fit(
    train: &[&FeatureVector],
    scores: &[f64],
    lambda: f64,
    natives: Option<(&[&FeatureVector], f64)>,
) -> Result<RidgeModel> {
    let first = train
        .first()
        .ok_or_else(|| Error::InvalidArgument("no training vectors".into()))?;
    let names = first.names.clone();
    let mut rows: Vec<&[f64]> = Vec::new();
    let mut y = scores.to_vec();
    for v in train {
        check(&names, v)?;
        rows.push(&v.values);
    }
    if let Some((nat, max_score)) = natives {
        for v in nat {
            check(&names, v)?;
            rows.push(&v.values);
            y.push(max_score);
        }
    }
    let (weights, intercept) = ridge_solve(&rows, &y, lambda)?;
    Ok(RidgeModel {
        names,
        weights,
        intercept,
        lambda,
    })
}

fn check(names: &[String], v: &FeatureVector) -> Result<()> {
    if v.same_space(names) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!(
            "vector of {} is not in the model's feature space",
            v.participant_id
        )))
    }
}

impl RidgeModel {
    pub fn predict(&self, v: &FeatureVector) -> Result<f64> {
        check(&self.names, v)?;
        Ok(self.predict_values(&v.values))
    }

    pub(crate) fn predict_values(&self, values: &[f64]) -> f64 {
        self.intercept + crate::linalg::dot(&self.weights, values)
    }

    pub fn to_artifact(&self) -> RidgeArtifact {
        RidgeArtifact {
            lambda: self.lambda,
            intercept: self.intercept,
            features: self
                .names
                .iter()
                .zip(&self.weights)
                .map(|(f, &w)| WeightEntry {
                    feature: f.clone(),
                    weight: w,
                })
                .collect(),
        }
    }

    pub fn from_artifact(a: &RidgeArtifact) -> Self {
        RidgeModel {
            names: Arc::new(a.features.iter().map(|e| e.feature.clone()).collect()),
            weights: a.features.iter().map(|e| e.weight).collect(),
            intercept: a.intercept,
            lambda: a.lambda,
        }
    }
}

/// Clamps a prediction onto the test's scale.
pub fn clamp_score(prediction: f64, max_score: f64) -> f64 {
    prediction.clamp(0.0, max_score)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub feature: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeArtifact {
    pub lambda: f64,
    pub intercept: f64,
    pub features: Vec<WeightEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeOptions {
    pub lambda: f64,
    /// Add native readers to the training rows at `max_score`.
    pub augment_native: bool,
    pub max_score: f64,
    /// Clamp reported predictions to `[0, max_score]`.
    pub clamp: bool,
}

impl RidgeOptions {
    pub fn new(lambda: f64, max_score: f64) -> Self {
        RidgeOptions {
            lambda,
            augment_native: true,
            max_score,
            clamp: false,
        }
    }
}

/// Z scaler fitted on the learner training rows, followed by ridge.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    pub scaler: ZScaler,
    pub model: RidgeModel,
    pub clamp_to: Option<f64>,
}

impl Predictor {
    pub fn predict(&self, v: &FeatureVector) -> Result<f64> {
        let z = self.scaler.apply(v)?;
        let p = self.model.predict_values(&z);
        Ok(match self.clamp_to {
            Some(max) => clamp_score(p, max),
            None => p,
        })
    }

    pub fn to_artifact(&self) -> PredictorArtifact {
        PredictorArtifact {
            clamp_to: self.clamp_to,
            scaler: self.scaler.to_artifact(),
            ridge: self.model.to_artifact(),
        }
    }

    pub fn from_artifact(a: &PredictorArtifact) -> Result<Self> {
        let scaler = ZScaler::from_artifact(&a.scaler);
        let model = RidgeModel::from_artifact(&a.ridge);
        if scaler.names != model.names {
            return Err(Error::SpaceMismatch("scaler and ridge artifacts name different features".into()));
        }
        Ok(Predictor {
            scaler,
            model,
            clamp_to: a.clamp_to,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorArtifact {
    pub clamp_to: Option<f64>,
    pub scaler: ScalerArtifact,
    pub ridge: RidgeArtifact,
}

fn scaled(scaler: &ZScaler, v: &FeatureVector) -> Result<FeatureVector> {
    FeatureVector::new(v.participant_id.clone(), v.names.clone(), scaler.apply(v)?)
}

/// Fits the scaler on `train`, applies it to every row (natives included) and
/// fits ridge on the result. A single training learner is allowed; its
/// scaler only centers.
pub fn fit_predictor(
    train: &[&FeatureVector],
    scores: &[f64],
    natives: &[&FeatureVector],
    opts: &RidgeOptions,
) -> Result<Predictor> {
    let scaler = fit_zscaler_unchecked(train)?;
    let train_z = train.iter().map(|v| scaled(&scaler, v)).collect::<Result<Vec<_>>>()?;
    let natives_z = natives.iter().map(|v| scaled(&scaler, v)).collect::<Result<Vec<_>>>()?;
    let train_refs: Vec<&FeatureVector> = train_z.iter().collect();
    let native_refs: Vec<&FeatureVector> = natives_z.iter().collect();
    let augment = (opts.augment_native && !native_refs.is_empty()).then_some((native_refs.as_slice(), opts.max_score));
    let model = ridge_fit(&train_refs, scores, opts.lambda, augment)?;
    Ok(Predictor {
        scaler,
        model,
        clamp_to: opts.clamp.then_some(opts.max_score),
    })
}
