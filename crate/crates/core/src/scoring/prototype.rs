//! Z-scaling, the native-reader prototype and EyeScore.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::linalg::{dot, norm};

fn check_names(names: &[String], v: &FeatureVector) -> Result<()> {
    if !v.same_space(names) {
        return Err(Error::SpaceMismatch(format!(
            "vector of {} is not in the fitted feature space",
            v.participant_id
        )));
    }
    Ok(())
}

/// Per-feature standardization fitted on learner vectors, with population
/// standard deviations. Constant features get `std = 1` and map to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ZScaler {
    pub names: Arc<Vec<String>>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub zero_variance: Vec<bool>,
}

pub fn fit_zscaler(vectors: &[&FeatureVector]) -> Result<ZScaler> {
    if vectors.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a Z scaler needs at least 2 vectors, got {}",
            vectors.len()
        )));
    }
    fit_zscaler_unchecked(vectors)
}

/// As [`fit_zscaler`] but accepts a single vector, which centers every
/// feature on it and flags all of them as zero-variance.
pub(crate) fn fit_zscaler_unchecked(vectors: &[&FeatureVector]) -> Result<ZScaler> {
    if vectors.is_empty() {
        return Err(Error::InvalidArgument("a Z scaler needs at least 1 vector".into()));
    }
    let names = vectors[0].names.clone();
    for v in vectors {
        check_names(&names, v)?;
    }
    let n = vectors.len() as f64;
    let d = names.len();
    let mut mean = vec![0.0; d];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(&v.values) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for v in vectors {
        for ((s, x), m) in var.iter_mut().zip(&v.values).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    let mut zero_variance = vec![false; d];
    let std = var
        .iter()
        .zip(zero_variance.iter_mut())
        .map(|(s, flag)| {
            let sd = (s / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                *flag = true;
                1.0
            }
        })
        .collect();
    Ok(ZScaler {
        names,
        mean,
        std,
        zero_variance,
    })
}

impl ZScaler {
    pub fn apply(&self, v: &FeatureVector) -> Result<Vec<f64>> {
        check_names(&self.names, v)?;
        Ok(self.apply_values(&v.values))
    }

    pub(crate) fn apply_values(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn to_artifact(&self) -> ScalerArtifact {
        ScalerArtifact {
            features: (0..self.names.len())
                .map(|i| ScalerEntry {
                    feature: self.names[i].clone(),
                    mean: self.mean[i],
                    std: self.std[i],
                    zero_variance: self.zero_variance[i],
                })
                .collect(),
        }
    }

    pub fn from_artifact(a: &ScalerArtifact) -> Self {
        ZScaler {
            names: Arc::new(a.features.iter().map(|e| e.feature.clone()).collect()),
            mean: a.features.iter().map(|e| e.mean).collect(),
            std: a.features.iter().map(|e| e.std).collect(),
            zero_variance: a.features.iter().map(|e| e.zero_variance).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerEntry {
    pub feature: String,
    pub mean: f64,
    pub std: f64,
    pub zero_variance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerArtifact {
    pub features: Vec<ScalerEntry>,
}

/// Mean of the Z-scored native vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct NativePrototype {
    pub names: Arc<Vec<String>>,
    pub vector: Vec<f64>,
}

pub fn build_prototype(natives: &[&FeatureVector], scaler: &ZScaler) -> Result<NativePrototype> {
    if natives.is_empty() {
        return Err(Error::InvalidArgument("no native readers for the prototype".into()));
    }
    let mut sum = vec![0.0; scaler.names.len()];
    for v in natives {
        for (s, z) in sum.iter_mut().zip(scaler.apply(v)?) {
            *s += z;
        }
    }
    let n = natives.len() as f64;
    Ok(NativePrototype {
        names: scaler.names.clone(),
        vector: sum.into_iter().map(|s| s / n).collect(),
    })
}

impl NativePrototype {
    pub fn to_artifact(&self) -> PrototypeArtifact {
        PrototypeArtifact {
            features: self
                .names
                .iter()
                .zip(&self.vector)
                .map(|(f, &v)| PrototypeEntry {
                    feature: f.clone(),
                    value: v,
                })
                .collect(),
        }
    }

    pub fn from_artifact(a: &PrototypeArtifact) -> Self {
        NativePrototype {
            names: Arc::new(a.features.iter().map(|e| e.feature.clone()).collect()),
            vector: a.features.iter().map(|e| e.value).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeEntry {
    pub feature: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeArtifact {
    pub features: Vec<PrototypeEntry>,
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 {
        return Err(Error::UndefinedCosine("participant vector is zero"));
    }
    if nb == 0.0 {
        return Err(Error::UndefinedCosine("prototype is zero"));
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Cosine similarity of the Z-scored vector with the native prototype.
pub fn eyescore(v: &FeatureVector, prototype: &NativePrototype, scaler: &ZScaler) -> Result<f64> {
    if prototype.names != scaler.names {
        return Err(Error::SpaceMismatch("prototype and scaler use different feature spaces".into()));
    }
    cosine(&scaler.apply(v)?, &prototype.vector)
}

/// Scaler, prototype and scores for a cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct EyeScoreRun {
    pub scaler: ZScaler,
    pub prototype: NativePrototype,
    /// `(participant_id, EyeScore)` for each learner, in input order.
    pub learner_scores: Vec<(String, f64)>,
    pub native_scores: Vec<(String, f64)>,
}

/// Fits the scaler on `learners`, the prototype on `natives`, and scores both.
pub fn compute_eyescores(learners: &[&FeatureVector], natives: &[&FeatureVector]) -> Result<EyeScoreRun> {
    let scaler = fit_zscaler(learners)?;
    let prototype = build_prototype(natives, &scaler)?;
    let score = |vs: &[&FeatureVector]| -> Result<Vec<(String, f64)>> {
        vs.iter()
            .map(|v| Ok((v.participant_id.clone(), eyescore(v, &prototype, &scaler)?)))
            .collect()
    };
    let learner_scores = score(learners)?;
    let native_scores = score(natives)?;
    Ok(EyeScoreRun {
        scaler,
        prototype,
        learner_scores,
        native_scores,
    })
}
