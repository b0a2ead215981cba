//! EyeScore and external-score prediction.
//!
//! EyeScore is the cosine similarity between a reader's Z-scored feature
//! vector and the mean Z-scored vector of the native readers, with the
//! scaler fitted on learners only. Prediction fits ridge regression on
//! Z-scored features, optionally adding the natives as training rows at the
//! top of the test scale.

mod consistency;
mod eval;
mod metrics;
mod prototype;
mod ridge;
mod split;

pub use consistency::{split_half_consistency, ConsistencyReport, HalfScores};
pub use eval::{
    baseline_mean, baseline_speed, evaluate_split, kfold_indices, loocv_predict, speed_correlation, tune_lambda,
    Cohort, LambdaTuning, MeanBaseline, Member, SplitEvaluation, DEFAULT_LAMBDA_GRID, SPEED_FEATURE,
};
pub use metrics::{mae, pearson_r, spearman_brown, EvalReport, PredictionPair};
pub use prototype::{
    build_prototype, compute_eyescores, cosine, eyescore, fit_zscaler, EyeScoreRun, NativePrototype,
    PrototypeArtifact, PrototypeEntry, ScalerArtifact, ScalerEntry, ZScaler,
};
pub use ridge::{
    clamp_score, fit_predictor, ridge_fit, ridge_solve, Predictor, PredictorArtifact, RidgeArtifact, RidgeModel,
    RidgeOptions, WeightEntry,
};
pub use split::{make_split, DataSplit};
