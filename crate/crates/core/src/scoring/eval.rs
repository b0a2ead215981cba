//! Cohorts, cross-validation, held-out evaluation and baselines.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Regime, TestKind};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureVector};
use crate::measures::compute_reading_speed_in;
use crate::scoring::metrics::{mae, pearson_r, EvalReport, PredictionPair};
use crate::scoring::ridge::{fit_predictor, RidgeOptions};
use crate::scoring::split::DataSplit;

pub const DEFAULT_LAMBDA_GRID: [f64; 6] = [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0];
pub const SPEED_FEATURE: &str = "speed/words_per_second";

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub participant_id: String,
    pub native_language: String,
    pub features: FeatureVector,
    pub words_per_second: f64,
    /// External score; natives carry the top of the scale.
    pub score: f64,
}

impl Member {
    pub fn speed_vector(&self) -> FeatureVector {
        FeatureVector {
            participant_id: self.participant_id.clone(),
            names: Arc::new(vec![SPEED_FEATURE.to_string()]),
            values: vec![self.words_per_second],
        }
    }
}

/// Learners with a score on one test, plus the native readers.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub test: TestKind,
    pub max_score: f64,
    pub learners: Vec<Member>,
    pub natives: Vec<Member>,
}

impl Cohort {
    /// Learners without a score on `test` are left out. Reading speed is
    /// measured over the trials of `regime`.
    pub fn from_dataset(dataset: &Dataset, matrix: &FeatureMatrix, test: TestKind, regime: Regime) -> Result<Self> {
        let max_score = match test.fixed_max_score() {
            Some(m) => m,
            None => dataset
                .scores
                .iter()
                .filter(|s| s.test == test)
                .map(|s| s.max_score)
                .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.max(m))))
                .ok_or_else(|| Error::Data(format!("no {test} scores")))?,
        };
        let mut learners = Vec::new();
        let mut natives = Vec::new();
        for p in &dataset.participants {
            let Some(features) = matrix.get(&p.participant_id) else {
                continue;
            };
            let speed = compute_reading_speed_in(p, &dataset.corpus, regime)?.words_per_second;
            let member = |score| Member {
                participant_id: p.participant_id.clone(),
                native_language: p.native_language.clone(),
                features: features.clone(),
                words_per_second: speed,
                score,
            };
            if p.is_native() {
                natives.push(member(max_score));
            } else if let Some(s) = dataset.score(&p.participant_id, test) {
                learners.push(member(s.score));
            } else {
                log::info!("participant {} has no {test} score; left out", p.participant_id);
            }
        }
        if learners.is_empty() {
            return Err(Error::Data(format!("no learners with a {test} score")));
        }
        Ok(Cohort {
            test,
            max_score,
            learners,
            natives,
        })
    }

    pub fn learner(&self, id: &str) -> Option<&Member> {
        self.learners.iter().find(|m| m.participant_id == id)
    }

    /// `(participant_id, native_language)` of every learner.
    pub fn languages(&self) -> impl Iterator<Item = (&str, &str)> {
        self.learners
            .iter()
            .map(|m| (m.participant_id.as_str(), m.native_language.as_str()))
    }

    fn resolve(&self, ids: &[String]) -> Result<Vec<&Member>> {
        ids.iter()
            .map(|id| {
                self.learner(id)
                    .ok_or_else(|| Error::InvalidArgument(format!("participant {id} is not a scored learner")))
            })
            .collect()
    }
}

type Extract = fn(&Member) -> FeatureVector;

fn feature_vector(m: &Member) -> FeatureVector {
    m.features.clone()
}

fn fit_and_predict(
    train: &[&Member],
    test: &[&Member],
    natives: &[Member],
    opts: &RidgeOptions,
    extract: Extract,
) -> Result<Vec<PredictionPair>> {
    let train_v: Vec<FeatureVector> = train.iter().map(|m| extract(m)).collect();
    let native_v: Vec<FeatureVector> = natives.iter().map(extract).collect();
    let scores: Vec<f64> = train.iter().map(|m| m.score).collect();
    let predictor = fit_predictor(
        &train_v.iter().collect::<Vec<_>>(),
        &scores,
        &native_v.iter().collect::<Vec<_>>(),
        opts,
    )?;
    test.iter()
        .map(|m| {
            Ok(PredictionPair {
                participant_id: m.participant_id.clone(),
                truth: m.score,
                predicted: predictor.predict(&extract(m))?,
            })
        })
        .collect()
}

/// Seeded k-fold assignment: `folds[i]` lists indices of fold `i`.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    folds
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaTuning {
    pub grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
}

impl LambdaTuning {
    pub fn new(grid: Vec<f64>, seed: u64) -> Self {
        LambdaTuning { grid, folds: 10, seed }
    }
}

/// The grid value with the lowest mean fold MAE; ties go to the smaller
/// value. The scaler is refit inside every fold and natives join every
/// training fold. With fewer learners than folds, `k` drops to the learner
/// count.
pub fn tune_lambda(train: &[&Member], natives: &[Member], opts: &RidgeOptions, tuning: &LambdaTuning) -> Result<f64> {
    if tuning.grid.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".into()));
    }
    if tuning.folds < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least 2 folds".into()));
    }
    let mut grid = tuning.grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let mut k = tuning.folds;
    if train.len() < k {
        log::warn!("{} training learners for {k} folds; using {} folds", train.len(), train.len());
        k = train.len();
    }
    if k < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least 2 training learners".into()));
    }
    let folds = kfold_indices(train.len(), k, tuning.seed);
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|g| (0..k).map(move |f| (g, f))).collect();
    let fold_mae: Vec<f64> = jobs
        .par_iter()
        .map(|&(g, f)| {
            let held: Vec<&Member> = folds[f].iter().map(|&i| train[i]).collect();
            let rest: Vec<&Member> = (0..k)
                .filter(|&o| o != f)
                .flat_map(|o| folds[o].iter().map(|&i| train[i]))
                .collect();
            let fold_opts = RidgeOptions { lambda: grid[g], ..*opts };
            let pairs = fit_and_predict(&rest, &held, natives, &fold_opts, feature_vector)?;
            let t: Vec<f64> = pairs.iter().map(|p| p.truth).collect();
            let p: Vec<f64> = pairs.iter().map(|p| p.predicted).collect();
            mae(&t, &p)
        })
        .collect::<Result<_>>()?;
    let mut best = (f64::INFINITY, grid[0]);
    for (g, &lambda) in grid.iter().enumerate() {
        let mean = fold_mae[g * k..(g + 1) * k].iter().sum::<f64>() / k as f64;
        if mean < best.0 {
            best = (mean, lambda);
        }
    }
    Ok(best.1)
}

/// Every learner predicted by a model fit on all other learners and the
/// natives.
pub fn loocv_predict(cohort: &Cohort, opts: &RidgeOptions) -> Result<EvalReport> {
    if cohort.learners.len() < 2 {
        return Err(Error::InvalidArgument("leave-one-out needs at least 2 learners".into()));
    }
    let pairs: Vec<Vec<PredictionPair>> = (0..cohort.learners.len())
        .into_par_iter()
        .map(|i| {
            let train: Vec<&Member> = cohort
                .learners
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, m)| m)
                .collect();
            fit_and_predict(&train, &[&cohort.learners[i]], &cohort.natives, opts, feature_vector)
        })
        .collect::<Result<_>>()?;
    EvalReport::from_pairs(pairs.into_iter().flatten().collect())
}

/// Constant predictor at the training mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanBaseline {
    pub mean: f64,
}

pub fn baseline_mean(train_scores: &[f64]) -> Result<MeanBaseline> {
    if train_scores.is_empty() {
        return Err(Error::InvalidArgument("no training scores".into()));
    }
    Ok(MeanBaseline {
        mean: crate::linalg::mean(train_scores),
    })
}

impl MeanBaseline {
    pub fn predict(&self) -> f64 {
        self.mean
    }
}

/// Ridge on reading speed alone, trained and tested like the main model.
pub fn baseline_speed(cohort: &Cohort, split: &DataSplit, opts: &RidgeOptions) -> Result<EvalReport> {
    let train = cohort.resolve(&split.train)?;
    let test = cohort.resolve(&split.test)?;
    EvalReport::from_pairs(fit_and_predict(&train, &test, &cohort.natives, opts, Member::speed_vector)?)
}

/// Pearson r between reading speed and score over the learners.
pub fn speed_correlation(cohort: &Cohort) -> Result<f64> {
    let speed: Vec<f64> = cohort.learners.iter().map(|m| m.words_per_second).collect();
    let score: Vec<f64> = cohort.learners.iter().map(|m| m.score).collect();
    pearson_r(&speed, &score)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvaluation {
    pub lambda: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub held_out_language: Option<String>,
    pub model: EvalReport,
    pub mean_baseline: EvalReport,
    pub speed_baseline: EvalReport,
}

/// Fits on the split's training learners (tuning the penalty when `tuning`
/// is given) and reports the model and both baselines on its test learners.
pub fn evaluate_split(
    cohort: &Cohort,
    split: &DataSplit,
    opts: &RidgeOptions,
    tuning: Option<&LambdaTuning>,
) -> Result<SplitEvaluation> {
    let train = cohort.resolve(&split.train)?;
    let test = cohort.resolve(&split.test)?;
    if train.len() < 2 {
        return Err(Error::InvalidArgument("split leaves fewer than 2 training learners".into()));
    }
    let lambda = match tuning {
        Some(t) => tune_lambda(&train, &cohort.natives, opts, t)?,
        None => opts.lambda,
    };
    let opts = RidgeOptions { lambda, ..*opts };
    let model = EvalReport::from_pairs(fit_and_predict(&train, &test, &cohort.natives, &opts, feature_vector)?)?;

    let train_scores: Vec<f64> = train.iter().map(|m| m.score).collect();
    let mean = baseline_mean(&train_scores)?;
    let mean_baseline = EvalReport::from_pairs(
        test.iter()
            .map(|m| PredictionPair {
                participant_id: m.participant_id.clone(),
                truth: m.score,
                predicted: mean.predict(),
            })
            .collect(),
    )?;
    let speed_baseline = baseline_speed(cohort, split, &opts)?;
    Ok(SplitEvaluation {
        lambda,
        n_train: train.len(),
        n_test: test.len(),
        held_out_language: split.held_out_language.clone(),
        model,
        mean_baseline,
        speed_baseline,
    })
}
