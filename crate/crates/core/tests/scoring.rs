mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gazescore::corpus::{Regime, TestKind};
use gazescore::features::{build_matrix, fit_ols, FeatureSet, FeatureVector};
use gazescore::scoring::{
    compute_eyescores, fit_predictor, loocv_predict, make_split, mae, pearson_r, ridge_fit, ridge_solve, tune_lambda,
    Cohort, LambdaTuning, PredictorArtifact, RidgeOptions,
};
use gazescore::simulate::{generate_cohort, synthetic_corpus, SimulationConfig};

use common::{fixed_spec, measure_all};

fn vectors(rows: &[Vec<f64>]) -> Vec<FeatureVector> {
    let names = Arc::new((0..rows[0].len()).map(|i| format!("f{i}")).collect::<Vec<_>>());
    rows.iter()
        .enumerate()
        .map(|(i, r)| FeatureVector::new(format!("p{i:03}"), names.clone(), r.clone()).unwrap())
        .collect()
}

fn matrix(n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), n)
}

fn sim_cohort(seed: u64, n_esl: usize) -> Cohort {
    let corpus = synthetic_corpus(12, 8, seed);
    let config = SimulationConfig {
        n_esl,
        n_native: 4,
        seed,
        ..SimulationConfig::default()
    };
    let ds = generate_cohort(&corpus, &config).unwrap().dataset;
    let m = build_matrix(&ds.corpus, &measure_all(&ds), fixed_spec(FeatureSet::Wp, true)).unwrap();
    Cohort::from_dataset(&ds, &m, TestKind::Synthetic, Regime::Fixed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eyescore_ignores_input_order(learners in matrix(8, 4), natives in matrix(3, 4), seed in any::<u64>()) {
        let l = vectors(&learners);
        let n = vectors(&natives);
        let mut lr: Vec<&FeatureVector> = l.iter().collect();
        let mut nr: Vec<&FeatureVector> = n.iter().collect();
        let Ok(base) = compute_eyescores(&lr, &nr) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        lr.shuffle(&mut rng);
        nr.shuffle(&mut rng);
        let shuffled = compute_eyescores(&lr, &nr).unwrap();
        let a: BTreeMap<_, _> = base.learner_scores.into_iter().collect();
        let b: BTreeMap<_, _> = shuffled.learner_scores.into_iter().collect();
        for (id, x) in &a {
            prop_assert!((x - b[id]).abs() <= 1e-12);
            prop_assert!((-1.0..=1.0).contains(x));
        }
    }

    #[test]
    fn ridge_without_penalty_is_ols(x in matrix(20, 3), y in prop::collection::vec(-50.0f64..50.0, 20)) {
        let ols = fit_ols(&x, &y).unwrap();
        let (theta, b) = ridge_solve(&x, &y, 0.0).unwrap();
        prop_assert!((b - ols.intercept).abs() <= 1e-6);
        for (t, c) in theta.iter().zip(&ols.coefficients) {
            prop_assert!((t - c).abs() <= 1e-6);
        }
    }

    #[test]
    fn penalty_shrinks_weights(x in matrix(15, 4), y in prop::collection::vec(-50.0f64..50.0, 15), lo in 0.01f64..1.0, ratio in 2.0f64..100.0) {
        let norm = |l: f64| ridge_solve(&x, &y, l).unwrap().0.iter().map(|t| t * t).sum::<f64>();
        prop_assert!(norm(lo * ratio) <= norm(lo) + 1e-9);
    }

    #[test]
    fn ridge_ignores_row_order(x in matrix(12, 3), y in prop::collection::vec(-50.0f64..50.0, 12), seed in any::<u64>()) {
        let (theta, b) = ridge_solve(&x, &y, 1.0).unwrap();
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let xs: Vec<&Vec<f64>> = idx.iter().map(|&i| &x[i]).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        let (theta2, b2) = ridge_solve(&xs, &ys, 1.0).unwrap();
        prop_assert!((b - b2).abs() <= 1e-9);
        for (p, q) in theta.iter().zip(&theta2) {
            prop_assert!((p - q).abs() <= 1e-9);
        }
    }

    #[test]
    fn split_partitions_members(sizes in prop::collection::vec(3usize..20, 2..6), per in 0usize..3, seed in any::<u64>()) {
        let members: Vec<(String, String)> = sizes
            .iter()
            .enumerate()
            .flat_map(|(l, &n)| (0..n).map(move |i| (format!("L{l}-{i:02}"), format!("L{l}"))))
            .collect();
        let split = make_split(members.iter().map(|(a, b)| (a.as_str(), b.as_str())), Some("L0"), per, seed).unwrap();
        let train: BTreeSet<_> = split.train.iter().collect();
        let test: BTreeSet<_> = split.test.iter().collect();
        prop_assert!(train.is_disjoint(&test));
        prop_assert_eq!(train.len() + test.len(), members.len());
        prop_assert_eq!(split.test.len(), sizes[0] + per * (sizes.len() - 1));
        prop_assert!(split.train.iter().all(|id| !id.starts_with("L0-")));
        let again = make_split(members.iter().map(|(a, b)| (a.as_str(), b.as_str())), Some("L0"), per, seed).unwrap();
        prop_assert_eq!(split, again);
    }

    #[test]
    fn correlation_and_error_basics(x in prop::collection::vec(-100.0f64..100.0, 3..30), a in 0.1f64..10.0, b in -50.0f64..50.0) {
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        if let Ok(r) = pearson_r(&x, &y) {
            prop_assert!((r - 1.0).abs() <= 1e-9);
            let neg: Vec<f64> = y.iter().map(|v| -v).collect();
            prop_assert!((pearson_r(&x, &neg).unwrap() + 1.0).abs() <= 1e-9);
        }
        prop_assert_eq!(mae(&x, &x).unwrap(), 0.0);
        prop_assert!((mae(&x, &x.iter().map(|v| v + b).collect::<Vec<_>>()).unwrap() - b.abs()).abs() <= 1e-9);
    }
}

#[test]
fn native_rows_pull_toward_the_top_score() {
    let l = vectors(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
    let n = vectors(&[vec![4.0], vec![4.0]]);
    let lr: Vec<&FeatureVector> = l.iter().collect();
    let nr: Vec<&FeatureVector> = n.iter().collect();
    let plain = ridge_fit(&lr, &[0.0, 1.0, 2.0, 3.0], 0.0, None).unwrap();
    let augmented = ridge_fit(&lr, &[0.0, 1.0, 2.0, 3.0], 0.0, Some((&nr, 10.0))).unwrap();
    assert!((plain.weights[0] - 1.0).abs() < 1e-9);
    assert!(augmented.weights[0] > plain.weights[0]);
    assert!(augmented.predict(&n[0]).unwrap() > plain.predict(&n[0]).unwrap());
}

#[test]
fn lambda_tuning_is_seeded() {
    let cohort = sim_cohort(4, 24);
    let train: Vec<_> = cohort.learners.iter().collect();
    let opts = RidgeOptions::new(1.0, cohort.max_score);
    let grid = vec![0.01, 0.1, 1.0, 10.0, 100.0];
    let a = tune_lambda(&train, &cohort.natives, &opts, &LambdaTuning::new(grid.clone(), 3)).unwrap();
    let b = tune_lambda(&train, &cohort.natives, &opts, &LambdaTuning::new(grid.clone(), 3)).unwrap();
    assert_eq!(a, b);
    assert!(grid.contains(&a));
}

#[test]
fn loocv_predicts_each_learner_once_within_range() {
    let cohort = sim_cohort(5, 15);
    let report = loocv_predict(&cohort, &RidgeOptions::new(1.0, cohort.max_score)).unwrap();
    let ids: BTreeSet<_> = report.pairs.iter().map(|p| p.participant_id.clone()).collect();
    let expected: BTreeSet<_> = cohort.learners.iter().map(|m| m.participant_id.clone()).collect();
    assert_eq!(ids, expected);
    assert!(report.pairs.iter().all(|p| (0.0..=cohort.max_score).contains(&p.predicted)));
}

#[test]
fn predictor_artifact_reproduces_predictions() {
    let cohort = sim_cohort(6, 20);
    let train: Vec<_> = cohort.learners.iter().collect();
    let opts = RidgeOptions::new(1.0, cohort.max_score);
    let features: Vec<&FeatureVector> = train.iter().map(|m| &m.features).collect();
    let scores: Vec<f64> = train.iter().map(|m| m.score).collect();
    let natives: Vec<&FeatureVector> = cohort.natives.iter().map(|m| &m.features).collect();
    let predictor = fit_predictor(&features, &scores, &natives, &opts).unwrap();
    let json = serde_json::to_string(&predictor.to_artifact()).unwrap();
    let back: PredictorArtifact = serde_json::from_str(&json).unwrap();
    let restored = gazescore::scoring::Predictor::from_artifact(&back).unwrap();
    for v in features {
        assert_eq!(predictor.predict(v).unwrap(), restored.predict(v).unwrap());
    }
}
