//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gazescore::corpus::{
    Dataset, FixationEvent, Group, Participant, Regime, SentenceText, TestKind, TokenAnnotation, TrialRecord,
};
use gazescore::features::{
    build_feature_space, build_matrix, extract, fit_ols, FeatureSet, FeatureSpec,
};
use gazescore::langmodel::TrigramLM;
use gazescore::measures::{compute_word_measures, measure_participant};
use gazescore::scoring::{
    compute_eyescores, evaluate_split, loocv_predict, make_split, ridge_solve, Cohort, LambdaTuning, RidgeOptions,
    DEFAULT_LAMBDA_GRID,
};
use gazescore::simulate::{generate_cohort, generate_reader, synthetic_corpus, ReaderProfile, SimulationConfig};

use common::{eyescore_validity, fixed_spec, measure_all, split_groups, KnOracle};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sentence(id: &str, n: usize) -> SentenceText {
    SentenceText {
        sentence_id: id.into(),
        tokens: (1..=n)
            .map(|i| TokenAnnotation::new(i, &"w".repeat(i % 7 + 1), "X", "X", "dep"))
            .collect(),
    }
}

fn trial(id: &str, path: &[usize], durations: &[u32]) -> TrialRecord {
    TrialRecord {
        participant_id: "p".into(),
        sentence_id: id.into(),
        regime: Regime::Fixed,
        fixations: path
            .iter()
            .zip(durations)
            .enumerate()
            .map(|(order, (&word_position, &duration_ms))| FixationEvent {
                order,
                word_position,
                duration_ms,
            })
            .collect(),
    }
}

// ---------------------------------------------------------------- 1

fn criterion_1() -> Outcome {
    let s3 = sentence("s", 3);
    let m = compute_word_measures(&trial("s", &[1, 2, 1, 3], &[200, 150, 100, 250]), &s3).map_err(|e| e.to_string())?;
    ensure(
        (m[1].ff_ms, m[1].fp_ms, m[0].tf_ms, m[1].rp_ms) == (150.0, 150.0, 300.0, 250.0),
        || format!("trace [1,2,1,3]: got FF(2)={} FP(2)={} TF(1)={} RP(2)={}", m[1].ff_ms, m[1].fp_ms, m[0].tf_ms, m[1].rp_ms),
    )?;

    let s4 = sentence("s", 4);
    let m = compute_word_measures(&trial("s", &[1, 2, 3, 4], &[210, 180, 240, 190]), &s4).map_err(|e| e.to_string())?;
    ensure(
        m.iter()
            .zip([210.0, 180.0, 240.0, 190.0])
            .all(|(w, d)| [w.ff_ms, w.fp_ms, w.tf_ms, w.rp_ms] == [d; 4]),
        || "left-to-right reading".into(),
    )?;
    let m = compute_word_measures(&trial("s", &[1, 3], &[200, 220]), &s3).map_err(|e| e.to_string())?;
    ensure(m[1].skipped && m[1].tf_ms == 0.0 && !m[0].skipped, || "skip rule".into())?;
    let m = compute_word_measures(&trial("s", &[1, 1, 2, 1], &[100, 50, 80, 70]), &s3).map_err(|e| e.to_string())?;
    ensure(
        (m[0].ff_ms, m[0].fp_ms, m[0].tf_ms, m[0].rp_ms) == (100.0, 150.0, 220.0, 150.0),
        || format!("refixation: {:?}", m[0]),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..1000 {
        let n = rng.random_range(1..=15);
        let len = rng.random_range(1..=30);
        let path: Vec<usize> = (0..len).map(|_| rng.random_range(1..=n)).collect();
        let durations: Vec<u32> = (0..len).map(|_| rng.random_range(1..=600)).collect();
        let s = sentence("s", n);
        let m = compute_word_measures(&trial("s", &path, &durations), &s).map_err(|e| e.to_string())?;
        for w in &m {
            ensure(w.ff_ms <= w.fp_ms && w.fp_ms <= w.tf_ms && w.fp_ms <= w.rp_ms, || {
                format!("trial {k}: ordering violated at word {}", w.word_position)
            })?;
        }
        let tf: f64 = m.iter().map(|w| w.tf_ms).sum();
        let total: u32 = durations.iter().sum();
        ensure(tf == total as f64, || format!("trial {k}: sum TF {tf} != {total}"))?;
    }
    Ok("trace exact; 1000 random trials hold orderings and conservation".into())
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let lines = ["a b", "a b", "a c"];
    let lm = TrigramLM::train(lines, 1).map_err(|e| e.to_string())?;
    let oracle = KnOracle::new(&lines);
    let symbols: Vec<String> = lm.symbols().map(String::from).chain(["zzz".to_string()]).collect();
    let predictable: Vec<String> = lm.predictable().map(String::from).collect();
    let mut contexts = 0;
    for u in &symbols {
        for v in &symbols {
            let sum: f64 = predictable.iter().map(|w| lm.prob([u, v], w)).sum();
            ensure((sum - 1.0).abs() <= 1e-9, || format!("P(.|{u},{v}) sums to {sum}"))?;
            contexts += 1;
        }
    }
    for v in &symbols {
        let sum: f64 = predictable.iter().map(|w| lm.prob_bigram(v, w)).sum();
        ensure((sum - 1.0).abs() <= 1e-9, || format!("P(.|{v}) sums to {sum}"))?;
    }

    let bigram = lm.prob_bigram("a", "b");
    let trigram = lm.prob(["<s>", "a"], "b");
    // by hand: P1(b) = 0.4/5 + 0.56/5, P2(b|a) = 0.5/2 + 0.5 P1(b),
    // P3(b|<s> a) = 0.5/3 + (1/3 + 1.5)/3 P2(b|a)
    let p1 = 0.4 / 5.0 + 0.56 / 5.0;
    let p2 = 0.25 + 0.5 * p1;
    let p3 = 0.5 / 3.0 + (1.0 / 3.0 + 1.5) / 3.0 * p2;
    ensure((bigram - p2).abs() <= 1e-9, || format!("P(b|a) = {bigram}, hand value {p2}"))?;
    ensure((trigram - p3).abs() <= 1e-9, || format!("P(b|<s>,a) = {trigram}, hand value {p3}"))?;
    ensure((bigram - oracle.prob(&["a"], "b")).abs() <= 1e-9, || "bigram differs from oracle".into())?;
    for u in &symbols {
        for v in &symbols {
            for w in &predictable {
                let (a, b) = (lm.prob([u, v], w), oracle.prob(&[u, v], w));
                ensure((a - b).abs() <= 1e-9, || format!("P({w}|{u},{v}) = {a}, oracle {b}"))?;
            }
        }
    }
    Ok(format!(
        "{contexts} contexts sum to 1; P(b|a) = {bigram:.6}, P(b|<s>,a) = {trigram:.6} match hand values and oracle"
    ))
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    let learner = ReaderProfile::default_learner();
    let native = ReaderProfile::default_native();
    let spec = FeatureSpec::new(FeatureSet::Wp, Regime::Fixed, false);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let corpus = synthetic_corpus(60, 15, 100 + k);
        let mut profile = ReaderProfile::interpolate(&learner, &native, k as f64 / 19.0);
        profile.p_regression = 0.0;
        profile.noise_sd_ms = 10.0;
        let plan: Vec<_> = corpus.sentences().iter().map(|s| (s, Regime::Fixed)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(k);
        let reader = generate_reader(&format!("r{k}"), Group::Esl, "x", &profile, 1.0, &plan, &mut rng)
            .map_err(|e| e.to_string())?;
        let measures = vec![measure_participant(&reader, &corpus).map_err(|e| e.to_string())?];
        let space = build_feature_space(&corpus, &measures, spec).map_err(|e| e.to_string())?;
        let (v, _) = extract(&space, &corpus, &measures[0]).map_err(|e| e.to_string())?;
        for (m, coefs) in profile.effective().iter().enumerate() {
            for (t, truth) in coefs.as_array().iter().enumerate() {
                let got = v.values[m * 4 + t];
                let rel = (got - truth).abs() / truth.abs();
                worst = worst.max(rel);
                ensure(rel <= 0.05, || {
                    format!("reader {k}: {} = {got:.3}, true {truth:.3} ({:.1}% off)", v.names[m * 4 + t], rel * 100.0)
                })?;
            }
        }
    }

    let corpus = synthetic_corpus(250, 20, 7);
    let mut profile = ReaderProfile::interpolate(&learner, &native, 0.5);
    profile.p_regression = 0.0;
    profile.noise_sd_ms = 10.0;
    // a frequent skipper, so the 5000 words carry enough skip events
    profile.skip.intercept = 2.0;
    let plan: Vec<_> = corpus.sentences().iter().map(|s| (s, Regime::Fixed)).collect();
    let reader = generate_reader("skip", Group::Esl, "x", &profile, 1.0, &plan, &mut ChaCha8Rng::seed_from_u64(99))
        .map_err(|e| e.to_string())?;
    let measures = vec![measure_participant(&reader, &corpus).map_err(|e| e.to_string())?];
    let space = build_feature_space(&corpus, &measures, spec).map_err(|e| e.to_string())?;
    let (v, _) = extract(&space, &corpus, &measures[0]).map_err(|e| e.to_string())?;
    let beta_len = v.values[16];
    ensure((beta_len - profile.skip.length).abs() <= 0.1, || {
        format!("skip beta_length {beta_len:.4}, true {}", profile.skip.length)
    })?;
    Ok(format!(
        "worst duration coefficient error {:.2}%; skip beta_length {beta_len:.3} (true {}) at 5000 words",
        worst * 100.0,
        profile.skip.length
    ))
}

// ---------------------------------------------------------------- 4

fn pinv_oracle(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let d = x[0].len();
    let a = DMatrix::from_fn(x.len(), d + 1, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] });
    let pinv = a.pseudo_inverse(1e-12).expect("svd");
    (pinv * DVector::from_column_slice(y)).iter().copied().collect()
}

/// Gradient descent on the ridge objective over `[intercept, theta]`, with
/// the step set from a power-iteration estimate of the curvature.
fn ridge_gd_oracle(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
    let d = x[0].len() + 1;
    let a = DMatrix::from_fn(x.len(), d, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] });
    let mut h = a.transpose() * &a;
    for j in 1..d {
        h[(j, j)] += lambda;
    }
    let g0 = a.transpose() * DVector::from_column_slice(y);
    let mut v = DVector::from_element(d, 1.0);
    let mut top = 0.0;
    for _ in 0..500 {
        let w = &h * &v;
        top = w.norm();
        v = w / top;
    }
    let step = 1.0 / top;
    let mut beta = DVector::zeros(d);
    for _ in 0..2_000_000 {
        let grad = &h * &beta - &g0;
        if grad.amax() < 1e-11 {
            break;
        }
        beta -= grad * step;
    }
    beta.iter().copied().collect()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_ols = 0.0f64;
    let mut worst_ridge = 0.0f64;
    for k in 0..50 {
        let d = rng.random_range(1..=10);
        let n = rng.random_range(d + 2..=50);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();

        let fit = fit_ols(&x, &y).map_err(|e| format!("instance {k}: {e}"))?;
        let oracle = pinv_oracle(&x, &y);
        let mut diff = (fit.intercept - oracle[0]).abs();
        for j in 0..d {
            diff = diff.max((fit.coefficients[j] - oracle[j + 1]).abs());
        }
        worst_ols = worst_ols.max(diff);
        ensure(diff <= 1e-6, || format!("instance {k}: OLS differs from pseudo-inverse by {diff:e}"))?;

        let lambda = rng.random_range(0.1..10.0);
        let (theta, b) = ridge_solve(&x, &y, lambda).map_err(|e| format!("instance {k}: {e}"))?;
        let oracle = ridge_gd_oracle(&x, &y, lambda);
        let mut diff = (b - oracle[0]).abs();
        for j in 0..d {
            diff = diff.max((theta[j] - oracle[j + 1]).abs());
        }
        worst_ridge = worst_ridge.max(diff);
        ensure(diff <= 1e-6, || format!("instance {k}: ridge differs from gradient descent by {diff:e}"))?;
    }
    Ok(format!("max deviation: OLS {worst_ols:.1e}, ridge {worst_ridge:.1e}"))
}

// ---------------------------------------------------------------- 5

fn scaled_participant(p: &Participant, id: &str, factor: f64) -> Participant {
    Participant {
        participant_id: id.into(),
        trials: p
            .trials
            .iter()
            .map(|t| TrialRecord {
                participant_id: id.into(),
                ..t.scaled(factor)
            })
            .collect(),
        ..p.clone()
    }
}

fn with_participants(ds: &Dataset, mut participants: Vec<Participant>) -> Dataset {
    participants.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));
    Dataset {
        corpus: ds.corpus.clone(),
        participants,
        scores: ds.scores.clone(),
    }
}

fn ranking(scores: &[(String, f64)]) -> Vec<String> {
    let mut s = scores.to_vec();
    s.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    s.into_iter().map(|(id, _)| id).collect()
}

fn criterion_5() -> Outcome {
    let corpus = synthetic_corpus(20, 10, 5);
    let config = SimulationConfig {
        n_esl: 20,
        n_native: 5,
        seed: 5,
        ..SimulationConfig::default()
    };
    let ds = generate_cohort(&corpus, &config).map_err(|e| e.to_string())?.dataset;
    let target = "l003";
    let original = ds.participant(target).unwrap();

    let mut dup = ds.participants.clone();
    dup.push(scaled_participant(original, "l003x3", 3.0));
    let dup_ds = with_participants(&ds, dup);
    let replaced_ds = with_participants(
        &ds,
        ds.participants
            .iter()
            .map(|p| if p.participant_id == target { scaled_participant(p, target, 3.0) } else { p.clone() })
            .collect(),
    );

    let mut worst = 0.0f64;
    for set in [FeatureSet::Wfc, FeatureSet::SClusters, FeatureSet::Transitions] {
        let spec = fixed_spec(set, true);
        let measures = measure_all(&dup_ds);
        let matrix = build_matrix(&dup_ds.corpus, &measures, spec).map_err(|e| e.to_string())?;
        let a = matrix.get(target).unwrap();
        let b = matrix.get("l003x3").unwrap();
        let diff = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(diff);
        ensure(diff <= 1e-9, || format!("{set}: scaled duplicate differs by {diff:e}"))?;

        let (learners, natives) = split_groups(&dup_ds, &matrix);
        let run = compute_eyescores(&learners, &natives).map_err(|e| e.to_string())?;
        let score = |id: &str| run.learner_scores.iter().find(|(p, _)| p == id).unwrap().1;
        let gap = (score(target) - score("l003x3")).abs();
        ensure(gap <= 1e-9, || format!("{set}: EyeScore of scaled duplicate differs by {gap:e}"))?;

        let base = {
            let m = build_matrix(&ds.corpus, &measure_all(&ds), spec).map_err(|e| e.to_string())?;
            let (l, n) = split_groups(&ds, &m);
            compute_eyescores(&l, &n).map_err(|e| e.to_string())?.learner_scores
        };
        let replaced = {
            let m = build_matrix(&replaced_ds.corpus, &measure_all(&replaced_ds), spec).map_err(|e| e.to_string())?;
            let (l, n) = split_groups(&replaced_ds, &m);
            compute_eyescores(&l, &n).map_err(|e| e.to_string())?.learner_scores
        };
        for ((id, x), (_, y)) in base.iter().zip(&replaced) {
            ensure((x - y).abs() <= 1e-9, || format!("{set}: EyeScore of {id} moved by {:e}", (x - y).abs()))?;
        }
        ensure(ranking(&base) == ranking(&replaced), || format!("{set}: cohort ranking changed"))?;
    }
    Ok(format!("WFC, S-Clusters, Transitions: max vector difference {worst:.1e}; EyeScores and ranking unchanged"))
}

// ---------------------------------------------------------------- 6

fn validity_cohort(seed: u64) -> gazescore::simulate::SimulatedCohort {
    let corpus = synthetic_corpus(40, 12, seed);
    let config = SimulationConfig {
        n_esl: 50,
        n_native: 10,
        seed,
        ..SimulationConfig::default()
    };
    generate_cohort(&corpus, &config).expect("simulation")
}

/// Returns the pass/fail detail and the serialized report.
fn run_criterion_6(seed: u64) -> (Outcome, String) {
    let sim = validity_cohort(seed);
    let v = eyescore_validity(&sim, fixed_spec(FeatureSet::Wfc, true));
    let report = serde_json::to_string(&(
        &v.run.learner_scores,
        &v.run.native_scores,
        v.r_eyescore,
        v.r_speed,
    ))
    .unwrap();
    let outcome = ensure(v.r_eyescore >= 0.8, || format!("r(EyeScore, p) = {:.3} < 0.8", v.r_eyescore))
        .and_then(|_| {
            ensure(v.r_eyescore > v.r_speed, || {
                format!("r(EyeScore, p) = {:.3} not above r(speed, p) = {:.3}", v.r_eyescore, v.r_speed)
            })
        })
        .map(|_| format!("r(EyeScore, p) = {:.3}, r(speed, p) = {:.3}", v.r_eyescore, v.r_speed));
    (outcome, report)
}

fn criterion_6() -> Outcome {
    run_criterion_6(6).0
}

// ---------------------------------------------------------------- 7

fn run_criterion_7(seed: u64) -> (Outcome, String) {
    let corpus = synthetic_corpus(80, 12, seed);
    let config = SimulationConfig {
        n_esl: 100,
        n_native: 10,
        languages: (1..=5).map(|i| format!("L{i}")).collect(),
        max_score: 50.0,
        score_noise_sd: 2.0,
        round_scores: false,
        seed,
        ..SimulationConfig::default()
    };
    let sim = generate_cohort(&corpus, &config).expect("simulation");
    let ds = &sim.dataset;
    let spec = fixed_spec(FeatureSet::Wp, true);
    let matrix = build_matrix(&ds.corpus, &measure_all(ds), spec).expect("features");
    let cohort = Cohort::from_dataset(ds, &matrix, TestKind::Synthetic, Regime::Fixed).expect("cohort");
    let split = make_split(cohort.languages(), Some("L1"), 4, seed).expect("split");
    let opts = RidgeOptions::new(1.0, config.max_score);
    let tuning = LambdaTuning::new(DEFAULT_LAMBDA_GRID.to_vec(), seed);
    let eval = evaluate_split(&cohort, &split, &opts, Some(&tuning)).expect("evaluation");
    let report = serde_json::to_string(&eval).unwrap();

    let r = eval.model.pearson_r.unwrap_or(f64::NAN);
    let mae = eval.model.mae;
    let speed_r = eval.speed_baseline.pearson_r.unwrap_or(f64::NEG_INFINITY);
    let outcome = ensure(r >= 0.9, || format!("ridge r = {r:.3} < 0.9"))
        .and_then(|_| ensure(mae <= 3.0, || format!("ridge MAE = {mae:.3} > 3")))
        .and_then(|_| {
            ensure(eval.mean_baseline.mae > mae, || {
                format!("mean baseline MAE {:.3} not above ridge {mae:.3}", eval.mean_baseline.mae)
            })
        })
        .and_then(|_| {
            ensure(eval.speed_baseline.mae > mae && speed_r < r, || {
                format!(
                    "speed baseline (r {speed_r:.3}, MAE {:.3}) not worse than ridge (r {r:.3}, MAE {mae:.3})",
                    eval.speed_baseline.mae
                )
            })
        })
        .map(|_| {
            format!(
                "train {} / test {}, lambda {}: ridge r {r:.3} MAE {mae:.3}; mean baseline MAE {:.3}; speed baseline r {speed_r:.3} MAE {:.3}",
                eval.n_train, eval.n_test, eval.lambda, eval.mean_baseline.mae, eval.speed_baseline.mae
            )
        });
    (outcome, report)
}

fn criterion_7() -> Outcome {
    run_criterion_7(7).0
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Outcome {
    let mut members = Vec::new();
    for (lang, n) in [("Chinese", 36), ("Japanese", 36), ("Portuguese", 36), ("Spanish", 37)] {
        for i in 0..n {
            members.push((format!("{lang}-{i:02}"), lang.to_string()));
        }
    }
    let split = make_split(members.iter().map(|(a, b)| (a.as_str(), b.as_str())), Some("Portuguese"), 7, 8)
        .map_err(|e| e.to_string())?;
    ensure(split.train.len() == 88 && split.test.len() == 57, || {
        format!("split sizes train {} / test {}", split.train.len(), split.test.len())
    })?;

    let corpus = synthetic_corpus(10, 10, 8);
    let config = SimulationConfig {
        n_esl: 53,
        n_native: 5,
        seed: 8,
        ..SimulationConfig::default()
    };
    let ds = generate_cohort(&corpus, &config).map_err(|e| e.to_string())?.dataset;
    let matrix = build_matrix(&ds.corpus, &measure_all(&ds), fixed_spec(FeatureSet::Wp, false)).map_err(|e| e.to_string())?;
    let cohort = Cohort::from_dataset(&ds, &matrix, TestKind::Synthetic, Regime::Fixed).map_err(|e| e.to_string())?;
    let report = loocv_predict(&cohort, &RidgeOptions::new(1.0, 50.0)).map_err(|e| e.to_string())?;
    let ids: BTreeSet<&str> = report.pairs.iter().map(|p| p.participant_id.as_str()).collect();
    ensure(report.n == 53 && report.pairs.len() == 53 && ids.len() == 53, || {
        format!("LOOCV emitted {} predictions for {} distinct learners", report.pairs.len(), ids.len())
    })?;
    Ok("held-out split: train 88 / test 57; LOOCV with lambda = 1: 53 predictions".into())
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let reader_effects = generate_cohort(
        &synthetic_corpus(120, 12, 9),
        &SimulationConfig {
            n_esl: 50,
            n_native: 10,
            seed: 9,
            ..SimulationConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let spec = fixed_spec(FeatureSet::Wfc, true);
    let strong = gazescore::scoring::split_half_consistency(
        &reader_effects.dataset.corpus,
        &reader_effects.dataset.participants,
        spec,
        9,
    )
    .map_err(|e| e.to_string())?;
    ensure(strong.r >= 0.8, || format!("reader-dominated cohort: half-score r = {:.3} < 0.8", strong.r))?;

    let corpus = synthetic_corpus(120, 12, 90);
    let config = SimulationConfig {
        n_esl: 100,
        n_native: 10,
        proficiency_range: (0.5, 0.5),
        speed_log_sd: 0.0,
        seed: 90,
        ..SimulationConfig::default()
    };
    let noise = generate_cohort(&corpus, &config).map_err(|e| e.to_string())?;
    let weak = gazescore::scoring::split_half_consistency(&noise.dataset.corpus, &noise.dataset.participants, spec, 9)
        .map_err(|e| e.to_string())?;
    ensure(weak.n == 100 && weak.r.abs() < 0.2, || {
        format!("pure-noise cohort: half-score r = {:.3} over {} learners", weak.r, weak.n)
    })?;
    Ok(format!(
        "reader-dominated r = {:.3} (Spearman-Brown {:.3}); pure noise r = {:.3} at n = {}",
        strong.r, strong.spearman_brown, weak.r, weak.n
    ))
}

// ---------------------------------------------------------------- 10

fn criterion_10() -> Outcome {
    let (_, a6) = run_criterion_6(6);
    let (_, b6) = run_criterion_6(6);
    let (_, a7) = run_criterion_7(7);
    let (_, b7) = run_criterion_7(7);
    ensure(a6 == b6, || "EyeScore reports differ between runs".into())?;
    ensure(a7 == b7, || "prediction reports differ between runs".into())?;
    Ok(format!("reports identical ({} and {} bytes)", a6.len(), a7.len()))
}

/// Name, check, and time budget.
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("metric hand-trace suite", criterion_1, Some(Duration::from_secs(5))),
        ("Kneser-Ney oracle", criterion_2, Some(Duration::from_secs(1))),
        ("coefficient recovery", criterion_3, Some(Duration::from_secs(30))),
        ("solver oracles", criterion_4, None),
        ("speed invariance end to end", criterion_5, None),
        ("EyeScore validity", criterion_6, Some(Duration::from_secs(60))),
        ("prediction validity", criterion_7, Some(Duration::from_secs(60))),
        ("protocol fidelity", criterion_8, None),
        ("split-half consistency", criterion_9, None),
        ("determinism", criterion_10, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > *l => Err(format!("took {:.2} s, limit {} s", elapsed.as_secs_f64(), l.as_secs())),
            (o, _) => o,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => {
                failed += 1;
                ("FAIL", d.as_str())
            }
        };
        println!(
            "criterion {:>2} {status}  {name} ({:.2} s): {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        println!("all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
