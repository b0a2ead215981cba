use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use gazescore::corpus::{load_corpus, write_corpus, Dataset, Group, TestKind};
use gazescore::features::{build_matrix, write_features, write_manifest, FeatureMatrix, FeatureSpec, FeatureVector};
use gazescore::langmodel::{annotate_corpus, load_model, save_model, train_from_file};
use gazescore::measures::{compute_reading_speed_in, measure_participant, ParticipantMeasures};
use gazescore::scoring::{
    compute_eyescores, evaluate_split, fit_predictor, loocv_predict, make_split, pearson_r, speed_correlation,
    split_half_consistency, tune_lambda, Cohort, ConsistencyReport, DataSplit, EvalReport, LambdaTuning, Member,
    PredictionPair, PredictorArtifact, RidgeOptions, SplitEvaluation,
};
use gazescore::simulate::{generate_cohort, synthetic_corpus};

use crate::config::RunConfig;
use crate::error::{io_err, CliError, CliResult};
use crate::report::{render_svg, summary, Point, ReportHead, Scatter};

/// Files produced by a command, held back until everything has been
/// computed so a failure leaves no partial output.
struct Outputs {
    dir: PathBuf,
    files: Vec<(&'static str, Vec<u8>)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &'static str, bytes: Vec<u8>) {
        self.files.push((name, bytes));
    }

    fn json(&mut self, name: &'static str, value: &impl Serialize) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    fn write(self) -> CliResult<()> {
        fs::create_dir_all(&self.dir).map_err(io_err(&self.dir))?;
        for (name, bytes) in self.files {
            let path = self.dir.join(name);
            fs::write(&path, bytes).map_err(io_err(&path))?;
            log::info!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> gazescore::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn load_dataset(c: &RunConfig, scores_required: bool) -> CliResult<Dataset> {
    let tokens = c.input("tokens")?;
    let fixations = c.input("fixations")?;
    let scores = if scores_required {
        Some(c.input("scores")?)
    } else {
        c.optional_input("scores")?
    };
    Ok(Dataset::load(tokens, fixations, scores)?)
}

fn measure_all(ds: &Dataset) -> CliResult<Vec<ParticipantMeasures>> {
    Ok(ds
        .participants
        .iter()
        .map(|p| measure_participant(p, &ds.corpus))
        .collect::<gazescore::Result<_>>()?)
}

fn split_groups<'a>(ds: &Dataset, matrix: &'a FeatureMatrix) -> (Vec<&'a FeatureVector>, Vec<&'a FeatureVector>) {
    let mut learners = Vec::new();
    let mut natives = Vec::new();
    for (v, p) in matrix.vectors.iter().zip(&ds.participants) {
        if p.is_native() {
            natives.push(v);
        } else {
            learners.push(v);
        }
    }
    (learners, natives)
}

#[derive(Serialize)]
struct SpecEcho {
    feature_set: String,
    regime: String,
    speed_normalized: bool,
    include_self_transitions: bool,
    n_features: usize,
}

impl SpecEcho {
    fn new(spec: FeatureSpec, n_features: usize) -> Self {
        SpecEcho {
            feature_set: spec.set.to_string(),
            regime: spec.regime.to_string(),
            speed_normalized: spec.speed_normalized,
            include_self_transitions: spec.include_self_transitions,
            n_features,
        }
    }
}

// ------------------------------------------------------------ ingest-validate

#[derive(Serialize)]
struct IngestSummary {
    sentences: usize,
    tokens: usize,
    annotated_tokens: usize,
    participants: usize,
    learners: usize,
    natives: usize,
    fixed_trials: usize,
    any_trials: usize,
    fixations: usize,
    scores: BTreeMap<String, usize>,
}

pub fn ingest_validate(c: &RunConfig) -> CliResult<()> {
    let ds = load_dataset(c, false)?;
    measure_all(&ds)?;
    let tokens = ds.corpus.sentences().iter().flat_map(|s| &s.tokens);
    let mut scores = BTreeMap::new();
    for s in &ds.scores {
        *scores.entry(s.test.to_string()).or_insert(0) += 1;
    }
    let trials = ds.participants.iter().flat_map(|p| &p.trials);
    let summary = IngestSummary {
        sentences: ds.corpus.len(),
        tokens: tokens.clone().count(),
        annotated_tokens: tokens
            .filter(|t| t.log_frequency.is_some() && t.surprisal.is_some())
            .count(),
        participants: ds.participants.len(),
        learners: ds.participants.iter().filter(|p| p.group == Group::Esl).count(),
        natives: ds.participants.iter().filter(|p| p.is_native()).count(),
        fixed_trials: trials.clone().filter(|t| t.regime == gazescore::corpus::Regime::Fixed).count(),
        any_trials: trials.clone().filter(|t| t.regime == gazescore::corpus::Regime::Any).count(),
        fixations: trials.map(|t| t.fixations.len()).sum(),
        scores,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

// ------------------------------------------------------------ language model

#[derive(Serialize)]
struct LmSummary {
    vocabulary: usize,
    tokens: u64,
    discounts: [[f64; 3]; 3],
    training_perplexity: f64,
}

pub fn lm_train(c: &RunConfig) -> CliResult<()> {
    let corpus = c.input("lm_corpus")?;
    let model = c.output("lm_model")?;
    if c.min_count == 0 {
        return Err(CliError::Usage("config field `min_count` must be at least 1".into()));
    }
    let lm = train_from_file(corpus, c.min_count)?;
    let text = fs::read_to_string(corpus).map_err(io_err(corpus))?;
    let summary = LmSummary {
        vocabulary: lm.predictable().count(),
        tokens: lm.frequencies().total(),
        discounts: lm.discounts().map(|d| d.0),
        training_perplexity: lm.perplexity(text.lines()),
    };
    if let Some(parent) = model.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    save_model(&lm, model)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

pub fn annotate_surprisal(c: &RunConfig) -> CliResult<()> {
    let tokens = c.input("tokens")?;
    let model = c.input("lm_model")?;
    let out = c.output("out_dir")?;
    let mut corpus = load_corpus(tokens)?;
    let lm = load_model(model)?;
    annotate_corpus(&mut corpus, &lm);
    let mut outputs = Outputs::new(out);
    outputs.add("tokens.csv", csv_bytes(|b| write_corpus(b, &corpus))?);
    outputs.write()
}

// ------------------------------------------------------------ features

pub fn features(c: &RunConfig) -> CliResult<()> {
    let spec = c.feature_spec()?;
    let out = c.output("out_dir")?;
    let ds = load_dataset(c, false)?;
    let matrix = build_matrix(&ds.corpus, &measure_all(&ds)?, spec)?;
    let mut outputs = Outputs::new(out);
    let io = |e: std::io::Error| CliError::Data(format!("cannot serialize features: {e}"));
    let mut buf = Vec::new();
    write_features(&mut buf, &matrix).map_err(io)?;
    outputs.add("features.csv", buf);
    let mut buf = Vec::new();
    write_manifest(&mut buf, &matrix.space).map_err(io)?;
    outputs.add("features.manifest", buf);
    outputs.json("quality.json", &matrix.quality)?;
    if !matrix.quality.is_clean() {
        log::warn!("{} zero-mean normalization contexts set to 0", matrix.quality.zero_contexts.len());
    }
    outputs.write()
}

// ------------------------------------------------------------ eyescore

#[derive(Serialize)]
struct EyeScoreRow {
    participant_id: String,
    group: Group,
    native_language: String,
    eyescore: f64,
    words_per_second: f64,
}

#[derive(Serialize)]
struct Correlation {
    test: TestKind,
    n: usize,
    r_eyescore: Option<f64>,
    r_reading_speed: Option<f64>,
}

#[derive(Serialize)]
struct EyeScoreReport<'a> {
    kind: &'static str,
    config: &'a RunConfig,
    features: SpecEcho,
    n_learners: usize,
    n_natives: usize,
    zero_contexts: usize,
    scores: Vec<EyeScoreRow>,
    correlations: Vec<Correlation>,
    scatter: Scatter,
}

fn correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson_r(x, y).ok()
}

pub fn eyescore(c: &RunConfig) -> CliResult<()> {
    let spec = c.feature_spec()?;
    let out = c.output("out_dir")?;
    let test = c.test_kind()?;
    let ds = load_dataset(c, false)?;
    let matrix = build_matrix(&ds.corpus, &measure_all(&ds)?, spec)?;
    let (learners, natives) = split_groups(&ds, &matrix);
    if learners.len() < 2 {
        return Err(CliError::Data(format!("EyeScore needs at least 2 learners, found {}", learners.len())));
    }
    if natives.is_empty() {
        return Err(CliError::Data("EyeScore needs at least 1 native reader".into()));
    }
    let run = compute_eyescores(&learners, &natives)?;

    let mut rows = Vec::new();
    for (id, score) in run.learner_scores.iter().chain(&run.native_scores) {
        let p = ds.participant(id).expect("matrix rows come from the dataset");
        rows.push(EyeScoreRow {
            participant_id: id.clone(),
            group: p.group,
            native_language: p.native_language.clone(),
            eyescore: *score,
            words_per_second: compute_reading_speed_in(p, &ds.corpus, spec.regime)?.words_per_second,
        });
    }
    let tests = match test {
        Some(t) => vec![t],
        None => ds.tests(),
    };
    let mut correlations = Vec::new();
    let mut scatter = Scatter {
        x_label: "test score".into(),
        y_label: "EyeScore".into(),
        r: None,
        mae: None,
        points: Vec::new(),
    };
    for (k, &t) in tests.iter().enumerate() {
        let scored: Vec<(&EyeScoreRow, f64)> = rows
            .iter()
            .filter(|r| r.group == Group::Esl)
            .filter_map(|r| ds.score(&r.participant_id, t).map(|s| (r, s.score)))
            .collect();
        let truth: Vec<f64> = scored.iter().map(|(_, s)| *s).collect();
        let eye: Vec<f64> = scored.iter().map(|(r, _)| r.eyescore).collect();
        let speed: Vec<f64> = scored.iter().map(|(r, _)| r.words_per_second).collect();
        let r_eyescore = correlation(&eye, &truth);
        if k == 0 {
            scatter = Scatter {
                x_label: format!("{t} score"),
                y_label: "EyeScore".into(),
                r: r_eyescore,
                mae: None,
                points: scored
                    .iter()
                    .map(|(r, s)| Point {
                        participant_id: r.participant_id.clone(),
                        x: *s,
                        y: r.eyescore,
                    })
                    .collect(),
            };
        }
        correlations.push(Correlation {
            test: t,
            n: scored.len(),
            r_eyescore,
            r_reading_speed: correlation(&speed, &truth),
        });
    }

    let mut csv = String::from("participant_id,group,native_language,eyescore,words_per_second");
    for t in &tests {
        csv.push_str(&format!(",{t}"));
    }
    csv.push('\n');
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}",
            r.participant_id, r.group, r.native_language, r.eyescore, r.words_per_second
        ));
        for &t in &tests {
            csv.push(',');
            if let Some(s) = ds.score(&r.participant_id, t) {
                csv.push_str(&s.score.to_string());
            }
        }
        csv.push('\n');
    }

    let report = EyeScoreReport {
        kind: "eyescore",
        config: c,
        features: SpecEcho::new(spec, matrix.space.len()),
        n_learners: learners.len(),
        n_natives: natives.len(),
        zero_contexts: matrix.quality.zero_contexts.len(),
        scores: rows,
        correlations,
        scatter,
    };
    let mut outputs = Outputs::new(out);
    outputs.json("eyescore.json", &report)?;
    outputs.add("eyescore_scatter.csv", csv.into_bytes());
    outputs.write()
}

// ------------------------------------------------------------ prediction

struct Prepared {
    spec: FeatureSpec,
    n_features: usize,
    cohort: Cohort,
    opts: RidgeOptions,
    tuning: Option<LambdaTuning>,
    participants: Vec<gazescore::corpus::Participant>,
    corpus: gazescore::corpus::Corpus,
}

fn prepare(c: &RunConfig) -> CliResult<Prepared> {
    let spec = c.feature_spec()?;
    c.check_ridge()?;
    c.output("out_dir")?;
    let test = c.test_kind()?;
    let ds = load_dataset(c, true)?;
    let test = match test {
        Some(t) => t,
        None => match ds.tests().as_slice() {
            [] => return Err(CliError::Data("the scores file has no records".into())),
            [t] => *t,
            many => {
                let names: Vec<String> = many.iter().map(|t| t.to_string()).collect();
                return Err(CliError::Usage(format!(
                    "scores cover several tests ({}); set config field `test`",
                    names.join(", ")
                )));
            }
        },
    };
    let matrix = build_matrix(&ds.corpus, &measure_all(&ds)?, spec)?;
    let mut cohort = Cohort::from_dataset(&ds, &matrix, test, spec.regime)?;
    if let Some(m) = c.max_score {
        cohort.max_score = m;
        for n in &mut cohort.natives {
            n.score = m;
        }
    }
    let opts = RidgeOptions {
        clamp: c.clamp,
        ..RidgeOptions::new(c.lambda, cohort.max_score)
    };
    let tuning = c.lambda_grid.as_ref().map(|grid| LambdaTuning {
        grid: grid.clone(),
        folds: c.folds,
        seed: c.seed,
    });
    Ok(Prepared {
        spec,
        n_features: matrix.space.len(),
        cohort,
        opts,
        tuning,
        participants: ds.participants,
        corpus: ds.corpus,
    })
}

fn fit_on(members: &[&Member], natives: &[Member], opts: &RidgeOptions) -> CliResult<gazescore::scoring::Predictor> {
    let features: Vec<&FeatureVector> = members.iter().map(|m| &m.features).collect();
    let scores: Vec<f64> = members.iter().map(|m| m.score).collect();
    let native_features: Vec<&FeatureVector> = natives.iter().map(|m| &m.features).collect();
    Ok(fit_predictor(&features, &scores, &native_features, opts)?)
}

fn split_for(p: &Prepared, c: &RunConfig) -> CliResult<DataSplit> {
    Ok(make_split(
        p.cohort.languages(),
        c.held_out_language.as_deref(),
        c.per_language_sample,
        c.seed,
    )?)
}

fn members<'a>(cohort: &'a Cohort, ids: &[String]) -> Vec<&'a Member> {
    ids.iter().filter_map(|id| cohort.learner(id)).collect()
}

fn prediction_scatter(test: TestKind, report: &EvalReport) -> Scatter {
    Scatter {
        x_label: format!("true {test} score"),
        y_label: format!("predicted {test} score"),
        r: report.pearson_r,
        mae: Some(report.mae),
        points: report
            .pairs
            .iter()
            .map(|p| Point {
                participant_id: p.participant_id.clone(),
                x: p.truth,
                y: p.predicted,
            })
            .collect(),
    }
}

fn predictions_csv(report: &EvalReport) -> Vec<u8> {
    let mut csv = String::from("participant_id,truth,predicted\n");
    for p in &report.pairs {
        csv.push_str(&format!("{},{},{}\n", p.participant_id, p.truth, p.predicted));
    }
    csv.into_bytes()
}

#[derive(Serialize)]
struct PredictReport<'a> {
    kind: &'static str,
    config: &'a RunConfig,
    features: SpecEcho,
    test: TestKind,
    max_score: f64,
    mode: &'static str,
    lambda: f64,
    n_train: usize,
    n_test: usize,
    held_out_language: Option<String>,
    split: Option<DataSplit>,
    evaluation: EvalReport,
    scatter: Scatter,
}

pub fn predict(c: &RunConfig) -> CliResult<()> {
    let p = prepare(c)?;
    let cohort = &p.cohort;
    let all: Vec<&Member> = cohort.learners.iter().collect();
    let (mode, lambda, evaluation, predictor, split) = if c.loocv {
        let lambda = match &p.tuning {
            Some(t) => tune_lambda(&all, &cohort.natives, &p.opts, t)?,
            None => p.opts.lambda,
        };
        let opts = RidgeOptions { lambda, ..p.opts };
        let evaluation = loocv_predict(cohort, &opts)?;
        let predictor = fit_on(&all, &cohort.natives, &opts)?;
        ("loocv", lambda, evaluation, predictor, None)
    } else {
        let split = split_for(&p, c)?;
        let train = members(cohort, &split.train);
        let test = members(cohort, &split.test);
        if train.is_empty() {
            return Err(CliError::Data("the split leaves no training learners".into()));
        }
        let lambda = match &p.tuning {
            Some(t) => tune_lambda(&train, &cohort.natives, &p.opts, t)?,
            None => p.opts.lambda,
        };
        let opts = RidgeOptions { lambda, ..p.opts };
        let predictor = fit_on(&train, &cohort.natives, &opts)?;
        let pairs = test
            .iter()
            .map(|m| {
                Ok(PredictionPair {
                    participant_id: m.participant_id.clone(),
                    truth: m.score,
                    predicted: predictor.predict(&m.features)?,
                })
            })
            .collect::<gazescore::Result<Vec<_>>>()?;
        ("split", lambda, EvalReport::from_pairs(pairs)?, predictor, Some(split))
    };
    let (n_train, n_test) = match &split {
        Some(s) => (s.train.len(), s.test.len()),
        None => (cohort.learners.len() - 1, cohort.learners.len()),
    };
    let artifact: PredictorArtifact = predictor.to_artifact();
    let report = PredictReport {
        kind: "predict",
        config: c,
        features: SpecEcho::new(p.spec, p.n_features),
        test: cohort.test,
        max_score: cohort.max_score,
        mode,
        lambda,
        n_train,
        n_test,
        held_out_language: split.as_ref().and_then(|s| s.held_out_language.clone()),
        scatter: prediction_scatter(cohort.test, &evaluation),
        split,
        evaluation,
    };
    let mut outputs = Outputs::new(c.output("out_dir")?);
    outputs.json("predict.json", &report)?;
    outputs.add("predictions.csv", predictions_csv(&report.evaluation));
    outputs.json("model.json", &artifact)?;
    outputs.write()
}

#[derive(Serialize)]
struct EvaluateReport<'a> {
    kind: &'static str,
    config: &'a RunConfig,
    features: SpecEcho,
    test: TestKind,
    max_score: f64,
    split: DataSplit,
    evaluation: SplitEvaluation,
    r_reading_speed: Option<f64>,
    consistency: Option<ConsistencyReport>,
    consistency_error: Option<String>,
    scatter: Scatter,
}

pub fn evaluate(c: &RunConfig) -> CliResult<()> {
    if c.loocv {
        return Err(CliError::Usage("`evaluate` runs a held-out split; use `predict` for leave-one-out".into()));
    }
    let p = prepare(c)?;
    let split = split_for(&p, c)?;
    let evaluation = evaluate_split(&p.cohort, &split, &p.opts, p.tuning.as_ref())?;
    let (consistency, consistency_error) = match split_half_consistency(&p.corpus, &p.participants, p.spec, c.seed) {
        Ok(r) => (Some(r), None),
        Err(e) => {
            log::warn!("split-half consistency unavailable: {e}");
            (None, Some(e.to_string()))
        }
    };
    let report = EvaluateReport {
        kind: "evaluate",
        config: c,
        features: SpecEcho::new(p.spec, p.n_features),
        test: p.cohort.test,
        max_score: p.cohort.max_score,
        split,
        r_reading_speed: speed_correlation(&p.cohort).ok(),
        consistency,
        consistency_error,
        scatter: prediction_scatter(p.cohort.test, &evaluation.model),
        evaluation,
    };
    let mut outputs = Outputs::new(c.output("out_dir")?);
    outputs.json("evaluate.json", &report)?;
    outputs.add("predictions.csv", predictions_csv(&report.evaluation.model));
    outputs.write()
}

// ------------------------------------------------------------ simulate

pub fn simulate(c: &RunConfig) -> CliResult<()> {
    let out = c.output("out_dir")?;
    let sim = &c.simulation;
    if sim.sentences == 0 || sim.words_per_sentence == 0 {
        return Err(CliError::Usage(
            "config fields `simulation.sentences` and `simulation.words_per_sentence` must be positive".into(),
        ));
    }
    let corpus = synthetic_corpus(sim.sentences, sim.words_per_sentence, c.seed);
    let config = gazescore::simulate::SimulationConfig {
        seed: c.seed,
        ..sim.cohort.clone()
    };
    let cohort = generate_cohort(&corpus, &config)?;
    let ds = &cohort.dataset;
    let mut outputs = Outputs::new(out);
    outputs.add("tokens.csv", csv_bytes(|b| write_corpus(b, &ds.corpus))?);
    outputs.add("fixations.csv", csv_bytes(|b| gazescore::corpus::write_fixations(b, &ds.participants))?);
    outputs.add("scores.csv", csv_bytes(|b| gazescore::corpus::write_scores(b, &ds.scores))?);
    let mut truth = String::from("participant_id,group,proficiency,speed\n");
    for t in &cohort.truth {
        truth.push_str(&format!("{},{},{},{}\n", t.participant_id, t.group, t.proficiency, t.speed));
    }
    outputs.add("truth.csv", truth.into_bytes());
    outputs.json("simulation.json", &config)?;
    outputs.write()
}

// ------------------------------------------------------------ report

pub fn report(input: &Path, output: Option<&Path>) -> CliResult<()> {
    if !input.exists() {
        return Err(CliError::Usage(format!("report {} does not exist", input.display())));
    }
    let text = fs::read_to_string(input).map_err(io_err(input))?;
    if text.trim().is_empty() {
        return Err(CliError::Data(format!("report {} is empty", input.display())));
    }
    let head: ReportHead = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{} is not a gazescore report: {e}", input.display())))?;
    let title = format!("{} ({})", head.scatter.y_label, head.kind);
    let svg = render_svg(&title, &head.scatter)?;
    let output = output.map_or_else(|| input.with_extension("svg"), Path::to_path_buf);
    fs::write(&output, svg).map_err(io_err(&output))?;
    print!("{}", summary(&head.kind, &head.scatter));
    println!("plot: {}", output.display());
    Ok(())
}
