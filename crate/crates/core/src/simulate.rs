//! Synthetic readers with known generative parameters.
//!
//! Each reader has a proficiency `p` in `[0, 1]`; its profile is the linear
//! interpolation between a learner profile (`p = 0`) and a native profile
//! (`p = 1`). For every word, in order:
//!
//! 1. the word is skipped with probability `sigmoid(skip . x)`, where `x` is
//!    `[length, log frequency, surprisal]`;
//! 2. otherwise a first fixation is drawn with mean `FF . x`, followed by a
//!    refixation with mean `(FP - FF) . x`;
//! 3. from the second word on, with probability `p_regression`, the reader
//!    regresses to a uniformly chosen earlier word (mean `(RP - TF) . x`) and
//!    returns (mean `(TF - FP) . x`).
//!
//! Every duration is `max(30, round(speed * mean + Normal(0, noise)))` ms,
//! where `speed` is a per-reader log-normal factor. Events whose mean is not
//! positive are left out. Without regressions TF and RP equal FP, so the
//! coefficients a regression can recover are FF, FP, FP, FP
//! ([`ReaderProfile::effective`]).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    Corpus, Dataset, FixationEvent, Group, Participant, Regime, ScoreRecord, SentenceText, TestKind, TokenAnnotation,
    TrialRecord,
};
use crate::error::{Error, Result};

pub const MIN_DURATION_MS: u32 = 30;

/// `intercept + length * x0 + logfreq * x1 + surprisal * x2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub intercept: f64,
    pub length: f64,
    pub logfreq: f64,
    pub surprisal: f64,
}

impl Coefficients {
    pub const fn new(intercept: f64, length: f64, logfreq: f64, surprisal: f64) -> Self {
        Coefficients {
            intercept,
            length,
            logfreq,
            surprisal,
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        self.intercept + self.length * x[0] + self.logfreq * x[1] + self.surprisal * x[2]
    }

    /// `[length, logfreq, surprisal, intercept]`, the feature order.
    pub fn as_array(&self) -> [f64; 4] {
        [self.length, self.logfreq, self.surprisal, self.intercept]
    }

    fn lerp(a: &Self, b: &Self, t: f64) -> Self {
        let f = |u: f64, v: f64| u + (v - u) * t;
        Coefficients {
            intercept: f(a.intercept, b.intercept),
            length: f(a.length, b.length),
            logfreq: f(a.logfreq, b.logfreq),
            surprisal: f(a.surprisal, b.surprisal),
        }
    }

    fn minus(&self, o: &Self) -> Self {
        Coefficients {
            intercept: self.intercept - o.intercept,
            length: self.length - o.length,
            logfreq: self.logfreq - o.logfreq,
            surprisal: self.surprisal - o.surprisal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReaderProfile {
    pub proficiency: f64,
    pub ff: Coefficients,
    pub fp: Coefficients,
    pub tf: Coefficients,
    pub rp: Coefficients,
    /// Log-odds of skipping a word.
    pub skip: Coefficients,
    pub p_regression: f64,
    pub noise_sd_ms: f64,
}

impl ReaderProfile {
    pub fn default_native() -> Self {
        ReaderProfile {
            proficiency: 1.0,
            ff: Coefficients::new(220.0, 10.0, -10.0, 10.0),
            fp: Coefficients::new(300.0, 12.0, -12.0, 12.0),
            tf: Coefficients::new(320.0, 13.0, -13.0, 13.0),
            rp: Coefficients::new(370.0, 15.0, -15.0, 15.0),
            skip: Coefficients::new(0.0, -0.5, 0.08, -0.1),
            p_regression: 0.05,
            noise_sd_ms: 25.0,
        }
    }

    pub fn default_learner() -> Self {
        ReaderProfile {
            proficiency: 0.0,
            ff: Coefficients::new(100.0, 18.0, -14.0, 14.0),
            fp: Coefficients::new(120.0, 26.0, -20.0, 20.0),
            tf: Coefficients::new(140.0, 32.0, -25.0, 25.0),
            rp: Coefficients::new(180.0, 42.0, -34.0, 34.0),
            skip: Coefficients::new(-1.0, -0.5, 0.06, -0.1),
            p_regression: 0.25,
            noise_sd_ms: 25.0,
        }
    }

    /// The profile at proficiency `p` between `learner` and `native`.
    pub fn interpolate(learner: &ReaderProfile, native: &ReaderProfile, p: f64) -> ReaderProfile {
        let c = |a: &Coefficients, b: &Coefficients| Coefficients::lerp(a, b, p);
        ReaderProfile {
            proficiency: p,
            ff: c(&learner.ff, &native.ff),
            fp: c(&learner.fp, &native.fp),
            tf: c(&learner.tf, &native.tf),
            rp: c(&learner.rp, &native.rp),
            skip: c(&learner.skip, &native.skip),
            p_regression: learner.p_regression + (native.p_regression - learner.p_regression) * p,
            noise_sd_ms: learner.noise_sd_ms + (native.noise_sd_ms - learner.noise_sd_ms) * p,
        }
    }

    /// FF, FP, TF, RP coefficients as seen in data without regressions.
    pub fn effective(&self) -> [Coefficients; 4] {
        if self.p_regression == 0.0 {
            [self.ff, self.fp, self.fp, self.fp]
        } else {
            [self.ff, self.fp, self.tf, self.rp]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.proficiency) {
            return Err(Error::InvalidArgument(format!("proficiency {} outside [0, 1]", self.proficiency)));
        }
        if !(0.0..1.0).contains(&self.p_regression) {
            return Err(Error::InvalidArgument(format!("p_regression {} outside [0, 1)", self.p_regression)));
        }
        if !(self.noise_sd_ms >= 0.0 && self.noise_sd_ms.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise_sd_ms {} must be >= 0", self.noise_sd_ms)));
        }
        Ok(())
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

struct Emitter<'a> {
    rng: &'a mut ChaCha8Rng,
    noise: Normal<f64>,
    speed: f64,
    fixations: Vec<FixationEvent>,
}

impl Emitter<'_> {
    fn emit(&mut self, word_position: usize, mean: f64) {
        if mean <= 0.0 {
            return;
        }
        let d = (self.speed * mean + self.noise.sample(self.rng)).round();
        let duration_ms = if d < MIN_DURATION_MS as f64 {
            MIN_DURATION_MS
        } else {
            d as u32
        };
        self.fixations.push(FixationEvent {
            order: self.fixations.len(),
            word_position,
            duration_ms,
        });
    }
}

/// One trial of `sentence`. Returns `None` when every word was skipped.
pub fn generate_trial(
    profile: &ReaderProfile,
    speed: f64,
    participant_id: &str,
    sentence: &SentenceText,
    regime: Regime,
    rng: &mut ChaCha8Rng,
) -> Result<Option<TrialRecord>> {
    let x: Vec<[f64; 3]> = (1..=sentence.len())
        .map(|i| sentence.predictors(i))
        .collect::<Result<_>>()?;
    let noise = Normal::new(0.0, profile.noise_sd_ms).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let refix = profile.fp.minus(&profile.ff);
    let regress = profile.rp.minus(&profile.tf);
    let back = profile.tf.minus(&profile.fp);
    let mut em = Emitter {
        rng,
        noise,
        speed,
        fixations: Vec::new(),
    };
    for (i, xi) in x.iter().enumerate() {
        let position = i + 1;
        if em.rng.random::<f64>() < sigmoid(profile.skip.eval(*xi)) {
            continue;
        }
        em.emit(position, profile.ff.eval(*xi));
        em.emit(position, refix.eval(*xi));
        if position >= 2 && profile.p_regression > 0.0 && em.rng.random::<f64>() < profile.p_regression {
            let target = em.rng.random_range(1..position);
            em.emit(target, regress.eval(*xi));
            em.emit(position, back.eval(*xi));
        }
    }
    if em.fixations.is_empty() {
        return Ok(None);
    }
    Ok(Some(TrialRecord {
        participant_id: participant_id.to_string(),
        sentence_id: sentence.sentence_id.clone(),
        regime,
        fixations: em.fixations,
    }))
}

/// A reader who reads `sentences` in order. Fully skipped trials are dropped,
/// matching what the fixation file can represent.
pub fn generate_reader(
    participant_id: &str,
    group: Group,
    native_language: &str,
    profile: &ReaderProfile,
    speed: f64,
    sentences: &[(&SentenceText, Regime)],
    rng: &mut ChaCha8Rng,
) -> Result<Participant> {
    profile.validate()?;
    let mut trials = Vec::with_capacity(sentences.len());
    for (sentence, regime) in sentences {
        if let Some(t) = generate_trial(profile, speed, participant_id, sentence, *regime, rng)? {
            trials.push(t);
        }
    }
    Ok(Participant {
        participant_id: participant_id.to_string(),
        group,
        native_language: native_language.to_string(),
        trials,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub n_esl: usize,
    pub n_native: usize,
    /// Learner native languages, assigned round-robin.
    pub languages: Vec<String>,
    pub native_language: String,
    /// The first `fixed_sentences` corpus sentences are read by everybody
    /// (FIXED); 0 means all of them.
    pub fixed_sentences: usize,
    /// Sentences each reader draws from the rest of the corpus (ANY).
    pub any_per_reader: usize,
    pub learner: ReaderProfile,
    pub native: ReaderProfile,
    /// Learner proficiencies are drawn uniformly from this interval.
    pub proficiency_range: (f64, f64),
    /// Standard deviation of the log reading-speed factor.
    pub speed_log_sd: f64,
    pub max_score: f64,
    pub score_noise_sd: f64,
    pub round_scores: bool,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_esl: 50,
            n_native: 10,
            languages: ["Chinese", "Japanese", "Portuguese", "Spanish"].map(String::from).to_vec(),
            native_language: "English".into(),
            fixed_sentences: 0,
            any_per_reader: 0,
            learner: ReaderProfile::default_learner(),
            native: ReaderProfile::default_native(),
            proficiency_range: (0.0, 1.0),
            speed_log_sd: 0.25,
            max_score: 50.0,
            score_noise_sd: 2.0,
            round_scores: true,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReaderTruth {
    pub participant_id: String,
    pub group: Group,
    pub proficiency: f64,
    pub speed: f64,
}

#[derive(Debug, Clone)]
pub struct SimulatedCohort {
    pub dataset: Dataset,
    pub truth: Vec<ReaderTruth>,
}

impl SimulatedCohort {
    pub fn proficiency(&self, participant_id: &str) -> Option<f64> {
        self.truth
            .iter()
            .find(|t| t.participant_id == participant_id)
            .map(|t| t.proficiency)
    }
}

/// Learners `l001..` with `p` uniform on the configured range and SYNTHETIC scores
/// `p * max_score + Normal(0, score_noise_sd)` (rounded if configured,
/// clamped to the scale); natives `n001..` with `p = 1` and no score.
/// Reader `k` (learners first) draws from its own generator seeded with
/// `seed + k`.
pub fn generate_cohort(corpus: &Corpus, config: &SimulationConfig) -> Result<SimulatedCohort> {
    config.learner.validate()?;
    config.native.validate()?;
    let (lo, hi) = config.proficiency_range;
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(Error::InvalidArgument(format!("proficiency range ({lo}, {hi}) is not inside [0, 1]")));
    }
    if config.n_esl > 0 && config.languages.is_empty() {
        return Err(Error::InvalidArgument("no learner languages configured".into()));
    }
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("empty corpus".into()));
    }
    for s in corpus.sentences() {
        if let Some(t) = s.tokens.iter().find(|t| t.surprisal.is_none() || t.log_frequency.is_none()) {
            return Err(Error::MissingAnnotation {
                sentence_id: s.sentence_id.clone(),
                position: t.position,
                surface: t.surface.clone(),
                field: if t.log_frequency.is_none() { "log_frequency" } else { "surprisal" },
            });
        }
    }
    let n_fixed = match config.fixed_sentences {
        0 => corpus.len(),
        n => n.min(corpus.len()),
    };
    let (fixed, pool) = corpus.sentences().split_at(n_fixed);
    if config.any_per_reader > pool.len() {
        return Err(Error::InvalidArgument(format!(
            "{} ANY sentences per reader but only {} outside the fixed suite",
            config.any_per_reader,
            pool.len()
        )));
    }
    let speed_dist = Normal::new(0.0, config.speed_log_sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let score_dist = Normal::new(0.0, config.score_noise_sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let mut participants = Vec::new();
    let mut scores = Vec::new();
    let mut truth = Vec::new();
    for k in 0..config.n_esl + config.n_native {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(k as u64));
        let native = k >= config.n_esl;
        let (id, group, language, p) = if native {
            (format!("n{:03}", k - config.n_esl + 1), Group::Native, config.native_language.clone(), 1.0)
        } else {
            let (lo, hi) = config.proficiency_range;
            let p = lo + (hi - lo) * rng.random::<f64>();
            (format!("l{:03}", k + 1), Group::Esl, config.languages[k % config.languages.len()].clone(), p)
        };
        let speed = speed_dist.sample(&mut rng).exp();
        let profile = ReaderProfile::interpolate(&config.learner, &config.native, p);
        let mut plan: Vec<(&SentenceText, Regime)> = fixed.iter().map(|s| (s, Regime::Fixed)).collect();
        let mut drawn: Vec<&SentenceText> = pool.iter().collect();
        drawn.shuffle(&mut rng);
        plan.extend(drawn.into_iter().take(config.any_per_reader).map(|s| (s, Regime::Any)));
        participants.push(generate_reader(&id, group, &language, &profile, speed, &plan, &mut rng)?);

        if !native {
            let raw = p * config.max_score + score_dist.sample(&mut rng);
            let raw = if config.round_scores { raw.round() } else { raw };
            scores.push(ScoreRecord {
                participant_id: id.clone(),
                test: TestKind::Synthetic,
                score: raw.clamp(0.0, config.max_score),
                max_score: config.max_score,
            });
        }
        truth.push(ReaderTruth {
            participant_id: id,
            group,
            proficiency: p,
            speed,
        });
    }
    participants.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));
    scores.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));
    Ok(SimulatedCohort {
        dataset: Dataset {
            corpus: corpus.clone(),
            participants,
            scores,
        },
        truth,
    })
}

const TAGS: [(&str, &str, &str); 10] = [
    ("DET", "DT", "det"),
    ("NOUN", "NN", "nsubj"),
    ("NOUN", "NNS", "obj"),
    ("VERB", "VBD", "root"),
    ("VERB", "VBZ", "root"),
    ("ADJ", "JJ", "amod"),
    ("ADP", "IN", "case"),
    ("ADV", "RB", "advmod"),
    ("PRON", "PRP", "nsubj"),
    ("NOUN", "NN", "obl"),
];

/// Random annotated sentences: words of 1 to 12 letters, log frequencies
/// between -1 and -21 that fall with length, and surprisal drawn uniformly
/// from `[0.5, 18)`.
pub fn synthetic_corpus(n_sentences: usize, words_per_sentence: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentences = (0..n_sentences)
        .map(|s| {
            let tokens = (1..=words_per_sentence)
                .map(|position| {
                    let len = rng.random_range(1..=12usize);
                    let surface: String = (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect();
                    let (upos, xpos, deprel) = TAGS[rng.random_range(0..TAGS.len())];
                    let mut t = TokenAnnotation::new(position, &surface, upos, xpos, deprel);
                    t.log_frequency = Some(-1.0 - 0.5 * len as f64 - rng.random_range(0.0..14.0));
                    t.surprisal = Some(rng.random_range(0.5..18.0));
                    t
                })
                .collect();
            SentenceText {
                sentence_id: format!("s{:03}", s + 1),
                tokens,
            }
        })
        .collect();
    Corpus::new(sentences).expect("generated sentence ids are unique")
}
