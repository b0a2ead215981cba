//! Data model and CSV ingestion.
//!
//! Three header-bearing UTF-8 CSV files make up a dataset:
//!
//! | file            | columns                                                                                 |
//! |-----------------|-----------------------------------------------------------------------------------------|
//! | `tokens.csv`    | `sentence_id,position,surface,upos,xpos,deprel[,log_frequency,surprisal]`                |
//! | `fixations.csv` | `participant_id,group,native_language,sentence_id,regime,order,word_position,duration_ms` |
//! | `scores.csv`    | `participant_id,test,score,max_score`                                                   |
//!
//! The two trailing token columns are optional on input and may be empty;
//! they are filled by surprisal annotation. Writers always emit them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOKEN_COLUMNS: [&str; 6] = ["sentence_id", "position", "surface", "upos", "xpos", "deprel"];
pub const TOKEN_ANNOTATION_COLUMNS: [&str; 2] = ["log_frequency", "surprisal"];
pub const FIXATION_COLUMNS: [&str; 8] = [
    "participant_id",
    "group",
    "native_language",
    "sentence_id",
    "regime",
    "order",
    "word_position",
    "duration_ms",
];
pub const SCORE_COLUMNS: [&str; 4] = ["participant_id", "test", "score", "max_score"];

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $label)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s.to_ascii_uppercase().as_str() {
                    $($label => Ok($name::$variant),)+
                    _ => Err(format!(
                        "expected one of {}, got `{s}`",
                        [$($label),+].join("/")
                    )),
                }
            }
        }
    };
}

label_enum! {
    /// Whether every reader saw the same sentence (FIXED) or readers saw
    /// different sentences (ANY).
    Regime { Fixed => "FIXED", Any => "ANY" }
}

label_enum! {
    Group { Native => "NATIVE", Esl => "ESL" }
}

label_enum! {
    TestKind { Met => "MET", Toefl => "TOEFL", Synthetic => "SYNTHETIC" }
}

impl TestKind {
    /// The fixed top of the scale, if the test has one.
    pub fn fixed_max_score(self) -> Option<f64> {
        match self {
            TestKind::Met => Some(50.0),
            TestKind::Toefl => Some(60.0),
            TestKind::Synthetic => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenAnnotation {
    /// 1-based.
    pub position: usize,
    pub surface: String,
    pub length_chars: usize,
    pub upos: String,
    pub xpos: String,
    pub deprel: String,
    /// Natural log of relative corpus frequency.
    pub log_frequency: Option<f64>,
    /// Negative log probability in context; never negative once set.
    pub surprisal: Option<f64>,
}

impl TokenAnnotation {
    pub fn new(position: usize, surface: &str, upos: &str, xpos: &str, deprel: &str) -> Self {
        TokenAnnotation {
            position,
            surface: surface.to_string(),
            length_chars: surface.chars().count(),
            upos: upos.to_string(),
            xpos: xpos.to_string(),
            deprel: deprel.to_string(),
            log_frequency: None,
            surprisal: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceText {
    pub sentence_id: String,
    pub tokens: Vec<TokenAnnotation>,
}

impl SentenceText {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    /// `[length, log_frequency, surprisal]` for the token at 1-based `position`.
    pub fn predictors(&self, position: usize) -> Result<[f64; 3]> {
        let token = &self.tokens[position - 1];
        let missing = |field| Error::MissingAnnotation {
            sentence_id: self.sentence_id.clone(),
            position,
            surface: token.surface.clone(),
            field,
        };
        let log_frequency = token.log_frequency.ok_or_else(|| missing("log_frequency"))?;
        let surprisal = token.surprisal.ok_or_else(|| missing("surprisal"))?;
        Ok([token.length_chars as f64, log_frequency, surprisal])
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.tokens.is_empty() {
            return Err(format!("sentence {} has no tokens", self.sentence_id));
        }
        for (i, token) in self.tokens.iter().enumerate() {
            if token.position != i + 1 {
                return Err(format!(
                    "non-contiguous positions in sentence {}: expected {}, found {}",
                    self.sentence_id,
                    i + 1,
                    token.position
                ));
            }
            if token.length_chars != token.surface.chars().count() {
                return Err(format!(
                    "length_chars of `{}` does not match its surface",
                    token.surface
                ));
            }
            if let Some(s) = token.surprisal {
                if !(s.is_finite() && s >= 0.0) {
                    return Err(format!("surprisal {s} of `{}` is not a finite value >= 0", token.surface));
                }
            }
            if let Some(f) = token.log_frequency {
                if !f.is_finite() {
                    return Err(format!("log_frequency of `{}` is not finite", token.surface));
                }
            }
        }
        Ok(())
    }
}

/// Sentences in file order with lookup by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    sentences: Vec<SentenceText>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(sentences: Vec<SentenceText>) -> Result<Self> {
        let mut index = HashMap::with_capacity(sentences.len());
        for (i, sentence) in sentences.iter().enumerate() {
            sentence.validate().map_err(Error::Data)?;
            if index.insert(sentence.sentence_id.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate sentence_id {}", sentence.sentence_id)));
            }
        }
        Ok(Corpus { sentences, index })
    }

    pub fn get(&self, sentence_id: &str) -> Option<&SentenceText> {
        self.index.get(sentence_id).map(|&i| &self.sentences[i])
    }

    /// Rank of the sentence in file order; this is the canonical sentence order.
    pub fn rank(&self, sentence_id: &str) -> Option<usize> {
        self.index.get(sentence_id).copied()
    }

    pub fn sentences(&self) -> &[SentenceText] {
        &self.sentences
    }

    pub fn sentences_mut(&mut self) -> &mut [SentenceText] {
        &mut self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn into_sentences(self) -> Vec<SentenceText> {
        self.sentences
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixationEvent {
    /// 0-based, strictly increasing within a trial.
    pub order: usize,
    /// 1-based token index.
    pub word_position: usize,
    pub duration_ms: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub participant_id: String,
    pub sentence_id: String,
    pub regime: Regime,
    pub fixations: Vec<FixationEvent>,
}

impl TrialRecord {
    pub fn total_duration_ms(&self) -> u64 {
        self.fixations.iter().map(|f| u64::from(f.duration_ms)).sum()
    }

    /// Multiplies every duration by `factor`, rounding to whole milliseconds.
    pub fn scaled(&self, factor: f64) -> TrialRecord {
        let mut trial = self.clone();
        for f in &mut trial.fixations {
            f.duration_ms = ((f64::from(f.duration_ms) * factor).round() as u32).max(1);
        }
        trial
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub participant_id: String,
    pub group: Group,
    pub native_language: String,
    pub trials: Vec<TrialRecord>,
}

impl Participant {
    pub fn trials_in(&self, regime: Regime) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(move |t| t.regime == regime)
    }

    pub fn is_native(&self) -> bool {
        self.group == Group::Native
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub participant_id: String,
    pub test: TestKind,
    pub score: f64,
    pub max_score: f64,
}

/// A fully loaded dataset. Participants are sorted by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub corpus: Corpus,
    pub participants: Vec<Participant>,
    pub scores: Vec<ScoreRecord>,
}

impl Dataset {
    pub fn load(tokens: impl AsRef<Path>, fixations: impl AsRef<Path>, scores: Option<&Path>) -> Result<Self> {
        let corpus = load_corpus(tokens)?;
        let participants = load_fixations(fixations, &corpus)?;
        let scores = match scores {
            Some(path) => load_scores(path)?,
            None => Vec::new(),
        };
        Ok(Dataset {
            corpus,
            participants,
            scores,
        })
    }

    pub fn participant(&self, id: &str) -> Option<&Participant> {
        self.participants
            .binary_search_by(|p| p.participant_id.as_str().cmp(id))
            .ok()
            .map(|i| &self.participants[i])
    }

    pub fn score(&self, participant_id: &str, test: TestKind) -> Option<&ScoreRecord> {
        self.scores
            .iter()
            .find(|s| s.participant_id == participant_id && s.test == test)
    }

    pub fn tests(&self) -> Vec<TestKind> {
        let mut tests: Vec<_> = self.scores.iter().map(|s| s.test).collect();
        tests.sort();
        tests.dedup();
        tests
    }

    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| {
            let path = dir.join(name);
            File::create(&path).map_err(|e| Error::io(path, e))
        };
        write_corpus(create("tokens.csv")?, &self.corpus)?;
        write_fixations(create("fixations.csv")?, &self.participants)?;
        write_scores(create("scores.csv")?, &self.scores)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

struct Rows<R: Read> {
    file: String,
    reader: csv::Reader<R>,
}

impl<R: Read> Rows<R> {
    fn new(file: &str, input: R) -> Self {
        let reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::None)
            .from_reader(input);
        Rows {
            file: file.to_string(),
            reader,
        }
    }

    fn parse_err(&self, line: u64, field: &str, message: impl Into<String>) -> Error {
        Error::Parse {
            file: self.file.clone(),
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn csv_err(&self, e: csv::Error) -> Error {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        self.parse_err(line, "-", e.to_string())
    }

    /// Checks the header against `required` plus an optional trailing block.
    fn check_header(&mut self, required: &[&str], optional: &[&str]) -> Result<usize> {
        let header = match self.reader.headers() {
            Ok(h) => h.clone(),
            Err(e) => return Err(self.csv_err(e)),
        };
        let names: Vec<&str> = header.iter().collect();
        let full: Vec<&str> = required.iter().chain(optional).copied().collect();
        if names == required {
            Ok(required.len())
        } else if !optional.is_empty() && names == full {
            Ok(full.len())
        } else {
            Err(self.parse_err(1, "header", format!("expected `{}`, found `{}`", full.join(","), names.join(","))))
        }
    }

    fn records(&mut self) -> Result<Vec<(u64, csv::StringRecord)>> {
        let mut out = Vec::new();
        for record in self.reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                Error::Parse {
                    file: self.file.clone(),
                    line,
                    field: "-".into(),
                    message: e.to_string(),
                }
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            out.push((line, record));
        }
        Ok(out)
    }

    fn field<'r>(&self, rec: &'r csv::StringRecord, line: u64, idx: usize, name: &str) -> Result<&'r str> {
        rec.get(idx)
            .ok_or_else(|| self.parse_err(line, name, "missing value"))
    }

    fn parse<T: FromStr>(&self, rec: &csv::StringRecord, line: u64, idx: usize, name: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.field(rec, line, idx, name)?;
        raw.parse::<T>()
            .map_err(|e| self.parse_err(line, name, format!("cannot parse `{raw}`: {e}")))
    }

    fn parse_opt_f64(&self, rec: &csv::StringRecord, line: u64, idx: usize, name: &str) -> Result<Option<f64>> {
        match rec.get(idx) {
            None | Some("") => Ok(None),
            Some(raw) => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|e| self.parse_err(line, name, format!("cannot parse `{raw}`: {e}"))),
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    read_corpus(open(path)?, &label(path))
}

pub fn read_corpus(input: impl Read, file: &str) -> Result<Corpus> {
    let mut rows = Rows::new(file, input);
    rows.check_header(&TOKEN_COLUMNS, &TOKEN_ANNOTATION_COLUMNS)?;

    let mut sentences: Vec<SentenceText> = Vec::new();
    let mut open_sentence: HashMap<String, usize> = HashMap::new();
    let mut last_id: Option<String> = None;

    for (line, rec) in rows.records()? {
        let sentence_id = rows.field(&rec, line, 0, "sentence_id")?;
        if sentence_id.is_empty() {
            return Err(rows.parse_err(line, "sentence_id", "empty sentence_id"));
        }
        let position: usize = rows.parse(&rec, line, 1, "position")?;
        let surface = rows.field(&rec, line, 2, "surface")?;
        if surface.is_empty() {
            return Err(rows.parse_err(line, "surface", "empty surface"));
        }
        let mut labels = [""; 3];
        for (k, name) in ["upos", "xpos", "deprel"].into_iter().enumerate() {
            labels[k] = rows.field(&rec, line, 3 + k, name)?;
            if labels[k].is_empty() {
                return Err(rows.parse_err(line, name, "missing syntactic label"));
            }
        }
        let mut token = TokenAnnotation::new(position, surface, labels[0], labels[1], labels[2]);
        token.log_frequency = rows.parse_opt_f64(&rec, line, 6, "log_frequency")?;
        token.surprisal = rows.parse_opt_f64(&rec, line, 7, "surprisal")?;
        if let Some(s) = token.surprisal {
            if !(s.is_finite() && s >= 0.0) {
                return Err(rows.parse_err(line, "surprisal", format!("{s} is not a finite value >= 0")));
            }
        }

        // Tokens of one sentence are contiguous rows.
        let continuing = last_id.as_deref() == Some(sentence_id);
        let idx = if continuing {
            sentences.len() - 1
        } else {
            if open_sentence.contains_key(sentence_id) {
                return Err(rows.parse_err(line, "sentence_id", format!("duplicate sentence_id {sentence_id}")));
            }
            open_sentence.insert(sentence_id.to_string(), sentences.len());
            sentences.push(SentenceText {
                sentence_id: sentence_id.to_string(),
                tokens: Vec::new(),
            });
            last_id = Some(sentence_id.to_string());
            sentences.len() - 1
        };
        let expected = sentences[idx].tokens.len() + 1;
        if position != expected {
            return Err(rows.parse_err(
                line,
                "position",
                format!("non-contiguous positions in sentence {sentence_id}: expected {expected}, found {position}"),
            ));
        }
        sentences[idx].tokens.push(token);
    }
    Corpus::new(sentences)
}

pub fn load_fixations(path: impl AsRef<Path>, corpus: &Corpus) -> Result<Vec<Participant>> {
    let path = path.as_ref();
    read_fixations(open(path)?, &label(path), corpus)
}

struct ParticipantBuilder {
    group: Group,
    native_language: String,
    first_line: u64,
    trials: Vec<TrialRecord>,
    trial_index: HashMap<String, usize>,
}

pub fn read_fixations(input: impl Read, file: &str, corpus: &Corpus) -> Result<Vec<Participant>> {
    let mut rows = Rows::new(file, input);
    rows.check_header(&FIXATION_COLUMNS, &[])?;

    let mut builders: BTreeMap<String, ParticipantBuilder> = BTreeMap::new();
    for (line, rec) in rows.records()? {
        let participant_id = rows.field(&rec, line, 0, "participant_id")?;
        if participant_id.is_empty() {
            return Err(rows.parse_err(line, "participant_id", "empty participant_id"));
        }
        let group: Group = rows.parse(&rec, line, 1, "group")?;
        let native_language = rows.field(&rec, line, 2, "native_language")?;
        let sentence_id = rows.field(&rec, line, 3, "sentence_id")?;
        let regime: Regime = rows.parse(&rec, line, 4, "regime")?;
        let order: usize = rows.parse(&rec, line, 5, "order")?;
        let word_position: usize = rows.parse(&rec, line, 6, "word_position")?;
        let duration: i64 = rows.parse(&rec, line, 7, "duration_ms")?;

        let sentence = corpus
            .get(sentence_id)
            .ok_or_else(|| rows.parse_err(line, "sentence_id", format!("unknown sentence_id {sentence_id}")))?;
        if word_position == 0 || word_position > sentence.len() {
            return Err(rows.parse_err(
                line,
                "word_position",
                format!(
                    "word_position {word_position} outside sentence {sentence_id} of length {}",
                    sentence.len()
                ),
            ));
        }
        if duration <= 0 {
            return Err(rows.parse_err(line, "duration_ms", format!("non-positive duration {duration}")));
        }
        let duration_ms = u32::try_from(duration)
            .map_err(|_| rows.parse_err(line, "duration_ms", format!("duration {duration} out of range")))?;

        let builder = builders
            .entry(participant_id.to_string())
            .or_insert_with(|| ParticipantBuilder {
                group,
                native_language: native_language.to_string(),
                first_line: line,
                trials: Vec::new(),
                trial_index: HashMap::new(),
            });
        if builder.group != group || builder.native_language != native_language {
            return Err(rows.parse_err(
                line,
                "group",
                format!(
                    "participant {participant_id} changes group/native_language from line {}",
                    builder.first_line
                ),
            ));
        }
        let trial_idx = match builder.trial_index.get(sentence_id) {
            Some(&i) => i,
            None => {
                builder.trials.push(TrialRecord {
                    participant_id: participant_id.to_string(),
                    sentence_id: sentence_id.to_string(),
                    regime,
                    fixations: Vec::new(),
                });
                builder.trial_index.insert(sentence_id.to_string(), builder.trials.len() - 1);
                builder.trials.len() - 1
            }
        };
        let trial = &mut builder.trials[trial_idx];
        if trial.regime != regime {
            return Err(rows.parse_err(
                line,
                "regime",
                format!("regime of {participant_id}/{sentence_id} changes within the trial"),
            ));
        }
        trial.fixations.push(FixationEvent {
            order,
            word_position,
            duration_ms,
        });
    }

    let mut participants = Vec::with_capacity(builders.len());
    for (participant_id, mut builder) in builders {
        for trial in &mut builder.trials {
            trial.fixations.sort_by_key(|f| f.order);
            validate_orders(trial).map_err(|m| Error::Data(format!("{file}: {m}")))?;
        }
        participants.push(Participant {
            participant_id,
            group: builder.group,
            native_language: builder.native_language,
            trials: builder.trials,
        });
    }
    Ok(participants)
}

fn validate_orders(trial: &TrialRecord) -> std::result::Result<(), String> {
    let ctx = || format!("{}/{}", trial.participant_id, trial.sentence_id);
    match trial.fixations.first() {
        Some(f) if f.order != 0 => return Err(format!("fixation order of {} starts at {}, not 0", ctx(), f.order)),
        _ => {}
    }
    for pair in trial.fixations.windows(2) {
        if pair[1].order <= pair[0].order {
            return Err(format!("duplicate fixation order {} in {}", pair[1].order, ctx()));
        }
    }
    Ok(())
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>> {
    let path = path.as_ref();
    read_scores(open(path)?, &label(path))
}

pub fn read_scores(input: impl Read, file: &str) -> Result<Vec<ScoreRecord>> {
    let mut rows = Rows::new(file, input);
    rows.check_header(&SCORE_COLUMNS, &[])?;
    let mut seen: HashSet<(String, TestKind)> = HashSet::new();
    let mut out = Vec::new();
    for (line, rec) in rows.records()? {
        let participant_id = rows.field(&rec, line, 0, "participant_id")?.to_string();
        let test: TestKind = rows.parse(&rec, line, 1, "test")?;
        let score: f64 = rows.parse(&rec, line, 2, "score")?;
        let max_score: f64 = rows.parse(&rec, line, 3, "max_score")?;
        if !(max_score.is_finite() && max_score > 0.0) {
            return Err(rows.parse_err(line, "max_score", format!("{max_score} is not positive")));
        }
        if let Some(fixed) = test.fixed_max_score() {
            if max_score != fixed {
                return Err(rows.parse_err(line, "max_score", format!("{test} is scored out of {fixed}, not {max_score}")));
            }
        }
        if !(score.is_finite() && (0.0..=max_score).contains(&score)) {
            return Err(rows.parse_err(line, "score", format!("score {score} outside [0, {max_score}]")));
        }
        if !seen.insert((participant_id.clone(), test)) {
            return Err(rows.parse_err(line, "participant_id", format!("duplicate score for ({participant_id}, {test})")));
        }
        out.push(ScoreRecord {
            participant_id,
            test,
            score,
            max_score,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn csv_io(e: csv::Error) -> Error {
    Error::Data(format!("csv write: {e}"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_corpus(out: impl Write, corpus: &Corpus) -> Result<()> {
    let mut w = writer(out);
    let header: Vec<&str> = TOKEN_COLUMNS.iter().chain(&TOKEN_ANNOTATION_COLUMNS).copied().collect();
    w.write_record(&header).map_err(csv_io)?;
    for sentence in corpus.sentences() {
        for t in &sentence.tokens {
            w.write_record([
                sentence.sentence_id.as_str(),
                &t.position.to_string(),
                &t.surface,
                &t.upos,
                &t.xpos,
                &t.deprel,
                &opt(t.log_frequency),
                &opt(t.surprisal),
            ])
            .map_err(csv_io)?;
        }
    }
    w.flush().map_err(|e| Error::Data(format!("csv write: {e}")))
}

pub fn write_fixations(out: impl Write, participants: &[Participant]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(FIXATION_COLUMNS).map_err(csv_io)?;
    for p in participants {
        for trial in &p.trials {
            for f in &trial.fixations {
                w.write_record([
                    p.participant_id.as_str(),
                    p.group.as_str(),
                    &p.native_language,
                    &trial.sentence_id,
                    trial.regime.as_str(),
                    &f.order.to_string(),
                    &f.word_position.to_string(),
                    &f.duration_ms.to_string(),
                ])
                .map_err(csv_io)?;
            }
        }
    }
    w.flush().map_err(|e| Error::Data(format!("csv write: {e}")))
}

pub fn write_scores(out: impl Write, scores: &[ScoreRecord]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(SCORE_COLUMNS).map_err(csv_io)?;
    for s in scores {
        w.write_record([
            s.participant_id.as_str(),
            s.test.as_str(),
            &s.score.to_string(),
            &s.max_score.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush().map_err(|e| Error::Data(format!("csv write: {e}")))
}
