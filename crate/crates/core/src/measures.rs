//! Per-word fixation metrics and reading speed.
//!
//! For a word `w` entered for the first time at fixation index `f`:
//!
//! - FF: duration of fixation `f`
//! - FP: durations from `f` up to the first fixation on a different word
//! - TF: all fixations on `w` in the trial
//! - RP: durations from `f` up to (excluding) the first later fixation on a
//!   word to the right of `w`, or to the end of the trial if there is none
//!
//! A word with no fixation is skipped and has all four durations at zero.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Participant, Regime, SentenceText, TrialRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "FF")]
    FirstFixation,
    #[serde(rename = "FP")]
    FirstPass,
    #[serde(rename = "TF")]
    TotalFixation,
    #[serde(rename = "RP")]
    RegressionPath,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::FirstFixation,
        Metric::FirstPass,
        Metric::TotalFixation,
        Metric::RegressionPath,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Metric::FirstFixation => "FF",
            Metric::FirstPass => "FP",
            Metric::TotalFixation => "TF",
            Metric::RegressionPath => "RP",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.code() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordMeasures {
    pub participant_id: String,
    pub sentence_id: String,
    pub word_position: usize,
    pub ff_ms: f64,
    pub fp_ms: f64,
    pub tf_ms: f64,
    pub rp_ms: f64,
    pub skipped: bool,
}

impl WordMeasures {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::FirstFixation => self.ff_ms,
            Metric::FirstPass => self.fp_ms,
            Metric::TotalFixation => self.tf_ms,
            Metric::RegressionPath => self.rp_ms,
        }
    }

    pub fn set(&mut self, metric: Metric, value: f64) {
        match metric {
            Metric::FirstFixation => self.ff_ms = value,
            Metric::FirstPass => self.fp_ms = value,
            Metric::TotalFixation => self.tf_ms = value,
            Metric::RegressionPath => self.rp_ms = value,
        }
    }
}

/// Computes one [`WordMeasures`] per token of `sentence` in a single pass
/// over the fixation sequence.
pub fn compute_word_measures(trial: &TrialRecord, sentence: &SentenceText) -> Result<Vec<WordMeasures>> {
    let n = sentence.len();
    if trial.sentence_id != sentence.sentence_id {
        return Err(Error::InvalidArgument(format!(
            "trial for {} paired with sentence {}",
            trial.sentence_id, sentence.sentence_id
        )));
    }
    let mut out: Vec<WordMeasures> = (1..=n)
        .map(|word_position| WordMeasures {
            participant_id: trial.participant_id.clone(),
            sentence_id: trial.sentence_id.clone(),
            word_position,
            ff_ms: 0.0,
            fp_ms: 0.0,
            tf_ms: 0.0,
            rp_ms: 0.0,
            skipped: true,
        })
        .collect();

    // Words whose regression path is still running, descending by position.
    let mut open_paths: Vec<usize> = Vec::new();
    // Word whose first pass is still running.
    let mut first_pass: Option<usize> = None;

    for fix in &trial.fixations {
        let pos = fix.word_position;
        if pos == 0 || pos > n {
            return Err(Error::Data(format!(
                "fixation at word {pos} outside sentence {} of length {n}",
                sentence.sentence_id
            )));
        }
        let d = f64::from(fix.duration_ms);
        let w = pos - 1;

        // Any fixation to the right of an open word ends its regression path.
        let keep = open_paths.partition_point(|&open| open >= pos);
        debug_assert!(open_paths.windows(2).all(|p| p[0] > p[1]));
        open_paths.truncate(keep);
        for &open in &open_paths {
            out[open - 1].rp_ms += d;
        }

        if first_pass != Some(pos) {
            first_pass = None;
        }
        let m = &mut out[w];
        m.tf_ms += d;
        if m.skipped {
            m.skipped = false;
            m.ff_ms = d;
            m.fp_ms = d;
            m.rp_ms = d;
            first_pass = Some(pos);
            // Open words all sit at or right of `pos`; keep descending order.
            open_paths.push(pos);
        } else if first_pass == Some(pos) {
            m.fp_ms += d;
        }
    }
    Ok(out)
}

/// Measures for one trial, keeping the fixation path for transition features.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMeasures {
    pub sentence_id: String,
    pub regime: Regime,
    pub words: Vec<WordMeasures>,
    /// Word positions of the fixations in chronological order.
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantMeasures {
    pub participant_id: String,
    pub trials: Vec<TrialMeasures>,
}

impl ParticipantMeasures {
    pub fn trials_in(&self, regime: Regime) -> impl Iterator<Item = &TrialMeasures> {
        self.trials.iter().filter(move |t| t.regime == regime)
    }
}

pub fn measure_participant(participant: &Participant, corpus: &Corpus) -> Result<ParticipantMeasures> {
    let trials = participant
        .trials
        .iter()
        .map(|trial| {
            let sentence = corpus
                .get(&trial.sentence_id)
                .ok_or_else(|| Error::Data(format!("unknown sentence_id {}", trial.sentence_id)))?;
            Ok(TrialMeasures {
                sentence_id: trial.sentence_id.clone(),
                regime: trial.regime,
                words: compute_word_measures(trial, sentence)?,
                path: trial.fixations.iter().map(|f| f.word_position).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParticipantMeasures {
        participant_id: participant.participant_id.clone(),
        trials,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingSpeed {
    pub participant_id: String,
    pub words_per_second: f64,
    pub total_words: usize,
    pub total_reading_ms: f64,
}

/// Words per second over every trial of the participant.
pub fn compute_reading_speed(participant: &Participant, corpus: &Corpus) -> Result<ReadingSpeed> {
    reading_speed_over(participant, corpus, participant.trials.iter())
}

/// Words per second over the participant's trials in one regime.
pub fn compute_reading_speed_in(participant: &Participant, corpus: &Corpus, regime: Regime) -> Result<ReadingSpeed> {
    reading_speed_over(participant, corpus, participant.trials_in(regime))
}

fn reading_speed_over<'a>(
    participant: &Participant,
    corpus: &Corpus,
    trials: impl Iterator<Item = &'a TrialRecord>,
) -> Result<ReadingSpeed> {
    let mut total_words = 0usize;
    let mut total_ms = 0u64;
    for trial in trials {
        let sentence = corpus
            .get(&trial.sentence_id)
            .ok_or_else(|| Error::Data(format!("unknown sentence_id {}", trial.sentence_id)))?;
        total_words += sentence.len();
        total_ms += trial.total_duration_ms();
    }
    if total_ms == 0 {
        return Err(Error::Data(format!("no gaze data for participant {}", participant.participant_id)));
    }
    let total_reading_ms = total_ms as f64;
    Ok(ReadingSpeed {
        participant_id: participant.participant_id.clone(),
        words_per_second: total_words as f64 / (total_reading_ms / 1000.0),
        total_words,
        total_reading_ms,
    })
}

/// Writes `participant_id,sentence_id,word_position,ff,fp,tf,rp,skipped`.
pub fn write_measures<'a>(out: impl Write, rows: impl IntoIterator<Item = &'a WordMeasures>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let err = |e: csv::Error| Error::Data(format!("csv write: {e}"));
    w.write_record(["participant_id", "sentence_id", "word_position", "ff", "fp", "tf", "rp", "skipped"])
        .map_err(err)?;
    for m in rows {
        w.write_record([
            m.participant_id.as_str(),
            &m.sentence_id,
            &m.word_position.to_string(),
            &m.ff_ms.to_string(),
            &m.fp_ms.to_string(),
            &m.tf_ms.to_string(),
            &m.rp_ms.to_string(),
            if m.skipped { "1" } else { "0" },
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Data(format!("csv write: {e}")))
}
