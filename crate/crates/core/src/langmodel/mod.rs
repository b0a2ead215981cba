//! Word-level predictors: log frequency and trigram surprisal.

mod format;
mod frequency;
mod kneser_ney;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use format::{read_model, write_model};
pub use frequency::{log_frequency, FrequencyTable};
pub use kneser_ney::{Discounts, TrigramLM, BOS, EOS, FALLBACK_DISCOUNTS, UNK};

use crate::corpus::{Corpus, SentenceText};
use crate::error::{Error, Result};

/// Logarithm base for surprisal values. Changing it rescales surprisal, and
/// with it any surprisal regression coefficient, by a constant factor.
pub const SURPRISAL_BASE: f64 = std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurprisalResult {
    pub word_position: usize,
    pub surprisal: f64,
}

/// `-log P` in [`SURPRISAL_BASE`], clamped at zero against rounding.
pub fn surprisal_from_probability(p: f64) -> f64 {
    let s = -p.ln() / SURPRISAL_BASE.ln();
    if s > 0.0 {
        s
    } else {
        0.0
    }
}

/// Surprisal of every token given the two preceding ones, with the sentence
/// padded by two `<s>` symbols.
pub fn surprisal(lm: &TrigramLM, sentence: &SentenceText) -> Vec<SurprisalResult> {
    let tokens: Vec<&str> = sentence.surfaces().collect();
    let log_probs = lm.sentence_log_probs(&tokens);
    sentence
        .tokens
        .iter()
        .zip(log_probs)
        .map(|(t, lp)| SurprisalResult {
            word_position: t.position,
            surprisal: surprisal_from_probability(lp.exp()),
        })
        .collect()
}

/// Fills `surprisal` and `log_frequency` for every token of the corpus.
pub fn annotate_corpus(corpus: &mut Corpus, lm: &TrigramLM) {
    for sentence in corpus.sentences_mut() {
        let scores = surprisal(lm, sentence);
        for (token, s) in sentence.tokens.iter_mut().zip(scores) {
            token.surprisal = Some(s.surprisal);
            token.log_frequency = Some(log_frequency(lm.frequencies(), &token.surface));
        }
    }
}

/// Trains from a text file with one pre-tokenized sentence per line.
pub fn train_from_file(path: &Path, min_count: u64) -> Result<TrigramLM> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    TrigramLM::train(text.lines(), min_count)
}

pub fn save_model(lm: &TrigramLM, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    write_model(lm, BufWriter::new(file)).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

pub fn load_model(path: &Path) -> Result<TrigramLM> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    read_model(BufReader::new(file), &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TokenAnnotation;

    #[test]
    fn probability_one_is_zero_surprisal() {
        assert_eq!(surprisal_from_probability(1.0), 0.0);
        assert_eq!(surprisal_from_probability(1.0 + 1e-16), 0.0);
    }

    #[test]
    fn uniform_surprisal_is_log_vocabulary() {
        for v in [2.0_f64, 7.0, 1000.0] {
            assert!((surprisal_from_probability(1.0 / v) - v.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn annotates_sentence() {
        let lm = TrigramLM::train(["a b", "a b", "a c"], 1).unwrap();
        let sentence = SentenceText {
            sentence_id: "s".into(),
            tokens: vec![
                TokenAnnotation::new(1, "a", "X", "X", "x"),
                TokenAnnotation::new(2, "b", "X", "X", "x"),
                TokenAnnotation::new(3, "q", "X", "X", "x"),
            ],
        };
        let s = surprisal(&lm, &sentence);
        assert_eq!(s.len(), 3);
        assert!((s[1].surprisal + lm.prob(["<s>", "a"], "b").ln()).abs() < 1e-12);
        // "a" always starts a sentence
        assert!(s[0].surprisal < s[1].surprisal);
        assert!(s[2].surprisal.is_finite() && s[2].surprisal > s[1].surprisal);

        let mut corpus = Corpus::new(vec![sentence]).unwrap();
        annotate_corpus(&mut corpus, &lm);
        let t = &corpus.sentences()[0].tokens;
        assert!((t[0].log_frequency.unwrap() - (3.0f64 / 6.0).ln()).abs() < 1e-12);
        assert!((t[2].log_frequency.unwrap() - (0.5f64 / 6.0).ln()).abs() < 1e-12);
    }
}
