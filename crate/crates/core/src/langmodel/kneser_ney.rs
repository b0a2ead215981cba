//! Interpolated trigram model with modified Kneser-Ney smoothing.
//!
//! Conventions:
//!
//! - each sentence is padded as `<s> <s> w1 .. wn </s>`; `<s>` is never predicted
//! - words seen fewer than `min_count` times train as `<unk>`; unseen words
//!   at query time are scored as `<unk>`
//! - the trigram level uses raw counts; lower orders use continuation counts
//!   (number of distinct left extensions), except n-grams that start with
//!   `<s>`, which cannot be extended and keep their raw counts
//! - each order has three discounts for counts 1, 2 and 3+, estimated from
//!   that order's count-of-counts `n1..n4`:
//!   `Y = n1 / (n1 + 2 n2)`, `D_k = k - (k + 1) Y n_{k+1} / n_k`.
//!   A discount that is undefined or falls outside `(0, k)` is replaced by
//!   [`FALLBACK_DISCOUNTS`]
//! - the unigram level interpolates with the uniform distribution over the
//!   predictable vocabulary (every type plus `</s>` and `<unk>`)

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::langmodel::FrequencyTable;

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

pub(crate) const UNK_ID: u32 = 0;
pub(crate) const BOS_ID: u32 = 1;
pub(crate) const EOS_ID: u32 = 2;

pub const FALLBACK_DISCOUNTS: [f64; 3] = [0.5, 1.0, 1.5];

/// Discounts for counts of 1, 2 and 3 or more.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discounts(pub [f64; 3]);

impl Discounts {
    pub fn for_count(&self, count: u64) -> f64 {
        match count {
            0 => 0.0,
            1 => self.0[0],
            2 => self.0[1],
            _ => self.0[2],
        }
    }

    /// Estimates discounts from the number of n-gram types seen exactly
    /// 1, 2, 3 and 4 times.
    pub fn estimate(count_of_counts: [u64; 4]) -> Self {
        let n = count_of_counts.map(|c| c as f64);
        let y = n[0] / (n[0] + 2.0 * n[1]);
        let mut d = [0.0; 3];
        for k in 0..3 {
            let band = (k + 1) as f64;
            let est = band - (band + 1.0) * y * n[k + 1] / n[k];
            d[k] = if est.is_finite() && est > 0.0 && est < band {
                est
            } else {
                FALLBACK_DISCOUNTS[k]
            };
        }
        Discounts(d)
    }

    pub fn is_valid(&self) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(k, &d)| d.is_finite() && d > 0.0 && d < (k + 1) as f64)
    }
}

/// Totals and per-band type counts for one history.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Context {
    total: u64,
    bands: [u64; 3],
}

impl Context {
    fn add(&mut self, count: u64) {
        self.total += count;
        self.bands[(count.min(3) - 1) as usize] += 1;
    }

    /// Probability mass freed by discounting, as a fraction of the total.
    fn backoff_weight(&self, d: &Discounts) -> f64 {
        let freed: f64 = (0..3).map(|k| d.0[k] * self.bands[k] as f64).sum();
        freed / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigramLM {
    pub(crate) vocab: Vec<String>,
    pub(crate) ids: HashMap<String, u32>,
    pub(crate) min_count: u64,
    /// Index 0 is the unigram order.
    pub(crate) discounts: [Discounts; 3],
    pub(crate) trigrams: HashMap<(u32, u32, u32), u64>,
    pub(crate) frequencies: FrequencyTable,

    tri_ctx: HashMap<(u32, u32), Context>,
    bigrams: HashMap<(u32, u32), u64>,
    bi_ctx: HashMap<u32, Context>,
    unigrams: Vec<u64>,
    uni_ctx: Context,
}

impl TrigramLM {
    /// Trains on pre-tokenized text, one sentence per item, tokens separated
    /// by whitespace. Blank sentences are ignored.
    pub fn train<'a>(sentences: impl IntoIterator<Item = &'a str>, min_count: u64) -> Result<Self> {
        let sentences: Vec<Vec<&str>> = sentences
            .into_iter()
            .map(|s| s.split_whitespace().collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        if sentences.is_empty() {
            return Err(Error::InvalidArgument("empty training corpus".into()));
        }
        for token in sentences.iter().flatten() {
            if *token == BOS || *token == EOS {
                return Err(Error::Data(format!("training text contains reserved symbol {token}")));
            }
        }
        let frequencies = FrequencyTable::from_tokens(sentences.iter().flatten().copied());

        let mut vocab: Vec<String> = vec![UNK.into(), BOS.into(), EOS.into()];
        vocab.extend(
            frequencies
                .counts()
                .filter(|&(w, c)| c >= min_count.max(1) && w != UNK)
                .map(|(w, _)| w.to_string()),
        );
        let ids = index(&vocab);

        let mut trigrams: HashMap<(u32, u32, u32), u64> = HashMap::new();
        for sentence in &sentences {
            let mut ctx = (BOS_ID, BOS_ID);
            let ids_iter = sentence
                .iter()
                .map(|w| ids.get(*w).copied().unwrap_or(UNK_ID))
                .chain(std::iter::once(EOS_ID));
            for w in ids_iter {
                *trigrams.entry((ctx.0, ctx.1, w)).or_insert(0) += 1;
                ctx = (ctx.1, w);
            }
        }

        let mut lm = TrigramLM::assemble(vocab, min_count, trigrams, frequencies, None)?;
        lm.discounts = lm.estimate_discounts();
        Ok(lm)
    }

    /// Builds derived tables from raw trigram counts. With `discounts` left
    /// as `None`, placeholder fallbacks are installed.
    pub(crate) fn assemble(
        vocab: Vec<String>,
        min_count: u64,
        trigrams: HashMap<(u32, u32, u32), u64>,
        frequencies: FrequencyTable,
        discounts: Option<[Discounts; 3]>,
    ) -> Result<Self> {
        if vocab.len() < 3 || vocab[0] != UNK || vocab[1] != BOS || vocab[2] != EOS {
            return Err(Error::Data("vocabulary must start with <unk>, <s>, </s>".into()));
        }
        let ids = index(&vocab);
        if ids.len() != vocab.len() {
            return Err(Error::Data("vocabulary has duplicate entries".into()));
        }
        let v = vocab.len() as u32;
        if trigrams.is_empty() {
            return Err(Error::Data("model has no trigram counts".into()));
        }

        let mut tri_ctx: HashMap<(u32, u32), Context> = HashMap::new();
        let mut bigrams: HashMap<(u32, u32), u64> = HashMap::new();
        for (&(a, b, c), &count) in &trigrams {
            if a >= v || b >= v || c >= v || c == BOS_ID || count == 0 {
                return Err(Error::Data(format!("invalid trigram entry ({a}, {b}, {c}) x{count}")));
            }
            tri_ctx.entry((a, b)).or_default().add(count);
            // Continuation count, or the raw count for sentence-initial bigrams.
            *bigrams.entry((b, c)).or_insert(0) += if b == BOS_ID { count } else { 1 };
        }
        let mut bi_ctx: HashMap<u32, Context> = HashMap::new();
        let mut unigrams = vec![0u64; vocab.len()];
        for (&(b, c), &count) in &bigrams {
            bi_ctx.entry(b).or_default().add(count);
            unigrams[c as usize] += 1;
        }
        let mut uni_ctx = Context::default();
        for &count in unigrams.iter().filter(|&&c| c > 0) {
            uni_ctx.add(count);
        }

        Ok(TrigramLM {
            vocab,
            ids,
            min_count,
            discounts: discounts.unwrap_or([Discounts(FALLBACK_DISCOUNTS); 3]),
            trigrams,
            frequencies,
            tri_ctx,
            bigrams,
            bi_ctx,
            unigrams,
            uni_ctx,
        })
    }

    fn estimate_discounts(&self) -> [Discounts; 3] {
        let coc = |counts: &mut dyn Iterator<Item = u64>| {
            let mut n = [0u64; 4];
            for c in counts {
                if (1..=4).contains(&c) {
                    n[(c - 1) as usize] += 1;
                }
            }
            Discounts::estimate(n)
        };
        [
            coc(&mut self.unigrams.iter().copied()),
            coc(&mut self.bigrams.values().copied()),
            coc(&mut self.trigrams.values().copied()),
        ]
    }

    pub fn discounts(&self) -> &[Discounts; 3] {
        &self.discounts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn frequencies(&self) -> &FrequencyTable {
        &self.frequencies
    }

    /// Every symbol the model can predict: the vocabulary without `<s>`.
    pub fn predictable(&self) -> impl Iterator<Item = &str> {
        self.vocab
            .iter()
            .enumerate()
            .filter(|&(i, _)| i as u32 != BOS_ID)
            .map(|(_, w)| w.as_str())
    }

    /// All symbols including `<s>`, which may appear in contexts.
    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.vocab.iter().map(String::as_str)
    }

    pub(crate) fn id(&self, word: &str) -> u32 {
        self.ids.get(word).copied().unwrap_or(UNK_ID)
    }

    fn predictable_size(&self) -> f64 {
        (self.vocab.len() - 1) as f64
    }

    pub(crate) fn p_unigram(&self, w: u32) -> f64 {
        let uniform = 1.0 / self.predictable_size();
        if w == BOS_ID {
            return 0.0;
        }
        let ctx = &self.uni_ctx;
        if ctx.total == 0 {
            return uniform;
        }
        let d = &self.discounts[0];
        let a = self.unigrams[w as usize];
        (a as f64 - d.for_count(a)).max(0.0) / ctx.total as f64 + ctx.backoff_weight(d) * uniform
    }

    pub(crate) fn p_bigram(&self, v: u32, w: u32) -> f64 {
        let lower = self.p_unigram(w);
        match self.bi_ctx.get(&v) {
            Some(ctx) => {
                let d = &self.discounts[1];
                let a = self.bigrams.get(&(v, w)).copied().unwrap_or(0);
                (a as f64 - d.for_count(a)).max(0.0) / ctx.total as f64 + ctx.backoff_weight(d) * lower
            }
            None => lower,
        }
    }

    pub(crate) fn p_trigram(&self, u: u32, v: u32, w: u32) -> f64 {
        let lower = self.p_bigram(v, w);
        match self.tri_ctx.get(&(u, v)) {
            Some(ctx) => {
                let d = &self.discounts[2];
                let c = self.trigrams.get(&(u, v, w)).copied().unwrap_or(0);
                (c as f64 - d.for_count(c)).max(0.0) / ctx.total as f64 + ctx.backoff_weight(d) * lower
            }
            None => lower,
        }
    }

    /// `P(word | context[0] context[1])`. Unknown strings map to `<unk>`.
    pub fn prob(&self, context: [&str; 2], word: &str) -> f64 {
        self.p_trigram(self.id(context[0]), self.id(context[1]), self.id(word))
    }

    /// Interpolated bigram-level probability `P(word | previous)`.
    pub fn prob_bigram(&self, previous: &str, word: &str) -> f64 {
        self.p_bigram(self.id(previous), self.id(word))
    }

    /// Unigram-level probability, the last step of the interpolation chain.
    pub fn prob_unigram(&self, word: &str) -> f64 {
        self.p_unigram(self.id(word))
    }

    /// Per-word `ln P` of a whitespace-tokenized sentence, including `</s>`.
    pub fn sentence_log_probs(&self, tokens: &[&str]) -> Vec<f64> {
        let mut ctx = (BOS_ID, BOS_ID);
        tokens
            .iter()
            .map(|w| self.id(w))
            .chain(std::iter::once(EOS_ID))
            .map(|w| {
                let lp = self.p_trigram(ctx.0, ctx.1, w).ln();
                ctx = (ctx.1, w);
                lp
            })
            .collect()
    }

    /// Perplexity over the given sentences, `</s>` included.
    pub fn perplexity<'a>(&self, sentences: impl IntoIterator<Item = &'a str>) -> f64 {
        self.perplexity_with(sentences, |lm, tokens| lm.sentence_log_probs(tokens))
    }

    /// Perplexity of the same text under the unigram level alone.
    pub fn unigram_perplexity<'a>(&self, sentences: impl IntoIterator<Item = &'a str>) -> f64 {
        self.perplexity_with(sentences, |lm, tokens| {
            tokens
                .iter()
                .map(|w| lm.p_unigram(lm.id(w)).ln())
                .chain(std::iter::once(lm.p_unigram(EOS_ID).ln()))
                .collect()
        })
    }

    fn perplexity_with<'a>(
        &self,
        sentences: impl IntoIterator<Item = &'a str>,
        log_probs: impl Fn(&Self, &[&str]) -> Vec<f64>,
    ) -> f64 {
        let mut total = 0.0;
        let mut n = 0usize;
        for s in sentences {
            let tokens: Vec<&str> = s.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            let lps = log_probs(self, &tokens);
            n += lps.len();
            total += lps.iter().sum::<f64>();
        }
        (-total / n.max(1) as f64).exp()
    }

    /// Raw trigram counts keyed by surface strings, sorted.
    pub fn trigram_counts(&self) -> BTreeMap<(&str, &str, &str), u64> {
        self.trigrams
            .iter()
            .map(|(&(a, b, c), &n)| {
                (
                    (self.vocab[a as usize].as_str(), self.vocab[b as usize].as_str(), self.vocab[c as usize].as_str()),
                    n,
                )
            })
            .collect()
    }
}

fn index(vocab: &[String]) -> HashMap<String, u32> {
    vocab
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i as u32))
        .collect()
}
