use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Raw token counts from a training corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn from_tokens<'a>(tokens: impl IntoIterator<Item = &'a str>) -> Self {
        let mut table = FrequencyTable::default();
        for token in tokens {
            *table.counts.entry(token.to_string()).or_insert(0) += 1;
            table.total += 1;
        }
        table
    }

    /// Rebuilds a table from stored counts; zero counts are dropped.
    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>) -> Self {
        let counts: BTreeMap<String, u64> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        let total = counts.values().sum();
        FrequencyTable { counts, total }
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn counts(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// `ln(count / total)`; out-of-vocabulary words get a half count.
pub fn log_frequency(table: &FrequencyTable, word: &str) -> f64 {
    let total = table.total.max(1) as f64;
    match table.count(word) {
        0 => (0.5 / total).ln(),
        c => (c as f64 / total).ln(),
    }
}
