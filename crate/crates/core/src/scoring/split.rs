use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub held_out_language: Option<String>,
}

/// Test set: every learner of `held_out_language` plus `per_language_sample`
/// seeded draws from each remaining language. Train set: everyone else.
/// Both lists are sorted by participant id.
pub fn make_split<'a>(
    members: impl IntoIterator<Item = (&'a str, &'a str)>,
    held_out_language: Option<&str>,
    per_language_sample: usize,
    seed: u64,
) -> Result<DataSplit> {
    let mut by_language: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (id, language) in members {
        by_language.entry(language).or_default().push(id);
    }
    if let Some(lang) = held_out_language {
        if !by_language.contains_key(lang) {
            return Err(Error::InvalidArgument(format!("no participants with native language `{lang}`")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (language, mut ids) in by_language {
        ids.sort_unstable();
        if Some(language) == held_out_language {
            test.extend(ids.iter().map(|s| s.to_string()));
            continue;
        }
        if per_language_sample > ids.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot sample {per_language_sample} participants from `{language}`, which has {}",
                ids.len()
            )));
        }
        ids.shuffle(&mut rng);
        let (picked, rest) = ids.split_at(per_language_sample);
        test.extend(picked.iter().map(|s| s.to_string()));
        train.extend(rest.iter().map(|s| s.to_string()));
    }
    if test.is_empty() {
        return Err(Error::InvalidArgument("split has an empty test set".into()));
    }
    train.sort();
    test.sort();
    Ok(DataSplit {
        train,
        test,
        held_out_language: held_out_language.map(str::to_string),
    })
}
