use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Participant, Regime};
use crate::error::{Error, Result};
use crate::features::{build_matrix, FeatureSpec, FeatureVector};
use crate::measures::measure_participant;
use crate::scoring::metrics::{pearson_r, spearman_brown};
use crate::scoring::prototype::compute_eyescores;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfScores {
    pub participant_id: String,
    pub first: f64,
    pub second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// Correlation of the two half EyeScores across learners.
    pub r: f64,
    pub spearman_brown: f64,
    pub n: usize,
    pub excluded: Vec<String>,
    pub halves: Vec<HalfScores>,
}

/// Splits each reader's sentences into two halves, computes EyeScore on each
/// half separately and correlates the halves across learners.
///
/// In the fixed regime one seeded partition of the shared sentences applies
/// to everybody; in the any regime each reader's trials are partitioned on
/// their own. Readers with fewer than 2 trials, or with an empty half, are
/// left out with a warning.
pub fn split_half_consistency(
    corpus: &Corpus,
    participants: &[Participant],
    spec: FeatureSpec,
    seed: u64,
) -> Result<ConsistencyReport> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shared_first: Option<Vec<String>> = (spec.regime == Regime::Fixed).then(|| {
        let mut ids: Vec<&str> = corpus
            .sentences()
            .iter()
            .map(|s| s.sentence_id.as_str())
            .filter(|id| {
                participants
                    .iter()
                    .any(|p| p.trials_in(Regime::Fixed).any(|t| t.sentence_id == *id))
            })
            .collect();
        ids.shuffle(&mut rng);
        ids.truncate(ids.len().div_ceil(2));
        ids.into_iter().map(str::to_string).collect()
    });

    let mut excluded = Vec::new();
    let mut halves: [Vec<Participant>; 2] = [Vec::new(), Vec::new()];
    for p in participants {
        let trials: Vec<_> = p.trials_in(spec.regime).cloned().collect();
        if trials.len() < 2 {
            log::warn!("participant {}: fewer than 2 trials; excluded from split-half", p.participant_id);
            excluded.push(p.participant_id.clone());
            continue;
        }
        let (a, b): (Vec<_>, Vec<_>) = match &shared_first {
            Some(first) => trials.into_iter().partition(|t| first.contains(&t.sentence_id)),
            None => {
                let mut order: Vec<usize> = (0..trials.len()).collect();
                order.shuffle(&mut rng);
                let cut = trials.len().div_ceil(2);
                let mut a = Vec::new();
                let mut b = Vec::new();
                for (rank, &i) in order.iter().enumerate() {
                    if rank < cut {
                        a.push(trials[i].clone());
                    } else {
                        b.push(trials[i].clone());
                    }
                }
                (a, b)
            }
        };
        if a.is_empty() || b.is_empty() {
            log::warn!("participant {}: one half has no trials; excluded from split-half", p.participant_id);
            excluded.push(p.participant_id.clone());
            continue;
        }
        for (half, trials) in halves.iter_mut().zip([a, b]) {
            half.push(Participant {
                trials,
                ..p.clone()
            });
        }
    }

    let mut scores = Vec::with_capacity(2);
    for half in &halves {
        let measures = half
            .iter()
            .map(|p| measure_participant(p, corpus))
            .collect::<Result<Vec<_>>>()?;
        let matrix = build_matrix(corpus, &measures, spec)?;
        let mut natives: Vec<&FeatureVector> = Vec::new();
        let mut learners: Vec<&FeatureVector> = Vec::new();
        for (v, p) in matrix.vectors.iter().zip(half) {
            if p.is_native() {
                natives.push(v);
            } else {
                learners.push(v);
            }
        }
        scores.push(compute_eyescores(&learners, &natives)?.learner_scores);
    }
    let halves: Vec<HalfScores> = scores[0]
        .iter()
        .zip(&scores[1])
        .map(|((id, a), (_, b))| HalfScores {
            participant_id: id.clone(),
            first: *a,
            second: *b,
        })
        .collect();
    if halves.len() < 2 {
        return Err(Error::InvalidArgument("split-half needs at least 2 learners".into()));
    }
    let first: Vec<f64> = halves.iter().map(|h| h.first).collect();
    let second: Vec<f64> = halves.iter().map(|h| h.second).collect();
    let r = pearson_r(&first, &second)?;
    Ok(ConsistencyReport {
        r,
        spearman_brown: spearman_brown(r),
        n: halves.len(),
        excluded,
        halves,
    })
}
