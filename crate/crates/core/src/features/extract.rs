use std::collections::HashMap;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::normalize::{speed_normalize, DataQualityReport, NormalizationContext};
use crate::features::solvers::{fit_logistic_skip, fit_ols, LinearFit};
use crate::features::{lookup, FeatureKey, FeatureSpace, FeatureSpec, Tagset};
use crate::measures::{Metric, TrialMeasures};

pub const WP_MODELS: [&str; 5] = ["FF", "FP", "TF", "RP", "SKIP"];
pub const WP_TERMS: [&str; 4] = ["beta_length", "beta_logfreq", "beta_surprisal", "intercept"];

/// The trials as used by a feature set: raw, or speed-normalized with the
/// context implied by the regime.
fn prepare(trials: &[&TrialMeasures], spec: FeatureSpec) -> (Vec<TrialMeasures>, DataQualityReport) {
    if spec.speed_normalized {
        speed_normalize(trials, NormalizationContext::for_regime(spec.regime))
    } else {
        (trials.iter().map(|t| (*t).clone()).collect(), DataQualityReport::default())
    }
}

fn push_fit(values: &mut Vec<f64>, fit: &LinearFit, with_intercept: bool) {
    values.extend_from_slice(&fit.coefficients);
    if with_intercept {
        values.push(fit.intercept);
    }
}

/// Word-property regressions for one reader. Duration models use fixated
/// words only; the skip model uses every word.
pub fn extract_wp_coefficients(
    trials: &[&TrialMeasures],
    corpus: &Corpus,
    spec: FeatureSpec,
) -> Result<(Vec<f64>, DataQualityReport)> {
    let (trials, quality) = prepare(trials, spec);
    let mut x_all = Vec::new();
    let mut skipped = Vec::new();
    let mut fixated: Vec<usize> = Vec::new();
    for trial in &trials {
        let sentence = lookup(corpus, &trial.sentence_id)?;
        for w in &trial.words {
            if !w.skipped {
                fixated.push(x_all.len());
            }
            x_all.push(sentence.predictors(w.word_position)?);
            skipped.push(w.skipped);
        }
    }
    let words: Vec<_> = trials.iter().flat_map(|t| &t.words).collect();
    let x_fix: Vec<[f64; 3]> = fixated.iter().map(|&i| x_all[i]).collect();

    let with_intercept = !spec.speed_normalized;
    let mut values = Vec::with_capacity(20);
    for metric in Metric::ALL {
        let y: Vec<f64> = fixated.iter().map(|&i| words[i].get(metric)).collect();
        push_fit(&mut values, &fit_ols(&x_fix, &y)?, with_intercept);
    }
    let skip_fit = match fit_logistic_skip(&x_all, &skipped) {
        Ok(fit) => fit,
        Err(e @ Error::DegenerateSkipPattern { .. }) => {
            let pid = words.first().map(|w| w.participant_id.as_str()).unwrap_or("?");
            log::warn!("participant {pid}: {e}; skip-model coefficients set to zero");
            LinearFit {
                coefficients: vec![0.0; 3],
                intercept: 0.0,
            }
        }
        Err(e) => return Err(e),
    };
    push_fit(&mut values, &skip_fit, with_intercept);
    Ok((values, quality))
}

/// Mean FF, FP and TF of fixated words per syntactic label.
pub fn extract_s_clusters(
    trials: &[&TrialMeasures],
    corpus: &Corpus,
    space: &FeatureSpace,
) -> Result<(Vec<f64>, DataQualityReport)> {
    let (trials, quality) = prepare(trials, space.spec);
    let mut sums: HashMap<(Tagset, &str), ([f64; 3], usize)> = HashMap::new();
    for trial in &trials {
        let sentence = lookup(corpus, &trial.sentence_id)?;
        for w in trial.words.iter().filter(|w| !w.skipped) {
            let token = &sentence.tokens[w.word_position - 1];
            for tagset in Tagset::ALL {
                let entry = sums.entry((tagset, tagset.label(token))).or_insert(([0.0; 3], 0));
                for (k, m) in super::CLUSTER_METRICS.iter().enumerate() {
                    entry.0[k] += w.get(*m);
                }
                entry.1 += 1;
            }
        }
    }
    let pid = trials
        .iter()
        .flat_map(|t| t.words.first())
        .map(|w| w.participant_id.clone())
        .next()
        .unwrap_or_default();
    let values = space
        .keys()
        .iter()
        .map(|key| match key {
            FeatureKey::SCluster { metric, tagset, label } => {
                let k = super::CLUSTER_METRICS.iter().position(|m| m == metric).ok_or_else(|| {
                    Error::InvalidArgument(format!("metric {metric} is not a cluster metric"))
                })?;
                match sums.get(&(*tagset, label.as_str())) {
                    Some((s, n)) => Ok(s[k] / *n as f64),
                    None => Err(Error::Data(format!(
                        "participant {pid} never fixated a word labelled {}={label}",
                        tagset.as_str()
                    ))),
                }
            }
            other => Err(Error::InvalidArgument(format!("`{other}` in a cluster space"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((values, quality))
}

/// Saccade counts between word positions of one sentence; `counts[i][j]`
/// counts moves from word `i + 1` to word `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    pub counts: Vec<Vec<u32>>,
}

impl TransitionMatrix {
    pub fn total(&self) -> u32 {
        self.counts.iter().flatten().sum()
    }

    /// Counts divided by their total; all zeros when there is no saccade.
    pub fn normalized(&self) -> Vec<Vec<f64>> {
        let total = self.total();
        self.counts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
                    .collect()
            })
            .collect()
    }
}

pub fn transition_matrix(trial: &TrialMeasures, n_words: usize, include_self: bool) -> TransitionMatrix {
    let mut counts = vec![vec![0u32; n_words]; n_words];
    for pair in trial.path.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a != b || include_self {
            counts[a - 1][b - 1] += 1;
        }
    }
    TransitionMatrix { counts }
}

/// Transition counts, or per-sentence proportions when speed-normalized.
/// Sentences the reader has no trial for contribute zeros.
pub fn extract_transitions(trials: &[&TrialMeasures], space: &FeatureSpace) -> Result<Vec<f64>> {
    space.spec.validate()?;
    if space.spec.regime != crate::corpus::Regime::Fixed {
        return Err(Error::TokenLevelInAnyRegime);
    }
    let mut values = vec![0.0; space.len()];
    for trial in trials {
        let m = transition_matrix(trial, trial.words.len(), space.spec.include_self_transitions);
        let total = m.total();
        for (i, row) in m.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let key = FeatureKey::Transition {
                    sentence_id: trial.sentence_id.clone(),
                    from: i + 1,
                    to: j + 1,
                };
                if let Some(k) = space.position(&key) {
                    values[k] = if space.spec.speed_normalized {
                        c as f64 / total as f64
                    } else {
                        c as f64
                    };
                }
            }
        }
    }
    Ok(values)
}

/// FP and TF of every word in the fixed suite. A sentence without a trial
/// reads as fully skipped.
pub fn extract_wfc(trials: &[&TrialMeasures], space: &FeatureSpace) -> Result<(Vec<f64>, DataQualityReport)> {
    space.spec.validate()?;
    if space.spec.regime != crate::corpus::Regime::Fixed {
        return Err(Error::TokenLevelInAnyRegime);
    }
    let (trials, quality) = prepare(trials, space.spec);
    let mut values = vec![0.0; space.len()];
    for trial in &trials {
        for w in &trial.words {
            for metric in super::WFC_METRICS {
                let key = FeatureKey::Wfc {
                    metric,
                    sentence_id: trial.sentence_id.clone(),
                    position: w.word_position,
                };
                if let Some(k) = space.position(&key) {
                    values[k] = w.get(metric);
                }
            }
        }
    }
    Ok((values, quality))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Regime;

    fn path_trial(n: usize, path: &[usize]) -> TrialMeasures {
        TrialMeasures {
            sentence_id: "s".into(),
            regime: Regime::Fixed,
            words: (1..=n)
                .map(|p| crate::measures::WordMeasures {
                    participant_id: "p".into(),
                    sentence_id: "s".into(),
                    word_position: p,
                    ff_ms: 0.0,
                    fp_ms: 0.0,
                    tf_ms: 0.0,
                    rp_ms: 0.0,
                    skipped: true,
                })
                .collect(),
            path: path.to_vec(),
        }
    }

    #[test]
    fn left_to_right_transitions() {
        let m = transition_matrix(&path_trial(4, &[1, 2, 3, 4]), 4, false);
        assert_eq!(m.total(), 3);
        for i in 0..3 {
            assert_eq!(m.counts[i][i + 1], 1);
            assert!((m.normalized()[i][i + 1] - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn regression_trace_transitions() {
        let m = transition_matrix(&path_trial(3, &[1, 2, 1, 3]), 3, false);
        assert_eq!(m.counts, vec![vec![0, 1, 1], vec![1, 0, 0], vec![0, 0, 0]]);
    }

    #[test]
    fn single_fixation_is_all_zero() {
        let m = transition_matrix(&path_trial(3, &[2]), 3, false);
        assert_eq!(m.total(), 0);
        assert!(m.normalized().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn refixations_only_with_flag() {
        let t = path_trial(2, &[1, 1, 2, 2]);
        assert_eq!(transition_matrix(&t, 2, false).total(), 1);
        let with = transition_matrix(&t, 2, true);
        assert_eq!(with.counts, vec![vec![1, 1], vec![0, 1]]);
    }
}
