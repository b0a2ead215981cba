//! Reading-speed normalization: each word's metric divided by the mean of
//! that metric over its context.

use serde::{Deserialize, Serialize};

use crate::corpus::Regime;
use crate::measures::{Metric, TrialMeasures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalizationContext {
    /// The sentence the word belongs to.
    Sentence,
    /// Every word the participant read in the regime.
    AllText,
}

impl NormalizationContext {
    pub fn for_regime(regime: Regime) -> Self {
        match regime {
            Regime::Fixed => NormalizationContext::Sentence,
            Regime::Any => NormalizationContext::AllText,
        }
    }
}

/// A context whose mean metric was zero; its normalized values are set to 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroContext {
    pub participant_id: String,
    /// `None` for the all-text context.
    pub sentence_id: Option<String>,
    pub metric: Metric,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataQualityReport {
    pub zero_contexts: Vec<ZeroContext>,
}

impl DataQualityReport {
    pub fn is_clean(&self) -> bool {
        self.zero_contexts.is_empty()
    }

    pub fn merge(&mut self, other: DataQualityReport) {
        self.zero_contexts.extend(other.zero_contexts);
    }
}

/// Returns the trials with every metric replaced by `M_w / S_{M,C}`, where
/// `S_{M,C}` is the mean of the metric over the words of the context, skipped
/// words counting as zero. Skip flags and fixation paths are unchanged.
pub fn speed_normalize(
    trials: &[&TrialMeasures],
    context: NormalizationContext,
) -> (Vec<TrialMeasures>, DataQualityReport) {
    let mut out: Vec<TrialMeasures> = trials.iter().map(|t| (*t).clone()).collect();
    let mut report = DataQualityReport::default();
    let participant = |ts: &[TrialMeasures]| {
        ts.iter()
            .flat_map(|t| t.words.first())
            .map(|w| w.participant_id.clone())
            .next()
            .unwrap_or_default()
    };

    match context {
        NormalizationContext::Sentence => {
            for trial in &mut out {
                for metric in Metric::ALL {
                    let n = trial.words.len();
                    let sum: f64 = trial.words.iter().map(|w| w.get(metric)).sum();
                    let scale = if n == 0 { 0.0 } else { sum / n as f64 };
                    if scale == 0.0 {
                        report.zero_contexts.push(ZeroContext {
                            participant_id: participant(std::slice::from_ref(trial)),
                            sentence_id: Some(trial.sentence_id.clone()),
                            metric,
                        });
                    }
                    rescale(trial, metric, scale);
                }
            }
        }
        NormalizationContext::AllText => {
            let n: usize = out.iter().map(|t| t.words.len()).sum();
            let pid = participant(&out);
            for metric in Metric::ALL {
                let sum: f64 = out.iter().flat_map(|t| &t.words).map(|w| w.get(metric)).sum();
                let scale = if n == 0 { 0.0 } else { sum / n as f64 };
                if scale == 0.0 {
                    report.zero_contexts.push(ZeroContext {
                        participant_id: pid.clone(),
                        sentence_id: None,
                        metric,
                    });
                }
                for trial in &mut out {
                    rescale(trial, metric, scale);
                }
            }
        }
    }
    (out, report)
}

fn rescale(trial: &mut TrialMeasures, metric: Metric, scale: f64) {
    for w in &mut trial.words {
        let v = if scale == 0.0 { 0.0 } else { w.get(metric) / scale };
        w.set(metric, v);
    }
}
