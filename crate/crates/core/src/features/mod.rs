//! Per-participant gaze feature vectors.
//!
//! Four feature sets are supported. Type-level sets work in both regimes:
//!
//! - `wp`: per-reader regressions of FF, FP, TF and RP on word length, log
//!   frequency and surprisal, plus a logistic skip model (20 values, or 15
//!   slopes when speed-normalized)
//! - `sclusters`: mean FF, FP and TF of fixated words grouped by UPOS, XPOS
//!   and dependency labels shared by every participant
//!
//! Token-level sets need the fixed sentence suite:
//!
//! - `transitions`: saccade counts between word pairs of each sentence
//! - `wfc`: FP and TF of every fixed-text word
//!
//! Feature names are stable identifiers:
//!
//! | set | name | ordering |
//! |-----|------|----------|
//! | wp | `wp/FF/beta_surprisal` | model FF, FP, TF, RP, SKIP; term length, logfreq, surprisal, intercept |
//! | sclusters | `sclust/TF/xpos/DT` | metric, tagset (deprel, upos, xpos), label |
//! | transitions | `trans/s012/3->5` | sentence (corpus order), launch word, landing word |
//! | wfc | `wfc/FP/s012/w03` | sentence (corpus order), position, FP before TF |

mod extract;
mod normalize;
mod solvers;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use extract::{
    extract_s_clusters, extract_transitions, extract_wfc, extract_wp_coefficients, transition_matrix,
    TransitionMatrix, WP_MODELS, WP_TERMS,
};
pub use normalize::{speed_normalize, DataQualityReport, NormalizationContext, ZeroContext};
pub use solvers::{fit_logistic_skip, fit_ols, LinearFit, LOGISTIC_JITTER, OLS_JITTER};

use crate::corpus::{Corpus, Regime, TokenAnnotation};
use crate::error::{Error, Result};
use crate::measures::{Metric, ParticipantMeasures, TrialMeasures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    Wp,
    SClusters,
    Transitions,
    Wfc,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 4] = [FeatureSet::Wp, FeatureSet::SClusters, FeatureSet::Transitions, FeatureSet::Wfc];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Wp => "wp",
            FeatureSet::SClusters => "sclusters",
            FeatureSet::Transitions => "transitions",
            FeatureSet::Wfc => "wfc",
        }
    }

    /// Token-level sets compare readers word by word and need the fixed suite.
    pub fn is_token_level(self) -> bool {
        matches!(self, FeatureSet::Transitions | FeatureSet::Wfc)
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSet {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FeatureSet::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown feature set `{s}` (expected wp, sclusters, transitions or wfc)"))
    }
}

/// Syntactic label families used by the cluster features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tagset {
    Deprel,
    Upos,
    Xpos,
}

impl Tagset {
    pub const ALL: [Tagset; 3] = [Tagset::Deprel, Tagset::Upos, Tagset::Xpos];

    pub fn as_str(self) -> &'static str {
        match self {
            Tagset::Deprel => "deprel",
            Tagset::Upos => "upos",
            Tagset::Xpos => "xpos",
        }
    }

    pub fn label(self, token: &TokenAnnotation) -> &str {
        match self {
            Tagset::Deprel => &token.deprel,
            Tagset::Upos => &token.upos,
            Tagset::Xpos => &token.xpos,
        }
    }
}

impl FromStr for Tagset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Tagset::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown tagset `{s}`"))
    }
}

/// Metrics that enter the cluster features.
pub const CLUSTER_METRICS: [Metric; 3] = [Metric::FirstFixation, Metric::FirstPass, Metric::TotalFixation];
/// Metrics recorded per word in the fixed-context features.
pub const WFC_METRICS: [Metric; 2] = [Metric::FirstPass, Metric::TotalFixation];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKey {
    /// `model` indexes [`WP_MODELS`], `term` indexes [`WP_TERMS`].
    Wp { model: usize, term: usize },
    SCluster { metric: Metric, tagset: Tagset, label: String },
    Transition { sentence_id: String, from: usize, to: usize },
    Wfc { metric: Metric, sentence_id: String, position: usize },
}

impl FeatureKey {
    pub fn set(&self) -> FeatureSet {
        match self {
            FeatureKey::Wp { .. } => FeatureSet::Wp,
            FeatureKey::SCluster { .. } => FeatureSet::SClusters,
            FeatureKey::Transition { .. } => FeatureSet::Transitions,
            FeatureKey::Wfc { .. } => FeatureSet::Wfc,
        }
    }
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKey::Wp { model, term } => write!(f, "wp/{}/{}", WP_MODELS[*model], WP_TERMS[*term]),
            FeatureKey::SCluster { metric, tagset, label } => {
                write!(f, "sclust/{metric}/{}/{label}", tagset.as_str())
            }
            FeatureKey::Transition { sentence_id, from, to } => write!(f, "trans/{sentence_id}/{from}->{to}"),
            FeatureKey::Wfc {
                metric,
                sentence_id,
                position,
            } => write!(f, "wfc/{metric}/{sentence_id}/w{position:02}"),
        }
    }
}

impl FromStr for FeatureKey {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("malformed feature name `{s}`");
        let (kind, rest) = s.split_once('/').ok_or_else(bad)?;
        match kind {
            "wp" => {
                let (model, term) = rest.split_once('/').ok_or_else(bad)?;
                Ok(FeatureKey::Wp {
                    model: WP_MODELS.iter().position(|m| *m == model).ok_or_else(bad)?,
                    term: WP_TERMS.iter().position(|t| *t == term).ok_or_else(bad)?,
                })
            }
            "sclust" => {
                let mut parts = rest.splitn(3, '/');
                let metric = parts.next().ok_or_else(bad)?.parse::<Metric>()?;
                let tagset = parts.next().ok_or_else(bad)?.parse::<Tagset>()?;
                let label = parts.next().ok_or_else(bad)?.to_string();
                Ok(FeatureKey::SCluster { metric, tagset, label })
            }
            "trans" => {
                let (sid, pair) = rest.rsplit_once('/').ok_or_else(bad)?;
                let (from, to) = pair.split_once("->").ok_or_else(bad)?;
                Ok(FeatureKey::Transition {
                    sentence_id: sid.to_string(),
                    from: from.parse().map_err(|_| bad())?,
                    to: to.parse().map_err(|_| bad())?,
                })
            }
            "wfc" => {
                let (metric, rest) = rest.split_once('/').ok_or_else(bad)?;
                let (sid, word) = rest.rsplit_once('/').ok_or_else(bad)?;
                let position = word.strip_prefix('w').and_then(|p| p.parse().ok()).ok_or_else(bad)?;
                Ok(FeatureKey::Wfc {
                    metric: metric.parse()?,
                    sentence_id: sid.to_string(),
                    position,
                })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub set: FeatureSet,
    pub regime: Regime,
    pub speed_normalized: bool,
    /// Count `i -> i` refixations in transition matrices.
    #[serde(default)]
    pub include_self_transitions: bool,
}

impl FeatureSpec {
    pub fn new(set: FeatureSet, regime: Regime, speed_normalized: bool) -> Self {
        FeatureSpec {
            set,
            regime,
            speed_normalized,
            include_self_transitions: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.set.is_token_level() && self.regime == Regime::Any {
            return Err(Error::TokenLevelInAnyRegime);
        }
        Ok(())
    }
}

/// Named, ordered feature columns shared by every participant.
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    pub spec: FeatureSpec,
    keys: Vec<FeatureKey>,
    names: Arc<Vec<String>>,
    index: HashMap<FeatureKey, usize>,
}

impl PartialEq for FeatureSpace {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.keys == other.keys
    }
}

impl FeatureSpace {
    pub fn from_keys(spec: FeatureSpec, keys: Vec<FeatureKey>) -> Result<Self> {
        spec.validate()?;
        if let Some(k) = keys.iter().find(|k| k.set() != spec.set) {
            return Err(Error::InvalidArgument(format!("feature `{k}` does not belong to set {}", spec.set)));
        }
        let index: HashMap<FeatureKey, usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        if index.len() != keys.len() {
            return Err(Error::InvalidArgument("duplicate feature names".into()));
        }
        let names = Arc::new(keys.iter().map(|k| k.to_string()).collect());
        Ok(FeatureSpace {
            spec,
            keys,
            names,
            index,
        })
    }

    pub fn from_names(spec: FeatureSpec, names: &[String]) -> Result<Self> {
        let keys = names
            .iter()
            .map(|n| n.parse::<FeatureKey>().map_err(Error::Data))
            .collect::<Result<Vec<_>>>()?;
        FeatureSpace::from_keys(spec, keys)
    }

    pub fn keys(&self) -> &[FeatureKey] {
        &self.keys
    }

    pub fn names(&self) -> &Arc<Vec<String>> {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn position(&self, key: &FeatureKey) -> Option<usize> {
        self.index.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub participant_id: String,
    pub names: Arc<Vec<String>>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(participant_id: impl Into<String>, names: Arc<Vec<String>>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} feature names",
                values.len(),
                names.len()
            )));
        }
        let participant_id = participant_id.into();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "feature `{}` of participant {participant_id} is not finite",
                names[i]
            )));
        }
        Ok(FeatureVector {
            participant_id,
            names,
            values,
        })
    }

    pub fn same_space(&self, names: &[String]) -> bool {
        self.names.as_slice() == names
    }
}

/// Feature vectors of a cohort, in input order.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub space: FeatureSpace,
    pub vectors: Vec<FeatureVector>,
    pub quality: DataQualityReport,
}

impl FeatureMatrix {
    pub fn get(&self, participant_id: &str) -> Option<&FeatureVector> {
        self.vectors.iter().find(|v| v.participant_id == participant_id)
    }
}

fn regime_trials(measures: &ParticipantMeasures, regime: Regime) -> Vec<&TrialMeasures> {
    measures.trials_in(regime).collect()
}

/// Builds the column set for `spec` from the whole cohort.
pub fn build_feature_space(corpus: &Corpus, cohort: &[ParticipantMeasures], spec: FeatureSpec) -> Result<FeatureSpace> {
    spec.validate()?;
    let keys = match spec.set {
        FeatureSet::Wp => {
            let terms = if spec.speed_normalized { 3 } else { 4 };
            (0..WP_MODELS.len())
                .flat_map(|model| (0..terms).map(move |term| FeatureKey::Wp { model, term }))
                .collect()
        }
        FeatureSet::SClusters => {
            let mut shared: Option<BTreeSet<(Tagset, String)>> = None;
            for p in cohort {
                let mut seen = BTreeSet::new();
                for trial in p.trials_in(spec.regime) {
                    let sentence = lookup(corpus, &trial.sentence_id)?;
                    for (w, token) in trial.words.iter().zip(&sentence.tokens) {
                        if !w.skipped {
                            for t in Tagset::ALL {
                                seen.insert((t, t.label(token).to_string()));
                            }
                        }
                    }
                }
                shared = Some(match shared {
                    None => seen,
                    Some(s) => s.intersection(&seen).cloned().collect(),
                });
            }
            let shared = shared.unwrap_or_default();
            if shared.is_empty() {
                return Err(Error::NoSharedClusters);
            }
            CLUSTER_METRICS
                .iter()
                .flat_map(|&metric| {
                    shared.iter().map(move |(tagset, label)| FeatureKey::SCluster {
                        metric,
                        tagset: *tagset,
                        label: label.clone(),
                    })
                })
                .collect()
        }
        FeatureSet::Transitions => {
            let mut present: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
            for p in cohort {
                for trial in p.trials_in(spec.regime) {
                    let rank = corpus
                        .rank(&trial.sentence_id)
                        .ok_or_else(|| Error::Data(format!("unknown sentence_id {}", trial.sentence_id)))?;
                    let m = transition_matrix(trial, trial.words.len(), spec.include_self_transitions);
                    for (i, row) in m.counts.iter().enumerate() {
                        for (j, &c) in row.iter().enumerate() {
                            if c > 0 {
                                present.insert((rank, i + 1, j + 1));
                            }
                        }
                    }
                }
            }
            present
                .into_iter()
                .map(|(rank, from, to)| FeatureKey::Transition {
                    sentence_id: corpus.sentences()[rank].sentence_id.clone(),
                    from,
                    to,
                })
                .collect()
        }
        FeatureSet::Wfc => {
            let mut ranks = BTreeSet::new();
            for p in cohort {
                for trial in p.trials_in(spec.regime) {
                    ranks.insert(
                        corpus
                            .rank(&trial.sentence_id)
                            .ok_or_else(|| Error::Data(format!("unknown sentence_id {}", trial.sentence_id)))?,
                    );
                }
            }
            let mut keys = Vec::new();
            for rank in ranks {
                let s = &corpus.sentences()[rank];
                for position in 1..=s.len() {
                    for metric in WFC_METRICS {
                        keys.push(FeatureKey::Wfc {
                            metric,
                            sentence_id: s.sentence_id.clone(),
                            position,
                        });
                    }
                }
            }
            keys
        }
    };
    FeatureSpace::from_keys(spec, keys)
}

pub(crate) fn lookup<'a>(corpus: &'a Corpus, sentence_id: &str) -> Result<&'a crate::corpus::SentenceText> {
    corpus
        .get(sentence_id)
        .ok_or_else(|| Error::Data(format!("unknown sentence_id {sentence_id}")))
}

/// Extracts one participant's vector in `space`.
pub fn extract(space: &FeatureSpace, corpus: &Corpus, measures: &ParticipantMeasures) -> Result<(FeatureVector, DataQualityReport)> {
    let trials = regime_trials(measures, space.spec.regime);
    let (values, quality) = match space.spec.set {
        FeatureSet::Wp => extract_wp_coefficients(&trials, corpus, space.spec)?,
        FeatureSet::SClusters => extract_s_clusters(&trials, corpus, space)?,
        FeatureSet::Transitions => (extract_transitions(&trials, space)?, DataQualityReport::default()),
        FeatureSet::Wfc => extract_wfc(&trials, space)?,
    };
    let vector = FeatureVector::new(measures.participant_id.clone(), space.names().clone(), values)?;
    Ok((vector, quality))
}

/// Extracts every participant concurrently on the current rayon pool.
pub fn extract_matrix(space: &FeatureSpace, corpus: &Corpus, cohort: &[ParticipantMeasures]) -> Result<FeatureMatrix> {
    let results: Vec<(FeatureVector, DataQualityReport)> = cohort
        .par_iter()
        .map(|m| extract(space, corpus, m))
        .collect::<Result<_>>()?;
    let mut quality = DataQualityReport::default();
    let mut vectors = Vec::with_capacity(results.len());
    for (v, q) in results {
        vectors.push(v);
        quality.merge(q);
    }
    Ok(FeatureMatrix {
        space: space.clone(),
        vectors,
        quality,
    })
}

/// Builds the space from `cohort` and extracts every member.
pub fn build_matrix(corpus: &Corpus, cohort: &[ParticipantMeasures], spec: FeatureSpec) -> Result<FeatureMatrix> {
    let space = build_feature_space(corpus, cohort, spec)?;
    extract_matrix(&space, corpus, cohort)
}

/// Long-format export: `participant_id,feature_name,value`.
pub fn write_features(mut out: impl Write, matrix: &FeatureMatrix) -> std::io::Result<()> {
    writeln!(out, "participant_id,feature_name,value")?;
    for v in &matrix.vectors {
        for (name, value) in v.names.iter().zip(&v.values) {
            writeln!(out, "{},{},{}", v.participant_id, name, value)?;
        }
    }
    out.flush()
}

/// Two `#` header lines describing the spec, then one feature name per line.
pub fn write_manifest(mut out: impl Write, space: &FeatureSpace) -> std::io::Result<()> {
    let s = space.spec;
    writeln!(out, "# gazescore feature space")?;
    writeln!(
        out,
        "# set={} regime={} speed_normalized={} include_self_transitions={}",
        s.set, s.regime, s.speed_normalized, s.include_self_transitions
    )?;
    for name in space.names().iter() {
        writeln!(out, "{name}")?;
    }
    out.flush()
}

pub fn read_manifest(input: impl BufRead) -> Result<FeatureSpace> {
    let mut spec: Option<FeatureSpec> = None;
    let mut names = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| Error::Data(e.to_string()))?;
        if let Some(header) = line.strip_prefix("# ") {
            if header.starts_with("set=") {
                spec = Some(parse_spec_header(header)?);
            }
        } else if !line.is_empty() {
            names.push(line);
        }
    }
    let spec = spec.ok_or_else(|| Error::Data("manifest has no spec header".into()))?;
    FeatureSpace::from_names(spec, &names)
}

fn parse_spec_header(header: &str) -> Result<FeatureSpec> {
    let fields: HashMap<&str, &str> = header.split_whitespace().filter_map(|kv| kv.split_once('=')).collect();
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| Error::Data(format!("manifest header lacks `{k}`")))
    };
    let flag = |k: &str| -> Result<bool> { get(k)?.parse().map_err(|_| Error::Data(format!("bad `{k}` value"))) };
    Ok(FeatureSpec {
        set: get("set")?.parse().map_err(Error::Data)?,
        regime: get("regime")?.parse().map_err(Error::Data)?,
        speed_normalized: flag("speed_normalized")?,
        include_self_transitions: flag("include_self_transitions")?,
    })
}
