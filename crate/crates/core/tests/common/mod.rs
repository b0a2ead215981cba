#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use gazescore::corpus::{Dataset, Regime};
use gazescore::features::{build_matrix, FeatureMatrix, FeatureSpec, FeatureVector};
use gazescore::measures::{compute_reading_speed_in, measure_participant, ParticipantMeasures};
use gazescore::scoring::{compute_eyescores, pearson_r, EyeScoreRun};
use gazescore::simulate::SimulatedCohort;

pub fn measure_all(dataset: &Dataset) -> Vec<ParticipantMeasures> {
    dataset
        .participants
        .iter()
        .map(|p| measure_participant(p, &dataset.corpus).unwrap())
        .collect()
}

/// `(learners, natives)` of a matrix built over `dataset.participants`.
pub fn split_groups<'a>(dataset: &Dataset, matrix: &'a FeatureMatrix) -> (Vec<&'a FeatureVector>, Vec<&'a FeatureVector>) {
    let mut learners = Vec::new();
    let mut natives = Vec::new();
    for v in &matrix.vectors {
        if dataset.participant(&v.participant_id).unwrap().is_native() {
            natives.push(v);
        } else {
            learners.push(v);
        }
    }
    (learners, natives)
}

pub struct Validity {
    pub run: EyeScoreRun,
    pub r_eyescore: f64,
    pub r_speed: f64,
}

/// EyeScore and reading speed of every learner, each correlated with the
/// generating proficiency.
pub fn eyescore_validity(sim: &SimulatedCohort, spec: FeatureSpec) -> Validity {
    let ds = &sim.dataset;
    let measures = measure_all(ds);
    let matrix = build_matrix(&ds.corpus, &measures, spec).unwrap();
    let (learners, natives) = split_groups(ds, &matrix);
    let run = compute_eyescores(&learners, &natives).unwrap();
    let p: Vec<f64> = run
        .learner_scores
        .iter()
        .map(|(id, _)| sim.proficiency(id).unwrap())
        .collect();
    let eye: Vec<f64> = run.learner_scores.iter().map(|(_, s)| *s).collect();
    let speed: Vec<f64> = run
        .learner_scores
        .iter()
        .map(|(id, _)| {
            compute_reading_speed_in(ds.participant(id).unwrap(), &ds.corpus, spec.regime)
                .unwrap()
                .words_per_second
        })
        .collect();
    Validity {
        r_eyescore: pearson_r(&eye, &p).unwrap(),
        r_speed: pearson_r(&speed, &p).unwrap(),
        run,
    }
}

pub fn fixed_spec(set: gazescore::features::FeatureSet, speed_normalized: bool) -> FeatureSpec {
    FeatureSpec::new(set, Regime::Fixed, speed_normalized)
}

/// Interpolated modified Kneser-Ney written from the textbook definition over
/// string n-grams.
pub struct KnOracle {
    counts: [HashMap<Vec<String>, f64>; 3],
    discounts: [[f64; 3]; 3],
    pub predictable: Vec<String>,
}

impl KnOracle {
    pub fn new(lines: &[&str]) -> Self {
        let mut tri: HashMap<Vec<String>, f64> = HashMap::new();
        let mut vocab: BTreeSet<String> = BTreeSet::new();
        for line in lines {
            let mut t = vec!["<s>".to_string(), "<s>".to_string()];
            t.extend(line.split_whitespace().map(String::from));
            t.push("</s>".into());
            vocab.extend(t.iter().cloned());
            for w in t.windows(3) {
                *tri.entry(w.to_vec()).or_default() += 1.0;
            }
        }
        // lower orders: continuation counts, except raw counts after <s>
        let mut bi: HashMap<Vec<String>, f64> = HashMap::new();
        for (k, c) in &tri {
            let key = k[1..].to_vec();
            *bi.entry(key.clone()).or_default() += if key[0] == "<s>" { *c } else { 1.0 };
        }
        let mut uni: HashMap<Vec<String>, f64> = HashMap::new();
        for k in bi.keys() {
            *uni.entry(k[1..].to_vec()).or_default() += 1.0;
        }
        let counts = [uni, bi, tri];
        let discounts = [0, 1, 2].map(|o| {
            let n = |j: f64| counts[o].values().filter(|&&c| c == j).count() as f64;
            let (n1, n2, n3, n4) = (n(1.0), n(2.0), n(3.0), n(4.0));
            let y = n1 / (n1 + 2.0 * n2);
            let raw = [1.0 - 2.0 * y * n2 / n1, 2.0 - 3.0 * y * n3 / n2, 3.0 - 4.0 * y * n4 / n3];
            let fallback = [0.5, 1.0, 1.5];
            [0, 1, 2].map(|k| {
                let d = raw[k];
                if d.is_finite() && d > 0.0 && d < (k + 1) as f64 {
                    d
                } else {
                    fallback[k]
                }
            })
        });
        let mut predictable: Vec<String> = vocab.into_iter().filter(|w| w != "<s>").collect();
        predictable.push("<unk>".into());
        KnOracle {
            counts,
            discounts,
            predictable,
        }
    }

    pub fn prob(&self, history: &[&str], w: &str) -> f64 {
        let order = history.len();
        let lower = if order == 0 {
            1.0 / self.predictable.len() as f64
        } else {
            self.prob(&history[1..], w)
        };
        let table = &self.counts[order];
        let d = self.discounts[order];
        let mut total = 0.0;
        let mut bands = [0.0; 3];
        for (k, c) in table {
            if k[..order].iter().zip(history).all(|(a, b)| a == b) {
                total += c;
                bands[(*c as usize).min(3) - 1] += 1.0;
            }
        }
        if total == 0.0 {
            return lower;
        }
        let mut key: Vec<String> = history.iter().map(|s| s.to_string()).collect();
        key.push(w.to_string());
        let c = table.get(&key).copied().unwrap_or(0.0);
        let disc = if c == 0.0 { 0.0 } else { d[(c as usize).min(3) - 1] };
        let gamma = (d[0] * bands[0] + d[1] * bands[1] + d[2] * bands[2]) / total;
        (c - disc).max(0.0) / total + gamma * lower
    }
}
