use proptest::prelude::*;

use gazescore::corpus::{Corpus, FixationEvent, Group, Participant, Regime, SentenceText, TokenAnnotation, TrialRecord};
use gazescore::measures::{compute_reading_speed, compute_word_measures};

fn sentence(n: usize) -> SentenceText {
    SentenceText {
        sentence_id: "s".into(),
        tokens: (1..=n).map(|i| TokenAnnotation::new(i, "word", "X", "X", "dep")).collect(),
    }
}

fn trial(path: &[usize], durations: &[u32]) -> TrialRecord {
    TrialRecord {
        participant_id: "p".into(),
        sentence_id: "s".into(),
        regime: Regime::Fixed,
        fixations: path
            .iter()
            .zip(durations)
            .enumerate()
            .map(|(order, (&word_position, &duration_ms))| FixationEvent {
                order,
                word_position,
                duration_ms,
            })
            .collect(),
    }
}

/// Measures of word `w` read straight off the definitions, one scan each.
fn oracle(path: &[usize], durations: &[u32], w: usize) -> Option<[f64; 4]> {
    let d: Vec<f64> = durations.iter().map(|&x| x as f64).collect();
    let first = path.iter().position(|&p| p == w)?;
    let ff = d[first];
    let fp: f64 = (first..path.len()).take_while(|&j| path[j] == w).map(|j| d[j]).sum();
    let tf: f64 = (0..path.len()).filter(|&j| path[j] == w).map(|j| d[j]).sum();
    let rp: f64 = (first..path.len()).take_while(|&j| path[j] <= w).map(|j| d[j]).sum();
    Some([ff, fp, tf, rp])
}

fn trials() -> impl Strategy<Value = (usize, Vec<usize>, Vec<u32>)> {
    (1usize..12).prop_flat_map(|n| {
        prop::collection::vec((1..=n, 1u32..800), 0..40).prop_map(move |fx| {
            let (path, durations) = fx.into_iter().unzip();
            (n, path, durations)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn agrees_with_definitions((n, path, durations) in trials()) {
        let m = compute_word_measures(&trial(&path, &durations), &sentence(n)).unwrap();
        prop_assert_eq!(m.len(), n);
        for w in 1..=n {
            let got = &m[w - 1];
            prop_assert_eq!(got.word_position, w);
            match oracle(&path, &durations, w) {
                None => {
                    prop_assert!(got.skipped);
                    prop_assert_eq!([got.ff_ms, got.fp_ms, got.tf_ms, got.rp_ms], [0.0; 4]);
                }
                Some(expect) => {
                    prop_assert!(!got.skipped);
                    prop_assert_eq!([got.ff_ms, got.fp_ms, got.tf_ms, got.rp_ms], expect, "word {}", w);
                }
            }
        }
    }

    #[test]
    fn orderings_and_conservation((n, path, durations) in trials()) {
        let m = compute_word_measures(&trial(&path, &durations), &sentence(n)).unwrap();
        for w in m.iter().filter(|w| !w.skipped) {
            prop_assert!(w.ff_ms <= w.fp_ms && w.fp_ms <= w.tf_ms && w.fp_ms <= w.rp_ms);
        }
        let total: u32 = durations.iter().sum();
        prop_assert_eq!(m.iter().map(|w| w.tf_ms).sum::<f64>(), total as f64);
    }
}

#[test]
fn fixation_outside_the_sentence_is_rejected() {
    assert!(compute_word_measures(&trial(&[1, 4], &[100, 100]), &sentence(3)).is_err());
}

#[test]
fn reading_speed_counts_words_per_second() {
    let corpus = Corpus::new(vec![sentence(4)]).unwrap();
    let p = Participant {
        participant_id: "p".into(),
        group: Group::Esl,
        native_language: "Chinese".into(),
        trials: vec![trial(&[1, 2, 3, 4], &[250, 250, 250, 250])],
    };
    let speed = compute_reading_speed(&p, &corpus).unwrap();
    assert_eq!(speed.words_per_second, 4.0);
    assert_eq!(speed.total_words, 4);
}
