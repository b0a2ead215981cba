//! Plain-text model files.
//!
//! ```text
//! gazescore-trigram-lm 1
//! [config]
//! min_count <n>
//! [vocab]
//! <unk>
//! <s>
//! </s>
//! <word>            one per line, in id order
//! [discounts]
//! <order> <D1> <D2> <D3+>     orders 1, 2, 3
//! [frequencies]
//! <word> <count>    raw token counts of the training text
//! [trigrams]
//! <u> <v> <w> <count>
//! [end]
//! ```
//!
//! Sections appear in this order. Lower-order and continuation counts are
//! derived from the trigram section when the file is read.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::langmodel::kneser_ney::{Discounts, TrigramLM};
use crate::langmodel::FrequencyTable;

const MAGIC: &str = "gazescore-trigram-lm 1";

pub fn write_model(lm: &TrigramLM, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "[config]")?;
    writeln!(out, "min_count {}", lm.min_count)?;
    writeln!(out, "[vocab]")?;
    for w in &lm.vocab {
        writeln!(out, "{w}")?;
    }
    writeln!(out, "[discounts]")?;
    for (order, d) in lm.discounts.iter().enumerate() {
        writeln!(out, "{} {} {} {}", order + 1, d.0[0], d.0[1], d.0[2])?;
    }
    writeln!(out, "[frequencies]")?;
    for (w, c) in lm.frequencies.counts() {
        writeln!(out, "{w} {c}")?;
    }
    writeln!(out, "[trigrams]")?;
    for ((a, b, c), n) in lm.trigram_counts() {
        writeln!(out, "{a} {b} {c} {n}")?;
    }
    writeln!(out, "[end]")?;
    out.flush()
}

pub fn read_model(input: impl BufRead, file: &str) -> Result<TrigramLM> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i as u64 + 1, l));
    let err = |line: u64, msg: String| Error::Parse {
        file: file.to_string(),
        line,
        field: "model".into(),
        message: msg,
    };
    let mut next = |expect: &str| -> Result<(u64, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((n, Err(e))) => Err(err(n, e.to_string())),
            None => Err(err(0, format!("unexpected end of file, expected {expect}"))),
        }
    };

    let (n, magic) = next("header")?;
    if magic.trim() != MAGIC {
        return Err(err(n, format!("expected `{MAGIC}`")));
    }
    let (n, l) = next("[config]")?;
    if l != "[config]" {
        return Err(err(n, "expected [config]".into()));
    }
    let (n, l) = next("min_count")?;
    let min_count = l
        .strip_prefix("min_count ")
        .and_then(|v| v.trim().parse::<u64>().ok())
        .ok_or_else(|| err(n, format!("bad min_count line `{l}`")))?;
    let (n, l) = next("[vocab]")?;
    if l != "[vocab]" {
        return Err(err(n, "expected [vocab]".into()));
    }

    let mut vocab = Vec::new();
    loop {
        let (_, l) = next("[discounts]")?;
        if l == "[discounts]" {
            break;
        }
        vocab.push(l);
    }
    let ids: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i as u32)).collect();

    let mut discounts = [Discounts([0.0; 3]); 3];
    for order in 1..=3 {
        let (n, l) = next("discount line")?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        let values: Option<Vec<f64>> = parts.iter().skip(1).map(|p| p.parse().ok()).collect();
        match (parts.first().and_then(|o| o.parse::<usize>().ok()), values) {
            (Some(o), Some(v)) if o == order && v.len() == 3 => {
                let d = Discounts([v[0], v[1], v[2]]);
                if !d.is_valid() {
                    return Err(err(n, format!("discounts out of range for order {order}")));
                }
                discounts[order - 1] = d;
            }
            _ => return Err(err(n, format!("bad discount line `{l}`"))),
        }
    }

    let (n, l) = next("[frequencies]")?;
    if l != "[frequencies]" {
        return Err(err(n, "expected [frequencies]".into()));
    }
    let mut counts = Vec::new();
    loop {
        let (n, l) = next("[trigrams]")?;
        if l == "[trigrams]" {
            break;
        }
        let (w, c) = l
            .rsplit_once(' ')
            .and_then(|(w, c)| c.parse::<u64>().ok().map(|c| (w.to_string(), c)))
            .ok_or_else(|| err(n, format!("bad frequency line `{l}`")))?;
        counts.push((w, c));
    }

    let mut trigrams = HashMap::new();
    loop {
        let (n, l) = next("[end]")?;
        if l == "[end]" {
            break;
        }
        let parts: Vec<&str> = l.split(' ').collect();
        if parts.len() != 4 {
            return Err(err(n, format!("bad trigram line `{l}`")));
        }
        let id = |w: &str| ids.get(w).copied().ok_or_else(|| err(n, format!("`{w}` not in vocabulary")));
        let key = (id(parts[0])?, id(parts[1])?, id(parts[2])?);
        let count: u64 = parts[3].parse().map_err(|_| err(n, format!("bad count `{}`", parts[3])))?;
        if trigrams.insert(key, count).is_some() {
            return Err(err(n, "duplicate trigram".into()));
        }
    }

    TrigramLM::assemble(vocab, min_count, trigrams, FrequencyTable::from_counts(counts), Some(discounts))
}
