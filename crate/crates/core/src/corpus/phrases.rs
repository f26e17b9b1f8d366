//! Collocation detection: adjacent word pairs that occur together more
//! often than their unigram frequencies suggest are promoted to joined
//! `a_b` tokens.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

/// How admitted pairs are injected into a token stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BigramMode {
    /// Joined tokens are appended after the original stream, unigrams kept.
    #[default]
    Append,
    /// Each matched pair is fused in place into a single joined token.
    Replace,
    /// Phrase detection disabled.
    Off,
}

impl std::str::FromStr for BigramMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "append" => Ok(BigramMode::Append),
            "replace" => Ok(BigramMode::Replace),
            "off" => Ok(BigramMode::Off),
            other => Err(format!("unknown bigram mode `{other}`")),
        }
    }
}

/// Admitted ordered pairs with their collocation scores.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhraseTable {
    pairs: BTreeMap<String, BTreeMap<String, f64>>,
}

impl PhraseTable {
    pub fn insert(&mut self, first: &str, second: &str, score: f64) {
        self.pairs
            .entry(first.to_owned())
            .or_default()
            .insert(second.to_owned(), score);
    }

    pub fn score(&self, first: &str, second: &str) -> Option<f64> {
        self.pairs.get(first)?.get(second).copied()
    }

    pub fn contains(&self, first: &str, second: &str) -> bool {
        self.score(first, second).is_some()
    }

    pub fn len(&self) -> usize {
        self.pairs.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.pairs
            .iter()
            .flat_map(|(a, inner)| inner.iter().map(move |(b, s)| (a.as_str(), b.as_str(), *s)))
    }
}

/// `(count(a,b) - min_count) * n_unique / (count(a) * count(b))`
pub fn phrase_score(
    count_ab: u64,
    count_a: u64,
    count_b: u64,
    n_unique: u64,
    min_count: u64,
) -> f64 {
    (count_ab as f64 - min_count as f64) * n_unique as f64 / (count_a as f64 * count_b as f64)
}

/// Scans every stream for adjacent pairs and admits those with
/// `count >= min_count` and `phrase_score >= threshold`.
pub fn detect_bigrams<S: AsRef<str>>(
    streams: &[Vec<S>],
    min_count: u64,
    threshold: f64,
) -> PhraseTable {
    let mut unigrams: HashMap<&str, u64> = HashMap::new();
    let mut pairs: HashMap<(&str, &str), u64> = HashMap::new();
    for stream in streams {
        for tok in stream {
            *unigrams.entry(tok.as_ref()).or_insert(0) += 1;
        }
        for w in stream.windows(2) {
            *pairs.entry((w[0].as_ref(), w[1].as_ref())).or_insert(0) += 1;
        }
    }
    let n_unique = unigrams.len() as u64;

    let mut table = PhraseTable::default();
    for ((a, b), count_ab) in pairs {
        if count_ab < min_count {
            continue;
        }
        let score = phrase_score(count_ab, unigrams[a], unigrams[b], n_unique, min_count);
        if score >= threshold {
            table.insert(a, b, score);
        }
    }
    table
}

/// Greedy left-to-right, non-overlapping scan for admitted pairs.
///
/// Appending never removes tokens; replacing fuses each matched pair.
pub fn apply_bigrams(tokens: Vec<String>, table: &PhraseTable, mode: BigramMode) -> Vec<String> {
    if mode == BigramMode::Off || table.is_empty() || tokens.len() < 2 {
        return tokens;
    }
    let mut joined = Vec::new();
    let mut fused = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if i + 1 < tokens.len() && table.contains(&tokens[i], &tokens[i + 1]) {
            let phrase = format!("{}_{}", tokens[i], tokens[i + 1]);
            joined.push(phrase.clone());
            fused.push(phrase);
            i += 2;
        } else {
            fused.push(tokens[i].clone());
            i += 1;
        }
    }
    match mode {
        BigramMode::Append => {
            let mut out = tokens;
            out.extend(joined);
            out
        }
        BigramMode::Replace => fused,
        BigramMode::Off => unreachable!(),
    }
}
