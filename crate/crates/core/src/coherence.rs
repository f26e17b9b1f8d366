//! C_v topic coherence.
//!
//! Word statistics come from boolean sliding windows over the preprocessed
//! token sequences: each window is a virtual document and a word "occurs"
//! in it if it appears at least once. Pairwise NPMI values form a context
//! vector for every top word; a topic's score is the mean cosine between
//! each word's vector and the sum of all of them.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::math::cosine;
use crate::model::{top_entries, ModelArtifact, TopicModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceConfig {
    pub window_size: usize,
    pub top_n: usize,
    /// Floor on the joint probability.
    pub epsilon: f64,
    /// Exponent applied to NPMI entries of the context vectors.
    pub gamma_exponent: i32,
    /// HDP topics below this corpus weight are left out (0 keeps all).
    pub hdp_weight_floor: f64,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        CoherenceConfig {
            window_size: 110,
            top_n: 10,
            epsilon: 1e-12,
            gamma_exponent: 1,
            hdp_weight_floor: 0.0,
        }
    }
}

impl CoherenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size < 1 || self.top_n < 1 {
            return Err(Error::Config(
                "coherence: window_size and top_n must be >= 1".into(),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("coherence: epsilon must be positive".into()));
        }
        if !(self.hdp_weight_floor >= 0.0) {
            return Err(Error::Config(
                "coherence: hdp_weight_floor must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Number of step-1 windows a sequence of `len` tokens produces.
pub fn window_count(len: usize, window_size: usize) -> usize {
    match len {
        0 => 0,
        n if n <= window_size => 1,
        n => n - window_size + 1,
    }
}

/// Step-1 windows over one document as token slices. Windows never span
/// documents; a document shorter than the window is a single window.
pub fn sliding_windows<T>(tokens: &[T], window_size: usize) -> impl Iterator<Item = &[T]> {
    let width = window_size.max(1).min(tokens.len().max(1));
    let n = window_count(tokens.len(), window_size.max(1));
    (0..n).map(move |i| &tokens[i..i + width])
}

/// Boolean-window occurrence statistics for a set of tracked words.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowCounts {
    tracked: Vec<usize>,
    index: HashMap<usize, usize>,
    num_windows: u64,
    occurrences: Vec<u64>,
    /// Upper triangle (including the diagonal) of the joint counts.
    joint: Vec<u64>,
}

impl WindowCounts {
    /// Counts windows over `sequences` for the (deduplicated) `words`.
    pub fn build(sequences: &[Vec<usize>], words: &[usize], window_size: usize) -> Self {
        let tracked: Vec<usize> = words
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<usize, usize> =
            tracked.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let m = tracked.len();
        let mut counts = WindowCounts {
            tracked,
            index,
            num_windows: 0,
            occurrences: vec![0; m],
            joint: vec![0; m * (m + 1) / 2],
        };

        let mut in_window = vec![0u32; m];
        let mut present: Vec<usize> = Vec::new();
        for seq in sequences {
            let mapped: Vec<Option<usize>> =
                seq.iter().map(|w| counts.index.get(w).copied()).collect();
            let n_windows = window_count(mapped.len(), window_size);
            if n_windows == 0 {
                continue;
            }
            let width = window_size.min(mapped.len());
            for slot in mapped[..width].iter().flatten() {
                add(&mut in_window, &mut present, *slot);
            }
            for start in 0..n_windows {
                if start > 0 {
                    if let Some(out) = mapped[start - 1] {
                        remove(&mut in_window, &mut present, out);
                    }
                    if let Some(inc) = mapped[start + width - 1] {
                        add(&mut in_window, &mut present, inc);
                    }
                }
                counts.record(&present);
            }
            for slot in present.drain(..) {
                in_window[slot] = 0;
            }
        }
        counts
    }

    fn record(&mut self, present: &[usize]) {
        self.num_windows += 1;
        for (i, &a) in present.iter().enumerate() {
            self.occurrences[a] += 1;
            for &b in &present[i..] {
                let slot = self.tri(a, b);
                self.joint[slot] += 1;
            }
        }
    }

    fn tri(&self, a: usize, b: usize) -> usize {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let m = self.tracked.len();
        lo * m - lo * (lo + 1) / 2 + hi
    }

    pub fn num_windows(&self) -> u64 {
        self.num_windows
    }

    pub fn tracked(&self) -> &[usize] {
        &self.tracked
    }

    /// Windows containing `word`, or `None` if it is not tracked.
    pub fn occurrences(&self, word: usize) -> Option<u64> {
        self.index.get(&word).map(|&i| self.occurrences[i])
    }

    /// Windows containing both words.
    pub fn joint(&self, a: usize, b: usize) -> Option<u64> {
        let (i, j) = (*self.index.get(&a)?, *self.index.get(&b)?);
        Some(self.joint[self.tri(i, j)])
    }
}

fn add(in_window: &mut [u32], present: &mut Vec<usize>, slot: usize) {
    if in_window[slot] == 0 {
        present.push(slot);
    }
    in_window[slot] += 1;
}

fn remove(in_window: &mut [u32], present: &mut Vec<usize>, slot: usize) {
    in_window[slot] -= 1;
    if in_window[slot] == 0 {
        let pos = present
            .iter()
            .position(|&s| s == slot)
            .expect("slot present");
        present.swap_remove(pos);
    }
}

/// Normalized PMI with the joint probability floored at `epsilon`.
///
/// Integer counts are combined before taking logs so that perfectly
/// associated pairs give exactly 1 and independent pairs exactly 0.
pub fn npmi(counts: &WindowCounts, w1: usize, w2: usize, epsilon: f64) -> Result<f64> {
    let o1 = counts.occurrences(w1).unwrap_or(0);
    let o2 = counts.occurrences(w2).unwrap_or(0);
    for (w, o) in [(w1, o1), (w2, o2)] {
        if o == 0 {
            return Err(Error::UndefinedWord(format!("term id {w}")));
        }
    }
    if w1 == w2 {
        return Ok(1.0);
    }
    let n = counts.num_windows();
    let j = counts.joint(w1, w2).expect("both words tracked");
    let nf = n as f64;
    let p12 = j as f64 / nf;
    let value = if j == 0 || p12 < epsilon {
        let (p1, p2) = (o1 as f64 / nf, o2 as f64 / nf);
        (epsilon / (p1 * p2)).ln() / -epsilon.ln()
    } else if j == n {
        // Both words occur in every window.
        1.0
    } else {
        let ratio = (j as u128 * n as u128) as f64 / (o1 as u128 * o2 as u128) as f64;
        ratio.ln() / (nf / j as f64).ln()
    };
    Ok(value.clamp(-1.0, 1.0))
}

/// C_v of one topic given its top words.
pub fn topic_cv(
    top_words: &[usize],
    counts: &WindowCounts,
    config: &CoherenceConfig,
) -> Result<f64> {
    let n = top_words.len();
    if n == 0 {
        return Err(Error::Input("topic has no top words".into()));
    }
    let mut vectors = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = npmi(counts, top_words[i], top_words[j], config.epsilon)?
                .powi(config.gamma_exponent);
            vectors[i][j] = v;
            vectors[j][i] = v;
        }
    }
    let mut total = vec![0.0; n];
    for v in &vectors {
        for (t, x) in total.iter_mut().zip(v) {
            *t += x;
        }
    }
    Ok(vectors.iter().map(|v| cosine(v, &total)).sum::<f64>() / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceResult {
    /// Model topic ids the scores belong to.
    pub topic_ids: Vec<usize>,
    pub per_topic: Vec<f64>,
    pub mean: f64,
    pub num_windows: u64,
    pub config: CoherenceConfig,
}

/// Scores the given rows of a topic-word matrix against `corpus` windows.
/// Window counts are built once over the union of all top words.
pub fn coherence_of_topics(
    model: &dyn TopicModel,
    topic_ids: &[usize],
    corpus: &Corpus,
    config: &CoherenceConfig,
) -> Result<CoherenceResult> {
    config.validate()?;
    model.check_vocabulary(corpus)?;
    if topic_ids.is_empty() {
        return Err(Error::Input("no topics to score".into()));
    }
    let topic_word = model.topic_word();
    let tops: Vec<Vec<usize>> = topic_ids
        .iter()
        .map(|&t| {
            let row = topic_word.row(t);
            top_entries(row.as_slice().expect("standard layout"), config.top_n)
                .into_iter()
                .map(|(w, _)| w)
                .collect()
        })
        .collect();
    let union: Vec<usize> = tops.iter().flatten().copied().collect();
    let counts = WindowCounts::build(corpus.sequences(), &union, config.window_size);
    for &w in &union {
        if counts.occurrences(w) == Some(0) {
            let term = model.terms().get(w).cloned().unwrap_or_default();
            return Err(Error::UndefinedWord(term));
        }
    }
    let per_topic = tops
        .iter()
        .map(|words| topic_cv(words, &counts, config))
        .collect::<Result<Vec<f64>>>()?;
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Ok(CoherenceResult {
        topic_ids: topic_ids.to_vec(),
        per_topic,
        mean,
        num_windows: counts.num_windows(),
        config: config.clone(),
    })
}

/// Model-level C_v.
///
/// LDA is scored over all of its topics; `k`, when given, must equal its
/// topic count. HDP is scored over every truncated topic whose weight
/// reaches `hdp_weight_floor`, independent of `k`.
pub fn model_coherence(
    model: &ModelArtifact,
    corpus: &Corpus,
    config: &CoherenceConfig,
    k: Option<usize>,
) -> Result<CoherenceResult> {
    match model {
        ModelArtifact::Lda(m) => {
            if let Some(k) = k.filter(|&k| k != m.num_topics()) {
                return Err(Error::Input(format!(
                    "LDA model has {} topics, asked for K = {k}",
                    m.num_topics()
                )));
            }
            let ids: Vec<usize> = (0..m.num_topics()).collect();
            coherence_of_topics(m, &ids, corpus, config)
        }
        ModelArtifact::Hdp(m) => {
            let mut ids: Vec<usize> = m
                .topic_weights()
                .into_iter()
                .filter(|&(_, w)| w >= config.hdp_weight_floor)
                .map(|(t, _)| t)
                .collect();
            ids.sort_unstable();
            coherence_of_topics(m, &ids, corpus, config)
        }
    }
}
