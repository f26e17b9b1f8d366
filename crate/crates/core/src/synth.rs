//! Synthetic corpora drawn from the LDA generative process, with the true
//! topics kept as ground truth, plus greedy topic matching for recovery
//! checks.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{RawDocument, Vocabulary};
use crate::error::{Error, Result};
use crate::math::cosine;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_topics: usize,
    pub vocab_size: usize,
    pub num_docs: usize,
    /// Mean of the Poisson document length (floored at 1).
    pub doc_len_mean: f64,
    /// Symmetric document-topic Dirichlet parameter.
    pub alpha: f64,
    /// Symmetric topic-word Dirichlet parameter.
    pub topic_concentration: f64,
    /// Documents are spread round-robin over this many groups (0 = none).
    pub groups: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_topics: 5,
            vocab_size: 200,
            num_docs: 500,
            doc_len_mean: 60.0,
            alpha: 0.1,
            topic_concentration: 0.05,
            groups: 0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("synth: {msg}")));
        if self.num_topics < 1 {
            return bad("num_topics must be >= 1");
        }
        if self.vocab_size < self.num_topics {
            return bad("vocab_size must be >= num_topics");
        }
        if self.num_docs < 1 {
            return bad("num_docs must be >= 1");
        }
        if !(self.doc_len_mean > 0.0 && self.alpha > 0.0 && self.topic_concentration > 0.0) {
            return bad("doc_len_mean, alpha and topic_concentration must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub documents: Vec<RawDocument>,
    /// Term names, indexed like the columns of `topic_word`.
    pub terms: Vec<String>,
    /// True topic-word distributions, `num_topics x vocab_size`.
    pub topic_word: Array2<f64>,
    /// True per-document topic mixtures, `num_docs x num_topics`.
    pub doc_topic: Array2<f64>,
    pub label_names: Vec<String>,
}

pub fn term_name(id: usize) -> String {
    format!("w{id:05}")
}

pub fn label_name(topic: usize) -> String {
    format!("topic_{topic}")
}

fn dirichlet<R: Rng>(rng: &mut R, dim: usize, conc: f64) -> Vec<f64> {
    let g = Gamma::new(conc, 1.0).expect("positive concentration");
    let mut x: Vec<f64> = (0..dim).map(|_| g.sample(rng)).collect();
    let total: f64 = x.iter().sum();
    if total > 0.0 {
        x.iter_mut().for_each(|v| *v /= total);
    } else {
        // Every gamma draw underflowed; the limit is a vertex of the simplex.
        let i = rng.random_range(0..dim);
        x[i] = 1.0;
    }
    x
}

fn categorical<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left `u` past the final cumulative sum.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Draws topics, per-document mixtures, lengths and tokens. Each document
/// is labeled with the name of its dominant true topic.
pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (k, v, d) = (config.num_topics, config.vocab_size, config.num_docs);

    let mut topic_word = Array2::zeros((k, v));
    for t in 0..k {
        let row = dirichlet(&mut rng, v, config.topic_concentration);
        topic_word.row_mut(t).assign(&ndarray::Array1::from(row));
    }
    let terms: Vec<String> = (0..v).map(term_name).collect();
    let label_names: Vec<String> = (0..k).map(label_name).collect();
    let lengths = Poisson::new(config.doc_len_mean).expect("positive mean");

    let mut doc_topic = Array2::zeros((d, k));
    let mut documents = Vec::with_capacity(d);
    let rows: Vec<Vec<f64>> = topic_word.outer_iter().map(|r| r.to_vec()).collect();
    for doc in 0..d {
        let theta = dirichlet(&mut rng, k, config.alpha);
        let len = (lengths.sample(&mut rng) as usize).max(1);
        let words: Vec<&str> = (0..len)
            .map(|_| {
                let z = categorical(&mut rng, &theta);
                terms[categorical(&mut rng, &rows[z])].as_str()
            })
            .collect();
        let mut raw = RawDocument::new(format!("doc{doc:05}"), words.join(" "))
            .with_labels([label_names[argmax(&theta)].clone()]);
        if config.groups > 0 {
            raw = raw.with_group(format!("group{}", doc % config.groups));
        }
        doc_topic.row_mut(doc).assign(&ndarray::Array1::from(theta));
        documents.push(raw);
    }

    Ok(SynthCorpus {
        documents,
        terms,
        topic_word,
        doc_topic,
        label_names,
    })
}

impl SynthCorpus {
    /// Re-indexes an estimated topic-word matrix over `vocab` onto the
    /// synthetic term ids; terms the corpus never produced get zero mass.
    pub fn align_estimate(
        &self,
        estimate: ArrayView2<f64>,
        vocab: &Vocabulary,
    ) -> Result<Array2<f64>> {
        if estimate.ncols() != vocab.len() {
            return Err(Error::Dimension(format!(
                "estimate has {} columns, vocabulary {}",
                estimate.ncols(),
                vocab.len()
            )));
        }
        let mut out = Array2::zeros((estimate.nrows(), self.terms.len()));
        for (j, term) in self.terms.iter().enumerate() {
            if let Some(col) = vocab.id(term) {
                out.column_mut(j).assign(&estimate.column(col));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicMatching {
    /// `(estimated row, true row, cosine)` in the order pairs were chosen.
    pub pairs: Vec<(usize, usize, f64)>,
    pub mean_cosine: f64,
}

/// Greedy maximal-cosine assignment without replacement: repeatedly takes
/// the most similar remaining (estimated, true) pair, ties to the lowest
/// estimated then lowest true index.
pub fn match_topics(estimated: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<TopicMatching> {
    if estimated.ncols() != truth.ncols() {
        return Err(Error::Dimension(format!(
            "estimated topics have {} terms, true topics {}",
            estimated.ncols(),
            truth.ncols()
        )));
    }
    let est: Vec<Vec<f64>> = estimated.outer_iter().map(|r| r.to_vec()).collect();
    let tru: Vec<Vec<f64>> = truth.outer_iter().map(|r| r.to_vec()).collect();
    let sims: Vec<Vec<f64>> = est
        .iter()
        .map(|e| tru.iter().map(|t| cosine(e, t)).collect())
        .collect();

    let mut est_used = vec![false; est.len()];
    let mut tru_used = vec![false; tru.len()];
    let mut pairs = Vec::new();
    for _ in 0..est.len().min(tru.len()) {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, row) in sims.iter().enumerate() {
            if est_used[i] {
                continue;
            }
            for (j, &s) in row.iter().enumerate() {
                if !tru_used[j] && best.map_or(true, |(_, _, b)| s > b) {
                    best = Some((i, j, s));
                }
            }
        }
        let (i, j, s) = best.expect("unmatched rows remain");
        est_used[i] = true;
        tru_used[j] = true;
        pairs.push((i, j, s));
    }
    let mean_cosine = if pairs.is_empty() {
        0.0
    } else {
        pairs.iter().map(|p| p.2).sum::<f64>() / pairs.len() as f64
    };
    Ok(TopicMatching { pairs, mean_cosine })
}
