//! Document ingestion and preprocessing.
//!
//! The pipeline is: tokenize, drop stopwords and geographic words, detect
//! collocations corpus-wide, inject joined bigram tokens, then build a
//! vocabulary in first-occurrence order and sparse bag-of-words vectors.
//! The final token sequences are kept alongside the counts because the
//! coherence measure slides windows over them.

mod io;
mod phrases;
mod stats;
pub mod stopwords;
mod text;

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use io::{load_word_list, read_documents, read_documents_from_path, write_documents};
pub use phrases::{apply_bigrams, detect_bigrams, phrase_score, BigramMode, PhraseTable};
pub use stats::{corpus_stats, CorpusStats, GroupStats};
pub use text::{remove_filtered, tokenize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    pub labels: BTreeSet<String>,
    pub group: Option<String>,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        RawDocument {
            id: id.into(),
            text: text.into(),
            labels: BTreeSet::new(),
            group: None,
        }
    }

    pub fn with_labels<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.labels = labels.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub stopwords: BTreeSet<String>,
    pub geo_words: BTreeSet<String>,
    pub min_token_len: usize,
    pub bigram_min_count: u64,
    pub bigram_threshold: f64,
    pub bigram_mode: BigramMode,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            stopwords: BTreeSet::new(),
            geo_words: BTreeSet::new(),
            min_token_len: 2,
            bigram_min_count: 5,
            bigram_threshold: 10.0,
            bigram_mode: BigramMode::Append,
        }
    }
}

impl PreprocessConfig {
    /// Default settings with the built-in English stopword list.
    pub fn english() -> Self {
        let mut cfg = Self::default();
        cfg.add_stopwords(stopwords::ENGLISH.iter().copied());
        cfg
    }

    pub fn add_stopwords<I, S>(&mut self, words: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stopwords
            .extend(words.into_iter().map(|w| w.as_ref().to_lowercase()));
    }

    pub fn add_geo_words<I, S>(&mut self, words: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.geo_words
            .extend(words.into_iter().map(|w| w.as_ref().to_lowercase()));
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_token_len < 1 {
            return Err(Error::Config("min_token_len must be >= 1".into()));
        }
        if self.bigram_min_count < 1 {
            return Err(Error::Config("bigram_min_count must be >= 1".into()));
        }
        if !(self.bigram_threshold >= 0.0) {
            return Err(Error::Config("bigram_threshold must be nonnegative".into()));
        }
        let lower = |set: &BTreeSet<String>| set.iter().all(|w| *w == w.to_lowercase());
        if !lower(&self.stopwords) || !lower(&self.geo_words) {
            return Err(Error::Config("word lists must be lowercase".into()));
        }
        Ok(())
    }

    /// Tokenization plus stopword/geo filtering for one document.
    pub fn filtered_tokens(&self, text: &str) -> Vec<String> {
        remove_filtered(tokenize(text, self), self)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<u64>,
    collection_freq: Vec<u64>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> Option<&str> {
        self.terms.get(id).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self, id: usize) -> u64 {
        self.doc_freq[id]
    }

    pub fn collection_freq(&self, id: usize) -> u64 {
        self.collection_freq[id]
    }

    /// Stable identity of the term ordering, recorded in fitted models.
    pub fn fingerprint(&self) -> String {
        vocabulary_fingerprint(&self.terms)
    }

    /// Maps tokens to a bag of words; unknown tokens are counted, not kept.
    pub fn encode(&self, id: impl Into<String>, tokens: &[String]) -> (BowDocument, usize) {
        let mut counts: HashMap<usize, u32> = HashMap::new();
        let mut oov = 0;
        for tok in tokens {
            match self.index.get(tok) {
                Some(&t) => *counts.entry(t).or_insert(0) += 1,
                None => oov += 1,
            }
        }
        (BowDocument::from_counts(id, counts), oov)
    }

    fn push_or_get(&mut self, term: &str) -> usize {
        if let Some(&id) = self.index.get(term) {
            return id;
        }
        let id = self.terms.len();
        self.terms.push(term.to_owned());
        self.index.insert(term.to_owned(), id);
        self.doc_freq.push(0);
        self.collection_freq.push(0);
        id
    }
}

pub fn vocabulary_fingerprint(terms: &[String]) -> String {
    let mut hasher = Sha256::new();
    for t in terms {
        hasher.update(t.as_bytes());
        hasher.update([0u8]);
    }
    hex::encode(hasher.finalize())
}

/// Sparse term counts for one document, sorted by term id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BowDocument {
    pub id: String,
    counts: Vec<(usize, u32)>,
    token_total: u64,
}

impl BowDocument {
    /// Zero counts are discarded.
    pub fn from_counts(
        id: impl Into<String>,
        counts: impl IntoIterator<Item = (usize, u32)>,
    ) -> Self {
        let mut merged: HashMap<usize, u32> = HashMap::new();
        for (t, c) in counts {
            *merged.entry(t).or_insert(0) += c;
        }
        let mut counts: Vec<(usize, u32)> = merged.into_iter().filter(|&(_, c)| c > 0).collect();
        counts.sort_unstable_by_key(|&(t, _)| t);
        let token_total = counts.iter().map(|&(_, c)| u64::from(c)).sum();
        BowDocument {
            id: id.into(),
            counts,
            token_total,
        }
    }

    pub fn counts(&self) -> &[(usize, u32)] {
        &self.counts
    }

    pub fn token_total(&self) -> u64 {
        self.token_total
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, term: usize) -> u32 {
        self.counts
            .binary_search_by_key(&term, |&(t, _)| t)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    pub fn max_term(&self) -> Option<usize> {
        self.counts.last().map(|&(t, _)| t)
    }
}

/// A preprocessed, immutable document collection.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    config: PreprocessConfig,
    phrases: PhraseTable,
    vocab: Vocabulary,
    docs: Vec<BowDocument>,
    sequences: Vec<Vec<usize>>,
    groups: Vec<Option<String>>,
}

/// Runs the full preprocessing pipeline over `raw_docs`.
///
/// Documents emptied by filtering are kept so row indices line up with the
/// input (and with label rows).
pub fn build_corpus(raw_docs: &[RawDocument], config: &PreprocessConfig) -> Result<Corpus> {
    config.validate()?;
    let mut seen = HashSet::new();
    for doc in raw_docs {
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::DuplicateId(doc.id.clone()));
        }
    }

    let filtered: Vec<Vec<String>> = raw_docs
        .iter()
        .map(|d| config.filtered_tokens(&d.text))
        .collect();
    let phrases = match config.bigram_mode {
        BigramMode::Off => PhraseTable::default(),
        _ => detect_bigrams(&filtered, config.bigram_min_count, config.bigram_threshold),
    };

    let mut vocab = Vocabulary::default();
    let mut docs = Vec::with_capacity(raw_docs.len());
    let mut sequences = Vec::with_capacity(raw_docs.len());
    for (raw, tokens) in raw_docs.iter().zip(filtered) {
        let tokens = apply_bigrams(tokens, &phrases, config.bigram_mode);
        let seq: Vec<usize> = tokens.iter().map(|t| vocab.push_or_get(t)).collect();
        let bow = BowDocument::from_counts(raw.id.clone(), seq.iter().map(|&t| (t, 1)));
        for &(t, c) in bow.counts() {
            vocab.doc_freq[t] += 1;
            vocab.collection_freq[t] += u64::from(c);
        }
        docs.push(bow);
        sequences.push(seq);
    }

    Ok(Corpus {
        config: config.clone(),
        phrases,
        vocab,
        docs,
        sequences,
        groups: raw_docs.iter().map(|d| d.group.clone()).collect(),
    })
}

impl Corpus {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn documents(&self) -> &[BowDocument] {
        &self.docs
    }

    /// Post-preprocessing token sequences as term ids, one per document.
    pub fn sequences(&self) -> &[Vec<usize>] {
        &self.sequences
    }

    pub fn groups(&self) -> &[Option<String>] {
        &self.groups
    }

    pub fn phrases(&self) -> &PhraseTable {
        &self.phrases
    }

    pub fn config(&self) -> &PreprocessConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn total_tokens(&self) -> u64 {
        self.docs.iter().map(BowDocument::token_total).sum()
    }

    /// Preprocesses new documents with this corpus' settings and phrase
    /// table, encoding them against the frozen vocabulary.
    pub fn encode_new(&self, raw_docs: &[RawDocument]) -> EncodedBatch {
        let mut docs = Vec::with_capacity(raw_docs.len());
        let mut oov_tokens = 0;
        for raw in raw_docs {
            let tokens = self.config.filtered_tokens(&raw.text);
            let tokens = apply_bigrams(tokens, &self.phrases, self.config.bigram_mode);
            let (bow, oov) = self.vocab.encode(raw.id.clone(), &tokens);
            oov_tokens += oov;
            docs.push(bow);
        }
        EncodedBatch { docs, oov_tokens }
    }
}

/// Documents encoded against an existing vocabulary.
#[derive(Debug, Clone)]
pub struct EncodedBatch {
    pub docs: Vec<BowDocument>,
    /// Tokens dropped because the vocabulary did not contain them.
    pub oov_tokens: usize,
}
