use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Corpus;

/// Dataset summary: document count, vocabulary size and the distribution
/// of post-preprocessing document lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    /// Distinct terms.
    pub vocabulary_size: usize,
    /// Token occurrences; an alternative reading of "vocabulary size".
    pub total_tokens: u64,
    pub w_mean: f64,
    /// Population standard deviation.
    pub w_std: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_group: Option<BTreeMap<String, GroupStats>>,
}

/// Per-group summary. A group key of the form `region/entity` is split so
/// that the mean number of documents per entity can be reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub documents: usize,
    pub entities: usize,
    pub docs_per_entity: f64,
    pub w_mean: f64,
}

pub const UNGROUPED: &str = "(ungrouped)";

pub fn corpus_stats(corpus: &Corpus, group_by: bool) -> CorpusStats {
    let lengths: Vec<f64> = corpus
        .documents()
        .iter()
        .map(|d| d.token_total() as f64)
        .collect();
    let (w_mean, w_std) = mean_std(&lengths);

    let per_group = group_by.then(|| {
        let mut buckets: BTreeMap<String, (Vec<f64>, BTreeSet<String>)> = BTreeMap::new();
        for (len, group) in lengths.iter().zip(corpus.groups()) {
            let (region, entity) = match group.as_deref() {
                None | Some("") => (UNGROUPED, ""),
                Some(g) => g.split_once('/').unwrap_or((g, "")),
            };
            let bucket = buckets.entry(region.to_owned()).or_default();
            bucket.0.push(*len);
            bucket.1.insert(entity.to_owned());
        }
        buckets
            .into_iter()
            .map(|(region, (lens, entities))| {
                let stats = GroupStats {
                    documents: lens.len(),
                    entities: entities.len(),
                    docs_per_entity: lens.len() as f64 / entities.len() as f64,
                    w_mean: mean_std(&lens).0,
                };
                (region, stats)
            })
            .collect()
    });

    CorpusStats {
        documents: corpus.len(),
        vocabulary_size: corpus.vocabulary().len(),
        total_tokens: corpus.total_tokens(),
        w_mean,
        w_std,
        per_group,
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
