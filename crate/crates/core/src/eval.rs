//! Comparing discovered topics with an existing label taxonomy.
//!
//! `T` (documents x topics) holds inferred topic proportions and `L`
//! (documents x labels) binary label occurrence. Both metrics work on
//! columns: a topic and a label are similar when they are heavy on the
//! same documents.
//!
//! The similarity S is `sum(T^T L) / (C * T)`. Taken literally that sum is
//! of raw inner products, which are not cosines and are unbounded; by
//! default every column is L2-normalized first so each entry is a true
//! cosine and S lies in [0, 1]. [`SimilarityNormalization::Raw`] keeps the
//! literal form.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, RawDocument};
use crate::error::{Error, Result};
use crate::model::{ModelArtifact, TopicModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityNormalization {
    #[default]
    Cosine,
    Raw,
}

impl std::str::FromStr for SimilarityNormalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cosine" => Ok(Self::Cosine),
            "raw" => Ok(Self::Raw),
            other => Err(format!("unknown similarity normalization `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicDocMatrix {
    pub doc_ids: Vec<String>,
    /// Model topic id behind each column.
    pub topic_ids: Vec<usize>,
    pub values: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    pub doc_ids: Vec<String>,
    /// Sorted label universe; column order.
    pub labels: Vec<String>,
    pub values: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    /// Best-matching topic column per label; `None` for labels that never
    /// occur.
    pub chosen: Vec<Option<usize>>,
    /// Distinct topics chosen.
    pub cov: usize,
    /// `cov` over the number of labels that occur at least once.
    pub cov_ratio: f64,
    pub labels_considered: usize,
}

/// Binary label occurrence. Without a universe, columns are the sorted
/// union of observed labels.
pub fn build_label_matrix(
    docs: &[RawDocument],
    universe: Option<&[String]>,
) -> Result<LabelMatrix> {
    let labels: Vec<String> = match universe {
        Some(u) => u
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
        None => docs
            .iter()
            .flat_map(|d| d.labels.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let col: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut values = Array2::zeros((docs.len(), labels.len()));
    for (d, doc) in docs.iter().enumerate() {
        for label in &doc.labels {
            let c = *col
                .get(label.as_str())
                .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
            values[[d, c]] = 1.0;
        }
    }
    Ok(LabelMatrix {
        doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
        labels,
        values,
    })
}

/// Rows are inferred topic proportions. With `columns`, only those topics
/// are kept and each row is renormalized over them (all-zero rows stay
/// zero).
pub fn build_topic_matrix(
    model: &dyn TopicModel,
    corpus: &Corpus,
    columns: Option<&[usize]>,
) -> Result<TopicDocMatrix> {
    model.check_vocabulary(corpus)?;
    let k = model.num_topics();
    let topic_ids: Vec<usize> = match columns {
        Some(cols) => {
            if let Some(&bad) = cols.iter().find(|&&c| c >= k) {
                return Err(Error::Input(format!(
                    "topic {bad} out of range for {k} topics"
                )));
            }
            cols.to_vec()
        }
        None => (0..k).collect(),
    };
    let docs = corpus.documents();
    let mut values = Array2::zeros((docs.len(), topic_ids.len()));
    for (d, doc) in docs.iter().enumerate() {
        let probs = model.infer_doc_topics(doc)?;
        let mut row: Vec<f64> = topic_ids.iter().map(|&t| probs[t]).collect();
        if columns.is_some() {
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter_mut().for_each(|x| *x /= total);
            }
        }
        values.row_mut(d).assign(&ndarray::Array1::from(row));
    }
    Ok(TopicDocMatrix {
        doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
        topic_ids,
        values,
    })
}

/// `T` for a sweep point: all LDA topics, or the `k` heaviest HDP topics.
pub fn topic_matrix_at(model: &ModelArtifact, corpus: &Corpus, k: usize) -> Result<TopicDocMatrix> {
    match model {
        ModelArtifact::Lda(m) => {
            if k != m.num_topics() {
                return Err(Error::Input(format!(
                    "LDA model has {} topics, asked for K = {k}",
                    m.num_topics()
                )));
            }
            build_topic_matrix(m, corpus, None)
        }
        ModelArtifact::Hdp(m) => {
            let proj = m.top_k_projection(k)?;
            build_topic_matrix(m, corpus, Some(&proj.topic_ids))
        }
    }
}

fn check_shapes(t: &ArrayView2<f64>, l: &ArrayView2<f64>) -> Result<()> {
    if t.nrows() != l.nrows() {
        return Err(Error::Dimension(format!(
            "topic matrix has {} documents, label matrix {}",
            t.nrows(),
            l.nrows()
        )));
    }
    if t.ncols() == 0 || l.ncols() == 0 {
        return Err(Error::Dimension(
            "need at least one topic and one label".into(),
        ));
    }
    Ok(())
}

fn unit_columns(m: &ArrayView2<f64>) -> Array2<f64> {
    let mut out = m.to_owned();
    for mut col in out.axis_iter_mut(Axis(1)) {
        let norm = col.dot(&col).sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|x| x / norm);
        }
    }
    out
}

/// Topic x label matrix of column cosines (zero columns give 0).
pub fn column_cosines(t: ArrayView2<f64>, l: ArrayView2<f64>) -> Result<Array2<f64>> {
    check_shapes(&t, &l)?;
    Ok(unit_columns(&t).t().dot(&unit_columns(&l)))
}

/// Mean similarity S between topic columns and label columns.
pub fn mean_cosine_similarity(
    t: ArrayView2<f64>,
    l: ArrayView2<f64>,
    normalization: SimilarityNormalization,
) -> Result<f64> {
    check_shapes(&t, &l)?;
    let product = match normalization {
        SimilarityNormalization::Cosine => unit_columns(&t).t().dot(&unit_columns(&l)),
        SimilarityNormalization::Raw => t.t().dot(&l),
    };
    Ok(product.sum() / (t.ncols() * l.ncols()) as f64)
}

/// For each label, the topic with the highest column cosine (ties to the
/// lowest topic index); coverage counts the distinct topics chosen.
pub fn coverage(t: ArrayView2<f64>, l: ArrayView2<f64>) -> Result<CoverageResult> {
    let sims = column_cosines(t, l.view())?;
    let mut chosen = Vec::with_capacity(l.ncols());
    for (j, label_col) in l.axis_iter(Axis(1)).enumerate() {
        if label_col.iter().all(|&x| x == 0.0) {
            log::warn!("label column {j} never occurs; excluded from coverage");
            chosen.push(None);
            continue;
        }
        let col = sims.column(j);
        let mut best = 0;
        for (i, &s) in col.iter().enumerate() {
            if s > col[best] {
                best = i;
            }
        }
        chosen.push(Some(best));
    }
    let distinct: BTreeSet<usize> = chosen.iter().flatten().copied().collect();
    let considered = chosen.iter().filter(|c| c.is_some()).count();
    let cov = distinct.len();
    Ok(CoverageResult {
        chosen,
        cov,
        cov_ratio: if considered > 0 {
            cov as f64 / considered as f64
        } else {
            0.0
        },
        labels_considered: considered,
    })
}

/// Writes a matrix as CSV with `doc_id` first and the given column names.
pub fn write_matrix_csv<W: Write, S: AsRef<str>>(
    writer: W,
    doc_ids: &[String],
    columns: &[S],
    values: ArrayView2<f64>,
) -> Result<()> {
    let to_err = |e: csv::Error| Error::Input(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["doc_id".to_string()];
    header.extend(columns.iter().map(|c| c.as_ref().to_string()));
    w.write_record(&header).map_err(to_err)?;
    for (id, row) in doc_ids.iter().zip(values.outer_iter()) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|x| x.to_string()));
        w.write_record(&rec).map_err(to_err)?;
    }
    w.flush()
        .map_err(|e| Error::Input(format!("writing CSV: {e}")))
}

impl TopicDocMatrix {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let cols: Vec<String> = self
            .topic_ids
            .iter()
            .map(|t| format!("topic_{t}"))
            .collect();
        write_matrix_csv(writer, &self.doc_ids, &cols, self.values.view())
    }
}

impl LabelMatrix {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_matrix_csv(writer, &self.doc_ids, &self.labels, self.values.view())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    const COS: SimilarityNormalization = SimilarityNormalization::Cosine;

    #[test]
    fn similarity_examples() {
        let i2 = array![[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(
            mean_cosine_similarity(i2.view(), i2.view(), COS).unwrap(),
            0.5
        );
        let ones = array![[1.0], [1.0]];
        let s = mean_cosine_similarity(i2.view(), ones.view(), COS).unwrap();
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let zeros = array![[0.0], [0.0]];
        assert_eq!(
            mean_cosine_similarity(i2.view(), zeros.view(), COS).unwrap(),
            0.0
        );
    }

    #[test]
    fn raw_similarity_is_literal() {
        let t = array![[2.0, 0.0], [0.0, 1.0]];
        let l = array![[1.0], [1.0]];
        let s = mean_cosine_similarity(t.view(), l.view(), SimilarityNormalization::Raw).unwrap();
        assert_eq!(s, 1.5);
    }

    #[test]
    fn shape_errors() {
        let t = array![[1.0], [0.0]];
        let l = array![[1.0]];
        assert!(mean_cosine_similarity(t.view(), l.view(), COS).is_err());
        let empty = Array2::<f64>::zeros((2, 0));
        assert!(coverage(t.view(), empty.view()).is_err());
    }

    #[test]
    fn coverage_examples() {
        let i2 = array![[1.0, 0.0], [0.0, 1.0]];
        let c = coverage(i2.view(), i2.view()).unwrap();
        assert_eq!((c.cov, c.cov_ratio), (2, 1.0));

        let same = array![[1.0, 1.0], [0.0, 0.0]];
        let c = coverage(i2.view(), same.view()).unwrap();
        assert_eq!((c.cov, c.cov_ratio), (1, 0.5));
        assert_eq!(c.chosen, vec![Some(0), Some(0)]);

        // tie between topics goes to the lowest index
        let t = array![[0.5, 0.5], [0.5, 0.5]];
        let l = array![[1.0], [1.0]];
        assert_eq!(coverage(t.view(), l.view()).unwrap().chosen, vec![Some(0)]);
    }

    #[test]
    fn coverage_skips_absent_labels() {
        let i2 = array![[1.0, 0.0], [0.0, 1.0]];
        let l = array![[1.0, 0.0], [0.0, 0.0]];
        let c = coverage(i2.view(), l.view()).unwrap();
        assert_eq!(c.chosen, vec![Some(0), None]);
        assert_eq!((c.cov, c.labels_considered, c.cov_ratio), (1, 1, 1.0));
    }

    #[test]
    fn label_matrix_rules() {
        let docs = vec![
            RawDocument::new("1", "").with_labels(["b"]),
            RawDocument::new("2", "").with_labels(["a"]),
            RawDocument::new("3", ""),
        ];
        let m = build_label_matrix(&docs, None).unwrap();
        assert_eq!(m.labels, vec!["a", "b"]);
        assert_eq!(m.values, array![[0.0, 1.0], [1.0, 0.0], [0.0, 0.0]]);

        let universe = vec!["a".to_string()];
        assert!(matches!(
            build_label_matrix(&docs, Some(&universe)),
            Err(Error::UnknownLabel(l)) if l == "b"
        ));
    }

    #[test]
    fn csv_export() {
        let docs = vec![RawDocument::new("x", "").with_labels(["a"])];
        let m = build_label_matrix(&docs, None).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "doc_id,a\nx,1\n");
    }
}
