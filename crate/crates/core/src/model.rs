//! Common view over fitted topic models and the on-disk artifact format.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::{BowDocument, Corpus};
use crate::error::{Error, Result};
use crate::hdp::HdpModel;
use crate::lda::LdaModel;

/// What the coherence and evaluation code needs from a fitted model.
pub trait TopicModel {
    fn num_topics(&self) -> usize;

    /// Row-normalized topic-word matrix (topics x vocabulary).
    fn topic_word(&self) -> Array2<f64>;

    /// Normalized topic proportions for one document.
    fn infer_doc_topics(&self, bow: &BowDocument) -> Result<Vec<f64>>;

    fn terms(&self) -> &[String];

    fn vocabulary_fingerprint(&self) -> &str;

    /// Fails unless `corpus` was built with the vocabulary this model saw.
    fn check_vocabulary(&self, corpus: &Corpus) -> Result<()> {
        let found = corpus.vocabulary().fingerprint();
        if found != self.vocabulary_fingerprint() {
            return Err(Error::VocabularyMismatch {
                expected: short(self.vocabulary_fingerprint()),
                found: short(&found),
            });
        }
        Ok(())
    }
}

fn short(fp: &str) -> String {
    format!("vocabulary {}", &fp[..fp.len().min(12)])
}

/// The `n` highest-probability entries of `row`, descending, ties broken by
/// ascending term id.
pub fn top_entries(row: &[f64], n: usize) -> Vec<(usize, f64)> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx.into_iter().map(|i| (i, row[i])).collect()
}

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum ModelArtifact {
    Lda(LdaModel),
    Hdp(HdpModel),
}

#[derive(Serialize, Deserialize)]
struct Envelope<M> {
    format_version: u32,
    #[serde(flatten)]
    artifact: M,
}

impl ModelArtifact {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelArtifact::Lda(_) => "lda",
            ModelArtifact::Hdp(_) => "hdp",
        }
    }

    pub fn as_topic_model(&self) -> &dyn TopicModel {
        match self {
            ModelArtifact::Lda(m) => m,
            ModelArtifact::Hdp(m) => m,
        }
    }

    pub fn write_to<W: Write>(&self, writer: W) -> Result<()> {
        let env = Envelope {
            format_version: FORMAT_VERSION,
            artifact: self,
        };
        serde_json::to_writer(writer, &env).map_err(|e| Error::Artifact(e.to_string()))
    }

    pub fn read_from<R: Read>(reader: R) -> Result<Self> {
        let env: Envelope<ModelArtifact> =
            serde_json::from_reader(reader).map_err(|e| Error::Artifact(e.to_string()))?;
        if env.format_version != FORMAT_VERSION {
            return Err(Error::Artifact(format!(
                "unsupported format version {}",
                env.format_version
            )));
        }
        match &env.artifact {
            ModelArtifact::Lda(m) => m.validate()?,
            ModelArtifact::Hdp(m) => m.validate()?,
        }
        Ok(env.artifact)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}
