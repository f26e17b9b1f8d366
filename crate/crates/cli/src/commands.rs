use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use topicdisc::coherence::model_coherence;
use topicdisc::corpus::{
    build_corpus, corpus_stats, read_documents_from_path, write_documents, Corpus, CorpusStats,
    RawDocument,
};
use topicdisc::eval::{
    build_label_matrix, coverage, mean_cosine_similarity, topic_matrix_at, LabelMatrix,
};
use topicdisc::model::{top_entries, ModelArtifact, TopicModel};
use topicdisc::synth::{self, SynthConfig};
use topicdisc::{hdp, lda, Error};

use crate::config::{ModelKind, RunConfig};
use crate::error::{CliError, Result};
use crate::report::{format_topics, SweepReport, SweepRow, TopicListing, TopicWords};

/// Reads the configured input and runs the preprocessing pipeline.
pub fn load_corpus(cfg: &RunConfig) -> Result<(Vec<RawDocument>, Corpus)> {
    let path = cfg.input_path()?;
    let docs = read_documents_from_path(path)?;
    let pre = cfg.preprocess_config(&docs)?;
    let corpus = build_corpus(&docs, &pre)?;
    log::info!(
        "loaded {} documents, {} terms from {}",
        corpus.len(),
        corpus.vocabulary().len(),
        path.display()
    );
    Ok((docs, corpus))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e).into())
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e).into())
}

fn out_err(e: std::io::Error) -> CliError {
    Error::io("<stdout>", e).into()
}

pub fn stats(
    cfg: &RunConfig,
    group_by: bool,
    json: Option<&Path>,
    out: &mut dyn Write,
) -> Result<CorpusStats> {
    let (_, corpus) = load_corpus(cfg)?;
    let stats = corpus_stats(&corpus, group_by);
    out.write_all(format_stats(&cfg.dataset_tag(), &stats).as_bytes())
        .map_err(out_err)?;
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&stats).expect("stats serialize");
        write_file(path, text.as_bytes())?;
    }
    Ok(stats)
}

pub fn format_stats(dataset: &str, s: &CorpusStats) -> String {
    let mut out = format!(
        "dataset       {dataset}\n\
         D             {}\n\
         V (terms)     {}\n\
         V (tokens)    {}\n\
         W_mean        {:.2}\n\
         W_std         {:.2}\n",
        s.documents, s.vocabulary_size, s.total_tokens, s.w_mean, s.w_std
    );
    if let Some(groups) = &s.per_group {
        let width = groups.keys().map(String::len).max().unwrap_or(0).max(5);
        out.push_str(&format!(
            "\n{:<width$}  {:>9}  {:>8}  {:>13}  {:>8}\n",
            "group", "documents", "entities", "docs/entity", "W_mean"
        ));
        for (name, g) in groups {
            out.push_str(&format!(
                "{:<width$}  {:>9}  {:>8}  {:>13.2}  {:>8.2}\n",
                name, g.documents, g.entities, g.docs_per_entity, g.w_mean
            ));
        }
    }
    out
}

/// Top `n` words of the given topics.
pub fn topic_words(
    model: &dyn TopicModel,
    ids: &[usize],
    weights: Option<&[f64]>,
    n: usize,
) -> Vec<TopicWords> {
    let tw = model.topic_word();
    let terms = model.terms();
    ids.iter()
        .enumerate()
        .map(|(i, &id)| {
            let row = tw.row(id);
            TopicWords {
                id,
                weight: weights.map(|w| w[i]),
                words: top_entries(row.as_slice().expect("standard layout"), n)
                    .into_iter()
                    .map(|(w, _)| terms[w].clone())
                    .collect(),
            }
        })
        .collect()
}

/// Topics of an artifact: LDA in id order, HDP in weight order (the `k`
/// heaviest if given).
pub fn artifact_topics(
    model: &ModelArtifact,
    n: usize,
    k: Option<usize>,
) -> Result<Vec<TopicWords>> {
    match model {
        ModelArtifact::Lda(m) => {
            let ids: Vec<usize> = (0..m.num_topics()).collect();
            Ok(topic_words(m, &ids, None, n))
        }
        ModelArtifact::Hdp(m) => {
            let mut ranked = m.topic_weights();
            if let Some(k) = k {
                if k < 1 || k > ranked.len() {
                    return Err(CliError::Usage(format!(
                        "K = {k} out of range for {} topics",
                        ranked.len()
                    )));
                }
                ranked.truncate(k);
            }
            let ids: Vec<usize> = ranked.iter().map(|p| p.0).collect();
            let weights: Vec<f64> = ranked.iter().map(|p| p.1).collect();
            Ok(topic_words(m, &ids, Some(&weights), n))
        }
    }
}

pub fn topics(
    model_path: &Path,
    n: usize,
    k: Option<usize>,
    out: &mut dyn Write,
) -> Result<Vec<TopicWords>> {
    let model = ModelArtifact::load(model_path)?;
    let listing = artifact_topics(&model, n, k)?;
    out.write_all(format_topics(&listing).as_bytes())
        .map_err(out_err)?;
    Ok(listing)
}

pub fn synth(cfg: &SynthConfig, path: &Path) -> Result<()> {
    let corpus = synth::generate(cfg)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_documents(std::io::BufWriter::new(file), &corpus.documents)?;
    Ok(())
}

struct Evaluated {
    rows: Vec<SweepRow>,
    listings: Vec<TopicListing>,
    artifact: (String, ModelArtifact),
}

struct Context<'a> {
    cfg: &'a RunConfig,
    corpus: &'a Corpus,
    labels: Option<&'a LabelMatrix>,
    dataset: String,
}

impl Context<'_> {
    fn label_metrics(
        &self,
        model: &ModelArtifact,
        k: usize,
    ) -> Result<(Option<f64>, Option<usize>, Option<f64>)> {
        let Some(l) = self.labels else {
            return Ok((None, None, None));
        };
        let t = topic_matrix_at(model, self.corpus, k)?;
        let s = mean_cosine_similarity(
            t.values.view(),
            l.values.view(),
            self.cfg.similarity_normalization,
        )?;
        let c = coverage(t.values.view(), l.values.view())?;
        Ok((Some(s), Some(c.cov), Some(c.cov_ratio)))
    }

    fn lda_at(&self, k: usize) -> Result<Evaluated> {
        log::info!("fitting LDA with K = {k}");
        let model = ModelArtifact::Lda(lda::fit(self.corpus, &self.cfg.lda_config(k))?);
        let coh = model_coherence(&model, self.corpus, &self.cfg.coherence_config(), Some(k))?;
        let (s, cov, cov_ratio) = self.label_metrics(&model, k)?;
        let ids: Vec<usize> = (0..k).collect();
        let listing = TopicListing {
            tm: ModelKind::Lda,
            k,
            topics: topic_words(model.as_topic_model(), &ids, None, self.cfg.top_n),
        };
        Ok(Evaluated {
            rows: vec![SweepRow {
                dataset: self.dataset.clone(),
                tm: ModelKind::Lda,
                k,
                c_v: coh.mean,
                s,
                cov,
                cov_ratio,
            }],
            listings: vec![listing],
            artifact: (format!("lda_k{k}.json"), model),
        })
    }

    /// One HDP fit, reported at every K through its top-K projection.
    fn hdp_all(&self) -> Result<Evaluated> {
        log::info!("fitting HDP with K_max = {}", self.cfg.hdp_max_topics);
        let model = ModelArtifact::Hdp(hdp::fit(self.corpus, &self.cfg.hdp_config())?);
        let coh = model_coherence(&model, self.corpus, &self.cfg.coherence_config(), None)?;
        let mut rows = Vec::new();
        let mut listings = Vec::new();
        for &k in &self.cfg.k_values {
            let (s, cov, cov_ratio) = self.label_metrics(&model, k)?;
            rows.push(SweepRow {
                dataset: self.dataset.clone(),
                tm: ModelKind::Hdp,
                k,
                c_v: coh.mean,
                s,
                cov,
                cov_ratio,
            });
            listings.push(TopicListing {
                tm: ModelKind::Hdp,
                k,
                topics: artifact_topics(&model, self.cfg.top_n, Some(k))?,
            });
        }
        Ok(Evaluated {
            rows,
            listings,
            artifact: ("hdp.json".into(), model),
        })
    }
}

#[derive(Clone, Copy)]
enum Job {
    Lda(usize),
    Hdp,
}

/// Files written by a sweep, relative to the output directory.
pub const SWEEP_FILES: [&str; 4] = ["sweep.json", "sweep.csv", "sweep.txt", "topics.txt"];

pub fn sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<SweepReport> {
    let out_dir: PathBuf = cfg
        .output_dir
        .clone()
        .ok_or_else(|| CliError::Usage("no output directory given (use --out)".into()))?;
    let (docs, corpus) = load_corpus(cfg)?;
    let labeled = docs.iter().any(|d| !d.labels.is_empty());
    let labels = if labeled {
        Some(build_label_matrix(&docs, None)?)
    } else {
        log::warn!("input carries no labels; reporting coherence only");
        None
    };
    let ctx = Context {
        cfg,
        corpus: &corpus,
        labels: labels.as_ref(),
        dataset: cfg.dataset_tag(),
    };

    let kinds = cfg.model_kinds();
    let mut jobs = Vec::new();
    if kinds.contains(&ModelKind::Lda) {
        jobs.extend(cfg.k_values.iter().map(|&k| Job::Lda(k)));
    }
    if kinds.contains(&ModelKind::Hdp) {
        jobs.push(Job::Hdp);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    // Each job is sequential and seeded, and results keep job order.
    let results: Vec<Evaluated> = pool.install(|| {
        jobs.par_iter()
            .map(|job| match *job {
                Job::Lda(k) => ctx.lda_at(k),
                Job::Hdp => ctx.hdp_all(),
            })
            .collect::<Result<_>>()
    })?;

    let mut report = SweepReport {
        dataset: ctx.dataset.clone(),
        documents: corpus.len(),
        vocabulary_size: corpus.vocabulary().len(),
        total_tokens: corpus.total_tokens(),
        labels: labels
            .as_ref()
            .map(|l| l.labels.clone())
            .unwrap_or_default(),
        rows: Vec::new(),
        topics: Vec::new(),
    };
    let models_dir = out_dir.join("models");
    create_dir(&models_dir)?;
    for r in results {
        report.rows.extend(r.rows);
        report.topics.extend(r.listings);
        let (name, model) = r.artifact;
        model.save(models_dir.join(name))?;
    }

    let mut json = Vec::new();
    report.write_json(&mut json).expect("report serialize");
    json.push(b'\n');
    write_file(&out_dir.join("sweep.json"), &json)?;
    write_file(&out_dir.join("sweep.csv"), report.to_csv().as_bytes())?;
    let text = report.to_text();
    write_file(&out_dir.join("sweep.txt"), text.as_bytes())?;
    write_file(&out_dir.join("topics.txt"), report.topics_text().as_bytes())?;
    out.write_all(text.as_bytes()).map_err(out_err)?;
    Ok(report)
}
