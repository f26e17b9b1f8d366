//! Latent Dirichlet Allocation fitted by online (minibatch) variational
//! Bayes.
//!
//! Each minibatch runs the per-document coordinate ascent on the topic
//! proportions `gamma` and token responsibilities `phi` with the topic-word
//! parameters `lambda` held fixed, then blends the minibatch's scaled
//! sufficient statistics into `lambda` with step size
//! `rho_t = (tau0 + t)^-kappa`. Batch mode processes the whole corpus as one
//! minibatch with `rho = 1`, which is plain coordinate-ascent VB.

use std::sync::OnceLock;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::corpus::{vocabulary_fingerprint, BowDocument, Corpus};
use crate::error::{Error, Result};
use crate::math::{dirichlet_expectation, log_sum_exp, normalize_rows};
use crate::model::{top_entries, TopicModel};
use crate::variational::{
    accumulate_sstats, doc_e_step, finish_sstats, topic_proportions, DocPosterior, EStepOptions,
    ExpElogBeta,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-word prior.
    pub eta: f64,
    pub passes: usize,
    pub minibatch_size: usize,
    pub tau0: f64,
    pub kappa: f64,
    /// Whole corpus per update and `rho = 1`; ignores the schedule.
    pub batch: bool,
    pub e_step_max_iters: usize,
    pub e_step_mean_change_tol: f64,
    pub seed: u64,
}

impl LdaConfig {
    pub fn new(num_topics: usize) -> Self {
        let prior = 1.0 / num_topics.max(1) as f64;
        LdaConfig {
            num_topics,
            alpha: prior,
            eta: prior,
            passes: 10,
            minibatch_size: 256,
            tau0: 1.0,
            kappa: 0.7,
            batch: false,
            e_step_max_iters: 100,
            e_step_mean_change_tol: 1e-3,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("lda: {msg}")));
        if self.num_topics < 1 {
            return bad("number of topics must be >= 1");
        }
        if !(self.alpha > 0.0) || !(self.eta > 0.0) {
            return bad("alpha and eta must be positive");
        }
        if self.passes < 1 || self.minibatch_size < 1 {
            return bad("passes and minibatch_size must be >= 1");
        }
        if !(self.tau0 >= 0.0) {
            return bad("tau0 must be nonnegative");
        }
        if !(self.kappa > 0.5 && self.kappa <= 1.0) {
            return bad("kappa must lie in (0.5, 1]");
        }
        if self.e_step_max_iters < 1 || !(self.e_step_mean_change_tol > 0.0) {
            return bad("E-step iteration limit and tolerance must be positive");
        }
        Ok(())
    }

    fn e_step(&self) -> EStepOptions {
        EStepOptions {
            max_iters: self.e_step_max_iters,
            mean_change_tol: self.e_step_mean_change_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdaModel {
    config: LdaConfig,
    terms: Vec<String>,
    vocab_fingerprint: String,
    /// Variational topic-word Dirichlet parameters, K x V.
    lambda: Array2<f64>,
    /// Minibatch updates applied so far.
    updates: u64,
    /// Document population used to scale minibatch statistics.
    docs_seen: u64,
    #[serde(skip)]
    cache: OnceLock<ExpElogBeta>,
}

impl PartialEq for LdaModel {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.terms == other.terms
            && self.vocab_fingerprint == other.vocab_fingerprint
            && self.lambda == other.lambda
            && self.updates == other.updates
            && self.docs_seen == other.docs_seen
    }
}

/// Per-pass diagnostics from [`fit_with_trace`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    /// Evidence lower bound after each pass, evaluated with that pass'
    /// document parameters and the updated topics.
    pub elbo: Vec<f64>,
}

pub fn fit(corpus: &Corpus, config: &LdaConfig) -> Result<LdaModel> {
    Fitter::new(corpus, config)?.run(false).map(|(m, _)| m)
}

/// Like [`fit`], also recording the bound after every pass.
pub fn fit_with_trace(corpus: &Corpus, config: &LdaConfig) -> Result<(LdaModel, FitTrace)> {
    Fitter::new(corpus, config)?.run(true)
}

struct Fitter<'a> {
    corpus: &'a Corpus,
    model: LdaModel,
}

impl<'a> Fitter<'a> {
    fn new(corpus: &'a Corpus, config: &LdaConfig) -> Result<Self> {
        config.validate()?;
        let vocab = corpus.vocabulary();
        if vocab.is_empty() {
            return Err(Error::Config("lda: corpus vocabulary is empty".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let init = Gamma::new(100.0, 0.01).expect("valid gamma parameters");
        let lambda = Array2::from_shape_simple_fn((config.num_topics, vocab.len()), || {
            init.sample(&mut rng)
        });
        let model = LdaModel {
            config: config.clone(),
            terms: vocab.terms().to_vec(),
            vocab_fingerprint: vocab.fingerprint(),
            lambda,
            updates: 0,
            docs_seen: corpus.len() as u64,
            cache: OnceLock::new(),
        };
        Ok(Fitter { corpus, model })
    }

    fn run(mut self, trace: bool) -> Result<(LdaModel, FitTrace)> {
        let docs = self.corpus.documents();
        let k = self.model.config.num_topics;
        let mut gammas: Vec<Option<Vec<f64>>> = vec![None; docs.len()];
        let mut out = FitTrace::default();
        let chunk = if self.model.config.batch {
            docs.len().max(1)
        } else {
            self.model.config.minibatch_size
        };

        for _ in 0..self.model.config.passes {
            for (c, batch) in docs.chunks(chunk).enumerate() {
                let offset = c * chunk;
                let alpha = vec![self.model.config.alpha; k];
                let beta = self.model.expected_beta().clone();
                let mut sstats = vec![0.0; beta.k * beta.v];
                for (i, doc) in batch.iter().enumerate() {
                    let post = doc_e_step(
                        &beta,
                        &alpha,
                        doc,
                        gammas[offset + i].as_deref(),
                        self.model.config.e_step(),
                    );
                    accumulate_sstats(&mut sstats, k, doc, &post);
                    gammas[offset + i] = Some(post.gamma);
                }
                let sstats = finish_sstats(&sstats, &beta);
                self.model.blend(&sstats, batch.len());
            }
            if trace {
                let gammas: Vec<&[f64]> = gammas
                    .iter()
                    .zip(docs)
                    .map(|(g, _)| g.as_deref().expect("every document visited"))
                    .collect();
                out.elbo.push(self.model.bound(docs, &gammas));
            }
        }
        Ok((self.model, out))
    }
}

impl LdaModel {
    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    pub fn lambda(&self) -> &Array2<f64> {
        &self.lambda
    }

    pub fn update_count(&self) -> u64 {
        self.updates
    }

    fn expected_beta(&self) -> &ExpElogBeta {
        self.cache
            .get_or_init(|| ExpElogBeta::from_lambda(&self.lambda))
    }

    fn rho(&self) -> f64 {
        if self.config.batch {
            1.0
        } else {
            (self.config.tau0 + self.updates as f64).powf(-self.config.kappa)
        }
    }

    fn blend(&mut self, sstats: &Array2<f64>, batch_len: usize) {
        let rho = self.rho();
        let scale = self.docs_seen.max(batch_len as u64) as f64 / batch_len.max(1) as f64;
        let eta = self.config.eta;
        ndarray::Zip::from(&mut self.lambda)
            .and(sstats)
            .for_each(|l, &s| *l = (1.0 - rho) * *l + rho * (eta + scale * s));
        self.updates += 1;
        self.cache = OnceLock::new();
    }

    fn check_doc(&self, bow: &BowDocument) -> Result<()> {
        match bow.max_term() {
            Some(t) if t >= self.terms.len() => Err(Error::Input(format!(
                "document `{}` has term id {t} outside a vocabulary of {}",
                bow.id,
                self.terms.len()
            ))),
            _ => Ok(()),
        }
    }

    fn posterior(&self, bow: &BowDocument) -> DocPosterior {
        let alpha = vec![self.config.alpha; self.config.num_topics];
        doc_e_step(
            self.expected_beta(),
            &alpha,
            bow,
            None,
            self.config.e_step(),
        )
    }

    /// Continues the online schedule on new documents, one pass in
    /// minibatches. Documents must already be encoded against this model's
    /// vocabulary (see [`Corpus::encode_new`]).
    pub fn update(&mut self, new_docs: &[BowDocument]) -> Result<()> {
        for d in new_docs {
            self.check_doc(d)?;
        }
        if new_docs.is_empty() {
            return Ok(());
        }
        self.docs_seen += new_docs.len() as u64;
        let k = self.config.num_topics;
        let alpha = vec![self.config.alpha; k];
        for batch in new_docs.chunks(self.config.minibatch_size) {
            let beta = self.expected_beta().clone();
            let mut sstats = vec![0.0; beta.k * beta.v];
            for doc in batch {
                let post = doc_e_step(&beta, &alpha, doc, None, self.config.e_step());
                accumulate_sstats(&mut sstats, k, doc, &post);
            }
            let sstats = finish_sstats(&sstats, &beta);
            self.blend(&sstats, batch.len());
        }
        Ok(())
    }

    /// Top `n` (term id, probability) pairs of one topic.
    pub fn top_words(&self, topic: usize, n: usize) -> Result<Vec<(usize, f64)>> {
        if topic >= self.config.num_topics {
            return Err(Error::Input(format!(
                "topic {topic} out of range for {} topics",
                self.config.num_topics
            )));
        }
        let row = self.lambda.row(topic);
        let total = row.sum();
        let probs: Vec<f64> = row.iter().map(|l| l / total).collect();
        Ok(top_entries(&probs, n))
    }

    pub fn top_terms(&self, topic: usize, n: usize) -> Result<Vec<&str>> {
        Ok(self
            .top_words(topic, n)?
            .into_iter()
            .map(|(t, _)| self.terms[t].as_str())
            .collect())
    }

    /// Variational lower bound on the log likelihood of `docs` given
    /// per-document `gammas` (responsibilities optimized out).
    fn bound(&self, docs: &[BowDocument], gammas: &[&[f64]]) -> f64 {
        let k = self.config.num_topics;
        let v = self.terms.len();
        let alpha = self.config.alpha;
        let eta = self.config.eta;
        let elog_beta: Vec<Vec<f64>> = self
            .lambda
            .outer_iter()
            .map(|row| dirichlet_expectation(row).to_vec())
            .collect();

        let mut score = 0.0;
        let mut buf = vec![0.0; k];
        for (doc, gamma) in docs.iter().zip(gammas) {
            let elog_theta = dirichlet_expectation(ndarray::ArrayView1::from(*gamma));
            for &(w, n) in doc.counts() {
                for t in 0..k {
                    buf[t] = elog_theta[t] + elog_beta[t][w];
                }
                score += f64::from(n) * log_sum_exp(&buf);
            }
            let gsum: f64 = gamma.iter().sum();
            for t in 0..k {
                score += (alpha - gamma[t]) * elog_theta[t] + ln_gamma(gamma[t]) - ln_gamma(alpha);
            }
            score += ln_gamma(alpha * k as f64) - ln_gamma(gsum);
        }

        for (t, row) in self.lambda.outer_iter().enumerate() {
            for (w, &l) in row.iter().enumerate() {
                score += (eta - l) * elog_beta[t][w] + ln_gamma(l) - ln_gamma(eta);
            }
            score += ln_gamma(eta * v as f64) - ln_gamma(row.sum());
        }
        score
    }

    /// Bound on `corpus` with fresh document-level inference.
    pub fn elbo(&self, corpus: &Corpus) -> Result<f64> {
        self.check_vocabulary(corpus)?;
        let posts: Vec<DocPosterior> = corpus
            .documents()
            .iter()
            .map(|d| self.posterior(d))
            .collect();
        let gammas: Vec<&[f64]> = posts.iter().map(|p| p.gamma.as_slice()).collect();
        Ok(self.bound(corpus.documents(), &gammas))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.lambda.dim() != (self.config.num_topics, self.terms.len()) {
            return Err(Error::Artifact("lambda shape does not match K x V".into()));
        }
        if self.lambda.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::Artifact("lambda must be positive and finite".into()));
        }
        if vocabulary_fingerprint(&self.terms) != self.vocab_fingerprint {
            return Err(Error::Artifact("vocabulary fingerprint mismatch".into()));
        }
        Ok(())
    }
}

impl TopicModel for LdaModel {
    fn num_topics(&self) -> usize {
        self.config.num_topics
    }

    fn topic_word(&self) -> Array2<f64> {
        normalize_rows(&self.lambda)
    }

    fn infer_doc_topics(&self, bow: &BowDocument) -> Result<Vec<f64>> {
        self.check_doc(bow)?;
        Ok(topic_proportions(&self.posterior(bow).gamma))
    }

    fn terms(&self) -> &[String] {
        &self.terms
    }

    fn vocabulary_fingerprint(&self) -> &str {
        &self.vocab_fingerprint
    }
}
