//! Hierarchical Dirichlet Process topic model, fitted by online variational
//! inference under a two-level stick-breaking truncation.
//!
//! The corpus level keeps `max_topics` topics whose weights come from
//! Beta-distributed sticks; each document keeps `doc_truncation` local
//! sticks, each pointing at one corpus-level topic through `var_phi`.
//! After every minibatch the topics are reordered by their expected counts,
//! so topic 0 tends to be the largest.

use std::sync::OnceLock;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::corpus::{vocabulary_fingerprint, BowDocument, Corpus};
use crate::error::{Error, Result};
use crate::math::{dirichlet_expectation, expect_log_sticks, log_normalize, normalize_rows};
use crate::model::TopicModel;
use crate::variational::{doc_e_step, topic_proportions, EStepOptions, ExpElogBeta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdpConfig {
    /// Corpus-level truncation.
    pub max_topics: usize,
    /// Document-level truncation.
    pub doc_truncation: usize,
    /// Corpus-level concentration.
    pub gamma: f64,
    /// Document-level concentration.
    pub alpha0: f64,
    pub eta: f64,
    pub tau0: f64,
    pub kappa: f64,
    pub passes: usize,
    pub minibatch_size: usize,
    pub e_step_max_iters: usize,
    /// Relative change of the document bound that ends the local iteration.
    pub e_step_converge: f64,
    pub seed: u64,
}

impl Default for HdpConfig {
    fn default() -> Self {
        HdpConfig {
            max_topics: 150,
            doc_truncation: 15,
            gamma: 1.0,
            alpha0: 1.0,
            eta: 0.01,
            tau0: 64.0,
            kappa: 0.6,
            passes: 10,
            minibatch_size: 256,
            e_step_max_iters: 100,
            e_step_converge: 1e-4,
            seed: 0,
        }
    }
}

impl HdpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("hdp: {msg}")));
        if self.max_topics < 2 || self.doc_truncation < 2 {
            return bad("truncation levels must be >= 2");
        }
        if self.doc_truncation > self.max_topics {
            return bad("doc_truncation must not exceed max_topics");
        }
        if !(self.gamma > 0.0 && self.alpha0 > 0.0 && self.eta > 0.0) {
            return bad("concentrations and eta must be positive");
        }
        if !(self.tau0 >= 0.0) || !(self.kappa > 0.5 && self.kappa <= 1.0) {
            return bad("need tau0 >= 0 and kappa in (0.5, 1]");
        }
        if self.passes < 1 || self.minibatch_size < 1 || self.e_step_max_iters < 1 {
            return bad("passes, minibatch_size and e_step_max_iters must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HdpModel {
    config: HdpConfig,
    terms: Vec<String>,
    vocab_fingerprint: String,
    /// Topic-word Dirichlet parameters (prior included), max_topics x V.
    lambda: Array2<f64>,
    /// Expected topic usage counts driving the corpus-level sticks.
    varphi_ss: Vec<f64>,
    stick_a: Vec<f64>,
    stick_b: Vec<f64>,
    updates: u64,
    docs_seen: u64,
    #[serde(skip)]
    cache: OnceLock<ExpElogBeta>,
}

impl PartialEq for HdpModel {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.terms == other.terms
            && self.vocab_fingerprint == other.vocab_fingerprint
            && self.lambda == other.lambda
            && self.varphi_ss == other.varphi_ss
            && self.stick_a == other.stick_a
            && self.stick_b == other.stick_b
            && self.updates == other.updates
            && self.docs_seen == other.docs_seen
    }
}

/// The `K` heaviest topics of an HDP model, viewed like a K-topic model.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicProjection {
    pub topic_ids: Vec<usize>,
    pub topic_word: Array2<f64>,
}

struct ChunkStats {
    sticks: Vec<f64>,
    beta: Array2<f64>,
}

pub fn fit(corpus: &Corpus, config: &HdpConfig) -> Result<HdpModel> {
    config.validate()?;
    let vocab = corpus.vocabulary();
    if vocab.is_empty() {
        return Err(Error::Config("hdp: corpus vocabulary is empty".into()));
    }
    let k = config.max_topics;
    let v = vocab.len();
    let d = corpus.len().max(1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = Gamma::new(1.0, 1.0).expect("valid gamma parameters");
    let scale = d * 100.0 / (k * v) as f64;
    let lambda =
        Array2::from_shape_simple_fn((k, v), || config.eta + scale * init.sample(&mut rng));

    let mut model = HdpModel {
        config: config.clone(),
        terms: vocab.terms().to_vec(),
        vocab_fingerprint: vocab.fingerprint(),
        lambda,
        varphi_ss: vec![0.0; k],
        stick_a: vec![1.0; k - 1],
        stick_b: (1..k).rev().map(|x| x as f64).collect(),
        updates: 0,
        docs_seen: corpus.len() as u64,
        cache: OnceLock::new(),
    };
    for _ in 0..config.passes {
        for chunk in corpus.documents().chunks(config.minibatch_size) {
            model.process_chunk(chunk);
        }
    }
    Ok(model)
}

impl HdpModel {
    pub fn config(&self) -> &HdpConfig {
        &self.config
    }

    pub fn update_count(&self) -> u64 {
        self.updates
    }

    pub fn lambda(&self) -> &Array2<f64> {
        &self.lambda
    }

    fn expected_beta(&self) -> &ExpElogBeta {
        self.cache
            .get_or_init(|| ExpElogBeta::from_lambda(&self.lambda))
    }

    /// Continues the online schedule on documents encoded against this
    /// model's vocabulary.
    pub fn update(&mut self, new_docs: &[BowDocument]) -> Result<()> {
        for d in new_docs {
            self.check_doc(d)?;
        }
        if new_docs.is_empty() {
            return Ok(());
        }
        self.docs_seen += new_docs.len() as u64;
        for chunk in new_docs.chunks(self.config.minibatch_size) {
            self.process_chunk(chunk);
        }
        Ok(())
    }

    fn process_chunk(&mut self, chunk: &[BowDocument]) {
        let k = self.config.max_topics;
        let elog_beta: Vec<Vec<f64>> = self
            .lambda
            .outer_iter()
            .map(|row| dirichlet_expectation(row).to_vec())
            .collect();
        let elog_sticks = expect_log_sticks(&self.stick_a, &self.stick_b);
        let mut ss = ChunkStats {
            sticks: vec![0.0; k],
            beta: Array2::zeros(self.lambda.raw_dim()),
        };
        for doc in chunk {
            if !doc.is_empty() {
                self.doc_e_step(doc, &elog_beta, &elog_sticks, &mut ss);
            }
        }
        self.update_globals(&ss, chunk.len());
    }

    /// Local coordinate ascent for one document; adds its statistics.
    fn doc_e_step(
        &self,
        doc: &BowDocument,
        elog_beta: &[Vec<f64>],
        elog_sticks_1st: &[f64],
        ss: &mut ChunkStats,
    ) {
        let k = self.config.max_topics;
        let t = self.config.doc_truncation;
        let alpha = self.config.alpha0;
        let words = doc.counts();
        let n = words.len();
        let counts: Vec<f64> = words.iter().map(|&(_, c)| f64::from(c)).collect();
        // Elogbeta restricted to this document's words, word-major.
        let mut eb = vec![0.0; n * k];
        for (i, &(w, _)) in words.iter().enumerate() {
            for topic in 0..k {
                eb[i * k + topic] = elog_beta[topic][w];
            }
        }

        let mut v_a = vec![1.0; t - 1];
        let mut v_b = vec![alpha; t - 1];
        let mut elog_sticks_2nd = expect_log_sticks(&v_a, &v_b);
        let mut phi = vec![1.0 / t as f64; n * t];
        let mut log_phi = vec![0.0; n * t];
        let mut var_phi = vec![0.0; t * k];
        let mut log_var_phi = vec![0.0; t * k];

        let mut old_lik = -1e200;
        let mut converge = 1.0;
        let mut iter = 0;
        while iter < self.config.e_step_max_iters
            && (converge < 0.0 || converge > self.config.e_step_converge)
        {
            // var_phi: which corpus topic each document stick points at.
            for i in 0..t {
                let row = &mut var_phi[i * k..(i + 1) * k];
                row.iter_mut().for_each(|x| *x = 0.0);
                for w in 0..n {
                    let p = phi[w * t + i] * counts[w];
                    for topic in 0..k {
                        row[topic] += p * eb[w * k + topic];
                    }
                }
                if iter >= 3 {
                    for topic in 0..k {
                        row[topic] += elog_sticks_1st[topic];
                    }
                }
                log_normalize(row);
                for topic in 0..k {
                    log_var_phi[i * k + topic] = row[topic].ln();
                }
            }

            // phi: which document stick each word is assigned to.
            for w in 0..n {
                let row = &mut phi[w * t..(w + 1) * t];
                for i in 0..t {
                    let vp = &var_phi[i * k..(i + 1) * k];
                    let mut s = crate::math::dot(vp, &eb[w * k..(w + 1) * k]);
                    if iter >= 3 {
                        s += elog_sticks_2nd[i];
                    }
                    row[i] = s;
                }
                log_normalize(row);
                for i in 0..t {
                    log_phi[w * t + i] = row[i].ln();
                }
            }

            // Document-level sticks.
            let mut mass = vec![0.0; t];
            for w in 0..n {
                for i in 0..t {
                    mass[i] += phi[w * t + i] * counts[w];
                }
            }
            let mut tail = 0.0;
            for i in (0..t - 1).rev() {
                tail += mass[i + 1];
                v_a[i] = 1.0 + mass[i];
                v_b[i] = alpha + tail;
            }
            elog_sticks_2nd = expect_log_sticks(&v_a, &v_b);

            let lik = self.doc_bound(
                &counts,
                &eb,
                elog_sticks_1st,
                &elog_sticks_2nd,
                (&var_phi, &log_var_phi),
                (&phi, &log_phi),
                (&v_a, &v_b),
            );
            converge = (lik - old_lik) / old_lik.abs();
            if converge < -1e-6 {
                log::debug!("hdp: document bound decreased ({converge:e})");
            }
            old_lik = lik;
            iter += 1;
        }

        for i in 0..t {
            for topic in 0..k {
                ss.sticks[topic] += var_phi[i * k + topic];
            }
        }
        for (w, &(word, _)) in words.iter().enumerate() {
            for topic in 0..k {
                let mut s = 0.0;
                for i in 0..t {
                    s += var_phi[i * k + topic] * phi[w * t + i];
                }
                ss.beta[[topic, word]] += s * counts[w];
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn doc_bound(
        &self,
        counts: &[f64],
        eb: &[f64],
        elog_sticks_1st: &[f64],
        elog_sticks_2nd: &[f64],
        (var_phi, log_var_phi): (&[f64], &[f64]),
        (phi, log_phi): (&[f64], &[f64]),
        (v_a, v_b): (&[f64], &[f64]),
    ) -> f64 {
        let k = self.config.max_topics;
        let t = self.config.doc_truncation;
        let alpha = self.config.alpha0;
        let n = counts.len();
        let mut lik = 0.0;
        for i in 0..t {
            for topic in 0..k {
                let idx = i * k + topic;
                if var_phi[idx] > 0.0 {
                    lik += (elog_sticks_1st[topic] - log_var_phi[idx]) * var_phi[idx];
                }
            }
        }
        lik += (t - 1) as f64 * alpha.ln();
        for i in 0..t - 1 {
            let dig_sum = digamma(v_a[i] + v_b[i]);
            lik += (1.0 - v_a[i]) * (digamma(v_a[i]) - dig_sum);
            lik += (alpha - v_b[i]) * (digamma(v_b[i]) - dig_sum);
            lik -= ln_gamma(v_a[i] + v_b[i]) - ln_gamma(v_a[i]) - ln_gamma(v_b[i]);
        }
        for w in 0..n {
            for i in 0..t {
                let idx = w * t + i;
                if phi[idx] > 0.0 {
                    lik += (elog_sticks_2nd[i] - log_phi[idx]) * phi[idx];
                }
            }
        }
        for w in 0..n {
            let e = &eb[w * k..(w + 1) * k];
            for i in 0..t {
                let s = crate::math::dot(&var_phi[i * k..(i + 1) * k], e);
                lik += phi[w * t + i] * s * counts[w];
            }
        }
        lik
    }

    fn update_globals(&mut self, ss: &ChunkStats, chunk_len: usize) {
        let rho = (self.config.tau0 + self.updates as f64).powf(-self.config.kappa);
        let scale = self.docs_seen.max(chunk_len as u64) as f64 / chunk_len.max(1) as f64;
        let eta = self.config.eta;
        ndarray::Zip::from(&mut self.lambda)
            .and(&ss.beta)
            .for_each(|l, &s| *l = (1.0 - rho) * *l + rho * (eta + scale * s));
        for (phi, s) in self.varphi_ss.iter_mut().zip(&ss.sticks) {
            *phi = (1.0 - rho) * *phi + rho * scale * s;
        }
        self.reorder_topics();
        self.refresh_sticks();
        self.updates += 1;
        self.cache = OnceLock::new();
    }

    /// Sorts topics by expected word count, largest first (stable).
    fn reorder_topics(&mut self) {
        let eta = self.config.eta;
        let sizes: Vec<f64> = self
            .lambda
            .outer_iter()
            .map(|row| row.iter().map(|l| l - eta).sum())
            .collect();
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by(|&a, &b| sizes[b].total_cmp(&sizes[a]));
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return;
        }
        self.lambda = self.lambda.select(ndarray::Axis(0), &order);
        self.varphi_ss = order.iter().map(|&o| self.varphi_ss[o]).collect();
    }

    fn refresh_sticks(&mut self) {
        let k = self.config.max_topics;
        let mut tail = 0.0;
        for i in (0..k - 1).rev() {
            tail += self.varphi_ss[i + 1];
            self.stick_a[i] = self.varphi_ss[i] + 1.0;
            self.stick_b[i] = self.config.gamma + tail;
        }
    }

    /// Expected corpus-level topic proportions by topic id (raw sticks).
    pub fn stick_weights(&self) -> Vec<f64> {
        let k = self.config.max_topics;
        let mut w = vec![0.0; k];
        let mut left = 1.0;
        for i in 0..k - 1 {
            let s = self.stick_a[i] / (self.stick_a[i] + self.stick_b[i]);
            w[i] = s * left;
            left -= w[i];
        }
        w[k - 1] = left.max(0.0);
        w
    }

    /// `(topic id, weight)` sorted by descending weight, ties by id, with
    /// weights renormalized to sum to one.
    pub fn topic_weights(&self) -> Vec<(usize, f64)> {
        rank_weights(&self.stick_weights())
    }

    /// The `k` highest-weight topics, heaviest first.
    pub fn top_k_projection(&self, k: usize) -> Result<TopicProjection> {
        if k < 1 || k > self.config.max_topics {
            return Err(Error::Input(format!(
                "K = {k} outside 1..={}",
                self.config.max_topics
            )));
        }
        let topic_ids: Vec<usize> = self
            .topic_weights()
            .into_iter()
            .take(k)
            .map(|(t, _)| t)
            .collect();
        let topic_word = normalize_rows(&self.lambda.select(ndarray::Axis(0), &topic_ids));
        Ok(TopicProjection {
            topic_ids,
            topic_word,
        })
    }

    /// Document prior used for inference: `alpha0` times the corpus weights.
    fn doc_prior(&self) -> Vec<f64> {
        self.stick_weights()
            .into_iter()
            .map(|w| (self.config.alpha0 * w).max(f64::MIN_POSITIVE))
            .collect()
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

    pub(crate) fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let k = self.config.max_topics;
        if self.lambda.dim() != (k, self.terms.len()) {
            return Err(Error::Artifact(
                "lambda shape does not match K_max x V".into(),
            ));
        }
        if self.varphi_ss.len() != k || self.stick_a.len() != k - 1 || self.stick_b.len() != k - 1 {
            return Err(Error::Artifact(
                "stick parameter lengths are inconsistent".into(),
            ));
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

/// Sort by descending weight (ties by ascending id) and renormalize.
pub fn rank_weights(weights: &[f64]) -> Vec<(usize, f64)> {
    let total: f64 = weights.iter().sum();
    let mut ranked: Vec<(usize, f64)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| (i, if total > 0.0 { w / total } else { 0.0 }))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

impl TopicModel for HdpModel {
    fn num_topics(&self) -> usize {
        self.config.max_topics
    }

    fn topic_word(&self) -> Array2<f64> {
        normalize_rows(&self.lambda)
    }

    fn infer_doc_topics(&self, bow: &BowDocument) -> Result<Vec<f64>> {
        self.check_doc(bow)?;
        let opts = EStepOptions {
            max_iters: self.config.e_step_max_iters,
            mean_change_tol: 1e-3,
        };
        let post = doc_e_step(self.expected_beta(), &self.doc_prior(), bow, None, opts);
        Ok(topic_proportions(&post.gamma))
    }

    fn terms(&self) -> &[String] {
        &self.terms
    }

    fn vocabulary_fingerprint(&self) -> &str {
        &self.vocab_fingerprint
    }
}
