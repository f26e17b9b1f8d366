//! Document-level coordinate ascent shared by the LDA fitter and by
//! document-topic inference for both model families.

use ndarray::Array2;

use crate::corpus::BowDocument;
use crate::math::dirichlet_expectation;

/// Added to the per-word normalizer so that words with vanishing topic
/// mass do not divide by zero.
const PHI_FLOOR: f64 = 1e-100;

/// `exp(E[log beta])` stored word-major (V x K) so the K values needed for
/// one word are contiguous.
#[derive(Debug, Clone)]
pub(crate) struct ExpElogBeta {
    pub k: usize,
    pub v: usize,
    data: Vec<f64>,
}

impl ExpElogBeta {
    pub fn from_lambda(lambda: &Array2<f64>) -> Self {
        let (k, v) = lambda.dim();
        let mut data = vec![0.0; k * v];
        for (t, row) in lambda.outer_iter().enumerate() {
            let elog = dirichlet_expectation(row);
            for (w, e) in elog.iter().enumerate() {
                data[w * k + t] = e.exp();
            }
        }
        ExpElogBeta { k, v, data }
    }

    #[inline]
    pub fn word(&self, w: usize) -> &[f64] {
        &self.data[w * self.k..(w + 1) * self.k]
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EStepOptions {
    pub max_iters: usize,
    pub mean_change_tol: f64,
}

/// Converged local parameters for one document.
#[derive(Debug, Clone)]
pub(crate) struct DocPosterior {
    pub gamma: Vec<f64>,
    pub exp_elog_theta: Vec<f64>,
    /// Per distinct word, `sum_k exp(E[log theta_k]) exp(E[log beta_kw])`.
    pub phinorm: Vec<f64>,
}

fn exp_elog(gamma: &[f64], out: &mut [f64]) {
    let e = dirichlet_expectation(ndarray::ArrayView1::from(gamma));
    for (o, x) in out.iter_mut().zip(e.iter()) {
        *o = x.exp();
    }
}

fn fill_phinorm(beta: &ExpElogBeta, doc: &BowDocument, eth: &[f64], phinorm: &mut [f64]) {
    for (slot, &(w, _)) in phinorm.iter_mut().zip(doc.counts()) {
        *slot = crate::math::dot(eth, beta.word(w)) + PHI_FLOOR;
    }
}

/// Alternates the optimal token responsibilities and the document's topic
/// Dirichlet parameters until the mean absolute change of `gamma` drops
/// below the tolerance. `gamma_init` warm-starts the iteration.
pub(crate) fn doc_e_step(
    beta: &ExpElogBeta,
    alpha: &[f64],
    doc: &BowDocument,
    gamma_init: Option<&[f64]>,
    opts: EStepOptions,
) -> DocPosterior {
    let k = beta.k;
    debug_assert_eq!(alpha.len(), k);
    let mut gamma: Vec<f64> = match gamma_init {
        Some(g) => g.to_vec(),
        None => {
            let share = doc.token_total() as f64 / k as f64;
            alpha.iter().map(|a| a + share).collect()
        }
    };
    let mut eth = vec![0.0; k];
    exp_elog(&gamma, &mut eth);
    let mut phinorm = vec![0.0; doc.counts().len()];
    fill_phinorm(beta, doc, &eth, &mut phinorm);

    let mut next = vec![0.0; k];
    for _ in 0..opts.max_iters {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (&(w, n), &norm) in doc.counts().iter().zip(&phinorm) {
            let scale = f64::from(n) / norm;
            for (acc, b) in next.iter_mut().zip(beta.word(w)) {
                *acc += scale * b;
            }
        }
        let mut change = 0.0;
        for t in 0..k {
            let g = alpha[t] + eth[t] * next[t];
            change += (g - gamma[t]).abs();
            gamma[t] = g;
        }
        exp_elog(&gamma, &mut eth);
        fill_phinorm(beta, doc, &eth, &mut phinorm);
        if change / (k as f64) < opts.mean_change_tol {
            break;
        }
    }

    DocPosterior {
        gamma,
        exp_elog_theta: eth,
        phinorm,
    }
}

/// Adds this document's expected topic-word counts (before the final
/// element-wise product with `exp(E[log beta])`) to word-major `sstats`.
pub(crate) fn accumulate_sstats(
    sstats: &mut [f64],
    k: usize,
    doc: &BowDocument,
    post: &DocPosterior,
) {
    for (&(w, n), &norm) in doc.counts().iter().zip(&post.phinorm) {
        let scale = f64::from(n) / norm;
        let row = &mut sstats[w * k..(w + 1) * k];
        for (s, e) in row.iter_mut().zip(&post.exp_elog_theta) {
            *s += scale * e;
        }
    }
}

/// Completes word-major sufficient statistics and returns them topic-major.
pub(crate) fn finish_sstats(sstats: &[f64], beta: &ExpElogBeta) -> Array2<f64> {
    let mut out = Array2::zeros((beta.k, beta.v));
    for w in 0..beta.v {
        let b = beta.word(w);
        for t in 0..beta.k {
            out[[t, w]] = sstats[w * beta.k + t] * b[t];
        }
    }
    out
}

/// Normalized `gamma`.
pub(crate) fn topic_proportions(gamma: &[f64]) -> Vec<f64> {
    let total: f64 = gamma.iter().sum();
    gamma.iter().map(|g| g / total).collect()
}
