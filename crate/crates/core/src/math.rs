//! Small numeric helpers shared by the variational fitters and metrics.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use statrs::function::gamma::{digamma, ln_gamma};

/// E[log x] for x ~ Dirichlet(alpha).
pub fn dirichlet_expectation(alpha: ArrayView1<f64>) -> Array1<f64> {
    let total = digamma(alpha.sum());
    alpha.mapv(|a| digamma(a) - total)
}

/// Row-wise [`dirichlet_expectation`].
pub fn dirichlet_expectation_rows(alpha: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(alpha.raw_dim());
    for (mut dst, src) in out.axis_iter_mut(Axis(0)).zip(alpha.axis_iter(Axis(0))) {
        dst.assign(&dirichlet_expectation(src));
    }
    out
}

/// E[log pi_k] under a truncated stick-breaking distribution whose sticks
/// are Beta(a_k, b_k); returns `a.len() + 1` entries, the last being the
/// remainder of the stick.
pub fn expect_log_sticks(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() + 1;
    let mut out = vec![0.0; n];
    let mut cum = 0.0;
    for k in 0..a.len() {
        let dig_sum = digamma(a[k] + b[k]);
        out[k] = digamma(a[k]) - dig_sum + cum;
        cum += digamma(b[k]) - dig_sum;
    }
    out[n - 1] = cum;
    out
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Normalizes `xs` in place from log space, returning the log normalizer.
pub fn log_normalize(xs: &mut [f64]) -> f64 {
    let norm = log_sum_exp(xs);
    for x in xs.iter_mut() {
        *x = (*x - norm).exp();
    }
    norm
}

pub fn ln_gamma_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().map(ln_gamma).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity; 0 when either vector is all zeros.
///
/// Uses `dot / sqrt(|a|^2 |b|^2)` so that parallel integer-valued vectors
/// come out as exactly 1.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a);
    let nb = dot(b, b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot(a, b) / (na * nb).sqrt()
}

/// Divides each row by its sum. Rows summing to zero are left untouched.
pub fn normalize_rows(m: &Array2<f64>) -> Array2<f64> {
    let mut out = m.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let s = row.sum();
        if s > 0.0 {
            row.mapv_inplace(|x| x / s);
        }
    }
    out
}
