//! Brute-force reference implementations, written independently of the
//! library over plain vectors.
#![allow(dead_code)]

use std::collections::BTreeSet;

/// Every window as a set of words.
pub fn windows(docs: &[Vec<usize>], size: usize) -> Vec<BTreeSet<usize>> {
    let mut out = Vec::new();
    for doc in docs {
        if doc.is_empty() {
            continue;
        }
        if doc.len() <= size {
            out.push(doc.iter().copied().collect());
            continue;
        }
        for start in 0..=doc.len() - size {
            out.push(doc[start..start + size].iter().copied().collect());
        }
    }
    out
}

pub fn occurrences(windows: &[BTreeSet<usize>], w: usize) -> u64 {
    windows.iter().filter(|s| s.contains(&w)).count() as u64
}

pub fn joint(windows: &[BTreeSet<usize>], a: usize, b: usize) -> u64 {
    windows
        .iter()
        .filter(|s| s.contains(&a) && s.contains(&b))
        .count() as u64
}

/// `None` when either word never occurs.
pub fn npmi(windows: &[BTreeSet<usize>], a: usize, b: usize, eps: f64) -> Option<f64> {
    let n = windows.len() as f64;
    let pa = occurrences(windows, a) as f64 / n;
    let pb = occurrences(windows, b) as f64 / n;
    if pa == 0.0 || pb == 0.0 || n == 0.0 {
        return None;
    }
    if a == b {
        return Some(1.0);
    }
    let pab = (joint(windows, a, b) as f64 / n).max(eps);
    if pab == 1.0 {
        return Some(1.0);
    }
    Some((pab / (pa * pb)).ln() / -pab.ln())
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}

pub fn cv(windows: &[BTreeSet<usize>], words: &[usize], eps: f64, gamma: i32) -> Option<f64> {
    let mut vectors = Vec::new();
    for &wi in words {
        let mut v = Vec::new();
        for &wj in words {
            v.push(npmi(windows, wi, wj, eps)?.powi(gamma));
        }
        vectors.push(v);
    }
    let total: Vec<f64> = (0..words.len())
        .map(|j| vectors.iter().map(|v| v[j]).sum())
        .collect();
    Some(vectors.iter().map(|v| cos(v, &total)).sum::<f64>() / words.len() as f64)
}

fn column(m: &[Vec<f64>], j: usize) -> Vec<f64> {
    m.iter().map(|row| row[j]).collect()
}

/// Mean column cosine between every topic and every label.
pub fn similarity(t: &[Vec<f64>], l: &[Vec<f64>], topics: usize, labels: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..topics {
        for j in 0..labels {
            sum += cos(&column(t, i), &column(l, j));
        }
    }
    sum / (topics * labels) as f64
}

/// Literal inner-product variant.
pub fn similarity_raw(t: &[Vec<f64>], l: &[Vec<f64>], topics: usize, labels: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..topics {
        for j in 0..labels {
            let (a, b) = (column(t, i), column(l, j));
            sum += a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>();
        }
    }
    sum / (topics * labels) as f64
}

/// Per-label argmax (first maximum wins) and the distinct-topic count.
pub fn coverage(
    t: &[Vec<f64>],
    l: &[Vec<f64>],
    topics: usize,
    labels: usize,
) -> (Vec<Option<usize>>, usize, f64) {
    let mut chosen = Vec::new();
    for j in 0..labels {
        let lc = column(l, j);
        if lc.iter().all(|&x| x == 0.0) {
            chosen.push(None);
            continue;
        }
        let sims: Vec<f64> = (0..topics).map(|i| cos(&column(t, i), &lc)).collect();
        let max = sims.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        chosen.push(sims.iter().position(|&s| s == max));
    }
    let distinct: BTreeSet<usize> = chosen.iter().flatten().copied().collect();
    let considered = chosen.iter().filter(|c| c.is_some()).count();
    let ratio = if considered == 0 {
        0.0
    } else {
        distinct.len() as f64 / considered as f64
    };
    (chosen, distinct.len(), ratio)
}

/// Greedy matching as a single pass over all pairs sorted by decreasing
/// cosine, then by estimated and true index.
pub fn greedy_match(est: &[Vec<f64>], truth: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let mut pairs = Vec::new();
    for (i, e) in est.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            pairs.push((i, j, cos(e, t)));
        }
    }
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut used_e = BTreeSet::new();
    let mut used_t = BTreeSet::new();
    let mut out = Vec::new();
    for (i, j, s) in pairs {
        if !used_e.contains(&i) && !used_t.contains(&j) {
            used_e.insert(i);
            used_t.insert(j);
            out.push((i, j, s));
        }
    }
    out
}
