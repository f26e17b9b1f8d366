mod common;

use common::oracles;
use ndarray::Array2;
use proptest::prelude::*;
use topicdisc::synth::{generate, match_topics, SynthConfig};

#[test]
fn empirical_terms_follow_the_topic_mixture() {
    let cfg = SynthConfig {
        num_topics: 5,
        vocab_size: 100,
        num_docs: 2000,
        seed: 11,
        ..SynthConfig::default()
    };
    let s = generate(&cfg).unwrap();
    let index = |t: &str| t[1..].parse::<usize>().unwrap();
    let mut empirical = vec![0.0; cfg.vocab_size];
    let mut mixture = vec![0.0; cfg.vocab_size];
    let mut total = 0.0;
    for (d, doc) in s.documents.iter().enumerate() {
        let tokens: Vec<&str> = doc.text.split(' ').collect();
        let n = tokens.len() as f64;
        total += n;
        for t in tokens {
            empirical[index(t)] += 1.0;
        }
        for k in 0..cfg.num_topics {
            for v in 0..cfg.vocab_size {
                mixture[v] += n * s.doc_topic[[d, k]] * s.topic_word[[k, v]];
            }
        }
    }
    let tv: f64 = empirical
        .iter()
        .zip(&mixture)
        .map(|(e, m)| (e / total - m / total).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.05, "total variation {tv}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn documents_are_well_formed(seed in any::<u64>(), k in 1usize..5, v in 5usize..40) {
        let cfg = SynthConfig { num_topics: k, vocab_size: v, num_docs: 30, doc_len_mean: 3.0, seed, ..SynthConfig::default() };
        let s = generate(&cfg).unwrap();
        for doc in &s.documents {
            let tokens: Vec<&str> = doc.text.split(' ').collect();
            prop_assert!(!tokens.is_empty() && !tokens[0].is_empty());
            for t in tokens {
                prop_assert!(s.terms.iter().any(|x| x == t));
            }
        }
        for row in s.doc_topic.outer_iter() {
            prop_assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn greedy_matching_matches_oracle(
        est in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 6), 1..5),
        truth in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 6), 1..5),
    ) {
        let to_array = |m: &Vec<Vec<f64>>| Array2::from_shape_fn((m.len(), 6), |(i, j)| m[i][j]);
        let got = match_topics(to_array(&est).view(), to_array(&truth).view()).unwrap();
        let want = oracles::greedy_match(&est, &truth);
        prop_assert_eq!(got.pairs.len(), want.len());
        for (g, w) in got.pairs.iter().zip(&want) {
            prop_assert_eq!((g.0, g.1), (w.0, w.1));
            prop_assert!((g.2 - w.2).abs() <= 1e-12);
        }
        prop_assert!((0.0..=1.0 + 1e-12).contains(&got.mean_cosine));
    }

    #[test]
    fn proportional_rows_match_perfectly(
        truth in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 6), 1..4),
        scale in 0.1f64..10.0,
    ) {
        let t = Array2::from_shape_fn((truth.len(), 6), |(i, j)| truth[i][j]);
        let est = t.mapv(|x| x * scale);
        let m = match_topics(est.view(), t.view()).unwrap();
        prop_assert!((m.mean_cosine - 1.0).abs() < 1e-12);
    }
}
