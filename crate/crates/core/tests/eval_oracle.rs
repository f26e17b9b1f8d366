mod common;

use common::oracles;
use ndarray::Array2;
use proptest::prelude::*;
use topicdisc::eval::{coverage, mean_cosine_similarity, SimilarityNormalization};

const COS: SimilarityNormalization = SimilarityNormalization::Cosine;

#[derive(Debug, Clone)]
struct Instance {
    t: Vec<Vec<f64>>,
    l: Vec<Vec<f64>>,
    topics: usize,
    labels: usize,
}

impl Instance {
    fn arrays(&self) -> (Array2<f64>, Array2<f64>) {
        let d = self.t.len();
        let t = Array2::from_shape_fn((d, self.topics), |(i, j)| self.t[i][j]);
        let l = Array2::from_shape_fn((d, self.labels), |(i, j)| self.l[i][j]);
        (t, l)
    }
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=10, 1usize..=5, 1usize..=4).prop_flat_map(|(d, topics, labels)| {
        (
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, topics), d),
            prop::collection::vec(prop::collection::vec(prop::bool::ANY, labels), d),
        )
            .prop_map(move |(t, l)| Instance {
                t,
                l: l.into_iter()
                    .map(|row| row.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect())
                    .collect(),
                topics,
                labels,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_brute_force(inst in instance()) {
        let (t, l) = inst.arrays();
        let s = mean_cosine_similarity(t.view(), l.view(), COS).unwrap();
        let want = oracles::similarity(&inst.t, &inst.l, inst.topics, inst.labels);
        prop_assert!((s - want).abs() <= 1e-10);
        let raw = mean_cosine_similarity(t.view(), l.view(), SimilarityNormalization::Raw).unwrap();
        let want_raw = oracles::similarity_raw(&inst.t, &inst.l, inst.topics, inst.labels);
        prop_assert!((raw - want_raw).abs() <= 1e-10);

        let c = coverage(t.view(), l.view()).unwrap();
        let (chosen, cov, ratio) = oracles::coverage(&inst.t, &inst.l, inst.topics, inst.labels);
        prop_assert_eq!(&c.chosen, &chosen);
        prop_assert_eq!(c.cov, cov);
        prop_assert!((c.cov_ratio - ratio).abs() <= 1e-10);
    }

    #[test]
    fn bounds(inst in instance()) {
        let (t, l) = inst.arrays();
        let s = mean_cosine_similarity(t.view(), l.view(), COS).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
        let c = coverage(t.view(), l.view()).unwrap();
        prop_assert!(c.cov <= inst.topics.min(inst.labels));
        if c.labels_considered > 0 {
            prop_assert!(c.cov >= 1);
            prop_assert!(c.cov_ratio > 0.0 && c.cov_ratio <= 1.0);
        }
    }

    #[test]
    fn invariant_under_column_rescaling(inst in instance(), col in any::<prop::sample::Index>(), which in prop::bool::ANY) {
        let (mut t, mut l) = inst.arrays();
        let s0 = mean_cosine_similarity(t.view(), l.view(), COS).unwrap();
        let c0 = coverage(t.view(), l.view()).unwrap();
        if which {
            let j = col.index(t.ncols());
            t.column_mut(j).mapv_inplace(|x| x * 7.0);
        } else {
            let j = col.index(l.ncols());
            l.column_mut(j).mapv_inplace(|x| x * 7.0);
        }
        let s1 = mean_cosine_similarity(t.view(), l.view(), COS).unwrap();
        prop_assert!((s0 - s1).abs() <= 1e-12);
        prop_assert_eq!(c0.chosen, coverage(t.view(), l.view()).unwrap().chosen);
    }

    #[test]
    fn invariant_under_row_permutation(inst in instance(), seed in any::<u64>()) {
        let (t, l) = inst.arrays();
        let d = t.nrows();
        let mut order: Vec<usize> = (0..d).collect();
        // Deterministic shuffle driven by the seed.
        let mut state = seed | 1;
        for i in (1..d).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            order.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let tp = t.select(ndarray::Axis(0), &order);
        let lp = l.select(ndarray::Axis(0), &order);
        let s0 = mean_cosine_similarity(t.view(), l.view(), COS).unwrap();
        let s1 = mean_cosine_similarity(tp.view(), lp.view(), COS).unwrap();
        prop_assert!((s0 - s1).abs() <= 1e-12);
        prop_assert_eq!(coverage(t.view(), l.view()).unwrap(), coverage(tp.view(), lp.view()).unwrap());
    }
}

#[test]
fn hand_checked_values() {
    let i2 = ndarray::array![[1.0, 0.0], [0.0, 1.0]];
    let ones = ndarray::array![[1.0], [1.0]];
    assert!((mean_cosine_similarity(i2.view(), i2.view(), COS).unwrap() - 0.5).abs() <= 1e-12);
    let s = mean_cosine_similarity(i2.view(), ones.view(), COS).unwrap();
    assert!((s - 2f64.sqrt() / 2.0).abs() <= 1e-12);
    assert!((s - 0.70711).abs() < 1e-5);
}

#[test]
fn random_six_by_four_case() {
    let t = vec![
        vec![0.7, 0.1, 0.1, 0.1],
        vec![0.2, 0.6, 0.1, 0.1],
        vec![0.1, 0.1, 0.7, 0.1],
        vec![0.25, 0.25, 0.25, 0.25],
        vec![0.05, 0.05, 0.1, 0.8],
        vec![0.4, 0.4, 0.1, 0.1],
    ];
    let l = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 0.0, 1.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 1.0, 0.0],
    ];
    let inst = Instance {
        t: t.clone(),
        l: l.clone(),
        topics: 4,
        labels: 3,
    };
    let (ta, la) = inst.arrays();
    let c = coverage(ta.view(), la.view()).unwrap();
    let (chosen, cov, _) = oracles::coverage(&t, &l, 4, 3);
    assert_eq!(c.chosen, chosen);
    assert_eq!(c.cov, cov);
}
