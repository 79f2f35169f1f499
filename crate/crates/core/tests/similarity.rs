mod common;

use std::collections::BTreeMap;

use common::{cloud_map, global_map, naive_similarity, random_corpus, random_weights, sorted_strengths};
use proptest::prelude::*;
use tagspectra::ingest::{Corpus, TagCloud};
use tagspectra::rng::SeededRng;
use tagspectra::similarity::{
    build_matrix, pair_similarity, power_transform, strength_histogram, MatrixKind, SimilarityMatrix,
};

fn scaled(corpus: &Corpus, k: u64) -> Corpus {
    Corpus::from_clouds(
        corpus
            .clouds()
            .values()
            .map(|c| TagCloud::from_counts(c.resource(), c.freqs().iter().map(|(t, &f)| (t.clone(), f * k)))),
    )
    .unwrap()
}

#[test]
fn matrix_matches_naive_evaluator() {
    let mut rng = SeededRng::new(3);
    for _ in 0..20 {
        let corpus = random_corpus(&mut rng, 10, 30);
        let m = build_matrix(&corpus, &corpus.resources()).unwrap();
        let global = global_map(&corpus);
        let clouds: Vec<_> = corpus.clouds().values().map(cloud_map).collect();
        for i in 0..10 {
            for j in 0..10 {
                let expected = if i == j {
                    1.0
                } else {
                    naive_similarity(&clouds[i], &clouds[j], &global)
                };
                assert!(
                    (m.get(i, j) - expected).abs() <= 1e-12,
                    "({i}, {j}): {} vs {expected}",
                    m.get(i, j)
                );
            }
        }
    }
}

#[test]
fn self_similarity_formula_agrees_with_unit_diagonal() {
    let mut rng = SeededRng::new(5);
    let corpus = random_corpus(&mut rng, 6, 20);
    for c in corpus.clouds().values() {
        let w = pair_similarity(c, c, corpus.global_freqs()).unwrap();
        assert!((w - 1.0).abs() <= 1e-15);
    }
}

#[test]
fn permuted_order_gives_permuted_matrix() {
    let mut rng = SeededRng::new(11);
    for _ in 0..10 {
        let corpus = random_corpus(&mut rng, 12, 15);
        let order = corpus.resources();
        let mut p: Vec<usize> = (0..order.len()).collect();
        rng.shuffle(&mut p);
        let shuffled: Vec<String> = p.iter().map(|&i| order[i].clone()).collect();
        let m = build_matrix(&corpus, &order).unwrap();
        let mp = build_matrix(&corpus, &shuffled).unwrap();
        assert_eq!(mp.resources(), shuffled.as_slice());
        for i in 0..order.len() {
            for j in 0..order.len() {
                assert_eq!(mp.get(i, j).to_bits(), m.get(p[i], p[j]).to_bits());
            }
        }
        assert_eq!(m.permuted(&p).unwrap(), mp);
    }
}

#[test]
fn power_transform_is_monotone() {
    let mut rng = SeededRng::new(17);
    let m = random_weights(&mut rng, 25, 0.3);
    let t = power_transform(&m, 0.1).unwrap();
    let pairs: Vec<(f64, f64)> = (0..25)
        .flat_map(|i| (0..25).map(move |j| (i, j)))
        .map(|(i, j)| (m.get(i, j), t.get(i, j)))
        .collect();
    for &(a, ta) in &pairs {
        for &(b, tb) in &pairs {
            if a <= b {
                assert!(ta <= tb);
            }
        }
    }
}

#[test]
fn histogram_matches_sort_and_bin() {
    let mut rng = SeededRng::new(23);
    for b in [1, 3, 5, 10] {
        let corpus = random_corpus(&mut rng, 30, 10);
        let m = build_matrix(&corpus, &corpus.resources()).unwrap();
        let h = strength_histogram(&m, b).unwrap();
        let (values, zeros) = sorted_strengths(&m);
        assert_eq!(h.zero_count, zeros);
        let mut it = values.iter().peekable();
        for bin in &h.bins {
            let mut count = 0;
            while it.peek().is_some_and(|&&v| v < bin.upper) {
                assert!(*it.next().unwrap() >= bin.lower);
                count += 1;
            }
            assert_eq!(bin.count, count);
        }
        assert!(it.next().is_none());
    }
}

#[test]
fn matrix_files_round_trip_bit_exactly() {
    let mut rng = SeededRng::new(29);
    let corpus = random_corpus(&mut rng, 9, 12);
    let m = power_transform(&build_matrix(&corpus, &corpus.resources()).unwrap(), 0.1).unwrap();
    let kind = m.kind();
    let mut csv = Vec::new();
    m.write_csv(&mut csv).unwrap();
    assert_eq!(SimilarityMatrix::read_csv(csv.as_slice(), kind).unwrap(), m);
    let mut bin = Vec::new();
    m.write_binary(&mut bin).unwrap();
    assert_eq!(&bin[..4], b"FSM1");
    assert_eq!(SimilarityMatrix::read_binary(bin.as_slice(), kind).unwrap(), m);
    assert!(SimilarityMatrix::read_binary(&bin[..bin.len() - 3], MatrixKind::Raw).is_err());
}

fn cloud_strategy() -> impl Strategy<Value = BTreeMap<String, u64>> {
    prop::collection::btree_map("t[0-9]{1,2}", 1u64..50, 1..15)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn pair_similarity_is_symmetric_and_bounded(a in cloud_strategy(), b in cloud_strategy(), extra in 0u64..5) {
        let corpus = Corpus::from_clouds([
            TagCloud::from_counts("a", a),
            TagCloud::from_counts("b", b),
        ]).unwrap();
        // Global counts may exceed the pair's total when other resources exist.
        let global: BTreeMap<String, u64> = corpus.global_freqs().iter().map(|(t, &f)| (t.clone(), f + extra)).collect();
        let (ca, cb) = (corpus.cloud("a").unwrap(), corpus.cloud("b").unwrap());
        let ab = pair_similarity(ca, cb, &global).unwrap();
        let ba = pair_similarity(cb, ca, &global).unwrap();
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn scaling_all_frequencies_leaves_similarity_unchanged(seed in any::<u64>(), k in 2u64..1000) {
        let mut rng = SeededRng::new(seed);
        let corpus = random_corpus(&mut rng, 6, 20);
        let m = build_matrix(&corpus, &corpus.resources()).unwrap();
        let s = build_matrix(&scaled(&corpus, k), &corpus.resources()).unwrap();
        for (x, y) in m.values().as_slice().iter().zip(s.values().as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn transformed_matrix_stays_symmetric_in_unit_range(seed in any::<u64>(), gamma in 0.01f64..=1.0) {
        let mut rng = SeededRng::new(seed);
        let m = random_weights(&mut rng, 8, 0.4);
        let t = power_transform(&m, gamma).unwrap();
        prop_assert!(t.values().is_symmetric());
        for i in 0..8 {
            prop_assert_eq!(t.get(i, i), 1.0);
            for j in 0..8 {
                prop_assert!((0.0..=1.0).contains(&t.get(i, j)));
                prop_assert_eq!(t.get(i, j) == 0.0, m.get(i, j) == 0.0);
            }
        }
    }
}
