//! Independent reference implementations and random-input generators shared
//! by the integration tests. Nothing here calls into the code under test
//! except to construct inputs.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, HashMap, HashSet};

use tagspectra::ingest::{Corpus, TagCloud};
use tagspectra::matrix::SquareMatrix;
use tagspectra::rng::SeededRng;
use tagspectra::similarity::{MatrixKind, SimilarityMatrix};

/// Direct transcription of the overlap similarity over the union of tags,
/// with plain left-to-right sums.
pub fn naive_similarity(a: &HashMap<String, u64>, b: &HashMap<String, u64>, global: &HashMap<String, u64>) -> f64 {
    let mut tags: Vec<&String> = a.keys().chain(b.keys()).collect();
    tags.sort();
    tags.dedup();
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for t in tags {
        let ft = global[t] as f64;
        match (a.get(t), b.get(t)) {
            (Some(&x), Some(&y)) => {
                numerator += x.min(y) as f64 / ft;
                denominator += x.max(y) as f64 / ft;
            }
            (Some(&x), None) => denominator += x as f64 / ft,
            (None, Some(&y)) => denominator += y as f64 / ft,
            (None, None) => unreachable!(),
        }
    }
    numerator / denominator
}

pub fn cloud_map(c: &TagCloud) -> HashMap<String, u64> {
    c.freqs().iter().map(|(t, &f)| (t.clone(), f)).collect()
}

pub fn global_map(c: &Corpus) -> HashMap<String, u64> {
    let mut g = HashMap::new();
    for cloud in c.clouds().values() {
        for (t, &f) in cloud.freqs() {
            *g.entry(t.clone()).or_insert(0) += f;
        }
    }
    g
}

/// Random corpus: `resources` clouds with 1..=max_tags tags each, drawn from
/// a vocabulary small enough that clouds overlap.
pub fn random_corpus(rng: &mut SeededRng, resources: usize, max_tags: usize) -> Corpus {
    let vocab = (max_tags * 2).max(4);
    let clouds = (0..resources).map(|r| {
        let tags = 1 + rng.below(max_tags);
        let mut counts = BTreeMap::new();
        for _ in 0..tags {
            counts.insert(format!("t{}", rng.below(vocab)), 1 + rng.below(20) as u64);
        }
        TagCloud::from_counts(format!("r{r:03}"), counts)
    });
    Corpus::from_clouds(clouds).expect("non-empty clouds, distinct ids")
}

/// Symmetric random weights in [0, 1] with unit diagonal; each off-diagonal
/// entry is zero with probability `sparsity`.
pub fn random_weights(rng: &mut SeededRng, n: usize, sparsity: f64) -> SimilarityMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        rows[i][i] = 1.0;
        for j in i + 1..n {
            let w = if rng.unit() < sparsity { 0.0 } else { rng.unit() };
            rows[i][j] = w;
            rows[j][i] = w;
        }
    }
    let ids = (0..n).map(|i| format!("n{i}")).collect();
    SimilarityMatrix::new(ids, SquareMatrix::from_rows(&rows).unwrap(), MatrixKind::Raw).unwrap()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> SimilarityMatrix {
    let ids = (0..rows.len()).map(|i| format!("n{i}")).collect();
    SimilarityMatrix::new(ids, SquareMatrix::from_rows(rows).unwrap(), MatrixKind::Raw).unwrap()
}

/// Connected components of the graph with an edge wherever the weight is
/// nonzero.
pub fn union_find_components(m: &SimilarityMatrix) -> usize {
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let n = m.n();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if m.get(i, j) != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

/// Adjusted Rand Index by pair counting over all unordered pairs.
pub fn pair_counting_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut neither) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let total = both + only_a + only_b + neither;
    if total == 0.0 {
        return 1.0;
    }
    let expected = (both + only_a) * (both + only_b) / total;
    let max = ((both + only_a) + (both + only_b)) / 2.0;
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}

/// Number of distinct labels.
pub fn label_count(labels: &[usize]) -> usize {
    labels.iter().collect::<HashSet<_>>().len()
}

/// Max |A - B| over all entries.
pub fn max_abs_diff(a: &SquareMatrix, b: &SquareMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Random orthogonal d x d matrix (Gram-Schmidt on Gaussian-ish columns),
/// row-major.
pub fn random_orthogonal(rng: &mut SeededRng, d: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.unit() * 2.0 - 1.0).collect();
        for c in &cols {
            let dot: f64 = v.iter().zip(c).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(c) {
                *x -= dot * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    (0..d).map(|i| (0..d).map(|j| cols[j][i]).collect()).collect()
}

/// Sort-and-bin reference for the strength histogram: returns the nonzero
/// upper-triangle strengths in ascending order and the zero count.
pub fn sorted_strengths(m: &SimilarityMatrix) -> (Vec<f64>, u64) {
    let mut values = Vec::new();
    let mut zeros = 0;
    for i in 0..m.n() {
        for j in i + 1..m.n() {
            let v = m.get(i, j);
            if v == 0.0 {
                zeros += 1;
            } else {
                values.push(v);
            }
        }
    }
    values.sort_by(f64::total_cmp);
    (values, zeros)
}
