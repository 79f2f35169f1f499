//! Community extraction from the low end of the spectrum.
//!
//! Each resource becomes a point whose coordinates are its components in
//! the lowest non-trivial eigenvectors. Seeded k-means groups the points,
//! and the resulting labels define a permutation that makes members of the
//! same community adjacent in the strength matrix.

use std::io::Write;

use crate::error::{Error, Result};
use crate::matrix::CompensatedSum;
use crate::rng::SeededRng;
use crate::similarity::{check_permutation, SimilarityMatrix};
use crate::spectral::{count_zero_eigenvalues, SpectralResult};

/// Upper bound on Lloyd iterations per restart.
pub const MAX_LLOYD_ITERATIONS: usize = 500;
/// Independent seeded k-means++ starts; the lowest-inertia run is kept.
pub const KMEANS_RESTARTS: usize = 10;

/// Resources as points in eigenvector space.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    n: usize,
    d: usize,
    points: Vec<f64>,
    /// Spectrum index (0-based) of the eigenvector behind each column.
    columns: Vec<usize>,
}

impl Embedding {
    /// Builds an embedding from row-major points.
    pub fn from_points(d: usize, points: Vec<f64>) -> Result<Self> {
        if d == 0 || !points.len().is_multiple_of(d) {
            return Err(Error::Dimension(format!(
                "{} coordinates do not form rows of width {d}",
                points.len()
            )));
        }
        Ok(Embedding {
            n: points.len() / d,
            d,
            points,
            columns: (0..d).collect(),
        })
    }

    fn from_columns(r: &SpectralResult, columns: Vec<usize>) -> Self {
        let n = r.n();
        let d = columns.len();
        let v = r.eigenvectors();
        let mut points = Vec::with_capacity(n * d);
        for i in 0..n {
            points.extend(columns.iter().map(|&j| v[(i, j)]));
        }
        Embedding { n, d, points, columns }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// Scales every non-zero row to unit length.
    pub fn normalize_rows(&mut self) {
        for row in self.points.chunks_mut(self.d) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
    }

    /// CSV with `resource_id` then one column per eigenvector, named `v<j>`
    /// with `j` the 1-based spectrum index.
    pub fn write_csv<W: Write>(&self, resources: &[String], out: W) -> Result<()> {
        if resources.len() != self.n {
            return Err(Error::Dimension("resource list does not match embedding".into()));
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["resource_id".to_string()];
        header.extend(self.columns.iter().map(|j| format!("v{}", j + 1)));
        w.write_record(&header)?;
        for (i, r) in resources.iter().enumerate() {
            let mut rec = vec![r.clone()];
            rec.extend(self.point(i).iter().map(|x| format!("{x:.16e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `d` eigenvectors immediately above the zero-eigenspace, ascending.
pub fn embed(r: &SpectralResult, d: usize, zero_tol: f64) -> Result<Embedding> {
    if d == 0 {
        return Err(Error::Config("embedding dimension must be at least 1".into()));
    }
    let zeros = count_zero_eigenvalues(r, zero_tol);
    if zeros + d > r.n() {
        return Err(Error::Config(format!(
            "{d} non-trivial eigenvectors requested but only {} exist",
            r.n() - zeros
        )));
    }
    Ok(Embedding::from_columns(r, (zeros..zeros + d).collect()))
}

/// Embedding used by the pipeline: like [`embed`] on connected graphs, but
/// when the zero eigenvalue is repeated the whole zero-eigenspace is kept
/// (its vectors are component indicators in some basis) and counts for
/// `zeros - 1` of the `d` requested non-constant directions.
pub fn component_aware_embed(r: &SpectralResult, d: usize, zero_tol: f64) -> Result<Embedding> {
    let zeros = count_zero_eigenvalues(r, zero_tol);
    if zeros <= 1 {
        return embed(r, d, zero_tol);
    }
    if d == 0 {
        return Err(Error::Config("embedding dimension must be at least 1".into()));
    }
    let extra = d.saturating_sub(zeros - 1).min(r.n() - zeros);
    Ok(Embedding::from_columns(r, (0..zeros + extra).collect()))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_rows(e: &Embedding) -> usize {
    let mut rows: Vec<Vec<u64>> = (0..e.n)
        .map(|i| e.point(i).iter().map(|x| (x + 0.0).to_bits()).collect())
        .collect();
    rows.sort_unstable();
    rows.dedup();
    rows.len()
}

/// Index of the nearest centroid; the lowest index wins ties.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_pp_init(e: &Embedding, k: usize, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    let mut centroids = vec![e.point(rng.below(e.n)).to_vec()];
    let mut d2: Vec<f64> = (0..e.n).map(|i| sq_dist(e.point(i), &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let target = rng.unit() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        let pick = pick.expect("fewer distinct rows than clusters");
        let c = e.point(pick).to_vec();
        for (i, w) in d2.iter_mut().enumerate() {
            *w = w.min(sq_dist(e.point(i), &c));
        }
        centroids.push(c);
    }
    centroids
}

fn update_centroids(e: &Embedding, labels: &[usize], k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut sums = vec![vec![0.0; e.d]; k];
    let mut sizes = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        sizes[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(e.point(i)) {
            *s += x;
        }
    }
    for (s, &size) in sums.iter_mut().zip(&sizes) {
        if size > 0 {
            s.iter_mut().for_each(|x| *x /= size as f64);
        }
    }
    (sums, sizes)
}

/// Moves the point of the largest cluster farthest from its centroid into
/// each empty cluster.
fn repair_empty(e: &Embedding, labels: &mut [usize], k: usize) -> Vec<Vec<f64>> {
    loop {
        let (centroids, sizes) = update_centroids(e, labels, k);
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return centroids;
        };
        let largest = (0..k).fold(0, |b, c| if sizes[c] > sizes[b] { c } else { b });
        let far = (0..e.n)
            .filter(|&i| labels[i] == largest)
            .map(|i| (i, sq_dist(e.point(i), &centroids[largest])))
            .fold((usize::MAX, -1.0), |b, x| if x.1 > b.1 { x } else { b })
            .0;
        labels[far] = empty;
    }
}

fn lloyd(e: &Embedding, mut centroids: Vec<Vec<f64>>) -> (Vec<usize>, f64) {
    let k = centroids.len();
    let mut labels: Vec<usize> = vec![usize::MAX; e.n];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let next: Vec<usize> = (0..e.n).map(|i| nearest(e.point(i), &centroids).0).collect();
        if next == labels {
            break;
        }
        labels = next;
        centroids = repair_empty(e, &mut labels, k);
    }
    let inertia = (0..e.n).map(|i| sq_dist(e.point(i), &centroids[labels[i]])).sum();
    (labels, inertia)
}

/// Seeded k-means over embedding rows.
///
/// Each of [`KMEANS_RESTARTS`] runs starts from k-means++ seeding drawn from
/// one [`SeededRng`] stream and iterates Lloyd steps to an assignment
/// fixpoint (at most [`MAX_LLOYD_ITERATIONS`]). The lowest-inertia run is
/// returned (earliest on ties), so identical inputs give identical labels.
pub fn cluster(e: &Embedding, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if k > e.n {
        return Err(Error::Config(format!("k = {k} exceeds {} points", e.n)));
    }
    if k == 1 {
        return Ok(vec![0; e.n]);
    }
    let distinct = distinct_rows(e);
    if k > distinct {
        return Err(Error::Config(format!("k = {k} exceeds {distinct} distinct points")));
    }
    let mut rng = SeededRng::new(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let init = kmeans_pp_init(e, k, &mut rng);
        let (labels, inertia) = lloyd(e, init);
        if best.as_ref().is_none_or(|(_, b)| inertia < *b) {
            best = Some((labels, inertia));
        }
    }
    Ok(best.expect("at least one restart").0)
}

/// Community labels ordered by size, plus the grouping permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityAssignment {
    labels: Vec<usize>,
    k: usize,
    permutation: Vec<usize>,
}

impl CommunityAssignment {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Position `i` of the reordered matrix holds original index `permutation[i]`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Original indices of community `c`, ascending.
    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == c).collect()
    }

    /// CSV `resource_id,community,permuted_index`, one row per resource in
    /// original order.
    pub fn write_csv<W: Write>(&self, resources: &[String], out: W) -> Result<()> {
        if resources.len() != self.labels.len() {
            return Err(Error::Dimension("resource list does not match assignment".into()));
        }
        let mut position = vec![0; self.labels.len()];
        for (pos, &orig) in self.permutation.iter().enumerate() {
            position[orig] = pos;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["resource_id", "community", "permuted_index"])?;
        for (i, r) in resources.iter().enumerate() {
            w.write_record([r.clone(), self.labels[i].to_string(), position[i].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Relabels communities by decreasing size (ties: smaller original id
/// first) and groups indices contiguously, ascending within a community.
pub fn make_assignment(labels: &[usize]) -> Result<CommunityAssignment> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("no labels".into()));
    }
    let max = *labels.iter().max().expect("non-empty");
    let mut sizes = vec![0usize; max + 1];
    for &l in labels {
        sizes[l] += 1;
    }
    let mut used: Vec<usize> = (0..=max).filter(|&l| sizes[l] > 0).collect();
    used.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut rename = vec![usize::MAX; max + 1];
    for (new, &old) in used.iter().enumerate() {
        rename[old] = new;
    }
    let labels: Vec<usize> = labels.iter().map(|&l| rename[l]).collect();
    let mut permutation: Vec<usize> = (0..labels.len()).collect();
    permutation.sort_by_key(|&i| (labels[i], i));
    Ok(CommunityAssignment {
        labels,
        k: used.len(),
        permutation,
    })
}

/// Strength matrix with rows and columns grouped by community.
pub fn reorder_matrix(m: &SimilarityMatrix, a: &CommunityAssignment) -> Result<SimilarityMatrix> {
    check_permutation(&a.permutation, m.n())?;
    m.permuted(&a.permutation)
}

/// Mean off-diagonal strength within communities and between them.
pub fn block_contrast(m: &SimilarityMatrix, a: &CommunityAssignment) -> Result<(f64, f64)> {
    if a.labels.len() != m.n() {
        return Err(Error::Dimension("assignment does not match matrix".into()));
    }
    if a.k < 2 {
        return Err(Error::Config("block contrast needs at least two communities".into()));
    }
    let (mut within, mut nw, mut between, mut nb) = (CompensatedSum::default(), 0u64, CompensatedSum::default(), 0u64);
    for i in 0..m.n() {
        for j in i + 1..m.n() {
            if a.labels[i] == a.labels[j] {
                within.add(m.get(i, j));
                nw += 1;
            } else {
                between.add(m.get(i, j));
                nb += 1;
            }
        }
    }
    if nw == 0 {
        return Err(Error::Config("all communities are singletons".into()));
    }
    Ok((within.value() / nw as f64, between.value() / nb as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SquareMatrix;
    use crate::similarity::MatrixKind;

    fn emb(rows: &[&[f64]]) -> Embedding {
        let d = rows[0].len();
        Embedding::from_points(d, rows.concat()).unwrap()
    }

    #[test]
    fn separated_groups_are_recovered() {
        let e = emb(&[&[0.0, 0.0], &[0.01, 0.0], &[0.0, 0.02], &[5.0, 5.0], &[5.01, 5.0]]);
        let labels = cluster(&e, 2, 0).unwrap();
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[0], labels[2]);
        assert_eq!(labels[3], labels[4]);
        assert_ne!(labels[0], labels[3]);
    }

    #[test]
    fn single_cluster() {
        let e = emb(&[&[1.0], &[2.0], &[3.0]]);
        assert_eq!(cluster(&e, 1, 9).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn too_many_clusters() {
        let e = emb(&[&[1.0], &[1.0], &[2.0]]);
        assert!(cluster(&e, 3, 0).is_err());
        assert!(cluster(&e, 4, 0).is_err());
        assert!(cluster(&e, 0, 0).is_err());
        let labels = cluster(&e, 2, 0).unwrap();
        assert_eq!(labels[0], labels[1]);
        assert_ne!(labels[0], labels[2]);
    }

    #[test]
    fn kmeans_is_deterministic() {
        let pts: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64 * 0.1).collect();
        let e = Embedding::from_points(2, pts).unwrap();
        assert_eq!(cluster(&e, 3, 5).unwrap(), cluster(&e, 3, 5).unwrap());
    }

    #[test]
    fn assignment_orders_by_size() {
        let a = make_assignment(&[1, 1, 0]).unwrap();
        assert_eq!(a.labels(), &[0, 0, 1]);
        assert_eq!(a.permutation(), &[0, 1, 2]);
        assert_eq!(a.k(), 2);
    }

    #[test]
    fn assignment_size_ties_go_to_smaller_id() {
        let a = make_assignment(&[0, 1, 0, 1]).unwrap();
        assert_eq!(a.labels(), &[0, 1, 0, 1]);
        assert_eq!(a.permutation(), &[0, 2, 1, 3]);
        let b = make_assignment(&[1, 0, 1, 0]).unwrap();
        assert_eq!(b.labels(), &[1, 0, 1, 0]);
        assert_eq!(b.permutation(), &[1, 3, 0, 2]);
    }

    #[test]
    fn assignment_skips_unused_ids() {
        let a = make_assignment(&[7, 3, 7]).unwrap();
        assert_eq!(a.k(), 2);
        assert_eq!(a.labels(), &[0, 1, 0]);
        assert_eq!(a.sizes(), vec![2, 1]);
        assert!(make_assignment(&[]).is_err());
    }

    fn matrix(rows: &[Vec<f64>]) -> SimilarityMatrix {
        SimilarityMatrix::new(
            (0..rows.len()).map(|i| format!("r{i}")).collect(),
            SquareMatrix::from_rows(rows).unwrap(),
            MatrixKind::Raw,
        )
        .unwrap()
    }

    #[test]
    fn reorder_identity_and_reversal() {
        let m = matrix(&[vec![1.0, 0.3], vec![0.3, 1.0]]);
        let id = make_assignment(&[0, 1]).unwrap();
        assert_eq!(reorder_matrix(&m, &id).unwrap(), m);
        let rev = make_assignment(&[1, 0, 0]).unwrap();
        let m3 = matrix(&[vec![1.0, 0.1, 0.2], vec![0.1, 1.0, 0.3], vec![0.2, 0.3, 1.0]]);
        let out = reorder_matrix(&m3, &rev).unwrap();
        assert_eq!(rev.permutation(), &[1, 2, 0]);
        assert_eq!(out.resources(), &["r1", "r2", "r0"]);
        assert_eq!(out.get(0, 1), 0.3);
        assert_eq!(out.get(0, 2), 0.1);
        assert!(reorder_matrix(&m, &rev).is_err());
    }

    #[test]
    fn contrast_of_block_and_uniform_matrices() {
        let block = matrix(&[
            vec![1.0, 1.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![0.0, 0.0, 1.0, 1.0],
        ]);
        let a = make_assignment(&[0, 0, 1, 1]).unwrap();
        assert_eq!(block_contrast(&block, &a).unwrap(), (1.0, 0.0));
        let uniform = matrix(&vec![vec![0.4; 4]; 4]);
        let (w, b) = block_contrast(&uniform, &a).unwrap();
        assert_eq!(w, b);
        let singletons = make_assignment(&[0, 1, 2, 3]).unwrap();
        assert!(block_contrast(&block, &singletons).is_err());
        assert!(block_contrast(&block, &make_assignment(&[0; 4]).unwrap()).is_err());
    }

    #[test]
    fn assignment_csv_reports_positions() {
        let a = make_assignment(&[1, 0, 0]).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&["x".into(), "y".into(), "z".into()], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "resource_id,community,permuted_index\nx,1,2\ny,0,0\nz,0,1\n"
        );
    }
}
