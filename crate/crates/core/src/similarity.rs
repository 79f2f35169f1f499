//! Tag-cloud overlap similarity between resources.
//!
//! For resources with clouds `T1`, `T2` and global tag frequencies `f_t`,
//! each tag contributes its per-resource count divided by `f_t`. Shared tags
//! contribute `min(f1, f2) / f_t` to the numerator and `max(f1, f2) / f_t` to
//! the denominator; tags present on one side only add to the denominator.
//! The result lies in `[0, 1]` and equals 1 for identical clouds.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Read, Write};

use itertools::{EitherOrBoth, Itertools};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{Corpus, TagCloud};
use crate::matrix::{CompensatedSum, SquareMatrix};

/// Exponent used to compress the dynamic range of link strengths.
pub const DEFAULT_GAMMA: f64 = 0.1;

const BINARY_MAGIC: &[u8; 4] = b"FSM1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixKind {
    /// Plain overlap similarity `w`.
    Raw,
    /// `w^gamma`.
    Transformed { gamma: f64 },
}

/// Symmetric resource-by-resource strength matrix with its index → id table.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    resources: Vec<String>,
    values: SquareMatrix,
    kind: MatrixKind,
}

impl SimilarityMatrix {
    /// Wraps existing values, checking shape, symmetry and range.
    pub fn new(resources: Vec<String>, values: SquareMatrix, kind: MatrixKind) -> Result<Self> {
        if resources.len() != values.n() {
            return Err(Error::Dimension(format!(
                "{} resource ids for a {}x{} matrix",
                resources.len(),
                values.n(),
                values.n()
            )));
        }
        check_unique(&resources)?;
        if !values.is_symmetric() {
            return Err(Error::Inconsistent("similarity matrix is not symmetric".into()));
        }
        if let Some(v) = values.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Inconsistent(format!("similarity value {v} outside [0, 1]")));
        }
        Ok(SimilarityMatrix {
            resources,
            values,
            kind,
        })
    }

    pub fn n(&self) -> usize {
        self.values.n()
    }

    pub fn resources(&self) -> &[String] {
        &self.resources
    }

    pub fn values(&self) -> &SquareMatrix {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    /// Simultaneous row/column permutation: `out[i][j] = self[p[i]][p[j]]`.
    pub fn permuted(&self, permutation: &[usize]) -> Result<Self> {
        check_permutation(permutation, self.n())?;
        Ok(SimilarityMatrix {
            resources: permutation.iter().map(|&p| self.resources[p].clone()).collect(),
            values: self.values.permuted(permutation),
            kind: self.kind,
        })
    }

    /// Upper-triangle (off-diagonal) entries in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| self.values[(i, j)]))
    }

    /// CSV: a header of resource ids, then one row per resource with 17
    /// significant digits per value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.resources)?;
        for i in 0..self.n() {
            w.write_record(self.values.row(i).iter().map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, kind: MatrixKind) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let resources: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let n = resources.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != n {
                return Err(Error::parse(i + 2, format!("expected {n} values, found {}", rec.len())));
            }
            for field in rec.iter() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(i + 2, format!("not a number: {field:?}")))?;
                data.push(v);
            }
        }
        let values = SquareMatrix::from_row_major(n, data)
            .ok_or_else(|| Error::Dimension(format!("expected {n} rows of values")))?;
        Self::new(resources, values, kind)
    }

    /// Binary layout, little-endian: `FSM1`, `u32 n`, then `n` ids each as
    /// `u32 byte length` + UTF-8 bytes, then `n*n` row-major `f64` values.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&len_u32(self.n())?.to_le_bytes())?;
        for id in &self.resources {
            out.write_all(&len_u32(id.len())?.to_le_bytes())?;
            out.write_all(id.as_bytes())?;
        }
        for v in self.values.as_slice() {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R, kind: MatrixKind) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::parse(0, "missing FSM1 magic bytes"));
        }
        let n = read_u32(&mut input)? as usize;
        let mut resources = Vec::with_capacity(n);
        for _ in 0..n {
            let len = read_u32(&mut input)? as usize;
            let mut buf = vec![0u8; len];
            input.read_exact(&mut buf)?;
            let id = String::from_utf8(buf).map_err(|e| Error::parse(0, e.to_string()))?;
            resources.push(id);
        }
        let mut data = Vec::with_capacity(n * n);
        let mut buf = [0u8; 8];
        for _ in 0..n * n {
            input.read_exact(&mut buf)?;
            data.push(f64::from_le_bytes(buf));
        }
        let values = SquareMatrix::from_row_major(n, data).expect("n*n values read");
        Self::new(resources, values, kind)
    }
}

fn len_u32(len: usize) -> Result<u32> {
    u32::try_from(len).map_err(|_| Error::Config(format!("length {len} does not fit in u32")))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn check_unique(resources: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(resources.len());
    for r in resources {
        if !seen.insert(r.as_str()) {
            return Err(Error::Inconsistent(format!("duplicate resource {r:?}")));
        }
    }
    Ok(())
}

pub(crate) fn check_permutation(permutation: &[usize], n: usize) -> Result<()> {
    if permutation.len() != n {
        return Err(Error::Dimension(format!(
            "permutation of length {} for {n} resources",
            permutation.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in permutation {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Dimension("not a permutation".into()));
        }
    }
    Ok(())
}

/// Overlap of two clouds given as sorted `(tag, count, global count)` streams.
fn weighted_overlap<'a, A, B>(a: A, b: B) -> (f64, f64)
where
    A: Iterator<Item = (&'a str, u64, u64)>,
    B: Iterator<Item = (&'a str, u64, u64)>,
{
    let mut num = CompensatedSum::default();
    let mut den = CompensatedSum::default();
    for pair in a.merge_join_by(b, |x, y| x.0.cmp(y.0)) {
        match pair {
            EitherOrBoth::Both((_, f1, g), (_, f2, _)) => {
                let g = g as f64;
                num.add(f1.min(f2) as f64 / g);
                den.add(f1.max(f2) as f64 / g);
            }
            EitherOrBoth::Left((_, f, g)) | EitherOrBoth::Right((_, f, g)) => {
                den.add(f as f64 / g as f64);
            }
        }
    }
    (num.value(), den.value())
}

fn with_global<'a>(cloud: &'a TagCloud, global: &BTreeMap<String, u64>) -> Result<Vec<(&'a str, u64, u64)>> {
    cloud
        .freqs()
        .iter()
        .map(|(t, &f)| match global.get(t) {
            Some(&g) if g >= f => Ok((t.as_str(), f, g)),
            Some(&g) => Err(Error::Inconsistent(format!(
                "tag {t:?}: global count {g} below per-resource count {f}"
            ))),
            None => Err(Error::Inconsistent(format!("tag {t:?} missing from global counts"))),
        })
        .collect()
}

/// Overlap similarity of two tag-clouds, in `[0, 1]`.
pub fn pair_similarity(c1: &TagCloud, c2: &TagCloud, global: &BTreeMap<String, u64>) -> Result<f64> {
    if c1.is_empty() && c2.is_empty() {
        return Err(Error::EmptyInput(
            "similarity of two empty tag-clouds is undefined".into(),
        ));
    }
    let a = with_global(c1, global)?;
    let b = with_global(c2, global)?;
    let (num, den) = weighted_overlap(a.into_iter(), b.into_iter());
    Ok(num / den)
}

/// Similarity matrix over `resource_order`; unordered pairs are evaluated
/// once and mirrored, the diagonal is 1.
pub fn build_matrix(corpus: &Corpus, resource_order: &[String]) -> Result<SimilarityMatrix> {
    check_unique(resource_order)?;
    let global = corpus.global_freqs();
    let clouds: Vec<Vec<(&str, u64, u64)>> = resource_order
        .iter()
        .map(|r| {
            let cloud = corpus
                .cloud(r)
                .ok_or_else(|| Error::Inconsistent(format!("resource {r:?} not in corpus")))?;
            with_global(cloud, global)
        })
        .collect::<Result<_>>()?;

    let n = clouds.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    let (num, den) = weighted_overlap(clouds[i].iter().copied(), clouds[j].iter().copied());
                    num / den
                })
                .collect()
        })
        .collect();

    let mut values = SquareMatrix::identity(n);
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(SimilarityMatrix {
        resources: resource_order.to_vec(),
        values,
        kind: MatrixKind::Raw,
    })
}

/// Element-wise `w^gamma` with `0^gamma = 0`, for `0 < gamma <= 1`.
pub fn power_transform(m: &SimilarityMatrix, gamma: f64) -> Result<SimilarityMatrix> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Config(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if m.kind != MatrixKind::Raw {
        return Err(Error::Config("matrix is already power-transformed".into()));
    }
    let data = m
        .values
        .as_slice()
        .iter()
        .map(|&v| if v == 0.0 { 0.0 } else { v.powf(gamma) })
        .collect();
    Ok(SimilarityMatrix {
        resources: m.resources.clone(),
        values: SquareMatrix::from_row_major(m.n(), data).expect("same shape"),
        kind: MatrixKind::Transformed { gamma },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
    /// `count / (nonzero pairs * bin width)`.
    pub density: f64,
}

/// Logarithmically binned distribution of off-diagonal link strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthHistogram {
    pub bins_per_decade: usize,
    pub bins: Vec<HistogramBin>,
    /// Pairs with strength exactly zero (not representable on a log axis).
    pub zero_count: u64,
}

impl StrengthHistogram {
    pub fn total_pairs(&self) -> u64 {
        self.zero_count + self.bins.iter().map(|b| b.count).sum::<u64>()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lower", "upper", "count", "density"])?;
        for b in &self.bins {
            w.write_record([
                b.lower.to_string(),
                b.upper.to_string(),
                b.count.to_string(),
                b.density.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the bins back; the zero count and bin resolution are not part
    /// of the CSV and are left at 0.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut bins = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| -> Result<&str> {
                rec.get(k)
                    .ok_or_else(|| Error::parse(i + 2, "missing histogram column"))
            };
            let num = |k: usize| -> Result<f64> { field(k)?.parse().map_err(|_| Error::parse(i + 2, "bad number")) };
            bins.push(HistogramBin {
                lower: num(0)?,
                upper: num(1)?,
                count: field(2)?.parse().map_err(|_| Error::parse(i + 2, "bad count"))?,
                density: num(3)?,
            });
        }
        Ok(StrengthHistogram {
            bins_per_decade: 0,
            bins,
            zero_count: 0,
        })
    }
}

/// Lower edge of log bin `j`: `10^(j / bins_per_decade)`.
pub fn log_bin_edge(j: i64, bins_per_decade: usize) -> f64 {
    10f64.powf(j as f64 / bins_per_decade as f64)
}

fn log_bin_index(v: f64, bins_per_decade: usize) -> i64 {
    let mut j = (v.log10() * bins_per_decade as f64).floor() as i64;
    while log_bin_edge(j, bins_per_decade) > v {
        j -= 1;
    }
    while log_bin_edge(j + 1, bins_per_decade) <= v {
        j += 1;
    }
    j
}

/// Histogram of the upper-triangle strengths; bins span the occupied range
/// contiguously.
pub fn strength_histogram(m: &SimilarityMatrix, bins_per_decade: usize) -> Result<StrengthHistogram> {
    if bins_per_decade == 0 {
        return Err(Error::Config("bins_per_decade must be positive".into()));
    }
    if m.n() < 2 {
        return Err(Error::Config("histogram needs at least two resources".into()));
    }
    let mut zero_count = 0u64;
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for v in m.off_diagonal() {
        if v > 0.0 {
            *counts.entry(log_bin_index(v, bins_per_decade)).or_insert(0) += 1;
        } else {
            zero_count += 1;
        }
    }
    let nonzero: u64 = counts.values().sum();
    let bins = match (counts.keys().next(), counts.keys().next_back()) {
        (Some(&lo), Some(&hi)) => (lo..=hi)
            .map(|j| {
                let lower = log_bin_edge(j, bins_per_decade);
                let upper = log_bin_edge(j + 1, bins_per_decade);
                let count = counts.get(&j).copied().unwrap_or(0);
                HistogramBin {
                    lower,
                    upper,
                    count,
                    density: count as f64 / (nonzero as f64 * (upper - lower)),
                }
            })
            .collect(),
        _ => Vec::new(),
    };
    Ok(StrengthHistogram {
        bins_per_decade,
        bins,
        zero_count,
    })
}
