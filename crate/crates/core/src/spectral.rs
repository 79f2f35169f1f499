//! Laplacian-like matrix of the strength network and its full spectrum.
//!
//! `Q = S - W`, where `W` is the transformed similarity matrix with its
//! diagonal zeroed and `S` the diagonal matrix of row sums of `W`. `Q` is
//! positive semidefinite with `Q·1 = 0`; the multiplicity of the zero
//! eigenvalue counts connected components, and the eigenvectors of the
//! lowest non-trivial eigenvalues expose community structure.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::matrix::{compensated_sum, SquareMatrix};
use crate::similarity::SimilarityMatrix;

/// Default absolute tolerance under which an eigenvalue counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;
/// Jacobi stops once the off-diagonal Frobenius norm drops below this
/// fraction of the input's Frobenius norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    values: SquareMatrix,
}

impl LaplacianMatrix {
    /// Wraps a matrix that is already of the form `S - W`. Checks symmetry,
    /// sign pattern and zero row sums (within `1e-10 * n`).
    pub fn from_matrix(values: SquareMatrix) -> Result<Self> {
        let n = values.n();
        if !values.is_symmetric() {
            return Err(Error::Inconsistent("Laplacian must be symmetric".into()));
        }
        for i in 0..n {
            if values[(i, i)] < 0.0 {
                return Err(Error::Inconsistent(format!("negative diagonal entry at {i}")));
            }
            if values.row(i).iter().enumerate().any(|(j, &v)| j != i && v > 0.0) {
                return Err(Error::Inconsistent(format!("positive off-diagonal entry in row {i}")));
            }
            let row_sum = compensated_sum(values.row(i).iter().copied());
            if row_sum.abs() > 1e-10 * n as f64 * values[(i, i)].max(1.0) {
                return Err(Error::Inconsistent(format!("row {i} sums to {row_sum}")));
            }
        }
        Ok(LaplacianMatrix { values })
    }

    pub fn n(&self) -> usize {
        self.values.n()
    }

    pub fn values(&self) -> &SquareMatrix {
        &self.values
    }
}

/// Builds `Q = S - W` from a strength matrix.
pub fn build_q(m: &SimilarityMatrix) -> LaplacianMatrix {
    let n = m.n();
    let w = m.values();
    let mut q = SquareMatrix::zeros(n);
    for i in 0..n {
        let degree = compensated_sum((0..n).filter(|&j| j != i).map(|j| w[(i, j)]));
        for j in 0..n {
            q[(i, j)] = if i == j { degree } else { -w[(i, j)] };
        }
    }
    LaplacianMatrix { values: q }
}

/// Ascending eigenvalues with orthonormal eigenvectors; column `j` of
/// `eigenvectors` pairs with `eigenvalues[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    eigenvalues: Vec<f64>,
    eigenvectors: SquareMatrix,
    sweeps: usize,
}

impl SpectralResult {
    /// Assembles a result from parts (for example when reading saved
    /// artifacts). Eigenvalues must be ascending.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: SquareMatrix) -> Result<Self> {
        if eigenvalues.len() != eigenvectors.n() {
            return Err(Error::Dimension(format!(
                "{} eigenvalues for {} eigenvectors",
                eigenvalues.len(),
                eigenvectors.n()
            )));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Inconsistent("eigenvalues must be ascending".into()));
        }
        Ok(SpectralResult {
            eigenvalues,
            eigenvectors,
            sweeps: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &SquareMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        self.eigenvectors.column(j)
    }

    /// Jacobi sweeps used; 0 when built from parts.
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// CSV with columns `index,eigenvalue`, index 1-based.
    pub fn write_spectrum_csv<W: Write>(&self, out: W) -> Result<()> {
        write_spectrum_csv(&self.eigenvalues, out)
    }

    /// CSV with header `v1..vn`; column `j` is eigenvector `j`.
    pub fn write_eigenvectors_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.n();
        let mut w = csv::Writer::from_writer(out);
        w.write_record((1..=n).map(|j| format!("v{j}")))?;
        for i in 0..n {
            w.write_record(self.eigenvectors.row(i).iter().map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_spectrum_csv<W: Write>(eigenvalues: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "eigenvalue"])?;
    for (i, l) in eigenvalues.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format!("{l:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectrum_csv<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let v = rec
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(i + 2, "bad eigenvalue"))?;
        out.push(v);
    }
    Ok(out)
}

/// Rotates rows `p` and `q` (entries other than columns `p`, `q`) of a
/// row-major matrix and mirrors them into the corresponding columns.
fn rotate_symmetric(a: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let (head, tail) = a.split_at_mut(q * n);
    let row_p = &mut head[p * n..(p + 1) * n];
    let row_q = &mut tail[..n];
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = row_p[k];
        let akq = row_q[k];
        row_p[k] = c * akp - s * akq;
        row_q[k] = s * akp + c * akq;
    }
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        a[k * n + p] = a[p * n + k];
        a[k * n + q] = a[q * n + k];
    }
}

fn rotate_rows(v: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = v.split_at_mut(q * n);
    let row_p = &mut head[p * n..(p + 1) * n];
    let row_q = &mut tail[..n];
    for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let (vp, vq) = (*x, *y);
        *x = c * vp - s * vq;
        *y = s * vp + c * vq;
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += a[i * n + j] * a[i * n + j];
        }
    }
    (2.0 * s).sqrt()
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm falls to
/// [`JACOBI_TOLERANCE`] times the Frobenius norm of the input, within
/// [`JACOBI_MAX_SWEEPS`] sweeps. Eigenpairs are sorted ascending (stable on
/// ties) and each eigenvector is signed so its largest-magnitude component
/// (first one on ties) is positive.
pub fn jacobi_eigen(m: &SquareMatrix) -> Result<SpectralResult> {
    let n = m.n();
    let mut a = m.as_slice().to_vec();
    // Row j of `vt` accumulates eigenvector j.
    let mut vt = SquareMatrix::identity(n);
    let threshold = JACOBI_TOLERANCE * m.norm_frobenius();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, n);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NotConverged { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let g = 100.0 * apq.abs();
                if sweeps > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate_symmetric(&mut a, n, p, q, c, s);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                rotate_rows(vt.as_mut_slice(), n, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let mut eigenvectors = SquareMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        let v = vt.row(src);
        let pivot = v
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, x) in v.iter().enumerate() {
            eigenvectors[(i, col)] = sign * x;
        }
    }
    Ok(SpectralResult {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

/// Full spectrum of `Q`.
pub fn eigendecompose(q: &LaplacianMatrix) -> Result<SpectralResult> {
    jacobi_eigen(&q.values)
}

/// Number of eigenvalues with `|λ| <= zero_tol`; for `Q` this is the number
/// of connected components of the non-zero-weight graph.
pub fn count_zero_eigenvalues(r: &SpectralResult, zero_tol: f64) -> usize {
    r.eigenvalues.iter().filter(|l| l.abs() <= zero_tol).count()
}

/// Outcome of the eigengap rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KSelection {
    pub k: usize,
    /// No informative gap: every eigenvalue above the zero-eigenspace is the
    /// same within tolerance, or there is nothing above it to compare.
    pub degenerate: bool,
}

/// Picks the community count from the largest eigengap.
///
/// With eigenvalues numbered from 1 and `c` of them zero, every `i` in
/// `max(c, 2) ..= min(max_k, n - 1)` is scored by `λ[i+1] / λ[i]`, or by the
/// additive gap `λ[i+1] - λ[i]` when `λ[i]` is itself below `zero_tol`. The
/// best score wins, ties going to the smaller `i`, and `k = i`. The lone
/// trivial eigenvalue of a connected graph is never a candidate.
pub fn select_k(r: &SpectralResult, max_k: usize, zero_tol: f64) -> Result<KSelection> {
    let n = r.n();
    if n < 2 {
        return Err(Error::Config("choosing k needs at least two resources".into()));
    }
    if max_k == 0 {
        return Err(Error::Config("max_k must be at least 1".into()));
    }
    let l = &r.eigenvalues;
    let zeros = count_zero_eigenvalues(r, zero_tol);
    let fallback = KSelection {
        k: zeros.clamp(1, max_k),
        degenerate: true,
    };

    let rest = &l[zeros.min(n)..];
    if let (Some(lo), Some(hi)) = (rest.first(), rest.last()) {
        if hi - lo <= zero_tol * hi.abs().max(1.0) {
            return Ok(fallback);
        }
    }

    let first = zeros.max(2);
    let last = max_k.min(n - 1);
    let mut best: Option<(usize, f64)> = None;
    for i in first..=last {
        let (lo, hi) = (l[i - 1], l[i]);
        let score = if lo < zero_tol { hi - lo } else { hi / lo };
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((i, score));
        }
    }
    Ok(match best {
        Some((k, _)) => KSelection { k, degenerate: false },
        None => fallback,
    })
}
