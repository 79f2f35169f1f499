//! Community detection for resources in collaborative tagging data.
//!
//! Resources are compared through their tag-clouds (the multiset of tags
//! users attached to them), which yields a weighted resource network. The
//! spectrum of the network's Laplacian-like matrix then exposes groups of
//! resources that were tagged alike.
//!
//! The stages map onto modules:
//!
//! * [`ingest`]: posts from JSONL/TSV, per-resource tag-clouds, the corpus.
//! * [`similarity`]: overlap similarity, the strength matrix, the power
//!   transform and the log-binned strength histogram.
//! * [`spectral`]: `Q = S - W`, Jacobi eigendecomposition, zero-eigenvalue
//!   counting and the eigengap choice of `k`.
//! * [`clustering`]: spectral embedding, seeded k-means, community ordering
//!   and matrix reordering.
//! * [`report`]: community tag-clouds, PGM heatmaps and the HTML page.
//! * [`synth`]: planted-partition folksonomies and the Adjusted Rand Index.
//! * [`pipeline`]: the whole run plus per-stage entry points.

pub mod clustering;
pub mod error;
pub mod ingest;
pub mod matrix;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod similarity;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
