//! End-to-end runs: posts → strengths → spectrum → communities → files.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use crate::clustering::{
    block_contrast, cluster, component_aware_embed, make_assignment, reorder_matrix, CommunityAssignment, Embedding,
};
use crate::error::{Error, Result};
use crate::ingest::{build_corpus, parse_posts, Corpus, Format, Post};
use crate::report::{
    community_tagclouds, read_tagclouds_csv, render_heatmap, render_report, write_tagclouds_csv, CommunityTagCloud,
    FontRange, GrayImage, ReportContent, DEFAULT_TOP_N,
};
use crate::similarity::{
    build_matrix, power_transform, strength_histogram, MatrixKind, SimilarityMatrix, StrengthHistogram, DEFAULT_GAMMA,
};
use crate::spectral::{
    build_q, count_zero_eigenvalues, eigendecompose, read_spectrum_csv, select_k, KSelection, SpectralResult,
    DEFAULT_ZERO_TOL,
};

pub const DEFAULT_MAX_K: usize = 10;
pub const DEFAULT_BINS_PER_DECADE: usize = 5;

/// Artifact file names inside the output directory.
pub mod files {
    pub const SIMILARITY_RAW_CSV: &str = "similarity_raw.csv";
    pub const SIMILARITY_CSV: &str = "similarity.csv";
    pub const SIMILARITY_BIN: &str = "similarity.fsm";
    pub const SIMILARITY_ORDERED_CSV: &str = "similarity_ordered.csv";
    pub const HISTOGRAM_CSV: &str = "histogram.csv";
    pub const SPECTRUM_CSV: &str = "spectrum.csv";
    pub const EIGENVECTORS_CSV: &str = "eigenvectors.csv";
    pub const EMBEDDING_CSV: &str = "embedding.csv";
    pub const ASSIGNMENT_CSV: &str = "assignment.csv";
    pub const TAGCLOUDS_CSV: &str = "tagclouds.csv";
    pub const SUMMARY_JSON: &str = "summary.json";
    pub const HEATMAP_UNORDERED: &str = "heatmap_unordered.pgm";
    pub const HEATMAP_ORDERED: &str = "heatmap_ordered.pgm";
    pub const REPORT_HTML: &str = "report.html";
}

/// Analysis parameters independent of where inputs and outputs live.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub gamma: f64,
    /// `None` picks k from the eigengap.
    pub k: Option<usize>,
    /// `None` uses `k - 1`.
    pub d: Option<usize>,
    pub max_k: usize,
    pub zero_tol: f64,
    pub top_n: usize,
    pub seed: u64,
    pub normalize_rows: bool,
    pub bins_per_decade: usize,
    pub fonts: FontRange,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            gamma: DEFAULT_GAMMA,
            k: None,
            d: None,
            max_k: DEFAULT_MAX_K,
            zero_tol: DEFAULT_ZERO_TOL,
            top_n: DEFAULT_TOP_N,
            seed: 0,
            normalize_rows: false,
            bins_per_decade: DEFAULT_BINS_PER_DECADE,
            fonts: FontRange::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if self.k == Some(0) {
            return bad("k must be at least 1");
        }
        if self.d == Some(0) {
            return bad("d must be at least 1");
        }
        if self.max_k == 0 {
            return bad("max_k must be at least 1");
        }
        if self.zero_tol.is_nan() || self.zero_tol <= 0.0 {
            return bad("zero_tol must be positive");
        }
        if self.top_n == 0 {
            return bad("top_n must be at least 1");
        }
        if self.bins_per_decade == 0 {
            return bad("bins_per_decade must be at least 1");
        }
        if !(self.fonts.min > 0.0 && self.fonts.min <= self.fonts.max) {
            return bad("font range must satisfy 0 < min <= max");
        }
        Ok(())
    }
}

/// Everything computed by one run.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub raw: SimilarityMatrix,
    pub transformed: SimilarityMatrix,
    pub histogram: Option<StrengthHistogram>,
    pub spectrum: SpectralResult,
    pub zero_eigenvalues: usize,
    pub k_selection: Option<KSelection>,
    pub k: usize,
    pub embedding: Option<Embedding>,
    pub assignment: CommunityAssignment,
    pub ordered: SimilarityMatrix,
    pub contrast: Option<(f64, f64)>,
    pub tagclouds: Vec<CommunityTagCloud>,
}

impl Analysis {
    pub fn resources(&self) -> &[String] {
        self.raw.resources()
    }

    /// Community label per resource, in `resources()` order.
    pub fn labels(&self) -> &[usize] {
        self.assignment.labels()
    }
}

/// Runs the analysis on an in-memory corpus; resources are taken in sorted
/// id order.
pub fn analyze(corpus: &Corpus, config: &AnalysisConfig) -> Result<Analysis> {
    config.validate()?;
    let order = corpus.resources();
    let n = order.len();

    log::info!("similarity: {n} resources, {} tags", corpus.global_freqs().len());
    let raw = build_matrix(corpus, &order)?;
    let transformed = power_transform(&raw, config.gamma)?;
    let histogram = if n >= 2 {
        Some(strength_histogram(&raw, config.bins_per_decade)?)
    } else {
        None
    };

    log::info!("spectrum: Jacobi on {n}x{n}");
    let q = build_q(&transformed);
    let spectrum = eigendecompose(&q)?;
    let zero_eigenvalues = count_zero_eigenvalues(&spectrum, config.zero_tol);
    log::info!(
        "spectrum: {} sweeps, {zero_eigenvalues} zero eigenvalue(s)",
        spectrum.sweeps()
    );

    let (k_selection, k) = match (config.k, n) {
        (Some(k), _) => (None, k),
        (None, 0 | 1) => (None, 1),
        (None, _) => {
            let sel = select_k(&spectrum, config.max_k, config.zero_tol)?;
            (Some(sel), sel.k)
        }
    };
    if k > n {
        return Err(Error::Config(format!("k = {k} exceeds the {n} resources")));
    }

    let (embedding, labels) = if k == 1 {
        (None, vec![0; n])
    } else {
        let d = config.d.unwrap_or(k - 1);
        let mut e = component_aware_embed(&spectrum, d, config.zero_tol)?;
        if config.normalize_rows {
            e.normalize_rows();
        }
        log::info!("clustering: k = {k}, {} embedding columns", e.d());
        let labels = cluster(&e, k, config.seed)?;
        (Some(e), labels)
    };
    let assignment = make_assignment(&labels)?;
    let ordered = reorder_matrix(&transformed, &assignment)?;
    let contrast = if assignment.k() >= 2 {
        block_contrast(&transformed, &assignment).ok()
    } else {
        None
    };
    let tagclouds = community_tagclouds(corpus, &assignment, &order, config.top_n, config.fonts)?;

    Ok(Analysis {
        raw,
        transformed,
        histogram,
        spectrum,
        zero_eigenvalues,
        k_selection,
        k,
        embedding,
        assignment,
        ordered,
        contrast,
        tagclouds,
    })
}

/// Where inputs come from and where artifacts go.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    /// `None` infers the format from each file extension (`.tsv` → TSV,
    /// anything else → JSONL).
    pub format: Option<Format>,
    pub out_dir: PathBuf,
    pub analysis: AnalysisConfig,
}

impl RunConfig {
    pub fn new(inputs: Vec<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            inputs,
            format: None,
            out_dir: out_dir.into(),
            analysis: AnalysisConfig::default(),
        }
    }
}

fn format_for(path: &Path, explicit: Option<Format>) -> Format {
    explicit.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("tsv") => Format::Tsv,
        _ => Format::Jsonl,
    })
}

/// Reads and merges posts from every input file.
pub fn load_posts(inputs: &[PathBuf], format: Option<Format>) -> Result<Vec<Post>> {
    if inputs.is_empty() {
        return Err(Error::Config("no input files given".into()));
    }
    let mut all = Vec::new();
    for path in inputs {
        let file = File::open(path)?;
        let parsed = parse_posts(BufReader::new(file), format_for(path, format))?;
        if parsed.rejected > 0 {
            log::warn!(
                "{}: {} record(s) without tags rejected",
                path.display(),
                parsed.rejected
            );
        }
        log::info!("ingest: {} posts from {}", parsed.posts.len(), path.display());
        all.extend(parsed.posts);
    }
    Ok(all)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Summary written as JSON next to the other artifacts.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunSummary {
    pub resources: usize,
    pub tags: usize,
    pub gamma: f64,
    pub zero_eigenvalues: usize,
    pub k: usize,
    pub k_auto: bool,
    pub k_degenerate: bool,
    pub embedding_columns: Vec<usize>,
    pub community_sizes: Vec<usize>,
    pub within_mean: Option<f64>,
    pub between_mean: Option<f64>,
    /// Pairs with strength exactly zero; the histogram CSV holds only bins.
    #[serde(default)]
    pub zero_strength_pairs: Option<u64>,
}

impl RunSummary {
    fn of(corpus: &Corpus, a: &Analysis, config: &AnalysisConfig) -> Self {
        RunSummary {
            resources: corpus.len(),
            tags: corpus.global_freqs().len(),
            gamma: config.gamma,
            zero_eigenvalues: a.zero_eigenvalues,
            k: a.k,
            k_auto: a.k_selection.is_some(),
            k_degenerate: a.k_selection.is_some_and(|s| s.degenerate),
            embedding_columns: a
                .embedding
                .as_ref()
                .map(|e| e.columns().iter().map(|j| j + 1).collect())
                .unwrap_or_default(),
            community_sizes: a.assignment.sizes(),
            within_mean: a.contrast.map(|c| c.0),
            between_mean: a.contrast.map(|c| c.1),
            zero_strength_pairs: a.histogram.as_ref().map(|h| h.zero_count),
        }
    }

    fn lines(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("resources".into(), self.resources.to_string()),
            ("distinct tags".into(), self.tags.to_string()),
            ("gamma".into(), self.gamma.to_string()),
            ("zero eigenvalues".into(), self.zero_eigenvalues.to_string()),
            (
                "communities".into(),
                format!(
                    "{}{}",
                    self.k,
                    match (self.k_auto, self.k_degenerate) {
                        (true, true) => " (eigengap, degenerate)",
                        (true, false) => " (eigengap)",
                        _ => " (fixed)",
                    }
                ),
            ),
        ];
        if let (Some(w), Some(b)) = (self.within_mean, self.between_mean) {
            out.push(("mean strength within / between".into(), format!("{w:.4} / {b:.4}")));
        }
        out
    }
}

/// Writes every artifact of an analysis into `out_dir`.
pub fn write_artifacts(corpus: &Corpus, a: &Analysis, config: &AnalysisConfig, out_dir: &Path) -> Result<RunSummary> {
    fs::create_dir_all(out_dir)?;
    let resources = a.resources();
    a.raw.write_csv(create(out_dir, files::SIMILARITY_RAW_CSV)?)?;
    a.transformed.write_csv(create(out_dir, files::SIMILARITY_CSV)?)?;
    a.transformed.write_binary(create(out_dir, files::SIMILARITY_BIN)?)?;
    a.ordered.write_csv(create(out_dir, files::SIMILARITY_ORDERED_CSV)?)?;
    if let Some(h) = &a.histogram {
        h.write_csv(create(out_dir, files::HISTOGRAM_CSV)?)?;
    }
    a.spectrum.write_spectrum_csv(create(out_dir, files::SPECTRUM_CSV)?)?;
    a.spectrum
        .write_eigenvectors_csv(create(out_dir, files::EIGENVECTORS_CSV)?)?;
    if let Some(e) = &a.embedding {
        e.write_csv(resources, create(out_dir, files::EMBEDDING_CSV)?)?;
    }
    a.assignment
        .write_csv(resources, create(out_dir, files::ASSIGNMENT_CSV)?)?;
    write_tagclouds_csv(&a.tagclouds, create(out_dir, files::TAGCLOUDS_CSV)?)?;
    render_heatmap(&a.transformed, &out_dir.join(files::HEATMAP_UNORDERED))?;
    render_heatmap(&a.ordered, &out_dir.join(files::HEATMAP_ORDERED))?;

    let summary = RunSummary::of(corpus, a, config);
    serde_json::to_writer_pretty(create(out_dir, files::SUMMARY_JSON)?, &summary)?;

    let content = ReportContent {
        title: "Resource communities".into(),
        summary: summary.lines(),
        tagclouds: a.tagclouds.clone(),
        eigenvalues: a.spectrum.eigenvalues().to_vec(),
        histogram: a.histogram.clone(),
        heatmaps: vec![
            (
                "Strength matrix, input order".into(),
                GrayImage::from_matrix(&a.transformed),
            ),
            (
                "Strength matrix, grouped by community".into(),
                GrayImage::from_matrix(&a.ordered),
            ),
        ],
    };
    render_report(&content, &out_dir.join(files::REPORT_HTML))?;
    Ok(summary)
}

/// Full pipeline from post files to artifacts.
pub fn run(config: &RunConfig) -> Result<(Analysis, RunSummary)> {
    config.analysis.validate()?;
    let posts = load_posts(&config.inputs, config.format)?;
    let corpus = build_corpus(&posts)?;
    let analysis = analyze(&corpus, &config.analysis)?;
    let summary = write_artifacts(&corpus, &analysis, &config.analysis, &config.out_dir)?;
    log::info!("report: artifacts written to {}", config.out_dir.display());
    Ok((analysis, summary))
}

/// Similarity stage only: raw and transformed matrices plus the histogram.
pub fn similarity_only(
    inputs: &[PathBuf],
    format: Option<Format>,
    gamma: f64,
    bins_per_decade: usize,
    out_dir: &Path,
) -> Result<SimilarityMatrix> {
    let corpus = build_corpus(&load_posts(inputs, format)?)?;
    let raw = build_matrix(&corpus, &corpus.resources())?;
    let transformed = power_transform(&raw, gamma)?;
    fs::create_dir_all(out_dir)?;
    raw.write_csv(create(out_dir, files::SIMILARITY_RAW_CSV)?)?;
    transformed.write_csv(create(out_dir, files::SIMILARITY_CSV)?)?;
    transformed.write_binary(create(out_dir, files::SIMILARITY_BIN)?)?;
    if raw.n() >= 2 {
        strength_histogram(&raw, bins_per_decade)?.write_csv(create(out_dir, files::HISTOGRAM_CSV)?)?;
    }
    Ok(transformed)
}

/// Reads a strength matrix saved as CSV or in the binary format (chosen by
/// the magic bytes).
pub fn load_matrix(path: &Path, kind: MatrixKind) -> Result<SimilarityMatrix> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"FSM1") {
        SimilarityMatrix::read_binary(bytes.as_slice(), kind)
    } else {
        SimilarityMatrix::read_csv(bytes.as_slice(), kind)
    }
}

/// Spectrum stage only: eigenvalues and eigenvectors of `Q` for a saved matrix.
pub fn spectrum_only(matrix: &Path, out_dir: &Path) -> Result<SpectralResult> {
    // The file does not record the matrix kind; Q only needs the values.
    let m = load_matrix(matrix, MatrixKind::Raw)?;
    let r = eigendecompose(&build_q(&m))?;
    fs::create_dir_all(out_dir)?;
    r.write_spectrum_csv(create(out_dir, files::SPECTRUM_CSV)?)?;
    r.write_eigenvectors_csv(create(out_dir, files::EIGENVECTORS_CSV)?)?;
    Ok(r)
}

/// Re-renders `report.html` from artifacts previously written to `dir`.
pub fn rerender_report(dir: &Path) -> Result<PathBuf> {
    let open = |name: &str| -> Result<BufReader<File>> { Ok(BufReader::new(File::open(dir.join(name))?)) };
    let tagclouds = read_tagclouds_csv(open(files::TAGCLOUDS_CSV)?)?;
    let eigenvalues = read_spectrum_csv(open(files::SPECTRUM_CSV)?)?;
    let histogram = match open(files::HISTOGRAM_CSV) {
        Ok(r) => Some(StrengthHistogram::read_csv(r)?),
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e),
    };
    let summary: Option<RunSummary> = match fs::read(dir.join(files::SUMMARY_JSON)) {
        Ok(bytes) => Some(serde_json::from_slice(&bytes)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    let mut heatmaps = Vec::new();
    for (name, title) in [
        (files::HEATMAP_UNORDERED, "Strength matrix, input order"),
        (files::HEATMAP_ORDERED, "Strength matrix, grouped by community"),
    ] {
        match fs::read(dir.join(name)) {
            Ok(bytes) => heatmaps.push((title.to_string(), GrayImage::from_pgm(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
    }
    let histogram = histogram.map(|mut h| {
        h.zero_count = summary.as_ref().and_then(|s| s.zero_strength_pairs).unwrap_or(0);
        h
    });
    let content = ReportContent {
        title: "Resource communities".into(),
        summary: summary.map(|s| s.lines()).unwrap_or_default(),
        tagclouds,
        eigenvalues,
        histogram,
        heatmaps,
    };
    let path = dir.join(files::REPORT_HTML);
    render_report(&content, &path)?;
    Ok(path)
}
