use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tagspectra::ingest::{write_posts, Format};
use tagspectra::pipeline::{self, AnalysisConfig, RunConfig, DEFAULT_BINS_PER_DECADE, DEFAULT_MAX_K};
use tagspectra::synth::{generate, PlantedSpec, DEFAULT_TAGS_PER_POST};
use tagspectra::{Error, Result};

#[derive(Parser)]
#[command(
    name = "tagspectra",
    version,
    about = "Resource communities from collaborative tagging data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted-partition folksonomy (posts.jsonl + ground_truth.csv).
    Synth(SynthArgs),
    /// Full pipeline: posts to communities, matrices, spectrum and report.
    Run(RunArgs),
    /// Similarity matrices and strength histogram only.
    Similarity(SimilarityArgs),
    /// Eigenvalues and eigenvectors of Q for a saved strength matrix.
    Spectrum(SpectrumArgs),
    /// Re-render report.html from artifacts in an output directory.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Tsv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => Format::Jsonl,
            FormatArg::Tsv => Format::Tsv,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Post files (repeatable).
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    gamma: f64,
    /// Number of communities; chosen from the eigengap when omitted.
    #[arg(long)]
    k: Option<usize>,
    /// Embedding dimension; k - 1 when omitted.
    #[arg(long)]
    d: Option<usize>,
    /// Largest k considered by the eigengap rule.
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    max_k: usize,
    #[arg(long, default_value_t = 1e-8)]
    zero_tol: f64,
    #[arg(long, default_value_t = 30)]
    top_n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BINS_PER_DECADE)]
    bins_per_decade: usize,
    #[arg(long)]
    normalize_rows: bool,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimilarityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_BINS_PER_DECADE)]
    bins_per_decade: usize,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Strength matrix as CSV or FSM1 binary.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON planted spec; overrides the shape flags below.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    communities: usize,
    #[arg(long, default_value_t = 200)]
    resources: usize,
    #[arg(long, default_value_t = 50)]
    vocab_size: usize,
    #[arg(long, default_value_t = 30)]
    shared_size: usize,
    #[arg(long, default_value_t = 10)]
    taggings: usize,
    #[arg(long, default_value_t = DEFAULT_TAGS_PER_POST)]
    tags_per_post: usize,
    #[arg(long, default_value_t = 0.2)]
    noise: f64,
    #[arg(long, default_value_t = 1000)]
    users: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "synth")]
    out_dir: PathBuf,
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = match &args.spec {
        Some(path) => serde_json::from_slice(&fs::read(path)?)?,
        None => PlantedSpec {
            tags_per_post: args.tags_per_post,
            ..PlantedSpec::disjoint(
                args.communities,
                args.resources,
                args.vocab_size,
                args.shared_size,
                args.taggings,
                args.noise,
                args.users,
                args.seed,
            )
        },
    };
    let (posts, truth) = generate(&spec)?;
    fs::create_dir_all(&args.out_dir)?;
    write_posts(
        BufWriter::new(File::create(args.out_dir.join("posts.jsonl"))?),
        &posts,
        Format::Jsonl,
    )?;
    truth.write_csv(BufWriter::new(File::create(args.out_dir.join("ground_truth.csv"))?))?;
    log::info!("synth: {} posts for {} resources", posts.len(), truth.len());
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let config = RunConfig {
        inputs: args.input.inputs,
        format: args.input.format.map(Into::into),
        out_dir: args.out_dir,
        analysis: AnalysisConfig {
            gamma: args.gamma,
            k: args.k,
            d: args.d,
            max_k: args.max_k,
            zero_tol: args.zero_tol,
            top_n: args.top_n,
            seed: args.seed,
            normalize_rows: args.normalize_rows,
            bins_per_decade: args.bins_per_decade,
            ..AnalysisConfig::default()
        },
    };
    let (_, summary) = pipeline::run(&config)?;
    println!(
        "{} resources, {} communities {:?}",
        summary.resources, summary.k, summary.community_sizes
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Run(a) => run(a),
        Command::Similarity(a) => {
            if !(a.gamma > 0.0 && a.gamma <= 1.0) {
                return Err(Error::Config(format!("gamma must lie in (0, 1], got {}", a.gamma)));
            }
            pipeline::similarity_only(
                &a.input.inputs,
                a.input.format.map(Into::into),
                a.gamma,
                a.bins_per_decade,
                &a.out_dir,
            )
            .map(|_| ())
        }
        Command::Spectrum(a) => pipeline::spectrum_only(&a.matrix, &a.out_dir).map(|_| ()),
        Command::Report(a) => pipeline::rerender_report(&a.out_dir).map(|_| ()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
