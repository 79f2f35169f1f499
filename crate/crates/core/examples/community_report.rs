//! End to end on files: synthesize posts, run the pipeline into an output
//! directory, then re-render the HTML report from the saved artifacts.
//!
//! Pass a directory to keep the output; otherwise a temporary one is used.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use tagspectra::ingest::{write_posts, Format};
use tagspectra::pipeline::{rerender_report, run, RunConfig, RunSummary};
use tagspectra::synth::{generate, PlantedSpec};

pub fn report_into(dir: &Path) -> tagspectra::Result<RunSummary> {
    let spec = PlantedSpec::disjoint(3, 40, 30, 15, 60, 0.15, 300, 11);
    let (posts, _) = generate(&spec)?;
    fs::create_dir_all(dir)?;
    let input = dir.join("posts.tsv");
    write_posts(BufWriter::new(File::create(&input)?), &posts, Format::Tsv)?;

    let out_dir = dir.join("out");
    let (_, summary) = run(&RunConfig::new(vec![input], &out_dir))?;
    println!(
        "{} resources, k = {}, sizes {:?}",
        summary.resources, summary.k, summary.community_sizes
    );

    let report = rerender_report(&out_dir)?;
    println!("report: {}", report.display());
    let mut names: Vec<String> = fs::read_dir(&out_dir)?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()?;
    names.sort();
    println!("artifacts: {}", names.join(", "));
    Ok(summary)
}

pub fn run_example() -> tagspectra::Result<RunSummary> {
    let dir = std::env::temp_dir().join(format!("tagspectra-report-{}", std::process::id()));
    let summary = report_into(&dir);
    let _ = fs::remove_dir_all(&dir);
    summary
}

#[allow(dead_code)]
fn main() -> tagspectra::Result<()> {
    match std::env::args().nth(1) {
        Some(dir) => report_into(&PathBuf::from(dir)).map(|_| ()),
        None => run_example().map(|_| ()),
    }
}
