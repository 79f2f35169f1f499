//! Pairwise similarity of tag-clouds, the power transform and the
//! log-binned distribution of strengths.

use tagspectra::ingest::{Corpus, TagCloud};
use tagspectra::similarity::{build_matrix, pair_similarity, power_transform, strength_histogram, DEFAULT_GAMMA};

pub fn run_example() -> tagspectra::Result<Vec<f64>> {
    let corpus = Corpus::from_clouds([
        TagCloud::from_counts("jazz-album", [("jazz", 8), ("music", 5), ("saxophone", 2)]),
        TagCloud::from_counts("blues-album", [("blues", 6), ("music", 4), ("jazz", 1)]),
        TagCloud::from_counts("rust-book", [("rust", 9), ("programming", 6)]),
        TagCloud::from_counts("c-book", [("c", 7), ("programming", 5), ("systems", 2)]),
    ])?;

    let jazz = corpus.cloud("jazz-album").expect("present");
    let blues = corpus.cloud("blues-album").expect("present");
    let w = pair_similarity(jazz, blues, corpus.global_freqs())?;
    println!("w(jazz-album, blues-album) = {w:.6}");

    let raw = build_matrix(&corpus, &corpus.resources())?;
    let transformed = power_transform(&raw, DEFAULT_GAMMA)?;
    println!("resources: {:?}", raw.resources());
    for i in 0..raw.n() {
        let row: Vec<String> = (0..raw.n()).map(|j| format!("{:.3}", transformed.get(i, j))).collect();
        println!("  {}", row.join("  "));
    }

    let hist = strength_histogram(&raw, 5)?;
    println!("{} zero pairs", hist.zero_count);
    for bin in &hist.bins {
        println!(
            "  [{:.4}, {:.4}) count {} density {:.3}",
            bin.lower, bin.upper, bin.count, bin.density
        );
    }
    Ok(raw.off_diagonal().collect())
}

#[allow(dead_code)]
fn main() -> tagspectra::Result<()> {
    run_example().map(|_| ())
}
