//! Two super-communities, each split into two sub-communities whose
//! vocabularies overlap by half. With k = 4 the sub-communities come out,
//! and merging them by best overlap gives back the two super-communities.

use std::collections::BTreeMap;

use tagspectra::ingest::build_corpus;
use tagspectra::pipeline::{analyze, AnalysisConfig};
use tagspectra::synth::{ari, generate, PlantedSpec};

pub struct NestedOutcome {
    pub sub_ari: f64,
    pub merged_ari: f64,
}

pub fn nested_spec(seed: u64) -> PlantedSpec {
    PlantedSpec::nested(2, 2, 100, 50, 25, 30, 100, 0.2, 1000, seed)
}

/// Maps each recovered community to the planted group it overlaps most.
pub fn merge_by_best_match(found: &[usize], groups: &[usize]) -> Vec<usize> {
    let mut overlap: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&f, &g) in found.iter().zip(groups) {
        *overlap.entry((f, g)).or_insert(0) += 1;
    }
    let mut best: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (&(f, g), &count) in &overlap {
        let entry = best.entry(f).or_insert((g, count));
        if count > entry.1 {
            *entry = (g, count);
        }
    }
    found.iter().map(|f| best[f].0).collect()
}

pub fn run_seed(seed: u64) -> tagspectra::Result<NestedOutcome> {
    let (posts, truth) = generate(&nested_spec(seed))?;
    let corpus = build_corpus(&posts)?;
    let config = AnalysisConfig {
        k: Some(4),
        ..AnalysisConfig::default()
    };
    let analysis = analyze(&corpus, &config)?;
    let subs = truth.labels_for(analysis.resources())?;
    let groups = truth.groups_for(analysis.resources())?;
    let merged = merge_by_best_match(analysis.labels(), &groups);
    Ok(NestedOutcome {
        sub_ari: ari(&subs, analysis.labels())?,
        merged_ari: ari(&groups, &merged)?,
    })
}

pub fn run_example() -> tagspectra::Result<NestedOutcome> {
    let out = run_seed(7)?;
    println!("ARI against sub-communities: {:.4}", out.sub_ari);
    println!(
        "ARI of merged communities against super-communities: {:.4}",
        out.merged_ari
    );
    Ok(out)
}

#[allow(dead_code)]
fn main() -> tagspectra::Result<()> {
    if let Some(seeds) = std::env::args().nth(1) {
        for seed in 0..seeds.parse::<u64>().expect("seed count") {
            let out = run_seed(seed)?;
            println!("seed {seed}: sub {:.4} merged {:.4}", out.sub_ari, out.merged_ari);
        }
        return Ok(());
    }
    run_example().map(|_| ())
}
