//! Every example runs and produces what it advertises.

#[path = "../examples/community_report.rs"]
mod community_report;
#[path = "../examples/ingest_posts.rs"]
mod ingest_posts;
#[path = "../examples/laplacian_spectrum.rs"]
mod laplacian_spectrum;
#[path = "../examples/nested_communities.rs"]
mod nested_communities;
#[path = "../examples/planted_partition.rs"]
mod planted_partition;
#[path = "../examples/tag_cloud_similarity.rs"]
mod tag_cloud_similarity;

#[test]
fn ingest_posts_example() {
    let corpus = ingest_posts::run_example().unwrap();
    assert_eq!(corpus.resources(), ["r1", "r2", "r3"]);
    assert_eq!(corpus.cloud("r1").unwrap().get("rust"), 2);
    assert_eq!(corpus.global_freqs()["rust"], 3);
}

#[test]
fn tag_cloud_similarity_example() {
    let strengths = tag_cloud_similarity::run_example().unwrap();
    assert_eq!(strengths.len(), 6);
    assert!(strengths.iter().all(|w| (0.0..=1.0).contains(w)));
    assert_eq!(strengths.iter().filter(|w| **w == 0.0).count(), 4);
}

#[test]
fn laplacian_spectrum_example() {
    assert_eq!(laplacian_spectrum::run_example().unwrap(), (2, 2));
}

#[test]
fn planted_partition_example() {
    assert!(planted_partition::run_example().unwrap() >= 0.9);
}

#[test]
fn nested_communities_example() {
    let out = nested_communities::run_example().unwrap();
    assert!(out.sub_ari >= 0.8);
    assert_eq!(out.merged_ari, 1.0);
}

#[test]
fn community_report_example() {
    let summary = community_report::run_example().unwrap();
    assert_eq!(summary.k, 3);
    assert_eq!(summary.community_sizes, [40, 40, 40]);
}
