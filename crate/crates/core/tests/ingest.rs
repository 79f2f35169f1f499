mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use proptest::prelude::*;
use tagspectra::ingest::{build_corpus, parse_posts, write_posts, Format, Post};
use tagspectra::rng::SeededRng;

fn ident() -> impl Strategy<Value = String> {
    "[a-z0-9][a-z0-9_.-]{0,6}"
}

fn tag() -> impl Strategy<Value = String> {
    prop_oneof!["[a-z0-9]", "[a-z0-9][a-z0-9 _.:-]{0,8}[a-z0-9]"]
}

/// Posts with distinct (user, resource) pairs, so parsing has nothing to merge.
fn posts() -> impl Strategy<Value = Vec<Post>> {
    prop::collection::btree_map(
        (ident(), ident()),
        (
            prop::collection::btree_set(tag(), 1..5),
            prop::option::of("20[0-9]{2}-[01][0-9]-[0-3][0-9]"),
        ),
        1..30,
    )
    .prop_map(|m| {
        m.into_iter()
            .map(|((u, r), (tags, ts))| Post::new(u, r, tags, ts).unwrap())
            .collect()
    })
}

/// Small random post list over a handful of users, resources and tags, with
/// repeats allowed.
fn random_posts(seed: u64, count: usize) -> Vec<Post> {
    let mut rng = SeededRng::new(seed);
    (0..count)
        .map(|_| {
            let tags: Vec<String> = (0..1 + rng.below(4)).map(|_| format!("t{}", rng.below(12))).collect();
            Post::new(format!("u{}", rng.below(15)), format!("r{}", rng.below(8)), tags, None).unwrap()
        })
        .collect()
}

#[test]
fn corpus_matches_independent_recount() {
    for seed in 0..50 {
        let posts = random_posts(seed, 100);
        let corpus = build_corpus(&posts).unwrap();

        let mut seen: HashMap<(String, String), BTreeSet<String>> = HashMap::new();
        for p in &posts {
            for t in p.tags() {
                seen.entry((p.resource().to_owned(), t.clone()))
                    .or_default()
                    .insert(p.user().to_owned());
            }
        }
        let mut expected_global: BTreeMap<String, u64> = BTreeMap::new();
        for ((r, t), users) in &seen {
            assert_eq!(corpus.cloud(r).unwrap().get(t), users.len() as u64);
            *expected_global.entry(t.clone()).or_insert(0) += users.len() as u64;
        }
        let cells: usize = corpus.clouds().values().map(|c| c.len()).sum();
        assert_eq!(cells, seen.len());
        assert_eq!(corpus.global_freqs(), &expected_global);

        let global_total: u64 = corpus.global_freqs().values().sum();
        let cloud_total: u64 = corpus.clouds().values().map(|c| c.total()).sum();
        assert_eq!(global_total, cloud_total);
    }
}

#[test]
fn corpus_ignores_post_order() {
    for seed in 0..20 {
        let mut posts = random_posts(seed, 80);
        let before = build_corpus(&posts).unwrap();
        SeededRng::new(seed + 1000).shuffle(&mut posts);
        assert_eq!(build_corpus(&posts).unwrap(), before);
    }
}

#[test]
fn duplicate_records_do_not_inflate_counts() {
    let input = "u1\tr1\ta,b\n\
                 u1\tr1\tA\n\
                 u2\tr1\ta\n";
    let parsed = parse_posts(input.as_bytes(), Format::Tsv).unwrap();
    let corpus = build_corpus(&parsed.posts).unwrap();
    let cloud = corpus.cloud("r1").unwrap();
    assert_eq!(cloud.get("a"), 2);
    assert_eq!(cloud.get("b"), 1);
}

proptest! {
    #[test]
    fn jsonl_round_trip(posts in posts()) {
        let mut buf = Vec::new();
        write_posts(&mut buf, &posts, Format::Jsonl).unwrap();
        let back = parse_posts(buf.as_slice(), Format::Jsonl).unwrap();
        prop_assert_eq!(back.rejected, 0);
        prop_assert_eq!(back.posts, posts);
    }

    #[test]
    fn tsv_round_trip(posts in posts()) {
        let mut buf = Vec::new();
        write_posts(&mut buf, &posts, Format::Tsv).unwrap();
        let back = parse_posts(buf.as_slice(), Format::Tsv).unwrap();
        prop_assert_eq!(back.rejected, 0);
        prop_assert_eq!(back.posts, posts);
    }

    #[test]
    fn tag_normalization_is_idempotent(raw in "[ \tA-Za-z0-9]{0,12}") {
        let once = tagspectra::ingest::normalize_tag(&raw);
        prop_assert_eq!(tagspectra::ingest::normalize_tag(&once), once.clone());
        prop_assert_eq!(once.trim(), once.as_str());
    }
}
