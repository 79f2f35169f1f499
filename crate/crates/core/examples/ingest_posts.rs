//! Parsing posts from JSONL and TSV and folding them into tag-clouds.

use tagspectra::ingest::{build_corpus, parse_posts, Corpus, Format};

const JSONL: &str = r#"{"user": "ana", "resource": "r1", "tags": ["Rust", "systems"]}
{"user": "ben", "resource": "r1", "tags": ["rust", " Memory "], "ts": "2007-03-01"}
{"user": "ana", "resource": "r1", "tags": ["compilers"]}
{"user": "ben", "resource": "r2", "tags": ["python", "data"]}
{"user": "cai", "resource": "r2", "tags": ["  "]}
"#;

const TSV: &str = "user\tresource\ttags\tts
cai\tr2\tdata,plots\t2007-03-02
cai\tr3\trust,python\t
";

pub fn run_example() -> tagspectra::Result<Corpus> {
    let json = parse_posts(JSONL.as_bytes(), Format::Jsonl)?;
    let tsv = parse_posts(TSV.as_bytes(), Format::Tsv)?;
    println!(
        "{} JSONL posts ({} rejected), {} TSV posts",
        json.posts.len(),
        json.rejected,
        tsv.posts.len()
    );

    let posts: Vec<_> = json.posts.into_iter().chain(tsv.posts).collect();
    let corpus = build_corpus(&posts)?;
    for (resource, cloud) in corpus.clouds() {
        let tags: Vec<String> = cloud.freqs().iter().map(|(t, f)| format!("{t}:{f}")).collect();
        println!("{resource}: {}", tags.join(" "));
    }
    println!("global: {:?}", corpus.global_freqs());
    Ok(corpus)
}

#[allow(dead_code)]
fn main() -> tagspectra::Result<()> {
    run_example().map(|_| ())
}
