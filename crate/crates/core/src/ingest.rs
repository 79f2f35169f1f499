//! Tagging posts, per-resource tag-clouds and the corpus they form.
//!
//! A post is one user's annotation of one resource with a set of tags. Tags
//! are trimmed and lowercased on construction. Posts by the same user on the
//! same resource are merged by tag-set union, so every user contributes at
//! most once to a `(resource, tag)` count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk encoding of posts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Tsv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "tsv" => Ok(Format::Tsv),
            other => Err(Error::Config(format!("unknown input format {other:?}"))),
        }
    }
}

/// Normalizes a raw tag: surrounding whitespace trimmed, lowercased.
pub fn normalize_tag(raw: &str) -> String {
    raw.trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    user: String,
    resource: String,
    tags: BTreeSet<String>,
    timestamp: Option<String>,
}

impl Post {
    /// Builds a post from raw tags. Returns `None` when no non-empty tag
    /// survives normalization.
    pub fn new<I, S>(
        user: impl Into<String>,
        resource: impl Into<String>,
        tags: I,
        timestamp: Option<String>,
    ) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let tags: BTreeSet<String> = tags
            .into_iter()
            .map(|t| normalize_tag(t.as_ref()))
            .filter(|t| !t.is_empty())
            .collect();
        if tags.is_empty() {
            return None;
        }
        Some(Post {
            user: user.into(),
            resource: resource.into(),
            tags,
            timestamp,
        })
    }

    pub fn user(&self) -> &str {
        &self.user
    }

    pub fn resource(&self) -> &str {
        &self.resource
    }

    pub fn tags(&self) -> &BTreeSet<String> {
        &self.tags
    }

    /// Informational only; never used by the analysis.
    pub fn timestamp(&self) -> Option<&str> {
        self.timestamp.as_deref()
    }
}

/// Result of parsing a post stream.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedPosts {
    pub posts: Vec<Post>,
    /// Records dropped because they carried no usable tag.
    pub rejected: usize,
}

#[derive(Deserialize, Serialize)]
struct JsonRecord {
    user: String,
    resource: String,
    tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ts: Option<String>,
}

/// Parses posts, merging repeated `(user, resource)` records by tag union.
///
/// Output order follows the first occurrence of each `(user, resource)` pair.
pub fn parse_posts<R: BufRead>(input: R, format: Format) -> Result<ParsedPosts> {
    let mut merged: Vec<Post> = Vec::new();
    let mut index: HashMap<(String, String), usize> = HashMap::new();
    let mut rejected = 0;

    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = match format {
            Format::Jsonl => parse_json_line(&line, lineno)?,
            Format::Tsv => {
                if lineno == 1 && line.split('\t').next().map(str::trim) == Some("user") {
                    continue;
                }
                parse_tsv_line(&line, lineno)?
            }
        };
        if record.user.is_empty() || record.resource.is_empty() {
            return Err(Error::parse(lineno, "empty user or resource id"));
        }
        let Some(post) = Post::new(record.user, record.resource, &record.tags, record.ts) else {
            log::warn!("line {lineno}: record without tags rejected");
            rejected += 1;
            continue;
        };
        let key = (post.user.clone(), post.resource.clone());
        match index.get(&key) {
            Some(&at) => {
                let existing = &mut merged[at];
                existing.tags.extend(post.tags);
                if existing.timestamp.is_none() {
                    existing.timestamp = post.timestamp;
                }
            }
            None => {
                index.insert(key, merged.len());
                merged.push(post);
            }
        }
    }

    Ok(ParsedPosts {
        posts: merged,
        rejected,
    })
}

fn parse_json_line(line: &str, lineno: usize) -> Result<JsonRecord> {
    serde_json::from_str(line).map_err(|e| Error::parse(lineno, e.to_string()))
}

fn parse_tsv_line(line: &str, lineno: usize) -> Result<JsonRecord> {
    let cols: Vec<&str> = line.split('\t').collect();
    if !(3..=4).contains(&cols.len()) {
        return Err(Error::parse(
            lineno,
            format!("expected 3 or 4 tab-separated columns, found {}", cols.len()),
        ));
    }
    let tags = if cols[2].trim().is_empty() {
        Vec::new()
    } else {
        cols[2].split(',').map(str::to_owned).collect()
    };
    let ts = cols
        .get(3)
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(str::to_owned);
    Ok(JsonRecord {
        user: cols[0].trim().to_owned(),
        resource: cols[1].trim().to_owned(),
        tags,
        ts,
    })
}

/// Writes posts in the given format; `parse_posts` reads them back unchanged.
pub fn write_posts<W: Write>(mut out: W, posts: &[Post], format: Format) -> Result<()> {
    match format {
        Format::Jsonl => {
            for p in posts {
                let rec = JsonRecord {
                    user: p.user.clone(),
                    resource: p.resource.clone(),
                    tags: p.tags.iter().cloned().collect(),
                    ts: p.timestamp.clone(),
                };
                serde_json::to_writer(&mut out, &rec)?;
                out.write_all(b"\n")?;
            }
        }
        Format::Tsv => {
            writeln!(out, "user\tresource\ttags\tts")?;
            for p in posts {
                let bad = |s: &str| s.contains(['\t', '\n', '\r']);
                if bad(&p.user)
                    || bad(&p.resource)
                    || p.tags.iter().any(|t| bad(t) || t.contains(','))
                    || p.timestamp.as_deref().is_some_and(bad)
                {
                    return Err(Error::Config(format!(
                        "post ({}, {}) cannot be encoded as TSV",
                        p.user, p.resource
                    )));
                }
                let tags = p.tags.iter().map(String::as_str).collect::<Vec<_>>().join(",");
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    p.user,
                    p.resource,
                    tags,
                    p.timestamp.as_deref().unwrap_or("")
                )?;
            }
        }
    }
    Ok(())
}

/// Tag-cloud of one resource: tag → number of distinct users who assigned it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagCloud {
    resource: String,
    freqs: BTreeMap<String, u64>,
}

impl TagCloud {
    /// Builds a cloud from `(tag, count)` pairs. Zero counts are dropped and
    /// repeated tags add up.
    pub fn from_counts<I, S>(resource: impl Into<String>, counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut freqs = BTreeMap::new();
        for (tag, c) in counts {
            if c > 0 {
                *freqs.entry(tag.into()).or_insert(0) += c;
            }
        }
        TagCloud {
            resource: resource.into(),
            freqs,
        }
    }

    pub fn resource(&self) -> &str {
        &self.resource
    }

    pub fn freqs(&self) -> &BTreeMap<String, u64> {
        &self.freqs
    }

    pub fn get(&self, tag: &str) -> u64 {
        self.freqs.get(tag).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.freqs.values().sum()
    }
}

/// All tag-clouds of an analysis set and the global tag frequencies over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    clouds: BTreeMap<String, TagCloud>,
    global_freqs: BTreeMap<String, u64>,
}

impl Corpus {
    /// Assembles a corpus from clouds; global frequencies are recomputed.
    pub fn from_clouds<I: IntoIterator<Item = TagCloud>>(clouds: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for cloud in clouds {
            if cloud.is_empty() {
                return Err(Error::EmptyInput(format!(
                    "resource {:?} has an empty tag-cloud",
                    cloud.resource
                )));
            }
            if map.contains_key(&cloud.resource) {
                return Err(Error::Inconsistent(format!(
                    "resource {:?} appears twice",
                    cloud.resource
                )));
            }
            map.insert(cloud.resource.clone(), cloud);
        }
        if map.is_empty() {
            return Err(Error::EmptyInput("no resources".into()));
        }
        let mut global_freqs = BTreeMap::new();
        for cloud in map.values() {
            for (tag, &c) in &cloud.freqs {
                *global_freqs.entry(tag.clone()).or_insert(0) += c;
            }
        }
        Ok(Corpus {
            clouds: map,
            global_freqs,
        })
    }

    pub fn clouds(&self) -> &BTreeMap<String, TagCloud> {
        &self.clouds
    }

    pub fn cloud(&self, resource: &str) -> Option<&TagCloud> {
        self.clouds.get(resource)
    }

    pub fn global_freqs(&self) -> &BTreeMap<String, u64> {
        &self.global_freqs
    }

    /// Resource ids in sorted order.
    pub fn resources(&self) -> Vec<String> {
        self.clouds.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.clouds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clouds.is_empty()
    }
}

/// Aggregates posts into tag-clouds: `f[r][t]` counts the distinct users
/// who tagged resource `r` with `t`.
pub fn build_corpus(posts: &[Post]) -> Result<Corpus> {
    if posts.is_empty() {
        return Err(Error::EmptyInput("no posts to build a corpus from".into()));
    }
    let mut users: BTreeMap<&str, BTreeMap<&str, BTreeSet<&str>>> = BTreeMap::new();
    for p in posts {
        let per_tag = users.entry(&p.resource).or_default();
        for t in &p.tags {
            per_tag.entry(t).or_default().insert(&p.user);
        }
    }
    Corpus::from_clouds(users.into_iter().map(|(r, per_tag)| {
        TagCloud::from_counts(r, per_tag.into_iter().map(|(t, us)| (t.to_owned(), us.len() as u64)))
    }))
}
