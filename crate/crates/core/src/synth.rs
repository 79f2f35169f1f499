//! Synthetic folksonomies with planted community structure.
//!
//! Every resource belongs to one planted community. It receives
//! `taggings_per_resource` posts from distinct users; each post fills
//! `tags_per_post` slots, and each slot draws from the shared vocabulary
//! with probability `noise_rate`, otherwise from the community vocabulary.
//! Tags are drawn uniformly among those of the chosen pool not yet in the
//! post. All randomness comes from one [`SeededRng`] stream, consumed in this
//! order: the resource-id shuffle, then per resource (community order) and
//! per post the user draws followed by the slot draws.
//!
//! Communities may declare a `group`. Vocabularies of communities in
//! different groups must be disjoint, while communities of the same group
//! may share tags; this is how nested structure is expressed. Without an
//! explicit group each community is its own group.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Post;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCommunity {
    pub resources: usize,
    pub vocabulary: Vec<String>,
    pub taggings_per_resource: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub communities: Vec<PlantedCommunity>,
    pub shared_vocabulary: Vec<String>,
    pub noise_rate: f64,
    pub users: usize,
    #[serde(default = "default_tags_per_post")]
    pub tags_per_post: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_tags_per_post() -> usize {
    DEFAULT_TAGS_PER_POST
}

pub const DEFAULT_TAGS_PER_POST: usize = 2;

fn vocab(prefix: &str, range: std::ops::Range<usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

impl PlantedSpec {
    /// `count` communities of equal size with disjoint `vocab_size`-tag
    /// vocabularies (`c<k>-t<i>`) and a `shared-<i>` pool.
    #[allow(clippy::too_many_arguments)]
    pub fn disjoint(
        count: usize,
        resources_per_community: usize,
        vocab_size: usize,
        shared_size: usize,
        taggings_per_resource: usize,
        noise_rate: f64,
        users: usize,
        seed: u64,
    ) -> Self {
        PlantedSpec {
            communities: (0..count)
                .map(|c| PlantedCommunity {
                    resources: resources_per_community,
                    vocabulary: vocab(&format!("c{c}-t"), 0..vocab_size),
                    taggings_per_resource,
                    group: None,
                })
                .collect(),
            shared_vocabulary: vocab("shared-", 0..shared_size),
            noise_rate,
            users,
            tags_per_post: DEFAULT_TAGS_PER_POST,
            seed,
        }
    }

    /// `groups` super-communities with `subs` sub-communities each. Sub
    /// vocabularies hold `vocab_size` tags; consecutive subs of a group
    /// share `overlap` of them, and groups share none.
    #[allow(clippy::too_many_arguments)]
    pub fn nested(
        groups: usize,
        subs: usize,
        resources_per_sub: usize,
        vocab_size: usize,
        overlap: usize,
        shared_size: usize,
        taggings_per_resource: usize,
        noise_rate: f64,
        users: usize,
        seed: u64,
    ) -> Self {
        let stride = vocab_size - overlap.min(vocab_size);
        let mut communities = Vec::new();
        for g in 0..groups {
            for s in 0..subs {
                communities.push(PlantedCommunity {
                    resources: resources_per_sub,
                    vocabulary: vocab(&format!("g{g}-t"), s * stride..s * stride + vocab_size),
                    taggings_per_resource,
                    group: Some(g),
                });
            }
        }
        PlantedSpec {
            communities,
            shared_vocabulary: vocab("shared-", 0..shared_size),
            noise_rate,
            users,
            tags_per_post: DEFAULT_TAGS_PER_POST,
            seed,
        }
    }

    pub fn total_resources(&self) -> usize {
        self.communities.iter().map(|c| c.resources).sum()
    }

    fn group_of(&self, c: usize) -> usize {
        // Explicit groups live above the implicit one-per-community ids.
        match self.communities[c].group {
            Some(g) => g,
            None => usize::MAX - c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.communities.is_empty() {
            return bad("at least one community is required".into());
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return bad(format!("noise_rate must lie in [0, 1), got {}", self.noise_rate));
        }
        if self.tags_per_post == 0 {
            return bad("tags_per_post must be positive".into());
        }
        if self.noise_rate > 0.0 && self.shared_vocabulary.len() < self.tags_per_post {
            return bad("shared vocabulary smaller than tags_per_post".into());
        }
        let shared: BTreeSet<&str> = self.shared_vocabulary.iter().map(String::as_str).collect();
        if shared.len() != self.shared_vocabulary.len() {
            return bad("shared vocabulary has duplicate tags".into());
        }
        let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
        for (c, comm) in self.communities.iter().enumerate() {
            if comm.resources == 0 {
                return bad(format!("community {c} has no resources"));
            }
            if comm.taggings_per_resource == 0 || comm.taggings_per_resource > self.users {
                return bad(format!(
                    "community {c}: taggings_per_resource must lie in 1..={}",
                    self.users
                ));
            }
            let own: BTreeSet<&str> = comm.vocabulary.iter().map(String::as_str).collect();
            if own.len() != comm.vocabulary.len() {
                return bad(format!("community {c} vocabulary has duplicate tags"));
            }
            if own.len() < self.tags_per_post {
                return bad(format!("community {c} vocabulary smaller than tags_per_post"));
            }
            for t in own {
                if shared.contains(t) {
                    return bad(format!("tag {t:?} is both shared and in community {c}"));
                }
                if let Some(&other) = owner.get(t) {
                    if self.group_of(other) != self.group_of(c) {
                        return bad(format!("tag {t:?} in communities {other} and {c}"));
                    }
                } else {
                    owner.insert(t, c);
                }
            }
        }
        Ok(())
    }
}

/// Planted labels per generated resource.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    community: BTreeMap<String, usize>,
    group: BTreeMap<String, usize>,
}

impl GroundTruth {
    pub fn community(&self, resource: &str) -> Option<usize> {
        self.community.get(resource).copied()
    }

    pub fn len(&self) -> usize {
        self.community.len()
    }

    pub fn is_empty(&self) -> bool {
        self.community.is_empty()
    }

    /// Community labels in the given resource order.
    pub fn labels_for(&self, order: &[String]) -> Result<Vec<usize>> {
        lookup(&self.community, order)
    }

    /// Super-community (group) labels in the given resource order. Groups
    /// are numbered by first appearance in community order.
    pub fn groups_for(&self, order: &[String]) -> Result<Vec<usize>> {
        lookup(&self.group, order)
    }

    /// CSV `resource_id,community`, sorted by resource id.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["resource_id", "community"])?;
        for (r, c) in &self.community {
            w.write_record([r.as_str(), &c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn lookup(map: &BTreeMap<String, usize>, order: &[String]) -> Result<Vec<usize>> {
    order
        .iter()
        .map(|r| {
            map.get(r)
                .copied()
                .ok_or_else(|| Error::Inconsistent(format!("resource {r:?} has no ground truth")))
        })
        .collect()
}

fn distinct_draws(rng: &mut SeededRng, n: usize, count: usize) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = rng.below(n);
        if seen.insert(x) {
            out.push(x);
        }
    }
    out
}

/// Generates posts for a planted spec. Resource ids (`res-<i>`) are
/// assigned in shuffled order so sorted ids carry no community signal.
pub fn generate(spec: &PlantedSpec) -> Result<(Vec<Post>, GroundTruth)> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed);
    let total = spec.total_resources();
    let width = total.saturating_sub(1).to_string().len().max(4);
    let mut ids: Vec<usize> = (0..total).collect();
    rng.shuffle(&mut ids);
    let uwidth = spec.users.saturating_sub(1).to_string().len().max(4);

    let mut group_ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut posts = Vec::new();
    let mut community = BTreeMap::new();
    let mut group = BTreeMap::new();
    let mut next = 0;
    for (c, comm) in spec.communities.iter().enumerate() {
        let n_groups = group_ids.len();
        let g = *group_ids.entry(spec.group_of(c)).or_insert(n_groups);
        for _ in 0..comm.resources {
            let resource = format!("res-{:0width$}", ids[next]);
            next += 1;
            for user in distinct_draws(&mut rng, spec.users, comm.taggings_per_resource) {
                let mut tags: Vec<&str> = Vec::with_capacity(spec.tags_per_post);
                for _ in 0..spec.tags_per_post {
                    let pool = if rng.unit() < spec.noise_rate {
                        &spec.shared_vocabulary
                    } else {
                        &comm.vocabulary
                    };
                    let free: Vec<&str> = pool.iter().map(String::as_str).filter(|t| !tags.contains(t)).collect();
                    if free.is_empty() {
                        continue;
                    }
                    tags.push(free[rng.below(free.len())]);
                }
                let post = Post::new(format!("user-{user:0uwidth$}"), resource.clone(), &tags, None)
                    .ok_or_else(|| Error::Config("generated a post without tags".into()))?;
                posts.push(post);
            }
            community.insert(resource.clone(), c);
            group.insert(resource, g);
        }
    }
    Ok((posts, GroundTruth { community, group }))
}

/// Adjusted Rand Index of two labelings from the pair-counting
/// contingency table. Two single-cluster labelings score 1.
pub fn ari(labels_a: &[usize], labels_b: &[usize]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::Dimension(format!(
            "labelings of length {} and {}",
            labels_a.len(),
            labels_b.len()
        )));
    }
    if labels_a.is_empty() {
        return Err(Error::EmptyInput("empty labelings".into()));
    }
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&a, &b) in labels_a.iter().zip(labels_b) {
        *table.entry((a, b)).or_insert(0) += 1;
        *rows.entry(a).or_insert(0) += 1;
        *cols.entry(b).or_insert(0) += 1;
    }
    let pairs = |x: u64| (x * x.saturating_sub(1) / 2) as f64;
    let index: f64 = table.values().map(|&x| pairs(x)).sum();
    let sum_a: f64 = rows.values().map(|&x| pairs(x)).sum();
    let sum_b: f64 = cols.values().map(|&x| pairs(x)).sum();
    let total = pairs(labels_a.len() as u64);
    let expected = if total > 0.0 { sum_a * sum_b / total } else { 0.0 };
    let max_index = 0.5 * (sum_a + sum_b);
    if max_index == expected {
        return Ok(if index == expected { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max_index - expected))
}
