//! Synthetic corpora and graphs with known ground truth: Zipf-distributed
//! vocabularies, planted topic clusters, planted block and hierarchy graphs,
//! and planted duplicate/spam anomalies. These are the oracles behind the
//! acceptance tests; every generator is a pure function of its spec and seed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{DocId, RawDocument};
use crate::error::{Error, Result};
use crate::hrg::{export_newick, Child, Dendrogram};
use crate::simnet::SimilarityGraph;

/// Spec for a planted-topic corpus: each blog draws `words_per_blog` tokens,
/// a `topic_purity` fraction from its topic's vocabulary pool and the rest
/// from a shared pool, with Zipf rank weights inside every pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModelSpec {
    pub n_topics: usize,
    pub blogs_per_topic: usize,
    pub shared_vocab_size: usize,
    pub topic_vocab_size: usize,
    /// Zipf exponent `a` in `weight(rank) = 1 / rank^a`.
    pub zipf_exponent: f64,
    pub words_per_blog: usize,
    /// Fraction of a blog's tokens drawn from its topic pool, in [0, 1].
    pub topic_purity: f64,
    pub seed: u64,
}

impl TopicModelSpec {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: usize) -> Result<()> {
            if v == 0 {
                return Err(Error::InvalidSpec(format!("{name} must be at least 1")));
            }
            Ok(())
        }
        positive("n_topics", self.n_topics)?;
        positive("blogs_per_topic", self.blogs_per_topic)?;
        positive("shared_vocab_size", self.shared_vocab_size)?;
        positive("topic_vocab_size", self.topic_vocab_size)?;
        positive("words_per_blog", self.words_per_blog)?;
        if !self.zipf_exponent.is_finite() || self.zipf_exponent <= 0.0 {
            return Err(Error::InvalidSpec(
                "zipf_exponent must be positive".to_owned(),
            ));
        }
        if !(0.0..=1.0).contains(&self.topic_purity) {
            return Err(Error::InvalidSpec(
                "topic_purity must lie in [0, 1]".to_owned(),
            ));
        }
        Ok(())
    }
}

/// What a generator planted, for recovery checks. Serialized as the
/// ground-truth sidecar next to generated corpora.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Topic label per document.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub topic_of: BTreeMap<DocId, u32>,
    /// Planted duplicate groups, source document first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub planted_duplicates: Vec<Vec<DocId>>,
    /// Vertices of the planted near-duplicate clique.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub planted_splogs: Vec<DocId>,
    /// Planted blocks of a partition or hierarchy graph.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub planted_blocks: Vec<Vec<DocId>>,
    /// Planted dendrogram in Newick form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_hierarchy: Option<String>,
    /// Documents that survive the default corpus filter, per
    /// [`expected_survivors`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_survivors: Option<ExpectedSurvivors>,
}

/// Survivors of the corpus filter under a recorded policy, computed by an
/// implementation-independent direct pass (see [`expected_survivors`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedSurvivors {
    pub min_count: u64,
    pub keep_percentile: f64,
    pub min_wordset_size: usize,
    pub ids: Vec<DocId>,
}

/// Fixed cumulative rank table for Zipf sampling; no rejection, one binary
/// search per draw.
struct ZipfTable {
    cumulative: Vec<f64>,
    total: f64,
}

impl ZipfTable {
    fn new(size: usize, exponent: f64) -> Self {
        let mut cumulative = Vec::with_capacity(size);
        let mut total = 0.0;
        for rank in 1..=size {
            total += (rank as f64).powf(-exponent);
            cumulative.push(total);
        }
        ZipfTable { cumulative, total }
    }

    fn sample(&self, rng: &mut (impl Rng + ?Sized)) -> usize {
        let u: f64 = rng.gen::<f64>() * self.total;
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// Generates a planted-topic corpus. Deterministic per spec.
pub fn generate_corpus(spec: &TopicModelSpec) -> Result<(Vec<RawDocument>, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shared = ZipfTable::new(spec.shared_vocab_size, spec.zipf_exponent);
    let topical = ZipfTable::new(spec.topic_vocab_size, spec.zipf_exponent);

    let mut docs = Vec::with_capacity(spec.n_topics * spec.blogs_per_topic);
    let mut truth = GroundTruth::default();
    for topic in 0..spec.n_topics {
        for blog in 0..spec.blogs_per_topic {
            let id = DocId::new(format!("t{topic:02}-{blog:04}"))?;
            let mut tokens = Vec::with_capacity(spec.words_per_blog);
            for _ in 0..spec.words_per_blog {
                if rng.gen::<f64>() < spec.topic_purity {
                    tokens.push(format!("t{topic:02}w{:05}", topical.sample(&mut rng)));
                } else {
                    tokens.push(format!("sw{:05}", shared.sample(&mut rng)));
                }
            }
            truth.topic_of.insert(id.clone(), topic as u32);
            docs.push(RawDocument {
                id,
                text: tokens.join(" "),
            });
        }
    }
    Ok((docs, truth))
}

/// Copies randomly chosen documents into groups of the given sizes,
/// resampling a `mutation_rate` fraction of each copy's tokens from the
/// corpus-wide token pool. Returns the extended document list and the
/// planted groups.
pub fn inject_duplicates(
    docs: &[RawDocument],
    group_sizes: &[usize],
    mutation_rate: f64,
    seed: u64,
) -> Result<(Vec<RawDocument>, GroundTruth)> {
    if !(0.0..1.0).contains(&mutation_rate) {
        return Err(Error::InvalidSpec(
            "mutation_rate must lie in [0, 1)".to_owned(),
        ));
    }
    if group_sizes.iter().any(|&s| s < 2) {
        return Err(Error::InvalidSpec(
            "duplicate group sizes must be at least 2".to_owned(),
        ));
    }
    if group_sizes.len() > docs.len() {
        return Err(Error::InvalidSpec(format!(
            "cannot plant {} groups into {} documents",
            group_sizes.len(),
            docs.len()
        )));
    }
    let mut out = docs.to_vec();
    let mut truth = GroundTruth::default();
    if group_sizes.is_empty() {
        return Ok((out, truth));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<&str> = docs
        .iter()
        .flat_map(|d| d.text.split_whitespace())
        .collect();
    let mut sources: Vec<usize> = (0..docs.len()).collect();
    sources.shuffle(&mut rng);

    for (g, &size) in group_sizes.iter().enumerate() {
        let src = &docs[sources[g]];
        let mut group = vec![src.id.clone()];
        for copy in 1..size {
            let tokens: Vec<String> = src
                .text
                .split_whitespace()
                .map(|t| {
                    if mutation_rate > 0.0 && rng.gen::<f64>() < mutation_rate {
                        pool[rng.gen_range(0..pool.len())].to_owned()
                    } else {
                        t.to_owned()
                    }
                })
                .collect();
            let id = DocId::new(format!("{}-dup{copy}", src.id))?;
            group.push(id.clone());
            out.push(RawDocument {
                id,
                text: tokens.join(" "),
            });
        }
        truth.planted_duplicates.push(group);
    }
    Ok((out, truth))
}

fn block_ids(block_sizes: &[usize]) -> Vec<Vec<DocId>> {
    block_sizes
        .iter()
        .enumerate()
        .map(|(b, &size)| {
            (0..size)
                .map(|i| DocId::new(format!("b{b:02}-{i:03}")).expect("nonempty"))
                .collect()
        })
        .collect()
}

/// Standard planted-partition graph with unit edge weights: intra-block
/// pairs connect with probability `p_in`, inter-block pairs with `p_out`.
pub fn generate_planted_partition_graph(
    block_sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(SimilarityGraph, GroundTruth)> {
    if block_sizes.is_empty() || block_sizes.contains(&0) {
        return Err(Error::InvalidSpec("blocks must be nonempty".to_owned()));
    }
    if !(0.0..=1.0).contains(&p_out) || !(0.0..=1.0).contains(&p_in) || p_out > p_in || p_in == 0.0
    {
        return Err(Error::InvalidSpec(
            "probabilities must satisfy 0 <= p_out <= p_in <= 1 with p_in > 0".to_owned(),
        ));
    }
    let blocks = block_ids(block_sizes);
    let ids: Vec<DocId> = blocks.iter().flatten().cloned().collect();
    let block_of: Vec<usize> = blocks
        .iter()
        .enumerate()
        .flat_map(|(b, members)| std::iter::repeat_n(b, members.len()))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let p = if block_of[i] == block_of[j] {
                p_in
            } else {
                p_out
            };
            if p > 0.0 && rng.gen::<f64>() < p {
                edges.push((ids[i].clone(), ids[j].clone(), 1.0));
            }
        }
    }
    let graph = SimilarityGraph::from_parts(ids, edges, 1.0)?;
    let truth = GroundTruth {
        planted_blocks: blocks,
        ..GroundTruth::default()
    };
    Ok((graph, truth))
}

/// Nested block model over `2^(probs.len() - 1)` groups arranged as a
/// balanced binary hierarchy. `probs` is ordered innermost first: index 0 is
/// the within-group probability, the last index connects the two halves.
/// Probabilities must be non-increasing outward.
pub fn generate_planted_hierarchy_graph(
    group_size: usize,
    probs: &[f64],
    seed: u64,
) -> Result<(SimilarityGraph, GroundTruth)> {
    if group_size == 0 {
        return Err(Error::InvalidSpec(
            "group_size must be at least 1".to_owned(),
        ));
    }
    if probs.len() == 1 && group_size < 2 {
        return Err(Error::InvalidSpec(
            "a single-level hierarchy needs at least 2 vertices".to_owned(),
        ));
    }
    if probs.is_empty() || probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidSpec(
            "probs must be nonempty probabilities".to_owned(),
        ));
    }
    if probs.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidSpec(
            "probs must be non-increasing from the innermost level outward".to_owned(),
        ));
    }
    let levels = probs.len();
    let n_groups = 1usize << (levels - 1);
    let blocks = block_ids(&vec![group_size; n_groups]);
    let ids: Vec<DocId> = blocks.iter().flatten().cloned().collect();
    let group_of = |v: usize| v / group_size;

    // the separating level of two groups is the position of the highest
    // differing bit in their indices; same group means level 0
    let level_of = |u: usize, v: usize| -> usize {
        let (gu, gv) = (group_of(u), group_of(v));
        let x = gu ^ gv;
        usize::BITS as usize - x.leading_zeros() as usize
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let p = probs[level_of(i, j)];
            if p > 0.0 && rng.gen::<f64>() < p {
                edges.push((ids[i].clone(), ids[j].clone(), 1.0));
            }
        }
    }
    let graph = SimilarityGraph::from_parts(ids.clone(), edges, 1.0)?;

    let planted = planted_dendrogram(&ids, group_size, probs);
    let truth = GroundTruth {
        planted_blocks: blocks,
        planted_hierarchy: Some(export_newick(&planted)),
        ..GroundTruth::default()
    };
    Ok((graph, truth))
}

/// Balanced dendrogram matching the nested block design, with the design
/// probabilities as node values.
fn planted_dendrogram(ids: &[DocId], group_size: usize, probs: &[f64]) -> Dendrogram {
    fn build(
        d: &mut Dendrogram,
        range: std::ops::Range<u32>,
        group_size: u32,
        probs: &[f64],
    ) -> Child {
        let len = range.end - range.start;
        if len == 1 {
            return Child::Leaf(range.start);
        }
        let mid = range.start + len / 2;
        let left = build(d, range.start..mid, group_size, probs);
        let right = build(d, mid..range.end, group_size, probs);
        // level of this split: 0 within a group, otherwise the hierarchy
        // level separating the two halves
        let level = if len <= group_size {
            0
        } else {
            ((len / group_size) as f64).log2().round() as usize
        };
        d.push_internal_for_synth(left, right, probs[level.min(probs.len() - 1)])
    }
    let mut d = Dendrogram::new_empty(ids.to_vec());
    let n = ids.len() as u32;
    let root = build(&mut d, 0..n, group_size as u32, probs);
    d.set_root(root);
    d
}

/// Spec for a power-law background graph with an optional planted
/// near-duplicate clique.
#[derive(Debug, Clone, PartialEq)]
pub struct SplogSpec {
    /// Background vertices.
    pub n_background: usize,
    /// Background edges sampled over distinct random pairs.
    pub background_edges: usize,
    /// Density exponent `alpha` of the background similarities:
    /// `p(s) ~ s^-alpha` on `[s_min, s_max]`.
    pub exponent: f64,
    pub s_min: f64,
    pub s_max: f64,
    /// Size of the planted mutually-similar clique (0 plants nothing).
    pub clique_size: usize,
    /// Clique similarities drawn uniformly from this range.
    pub clique_similarity: (f64, f64),
    pub seed: u64,
}

impl Default for SplogSpec {
    fn default() -> Self {
        SplogSpec {
            n_background: 2000,
            background_edges: 20_000,
            exponent: 4.0,
            s_min: 0.025,
            s_max: 0.35,
            clique_size: 10,
            clique_similarity: (0.55, 0.65),
            seed: 0,
        }
    }
}

/// Truncated power-law similarities via inverse-CDF sampling.
fn sample_power_law(rng: &mut (impl Rng + ?Sized), exponent: f64, lo: f64, hi: f64) -> f64 {
    // density s^-a on [lo, hi]; CDF inverse for a != 1
    let b = 1.0 - exponent;
    let (clo, chi) = (lo.powf(b), hi.powf(b));
    let u: f64 = rng.gen();
    (clo + u * (chi - clo)).powf(1.0 / b)
}

/// Generates a background similarity graph with the given tail exponent and
/// plants a clique of near-duplicates on top. Ground truth records the
/// clique vertices.
pub fn generate_splog_clique_graph(spec: &SplogSpec) -> Result<(SimilarityGraph, GroundTruth)> {
    if spec.n_background < 2 {
        return Err(Error::InvalidSpec(
            "n_background must be at least 2".to_owned(),
        ));
    }
    if !(spec.s_min > 0.0 && spec.s_min < spec.s_max && spec.s_max <= 1.0) {
        return Err(Error::InvalidSpec(
            "similarity range must satisfy 0 < s_min < s_max <= 1".to_owned(),
        ));
    }
    let max_pairs = spec.n_background * (spec.n_background - 1) / 2;
    if spec.background_edges > max_pairs / 2 {
        return Err(Error::InvalidSpec(
            "background_edges too dense for pair rejection sampling".to_owned(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut ids: Vec<DocId> = (0..spec.n_background)
        .map(|i| DocId::new(format!("bg-{i:05}")).expect("nonempty"))
        .collect();

    let mut sampled: HashSet<(u32, u32)> = HashSet::with_capacity(spec.background_edges);
    let mut edges = Vec::with_capacity(spec.background_edges);
    while sampled.len() < spec.background_edges {
        let a = rng.gen_range(0..spec.n_background as u32);
        let b = rng.gen_range(0..spec.n_background as u32);
        if a == b {
            continue;
        }
        let pair = (a.min(b), a.max(b));
        if !sampled.insert(pair) {
            continue;
        }
        let s = sample_power_law(&mut rng, spec.exponent, spec.s_min, spec.s_max);
        edges.push((
            ids[pair.0 as usize].clone(),
            ids[pair.1 as usize].clone(),
            s.clamp(spec.s_min, 1.0),
        ));
    }

    let mut truth = GroundTruth::default();
    if spec.clique_size > 0 {
        let splogs: Vec<DocId> = (0..spec.clique_size)
            .map(|i| DocId::new(format!("splog-{i:02}")).expect("nonempty"))
            .collect();
        let (lo, hi) = spec.clique_similarity;
        for i in 0..splogs.len() {
            for j in i + 1..splogs.len() {
                let s = rng.gen_range(lo..hi);
                edges.push((splogs[i].clone(), splogs[j].clone(), s));
            }
        }
        ids.extend(splogs.iter().cloned());
        truth.planted_splogs = splogs;
    }
    let graph = SimilarityGraph::from_parts(ids, edges, spec.s_min)?;
    Ok((graph, truth))
}

/// Survivors of the corpus filter, computed by a direct single-purpose pass:
/// whitespace tokens, corpus-wide counts, the min-count and ascending
/// percentile cuts with `(count, word)` ordering, then the per-document
/// distinct-intersection size test. Kept deliberately separate from the
/// corpus module as an independent reference.
///
/// Only meaningful for generated corpora, whose tokens are whitespace-clean.
pub fn expected_survivors(
    docs: &[RawDocument],
    min_count: u64,
    keep_percentile: f64,
    min_wordset_size: usize,
) -> Vec<DocId> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for doc in docs {
        for token in doc.text.split_whitespace() {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    let mut survivors: Vec<(&str, u64)> = counts
        .iter()
        .filter(|(_, &c)| c >= min_count)
        .map(|(w, &c)| (*w, c))
        .collect();
    survivors.sort_unstable_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let keep = ((keep_percentile * survivors.len() as f64) / 100.0).ceil() as usize;
    let vocab: HashSet<&str> = survivors
        .iter()
        .take(keep.min(survivors.len()))
        .map(|(w, _)| *w)
        .collect();

    docs.iter()
        .filter(|doc| {
            let distinct: BTreeSet<&str> = doc
                .text
                .split_whitespace()
                .filter(|t| vocab.contains(t))
                .collect();
            distinct.len() >= min_wordset_size
        })
        .map(|doc| doc.id.clone())
        .collect()
}
