//! The similarity network: pairwise word-overlap similarities computed
//! through an inverted index, the thresholded similarity graph, the
//! similarity distribution (log-log histogram and power-law fit), and the
//! anomaly detectors built on top of it (spam candidates from distribution
//! outliers, near-duplicate groups from the high-similarity tail).

use std::collections::HashMap;

use serde::Serialize;

use crate::corpus::{Corpus, DocId, WordSet};
use crate::error::{Error, Result};

/// Undirected weighted similarity graph.
///
/// Vertices are documents; an edge carries the word-overlap similarity of its
/// endpoints and exists only when that similarity reached `store_threshold`.
/// Edges are canonical: endpoint indices satisfy `i < j` in ascending-id
/// order, and the edge list is sorted by `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    ids: Vec<DocId>,
    edges: Vec<(u32, u32, f64)>,
    store_threshold: f64,
}

impl SimilarityGraph {
    /// Assembles a graph from parts, canonicalizing vertex and edge order.
    /// Edge weights must lie in `[store_threshold, 1]` and reference known
    /// ids; self-loops are rejected.
    pub fn from_parts(
        mut ids: Vec<DocId>,
        edges: Vec<(DocId, DocId, f64)>,
        store_threshold: f64,
    ) -> Result<Self> {
        if !(store_threshold > 0.0 && store_threshold <= 1.0) {
            return Err(Error::InvalidThreshold(store_threshold));
        }
        ids.sort_unstable();
        ids.dedup();
        let index: HashMap<&DocId, u32> = ids.iter().zip(0u32..).collect();
        let mut canonical = Vec::with_capacity(edges.len());
        for (a, b, s) in &edges {
            let &ia = index
                .get(a)
                .ok_or_else(|| Error::UnknownVertex(a.to_string()))?;
            let &ib = index
                .get(b)
                .ok_or_else(|| Error::UnknownVertex(b.to_string()))?;
            if ia == ib {
                return Err(Error::InvalidSpec(format!("self-loop on `{a}`")));
            }
            if !(*s >= store_threshold && *s <= 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "edge weight {s} outside [{store_threshold}, 1]"
                )));
            }
            canonical.push((ia.min(ib), ia.max(ib), *s));
        }
        canonical.sort_unstable_by_key(|e| (e.0, e.1));
        canonical.dedup_by_key(|e| (e.0, e.1));
        Ok(SimilarityGraph {
            ids,
            edges: canonical,
            store_threshold,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Vertex ids in ascending order; edge endpoints index into this slice.
    pub fn ids(&self) -> &[DocId] {
        &self.ids
    }

    pub fn id(&self, index: u32) -> &DocId {
        &self.ids[index as usize]
    }

    pub fn index_of(&self, id: &DocId) -> Option<u32> {
        self.ids.binary_search(id).ok().map(|i| i as u32)
    }

    /// Canonical edge list: `i < j`, sorted by `(i, j)`.
    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    pub fn store_threshold(&self) -> f64 {
        self.store_threshold
    }

    /// Sum of incident edge weights per vertex.
    pub fn weighted_degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.ids.len()];
        for &(i, j, s) in &self.edges {
            deg[i as usize] += s;
            deg[j as usize] += s;
        }
        deg
    }

    /// Ids of vertices without a single incident edge.
    pub fn isolated_vertices(&self) -> Vec<DocId> {
        let mut touched = vec![false; self.ids.len()];
        for &(i, j, _) in &self.edges {
            touched[i as usize] = true;
            touched[j as usize] = true;
        }
        self.ids
            .iter()
            .zip(&touched)
            .filter(|(_, &t)| !t)
            .map(|(id, _)| id.clone())
            .collect()
    }
}

/// Word-overlap similarity of two word sets: shared words over all words.
/// Symmetric, in `[0, 1]`, `1` for identical sets, `0` for disjoint ones.
pub fn jaccard(a: &WordSet, b: &WordSet) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::UndefinedSimilarity);
    }
    let mut shared = 0usize;
    let mut ia = a.words.iter();
    let mut ib = b.words.iter();
    let (mut na, mut nb) = (ia.next(), ib.next());
    while let (Some(wa), Some(wb)) = (na, nb) {
        match wa.cmp(wb) {
            std::cmp::Ordering::Less => na = ia.next(),
            std::cmp::Ordering::Greater => nb = ib.next(),
            std::cmp::Ordering::Equal => {
                shared += 1;
                na = ia.next();
                nb = ib.next();
            }
        }
    }
    let union = a.len() + b.len() - shared;
    Ok(shared as f64 / union as f64)
}

/// Builds the similarity graph over a corpus, keeping pairs at or above
/// `store_threshold`.
///
/// Pairs are enumerated through an inverted index (word -> posting list of
/// documents): only co-occurring pairs ever materialize, each with its
/// intersection count accumulated across posting lists; the union size is
/// derived from the two set sizes. The result equals brute-force all-pairs
/// similarity at the same threshold.
pub fn build_graph(corpus: &Corpus, store_threshold: f64) -> Result<SimilarityGraph> {
    #[cfg(feature = "parallel")]
    {
        build_graph_parallel(corpus, store_threshold)
    }
    #[cfg(not(feature = "parallel"))]
    {
        build_graph_serial(corpus, store_threshold)
    }
}

fn posting_lists(corpus: &Corpus) -> Vec<Vec<u32>> {
    let mut postings: HashMap<&str, Vec<u32>> = HashMap::new();
    for (idx, ws) in corpus.word_sets().iter().enumerate() {
        for word in &ws.words {
            postings.entry(word.as_str()).or_default().push(idx as u32);
        }
    }
    // posting identity does not matter downstream, only the pair counts;
    // still, a fixed order keeps the parallel partitioning reproducible
    let mut lists: Vec<Vec<u32>> = postings.into_values().collect();
    lists.sort_unstable();
    lists
}

fn count_pairs_in(list: &[u32], counts: &mut HashMap<(u32, u32), u32>) {
    for (k, &a) in list.iter().enumerate() {
        for &b in &list[k + 1..] {
            *counts.entry((a, b)).or_insert(0) += 1;
        }
    }
}

fn edges_from_pair_counts(
    corpus: &Corpus,
    pair_counts: impl IntoIterator<Item = ((u32, u32), u32)>,
    store_threshold: f64,
) -> Vec<(u32, u32, f64)> {
    let sizes: Vec<usize> = corpus.word_sets().iter().map(WordSet::len).collect();
    pair_counts
        .into_iter()
        .filter_map(|((a, b), shared)| {
            let union = sizes[a as usize] + sizes[b as usize] - shared as usize;
            let s = shared as f64 / union as f64;
            (s >= store_threshold).then_some((a, b, s))
        })
        .collect()
}

fn check_threshold(store_threshold: f64) -> Result<()> {
    if !(store_threshold > 0.0 && store_threshold <= 1.0) {
        return Err(Error::InvalidThreshold(store_threshold));
    }
    Ok(())
}

fn graph_from_edges(
    corpus: &Corpus,
    mut edges: Vec<(u32, u32, f64)>,
    store_threshold: f64,
) -> SimilarityGraph {
    edges.sort_unstable_by_key(|e| (e.0, e.1));
    let ids = corpus.word_sets().iter().map(|ws| ws.id.clone()).collect();
    SimilarityGraph {
        ids,
        edges,
        store_threshold,
    }
}

/// Sequential reference implementation of [`build_graph`].
pub fn build_graph_serial(corpus: &Corpus, store_threshold: f64) -> Result<SimilarityGraph> {
    check_threshold(store_threshold)?;
    let mut pair_counts = HashMap::new();
    for list in posting_lists(corpus) {
        count_pairs_in(&list, &mut pair_counts);
    }
    let edges = edges_from_pair_counts(corpus, pair_counts, store_threshold);
    Ok(graph_from_edges(corpus, edges, store_threshold))
}

/// Data-parallel [`build_graph`]: the pair space is partitioned by the
/// smaller endpoint (interleaved across workers), so per-worker counters
/// cover disjoint pairs and no merge is needed. The edge set is identical
/// for any worker count.
#[cfg(feature = "parallel")]
pub fn build_graph_parallel(corpus: &Corpus, store_threshold: f64) -> Result<SimilarityGraph> {
    use rayon::prelude::*;

    check_threshold(store_threshold)?;
    let lists = posting_lists(corpus);
    let workers = rayon::current_num_threads().max(1) as u32;
    let edges: Vec<(u32, u32, f64)> = (0..workers)
        .into_par_iter()
        .flat_map_iter(|worker| {
            // posting lists are ascending, so the pair owner list[k] is the
            // smaller endpoint of every pair it opens
            let mut counts = HashMap::new();
            for list in &lists {
                for (k, &a) in list.iter().enumerate() {
                    if a % workers != worker {
                        continue;
                    }
                    for &b in &list[k + 1..] {
                        *counts.entry((a, b)).or_insert(0u32) += 1;
                    }
                }
            }
            edges_from_pair_counts(corpus, counts, store_threshold)
        })
        .collect();
    Ok(graph_from_edges(corpus, edges, store_threshold))
}

/// Edge-weight histogram over logarithmically spaced bins covering
/// `[store_threshold, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityHistogram {
    bin_edges: Vec<f64>,
    counts: Vec<u64>,
}

impl SimilarityHistogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn bin_bounds(&self, bin: usize) -> (f64, f64) {
        (self.bin_edges[bin], self.bin_edges[bin + 1])
    }

    /// Geometric bin midpoint, the natural center on a log axis.
    pub fn bin_center(&self, bin: usize) -> f64 {
        let (lo, hi) = self.bin_bounds(bin);
        (lo * hi).sqrt()
    }

    /// Count divided by linear bin width.
    pub fn density(&self, bin: usize) -> f64 {
        let (lo, hi) = self.bin_bounds(bin);
        self.counts[bin] as f64 / (hi - lo)
    }

    /// Bin index for a weight in `[edges[0], 1]`: bins are left-closed,
    /// right-open, except the last which is closed.
    pub fn bin_of(&self, s: f64) -> usize {
        let k = self.bin_edges.partition_point(|&e| e <= s);
        k.saturating_sub(1).min(self.counts.len() - 1)
    }

    /// Builds a histogram over explicit ascending bin edges.
    pub fn with_edges(bin_edges: Vec<f64>, weights: impl Iterator<Item = f64>) -> Self {
        debug_assert!(bin_edges.windows(2).all(|w| w[0] < w[1]));
        let mut hist = SimilarityHistogram {
            counts: vec![0; bin_edges.len() - 1],
            bin_edges,
        };
        for s in weights {
            let bin = hist.bin_of(s);
            hist.counts[bin] += 1;
        }
        hist
    }
}

/// Bins the graph's edge weights into `n_bins` log-spaced bins over
/// `[store_threshold, 1]`.
pub fn histogram(graph: &SimilarityGraph, n_bins: usize) -> Result<SimilarityHistogram> {
    assert!(n_bins >= 2, "histogram needs at least 2 bins");
    if graph.edges.is_empty() {
        return Err(Error::NoEdges);
    }
    let t = graph.store_threshold;
    let mut edges: Vec<f64> = (0..=n_bins)
        .map(|k| t.powf(1.0 - k as f64 / n_bins as f64))
        .collect();
    edges[0] = t;
    edges[n_bins] = 1.0;
    Ok(SimilarityHistogram::with_edges(
        edges,
        graph.edges.iter().map(|&(_, _, s)| s),
    ))
}

/// Least-squares line through the log-log similarity distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub fit_region: (f64, f64),
    pub r_squared: f64,
}

impl PowerLawFit {
    /// Predicted log10 density at a given similarity.
    pub fn predicted_log_density(&self, s: f64) -> f64 {
        self.intercept + self.slope * s.log10()
    }
}

/// Ordinary least squares on `(log10 bin center, log10 density)` over the
/// nonzero bins whose centers lie in `region`. Density is count per linear
/// bin width. Needs at least three usable bins.
pub fn fit_power_law(hist: &SimilarityHistogram, region: (f64, f64)) -> Result<PowerLawFit> {
    let points: Vec<(f64, f64)> = (0..hist.n_bins())
        .filter(|&b| hist.counts()[b] > 0)
        .map(|b| (hist.bin_center(b), hist.density(b)))
        .filter(|&(c, _)| c >= region.0 && c <= region.1)
        .map(|(c, d)| (c.log10(), d.log10()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientFitSupport { got: points.len() });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(PowerLawFit {
        slope,
        intercept,
        fit_region: region,
        r_squared,
    })
}

/// Outlier flagging rule for [`detect_outliers`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlierPolicy {
    /// Flag bins whose log-density exceeds the fit by more than `k` residual
    /// standard deviations. `INFINITY` disables flagging.
    pub k: f64,
    /// Bin count used to re-bin the graph for residual evaluation.
    pub n_bins: usize,
    /// Floor on the residual scale, so exactly-on-the-line data (zero
    /// in-region variance) does not flag floating-point noise.
    pub min_sigma: f64,
}

impl Default for OutlierPolicy {
    fn default() -> Self {
        OutlierPolicy {
            k: 2.0,
            n_bins: 50,
            min_sigma: 0.05,
        }
    }
}

/// Edges in distribution-outlier bins, plus the vertices they touch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutlierReport {
    /// Flagged edges in canonical order.
    pub flagged_edges: Vec<(DocId, DocId, f64)>,
    /// Spam-blog candidates: every vertex incident to a flagged edge, with
    /// its flagged-edge count, ascending by id.
    pub candidates: Vec<(DocId, usize)>,
}

/// Flags edges in bins above the fit interval whose observed log-density
/// exceeds the fitted line by more than `k` times the in-region residual
/// deviation. Vertices of flagged edges are reported as spam candidates.
pub fn detect_outliers(
    graph: &SimilarityGraph,
    fit: &PowerLawFit,
    policy: &OutlierPolicy,
) -> OutlierReport {
    let hist = match histogram(graph, policy.n_bins) {
        Ok(h) => h,
        Err(_) => return OutlierReport::default(),
    };
    let residual =
        |bin: usize| hist.density(bin).log10() - fit.predicted_log_density(hist.bin_center(bin));

    let (lo, hi) = fit.fit_region;
    let mut sq_sum = 0.0;
    let mut n_in = 0usize;
    for b in 0..hist.n_bins() {
        let c = hist.bin_center(b);
        if hist.counts()[b] > 0 && c >= lo && c <= hi {
            sq_sum += residual(b).powi(2);
            n_in += 1;
        }
    }
    let sigma = if n_in > 0 {
        (sq_sum / n_in as f64).sqrt().max(policy.min_sigma)
    } else {
        policy.min_sigma
    };

    let flagged_bins: Vec<usize> = (0..hist.n_bins())
        .filter(|&b| hist.counts()[b] > 0 && hist.bin_center(b) > hi)
        .filter(|&b| residual(b) > policy.k * sigma)
        .collect();
    if flagged_bins.is_empty() {
        return OutlierReport::default();
    }

    let mut in_flagged = vec![false; hist.n_bins()];
    for &b in &flagged_bins {
        in_flagged[b] = true;
    }
    let mut flagged_edges = Vec::new();
    let mut incident: HashMap<u32, usize> = HashMap::new();
    for &(i, j, s) in graph.edges() {
        if in_flagged[hist.bin_of(s)] {
            flagged_edges.push((graph.id(i).clone(), graph.id(j).clone(), s));
            *incident.entry(i).or_insert(0) += 1;
            *incident.entry(j).or_insert(0) += 1;
        }
    }
    let mut candidates: Vec<(DocId, usize)> = incident
        .into_iter()
        .map(|(v, n)| (graph.id(v).clone(), n))
        .collect();
    candidates.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    OutlierReport {
        flagged_edges,
        candidates,
    }
}

/// A maximal group of mutually near-duplicate documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicateGroup {
    /// Lexicographically least member.
    pub representative: DocId,
    /// All members, ascending.
    pub members: Vec<DocId>,
}

/// Connected components of the subgraph of edges with `s >= dup_threshold`;
/// components of at least two vertices are reported as duplicate groups.
pub fn detect_duplicates(graph: &SimilarityGraph, dup_threshold: f64) -> Vec<DuplicateGroup> {
    assert!(
        dup_threshold > 0.0 && dup_threshold <= 1.0,
        "dup_threshold must lie in (0, 1]"
    );
    let mut dsu = UnionFind::new(graph.n_vertices());
    for &(i, j, s) in graph.edges() {
        if s >= dup_threshold {
            dsu.union(i as usize, j as usize);
        }
    }
    let mut components: HashMap<usize, Vec<u32>> = HashMap::new();
    for v in 0..graph.n_vertices() {
        components.entry(dsu.find(v)).or_default().push(v as u32);
    }
    let mut groups: Vec<DuplicateGroup> = components
        .into_values()
        .filter(|members| members.len() >= 2)
        .map(|members| DuplicateGroup {
            // members are collected in ascending index order = ascending id
            representative: graph.id(members[0]).clone(),
            members: members.iter().map(|&v| graph.id(v).clone()).collect(),
        })
        .collect();
    groups.sort_unstable_by(|a, b| a.representative.cmp(&b.representative));
    groups
}

/// Combined anomaly output, one file's worth: outlier candidates and
/// duplicate groups.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnomalyReport {
    pub outliers: OutlierReport,
    pub duplicate_groups: Vec<DuplicateGroup>,
}

/// Subgraph of edges with `s >= gamma`, dropping vertices left without any
/// incident edge. The view's stored resolution becomes `gamma`, so views
/// nest: raising gamma never adds edges.
pub fn threshold_view(graph: &SimilarityGraph, gamma: f64) -> Result<SimilarityGraph> {
    if gamma < graph.store_threshold {
        return Err(Error::ViewBelowResolution {
            gamma,
            store_threshold: graph.store_threshold,
        });
    }
    let mut touched = vec![false; graph.n_vertices()];
    for &(i, j, s) in graph.edges() {
        if s >= gamma {
            touched[i as usize] = true;
            touched[j as usize] = true;
        }
    }
    let mut remap = vec![u32::MAX; graph.n_vertices()];
    let mut ids = Vec::new();
    for (v, &keep) in touched.iter().enumerate() {
        if keep {
            remap[v] = ids.len() as u32;
            ids.push(graph.ids[v].clone());
        }
    }
    let edges = graph
        .edges()
        .iter()
        .filter(|&&(_, _, s)| s >= gamma)
        .map(|&(i, j, s)| (remap[i as usize], remap[j as usize], s))
        .collect();
    Ok(SimilarityGraph {
        ids,
        edges,
        store_threshold: gamma,
    })
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}
