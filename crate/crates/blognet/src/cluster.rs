//! Flat cluster inference on the similarity graph: weighted modularity
//! scoring and greedy agglomerative maximization, with an exhaustive
//! small-graph oracle and the adjusted Rand index for recovery checks.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::simnet::SimilarityGraph;

/// Assignment of vertices to disjoint clusters with the partition's
/// modularity on its graph.
///
/// Labels are dense integers from 0, assigned by first occurrence in
/// ascending vertex-id order. Vertices without any incident edge are not
/// part of a partition produced by the clusterers.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    ids: Vec<DocId>,
    labels: Vec<u32>,
    n_clusters: usize,
    q: f64,
}

impl Partition {
    /// Builds a scored partition over the given assignment. The assignment
    /// must cover every non-isolated vertex of the graph exactly once.
    pub fn new(graph: &SimilarityGraph, assignment: Vec<(DocId, u32)>) -> Result<Self> {
        let (ids, labels) = canonicalize(assignment);
        if let Some(dup) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateDocumentId(dup[0].to_string()));
        }
        let n_clusters = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut partition = Partition {
            ids,
            labels,
            n_clusters,
            q: f64::NAN,
        };
        partition.q = modularity(graph, &partition)?;
        Ok(partition)
    }

    /// Vertices covered by the partition, ascending.
    pub fn ids(&self) -> &[DocId] {
        &self.ids
    }

    /// Cluster labels aligned with [`Partition::ids`].
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    /// Modularity of this partition on the graph it was scored against.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn label_of(&self, id: &DocId) -> Option<u32> {
        self.ids.binary_search(id).ok().map(|i| self.labels[i])
    }

    /// Cluster sizes indexed by label.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n_clusters];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DocId, u32)> {
        self.ids.iter().zip(self.labels.iter().copied())
    }
}

/// Sorts by id and relabels clusters densely by first occurrence.
fn canonicalize(mut assignment: Vec<(DocId, u32)>) -> (Vec<DocId>, Vec<u32>) {
    assignment.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let mut relabel: HashMap<u32, u32> = HashMap::new();
    let mut ids = Vec::with_capacity(assignment.len());
    let mut labels = Vec::with_capacity(assignment.len());
    for (id, raw) in assignment {
        let next = relabel.len() as u32;
        let label = *relabel.entry(raw).or_insert(next);
        ids.push(id);
        labels.push(label);
    }
    (ids, labels)
}

/// Neumaier compensated summation; modularity sums must not depend on
/// accumulation order beyond the last ulp.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Per-cluster weight fractions: `internal[i]` is the fraction of total edge
/// weight inside cluster i, `incident[i]` the fraction of edge-endpoint
/// weight touching cluster i. `sum(incident) = 1` and
/// `internal[i] <= incident[i]` hold for every valid input.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub internal: Vec<f64>,
    pub incident: Vec<f64>,
}

fn resolve_labels(graph: &SimilarityGraph, partition: &Partition) -> Result<Vec<Option<u32>>> {
    let mut vertex_label: Vec<Option<u32>> = vec![None; graph.n_vertices()];
    for (id, label) in partition.iter() {
        match graph.index_of(id) {
            Some(v) => vertex_label[v as usize] = Some(label),
            None => return Err(Error::UnknownVertex(id.to_string())),
        }
    }
    // isolated vertices may be left out: they carry no weight
    for (v, label) in vertex_label.iter().enumerate() {
        if label.is_none() {
            let id = graph.id(v as u32);
            let isolated = !graph
                .edges()
                .iter()
                .any(|&(i, j, _)| i as usize == v || j as usize == v);
            if !isolated {
                return Err(Error::UncoveredVertex(id.to_string()));
            }
        }
    }
    Ok(vertex_label)
}

/// Per-cluster internal and incident weight fractions for a partition.
pub fn cluster_stats(graph: &SimilarityGraph, partition: &Partition) -> Result<ClusterStats> {
    if graph.n_edges() == 0 {
        return Err(Error::EdgelessGraph);
    }
    let vertex_label = resolve_labels(graph, partition)?;
    let k = partition.n_clusters();

    let mut total = CompensatedSum::default();
    let mut internal_w = vec![CompensatedSum::default(); k];
    let mut endpoint_w = vec![CompensatedSum::default(); k];
    for &(i, j, s) in graph.edges() {
        total.add(s);
        let (li, lj) = (vertex_label[i as usize], vertex_label[j as usize]);
        if let (Some(li), Some(lj)) = (li, lj) {
            if li == lj {
                internal_w[li as usize].add(s);
            }
            endpoint_w[li as usize].add(s);
            endpoint_w[lj as usize].add(s);
        }
    }
    let w = total.value();
    // the incident normalizer is the endpoint total itself, so the fractions
    // sum to exactly 1 and a single cluster scores exactly s = 1
    let mut endpoint_total = CompensatedSum::default();
    for e in &endpoint_w {
        endpoint_total.add(e.value());
    }
    let t = endpoint_total.value();
    Ok(ClusterStats {
        internal: internal_w.iter().map(|c| c.value() / w).collect(),
        incident: endpoint_w.iter().map(|c| c.value() / t).collect(),
    })
}

/// Modularity of a partition: the summed internal-weight fractions minus the
/// squared incident-weight fractions, cluster by cluster.
pub fn modularity(graph: &SimilarityGraph, partition: &Partition) -> Result<f64> {
    let stats = cluster_stats(graph, partition)?;
    let mut q = CompensatedSum::default();
    for (r, s) in stats.internal.iter().zip(&stats.incident) {
        q.add(r - s * s);
    }
    Ok(q.value())
}

/// Candidate merge in the greedy agglomeration heap. Ordering: largest gain
/// first, ties by canonical (smaller-label-first) pair order.
#[derive(Debug, PartialEq)]
struct MergeCandidate {
    dq: f64,
    a: u32,
    b: u32,
    stamp_a: u32,
    stamp_b: u32,
}

impl Eq for MergeCandidate {}

impl Ord for MergeCandidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dq
            .total_cmp(&other.dq)
            .then_with(|| (other.a, other.b).cmp(&(self.a, self.b)))
    }
}

impl PartialOrd for MergeCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy agglomerative modularity maximization.
///
/// Starts from singleton clusters and repeatedly merges the connected pair
/// with the largest modularity gain, maintained in a priority queue with
/// lazy invalidation (stale entries are stamped and skipped). Stops when no
/// merge gains, which on a monotone merge path is the maximum along the
/// sequence. Vertices without edges are left out of the result.
pub fn greedy_cluster(graph: &SimilarityGraph) -> Result<Partition> {
    if graph.n_edges() == 0 {
        return Err(Error::EdgelessGraph);
    }
    let n = graph.n_vertices();
    let w: f64 = {
        let mut total = CompensatedSum::default();
        for &(_, _, s) in graph.edges() {
            total.add(s);
        }
        total.value()
    };

    // incident-weight fraction per cluster (the modularity "a" terms)
    let degrees = graph.weighted_degrees();
    let mut a: Vec<f64> = degrees.iter().map(|d| d / (2.0 * w)).collect();
    // between-cluster raw weights; BTreeMap keeps merge iteration canonical
    let mut conn: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); n];
    for &(i, j, s) in graph.edges() {
        *conn[i as usize].entry(j).or_insert(0.0) += s;
        *conn[j as usize].entry(i).or_insert(0.0) += s;
    }

    let mut alive: Vec<bool> = degrees.iter().map(|&d| d > 0.0).collect();
    let mut stamp = vec![0u32; n];
    let mut members: Vec<Vec<u32>> = (0..n as u32).map(|v| vec![v]).collect();

    let gain = |w_ab: f64, a_a: f64, a_b: f64| w_ab / w - 2.0 * a_a * a_b;

    let mut heap = BinaryHeap::with_capacity(graph.n_edges());
    for &(i, j, s) in graph.edges() {
        heap.push(MergeCandidate {
            dq: gain(s, a[i as usize], a[j as usize]),
            a: i,
            b: j,
            stamp_a: 0,
            stamp_b: 0,
        });
    }

    while let Some(cand) = heap.pop() {
        let (ca, cb) = (cand.a as usize, cand.b as usize);
        if !alive[ca] || !alive[cb] || stamp[ca] != cand.stamp_a || stamp[cb] != cand.stamp_b {
            continue;
        }
        if cand.dq <= 0.0 {
            break;
        }
        // merge the larger label into the smaller one
        let (keep, gone) = (ca.min(cb), ca.max(cb));
        alive[gone] = false;
        stamp[keep] += 1;
        stamp[gone] += 1;
        a[keep] += a[gone];
        let moved = std::mem::take(&mut members[gone]);
        members[keep].extend(moved);

        let gone_conn = std::mem::take(&mut conn[gone]);
        for (x, weight) in gone_conn {
            let x = x as usize;
            if x == keep {
                continue;
            }
            conn[x].remove(&(gone as u32));
            *conn[x].entry(keep as u32).or_insert(0.0) += weight;
            *conn[keep].entry(x as u32).or_insert(0.0) += weight;
        }
        conn[keep].remove(&(keep as u32));
        conn[keep].remove(&(gone as u32));

        // refresh candidates involving the merged cluster
        for (&x, &weight) in &conn[keep] {
            let x = x as usize;
            let (lo, hi) = (keep.min(x), keep.max(x));
            heap.push(MergeCandidate {
                dq: gain(weight, a[lo], a[hi]),
                a: lo as u32,
                b: hi as u32,
                stamp_a: stamp[lo],
                stamp_b: stamp[hi],
            });
        }
    }

    let mut assignment = Vec::new();
    for (cluster, group) in members.iter().enumerate() {
        if !alive[cluster] {
            continue;
        }
        for &v in group {
            assignment.push((graph.id(v).clone(), cluster as u32));
        }
    }
    Partition::new(graph, assignment)
}

/// Exhaustive modularity maximization for graphs of at most 10 vertices.
///
/// Enumerates every set partition in restricted-growth-string order and
/// returns a maximizer; ties break toward fewer clusters, then the
/// lexicographically smallest canonical assignment.
pub fn brute_force_best_partition(graph: &SimilarityGraph) -> Result<Partition> {
    const MAX_VERTICES: usize = 10;
    let n = graph.n_vertices();
    if n > MAX_VERTICES {
        return Err(Error::OracleLimit(n));
    }
    if graph.n_edges() == 0 {
        return Err(Error::EdgelessGraph);
    }

    let mut best: Option<(f64, usize, Vec<u32>)> = None;
    let mut rgs = vec![0u32; n];
    enumerate_partitions(&mut rgs, 1, graph, &mut best);
    let (_, _, labels) = best.expect("at least one partition exists");
    let assignment = labels
        .iter()
        .enumerate()
        .map(|(v, &l)| (graph.id(v as u32).clone(), l))
        .collect();
    Partition::new(graph, assignment)
}

fn enumerate_partitions(
    rgs: &mut Vec<u32>,
    pos: usize,
    graph: &SimilarityGraph,
    best: &mut Option<(f64, usize, Vec<u32>)>,
) {
    if pos == rgs.len() {
        let q = modularity_of_labels(graph, rgs);
        let k = *rgs.iter().max().unwrap() as usize + 1;
        let better = match best {
            None => true,
            Some((bq, bk, brgs)) => {
                q > *bq || (q == *bq && (k < *bk || (k == *bk && rgs.as_slice() < brgs.as_slice())))
            }
        };
        if better {
            *best = Some((q, k, rgs.clone()));
        }
        return;
    }
    let max_used = rgs[..pos].iter().copied().max().unwrap();
    for label in 0..=max_used + 1 {
        rgs[pos] = label;
        enumerate_partitions(rgs, pos + 1, graph, best);
    }
    rgs[pos] = 0;
}

fn modularity_of_labels(graph: &SimilarityGraph, labels: &[u32]) -> f64 {
    let k = *labels.iter().max().unwrap() as usize + 1;
    let mut w = CompensatedSum::default();
    let mut internal = vec![CompensatedSum::default(); k];
    let mut endpoint = vec![CompensatedSum::default(); k];
    for &(i, j, s) in graph.edges() {
        w.add(s);
        let (li, lj) = (labels[i as usize] as usize, labels[j as usize] as usize);
        if li == lj {
            internal[li].add(s);
        }
        endpoint[li].add(s);
        endpoint[lj].add(s);
    }
    let mut t = CompensatedSum::default();
    for e in &endpoint {
        t.add(e.value());
    }
    let (w, t) = (w.value(), t.value());
    let mut q = CompensatedSum::default();
    for (r, d) in internal.iter().zip(&endpoint) {
        let s = d.value() / t;
        q.add(r.value() / w - s * s);
    }
    q.value()
}

/// Adjusted Rand index between two partitions of the same vertex set:
/// 1 for identical clusterings, about 0 for independent ones.
pub fn adjusted_rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    if a.ids() != b.ids() {
        return Err(Error::PartitionMismatch);
    }
    let n = a.ids().len();
    let mut table: HashMap<(u32, u32), u64> = HashMap::new();
    let mut rows: HashMap<u32, u64> = HashMap::new();
    let mut cols: HashMap<u32, u64> = HashMap::new();
    for (la, lb) in a.labels().iter().zip(b.labels()) {
        *table.entry((*la, *lb)).or_insert(0) += 1;
        *rows.entry(*la).or_insert(0) += 1;
        *cols.entry(*lb).or_insert(0) += 1;
    }
    let choose2 = |x: u64| (x * x.saturating_sub(1)) as f64 / 2.0;
    let sum_cells: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(n as u64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if max_index == expected {
        return Ok(1.0);
    }
    Ok((sum_cells - expected) / (max_index - expected))
}
