//! Hierarchical structure inference: fits a hierarchical random graph — a
//! binary dendrogram over the vertices where each internal node carries the
//! connection probability of the vertex pairs it separates — by Markov chain
//! Monte Carlo over dendrogram topologies, and exports the result as a
//! Newick tree.
//!
//! The model scores a dendrogram by the likelihood of the observed simple
//! graph when every pair connects independently with the probability at its
//! lowest common ancestor; at the per-node maximum-likelihood probability
//! `theta = E / (L * R)` the log-likelihood is
//! `sum E ln(theta) + (L*R - E) ln(1 - theta)`, with zero terms for
//! `theta` at 0 or 1.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::simnet::{threshold_view, SimilarityGraph, UnionFind};

/// Simple undirected unweighted graph, the input of hierarchy fitting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryGraph {
    ids: Vec<DocId>,
    adj: Vec<Vec<u32>>,
    n_edges: usize,
}

impl BinaryGraph {
    /// Builds a simple graph from canonical vertex ids and index pairs.
    pub fn from_edges(ids: Vec<DocId>, edges: &[(u32, u32)]) -> Self {
        let mut adj = vec![Vec::new(); ids.len()];
        let mut n_edges = 0;
        for &(a, b) in edges {
            debug_assert!(a != b);
            adj[a as usize].push(b);
            adj[b as usize].push(a);
            n_edges += 1;
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        BinaryGraph { ids, adj, n_edges }
    }

    pub fn n_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn ids(&self) -> &[DocId] {
        &self.ids
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(v, list)| {
            list.iter()
                .filter(move |&&u| (v as u32) < u)
                .map(move |&u| (v as u32, u))
        })
    }

    /// Restriction to a subset of vertex ids (induced subgraph).
    pub fn induced(&self, keep: &BTreeSet<DocId>) -> BinaryGraph {
        let mut remap = vec![u32::MAX; self.ids.len()];
        let mut ids = Vec::new();
        for (v, id) in self.ids.iter().enumerate() {
            if keep.contains(id) {
                remap[v] = ids.len() as u32;
                ids.push(id.clone());
            }
        }
        let edges: Vec<(u32, u32)> = self
            .edges()
            .filter(|&(a, b)| remap[a as usize] != u32::MAX && remap[b as usize] != u32::MAX)
            .map(|(a, b)| (remap[a as usize], remap[b as usize]))
            .collect();
        BinaryGraph::from_edges(ids, &edges)
    }
}

/// Drops weights: edge present iff its similarity reaches `gamma`, vertices
/// without such an edge are dropped.
pub fn binarize(graph: &SimilarityGraph, gamma: f64) -> Result<BinaryGraph> {
    let view = threshold_view(graph, gamma)?;
    let edges: Vec<(u32, u32)> = view.edges().iter().map(|&(i, j, _)| (i, j)).collect();
    Ok(BinaryGraph::from_edges(view.ids().to_vec(), &edges))
}

/// Connected components as sorted vertex-index groups, largest first.
pub fn connected_components(graph: &BinaryGraph) -> Vec<Vec<u32>> {
    let n = graph.n_vertices();
    let mut dsu = UnionFind::new(n);
    for (a, b) in graph.edges() {
        dsu.union(a as usize, b as usize);
    }
    let mut by_root: HashMap<usize, Vec<u32>> = HashMap::new();
    for v in 0..n {
        by_root.entry(dsu.find(v)).or_default().push(v as u32);
    }
    let mut components: Vec<Vec<u32>> = by_root.into_values().collect();
    components.sort_unstable_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
    components
}

/// Child slot of an internal dendrogram node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Child {
    Leaf(u32),
    Node(u32),
}

#[derive(Debug, Clone)]
struct DNode {
    left: Child,
    right: Child,
    parent: Option<u32>,
    /// Leaves under the left / right child.
    n_left: u32,
    n_right: u32,
    /// Graph edges whose endpoints have this node as lowest common ancestor.
    e: u32,
    /// Maximum-likelihood connection probability `e / (n_left * n_right)`.
    theta: f64,
}

impl DNode {
    fn pairs(&self) -> u64 {
        self.n_left as u64 * self.n_right as u64
    }
}

/// Rooted full binary tree over `n` leaves with `n - 1` internal nodes, each
/// carrying its connection probability.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    leaf_ids: Vec<DocId>,
    nodes: Vec<DNode>,
    leaf_parent: Vec<u32>,
    root: u32,
}

/// Zero log-probability contributions at the boundary MLE values.
fn pair_loglik(e: u32, pairs: u64) -> f64 {
    if e == 0 || e as u64 == pairs {
        return 0.0;
    }
    let e = e as f64;
    let t = pairs as f64;
    let theta = e / t;
    e * theta.ln() + (t - e) * (1.0 - theta).ln()
}

impl Dendrogram {
    /// Balanced tree over the leaves in the given order.
    pub fn balanced(leaf_ids: Vec<DocId>) -> Self {
        let order: Vec<u32> = (0..leaf_ids.len() as u32).collect();
        Self::balanced_over(leaf_ids, &order)
    }

    /// Balanced tree over a uniformly shuffled leaf order.
    pub fn random_balanced(leaf_ids: Vec<DocId>, rng: &mut (impl Rng + ?Sized)) -> Self {
        let mut order: Vec<u32> = (0..leaf_ids.len() as u32).collect();
        order.shuffle(rng);
        Self::balanced_over(leaf_ids, &order)
    }

    fn balanced_over(leaf_ids: Vec<DocId>, order: &[u32]) -> Self {
        assert!(leaf_ids.len() >= 2, "dendrogram needs at least 2 leaves");
        let mut d = Dendrogram {
            leaf_parent: vec![u32::MAX; leaf_ids.len()],
            leaf_ids,
            nodes: Vec::new(),
            root: 0,
        };
        let root_child = d.build_balanced(order);
        match root_child {
            Child::Node(r) => d.root = r,
            Child::Leaf(_) => unreachable!("at least 2 leaves"),
        }
        d
    }

    fn build_balanced(&mut self, order: &[u32]) -> Child {
        if order.len() == 1 {
            return Child::Leaf(order[0]);
        }
        let mid = order.len() / 2;
        let left = self.build_balanced(&order[..mid]);
        let right = self.build_balanced(&order[mid..]);
        self.push_internal(left, right)
    }

    fn push_internal(&mut self, left: Child, right: Child) -> Child {
        let idx = self.nodes.len() as u32;
        let n_left = self.child_leaf_count(left);
        let n_right = self.child_leaf_count(right);
        self.nodes.push(DNode {
            left,
            right,
            parent: None,
            n_left,
            n_right,
            e: 0,
            theta: 0.0,
        });
        self.set_parent(left, idx);
        self.set_parent(right, idx);
        Child::Node(idx)
    }

    pub(crate) fn new_empty(leaf_ids: Vec<DocId>) -> Self {
        let n = leaf_ids.len();
        Dendrogram {
            leaf_parent: vec![u32::MAX; n],
            leaf_ids,
            nodes: Vec::new(),
            root: 0,
        }
    }

    pub(crate) fn push_internal_for_synth(
        &mut self,
        left: Child,
        right: Child,
        theta: f64,
    ) -> Child {
        let child = self.push_internal(left, right);
        if let Child::Node(x) = child {
            self.nodes[x as usize].theta = theta;
        }
        child
    }

    pub(crate) fn set_root(&mut self, root: Child) {
        match root {
            Child::Node(r) => self.root = r,
            Child::Leaf(_) => panic!("dendrogram root must be an internal node"),
        }
    }

    fn set_parent(&mut self, child: Child, parent: u32) {
        match child {
            Child::Leaf(l) => self.leaf_parent[l as usize] = parent,
            Child::Node(x) => self.nodes[x as usize].parent = Some(parent),
        }
    }

    fn child_leaf_count(&self, child: Child) -> u32 {
        match child {
            Child::Leaf(_) => 1,
            Child::Node(x) => {
                let node = &self.nodes[x as usize];
                node.n_left + node.n_right
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.leaf_ids.len()
    }

    pub fn leaf_ids(&self) -> &[DocId] {
        &self.leaf_ids
    }

    /// Connection probability at each internal node, indexed as stored.
    pub fn thetas(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.theta).collect()
    }

    /// Edges-under-LCA count at each internal node.
    pub fn edge_counts(&self) -> Vec<u32> {
        self.nodes.iter().map(|n| n.e).collect()
    }

    fn depths(&self) -> Vec<u32> {
        let mut depth = vec![0u32; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(x) = stack.pop() {
            let node = &self.nodes[x as usize];
            for child in [node.left, node.right] {
                if let Child::Node(c) = child {
                    depth[c as usize] = depth[x as usize] + 1;
                    stack.push(c);
                }
            }
        }
        depth
    }

    fn lca(&self, depth: &[u32], u_leaf: u32, v_leaf: u32) -> u32 {
        let mut a = self.leaf_parent[u_leaf as usize];
        let mut b = self.leaf_parent[v_leaf as usize];
        while a != b {
            if depth[a as usize] >= depth[b as usize] {
                a = self.nodes[a as usize].parent.expect("walked past root");
            } else {
                b = self.nodes[b as usize].parent.expect("walked past root");
            }
        }
        a
    }

    /// Per-node edge counts recomputed from scratch by LCA lookup.
    fn edge_counts_from(&self, graph: &BinaryGraph) -> Vec<u32> {
        debug_assert_eq!(self.leaf_ids, graph.ids());
        let depth = self.depths();
        let mut counts = vec![0u32; self.nodes.len()];
        for (u, v) in graph.edges() {
            counts[self.lca(&depth, u, v) as usize] += 1;
        }
        counts
    }

    /// Refreshes `e` and `theta` on every node from the graph. Leaf order
    /// must match the graph's vertex order.
    pub fn recompute_edge_counts(&mut self, graph: &BinaryGraph) {
        let counts = self.edge_counts_from(graph);
        for (node, e) in self.nodes.iter_mut().zip(counts) {
            node.e = e;
            node.theta = e as f64 / node.pairs() as f64;
        }
    }

    fn loglik_from_fields(&self) -> f64 {
        self.nodes.iter().map(|n| pair_loglik(n.e, n.pairs())).sum()
    }

    fn collect_leaves_into(&self, child: Child, out: &mut Vec<u32>) {
        let mut stack = vec![child];
        while let Some(c) = stack.pop() {
            match c {
                Child::Leaf(l) => out.push(l),
                Child::Node(x) => {
                    let node = &self.nodes[x as usize];
                    stack.push(node.left);
                    stack.push(node.right);
                }
            }
        }
    }

    /// Leaf ids under the root's two subtrees.
    pub fn root_split(&self) -> (BTreeSet<DocId>, BTreeSet<DocId>) {
        let root = &self.nodes[self.root as usize];
        let mut left = Vec::new();
        let mut right = Vec::new();
        self.collect_leaves_into(root.left, &mut left);
        self.collect_leaves_into(root.right, &mut right);
        let to_ids = |v: Vec<u32>| {
            v.into_iter()
                .map(|l| self.leaf_ids[l as usize].clone())
                .collect()
        };
        (to_ids(left), to_ids(right))
    }

    fn cross_edges(&self, graph: &BinaryGraph, x: Child, y: Child) -> u32 {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        self.collect_leaves_into(x, &mut xs);
        self.collect_leaves_into(y, &mut ys);
        let mut marked = vec![false; graph.n_vertices()];
        for &l in &ys {
            marked[l as usize] = true;
        }
        xs.iter()
            .map(|&l| {
                graph
                    .neighbors(l)
                    .iter()
                    .filter(|&&u| marked[u as usize])
                    .count() as u32
            })
            .sum()
    }

    /// Applies one of the two alternative arrangements at non-root internal
    /// node `r`: the sibling subtree trades places with the left (`alt` = 0)
    /// or right (`alt` = 1) child. Structural fields are maintained; `e` and
    /// `theta` of the two touched nodes are left to the caller.
    fn rearrange(&mut self, r: u32, alt: u8) -> u32 {
        let p = self.nodes[r as usize].parent.expect("r must be non-root");
        let (a, b) = {
            let node = &self.nodes[r as usize];
            (node.left, node.right)
        };
        let r_is_left = self.nodes[p as usize].left == Child::Node(r);
        let sibling = if r_is_left {
            self.nodes[p as usize].right
        } else {
            self.nodes[p as usize].left
        };
        let (kept, moved_out) = if alt == 0 { (a, b) } else { (b, a) };

        // r keeps `kept` and adopts the sibling; `moved_out` moves up to p
        self.nodes[r as usize].left = kept;
        self.nodes[r as usize].right = sibling;
        self.set_parent(sibling, r);
        if r_is_left {
            self.nodes[p as usize].right = moved_out;
        } else {
            self.nodes[p as usize].left = moved_out;
        }
        self.set_parent(moved_out, p);

        let (nk, ns, nm) = (
            self.child_leaf_count(kept),
            self.child_leaf_count(sibling),
            self.child_leaf_count(moved_out),
        );
        self.nodes[r as usize].n_left = nk;
        self.nodes[r as usize].n_right = ns;
        if r_is_left {
            self.nodes[p as usize].n_left = nk + ns;
            self.nodes[p as usize].n_right = nm;
        } else {
            self.nodes[p as usize].n_left = nm;
            self.nodes[p as usize].n_right = nk + ns;
        }
        p
    }

    /// All dendrograms one move away (topology only: `e`/`theta` are stale).
    pub fn all_proposals(&self) -> Vec<Dendrogram> {
        let mut out = Vec::new();
        for r in 0..self.nodes.len() as u32 {
            if r == self.root {
                continue;
            }
            for alt in 0..2u8 {
                let mut next = self.clone();
                next.rearrange(r, alt);
                out.push(next);
            }
        }
        out
    }

    /// Canonical topology string: children ordered by least leaf id.
    pub fn signature(&self) -> String {
        fn rec(d: &Dendrogram, c: Child, out: &mut String) -> usize {
            match c {
                Child::Leaf(l) => {
                    out.push_str(d.leaf_ids[l as usize].as_str());
                    l as usize
                }
                Child::Node(x) => {
                    let node = &d.nodes[x as usize];
                    let mut left = String::new();
                    let mut right = String::new();
                    let ml = rec(d, node.left, &mut left);
                    let mr = rec(d, node.right, &mut right);
                    let (first, second, m) = if d.leaf_ids[ml] <= d.leaf_ids[mr] {
                        (left, right, ml)
                    } else {
                        (right, left, mr)
                    };
                    out.push('(');
                    out.push_str(&first);
                    out.push(',');
                    out.push_str(&second);
                    out.push(')');
                    m
                }
            }
        }
        let mut out = String::new();
        rec(self, Child::Node(self.root), &mut out);
        out
    }
}

/// Model log-likelihood of a dendrogram on a graph at the per-node
/// maximum-likelihood connection probabilities. Always `<= 0`, with equality
/// exactly when every node probability is 0 or 1. Computed from scratch,
/// independent of any incrementally maintained counts.
pub fn log_likelihood(graph: &BinaryGraph, d: &Dendrogram) -> Result<f64> {
    if d.leaf_ids.len() != graph.n_vertices() {
        return Err(Error::LeafSetMismatch);
    }
    if d.leaf_ids != graph.ids() {
        // same ids in a different order are remapped; different sets fail
        let mut a: Vec<&DocId> = d.leaf_ids.iter().collect();
        let mut b: Vec<&DocId> = graph.ids().iter().collect();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::LeafSetMismatch);
        }
        let to_leaf: HashMap<&DocId, u32> = d.leaf_ids.iter().zip(0u32..).collect();
        let depth = d.depths();
        let mut counts = vec![0u32; d.nodes.len()];
        for (u, v) in graph.edges() {
            let lu = to_leaf[&graph.ids()[u as usize]];
            let lv = to_leaf[&graph.ids()[v as usize]];
            counts[d.lca(&depth, lu, lv) as usize] += 1;
        }
        return Ok(counts
            .iter()
            .zip(&d.nodes)
            .map(|(&e, n)| pair_loglik(e, n.pairs()))
            .sum());
    }
    let counts = d.edge_counts_from(graph);
    Ok(counts
        .iter()
        .zip(&d.nodes)
        .map(|(&e, n)| pair_loglik(e, n.pairs()))
        .sum())
}

/// Outcome of one Markov chain step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcStep {
    pub accepted: bool,
    /// Log-likelihood change actually applied (0 when rejected).
    pub delta: f64,
}

/// One Metropolis step: picks a uniformly random non-root internal node,
/// proposes one of its two alternative subtree arrangements uniformly, and
/// accepts with probability `min(1, exp(delta log-likelihood))`. Edge counts
/// are updated incrementally on the two affected nodes only.
///
/// The dendrogram's leaf order must match the graph's vertex order.
pub fn mcmc_step(
    d: &mut Dendrogram,
    graph: &BinaryGraph,
    rng: &mut (impl Rng + ?Sized),
) -> McmcStep {
    let n_internal = d.nodes.len();
    assert!(n_internal >= 2, "moves need at least 3 leaves");
    let r = loop {
        let k = rng.gen_range(0..n_internal) as u32;
        if k != d.root {
            break k;
        }
    };
    let alt: u8 = rng.gen_range(0..2);

    let p = d.nodes[r as usize].parent.expect("non-root");
    let (a, b) = {
        let node = &d.nodes[r as usize];
        (node.left, node.right)
    };
    let r_is_left = d.nodes[p as usize].left == Child::Node(r);
    let sibling = if r_is_left {
        d.nodes[p as usize].right
    } else {
        d.nodes[p as usize].left
    };

    let (na, nb, ns) = (
        d.child_leaf_count(a) as u64,
        d.child_leaf_count(b) as u64,
        d.child_leaf_count(sibling) as u64,
    );
    let e_r = d.nodes[r as usize].e;
    let e_p = d.nodes[p as usize].e;
    let e_as = d.cross_edges(graph, a, sibling);
    let e_bs = e_p - e_as;

    let old = pair_loglik(e_r, na * nb) + pair_loglik(e_p, (na + nb) * ns);
    let (new_e_r, new_e_p, new) = if alt == 0 {
        // r' = (a, s), p' = (r', b)
        let nl = pair_loglik(e_as, na * ns) + pair_loglik(e_r + e_bs, (na + ns) * nb);
        (e_as, e_r + e_bs, nl)
    } else {
        // r' = (b, s), p' = (r', a)
        let nl = pair_loglik(e_bs, nb * ns) + pair_loglik(e_r + e_as, (nb + ns) * na);
        (e_bs, e_r + e_as, nl)
    };
    let delta = new - old;

    let accept = delta >= 0.0 || rng.gen::<f64>() < delta.exp();
    if !accept {
        return McmcStep {
            accepted: false,
            delta: 0.0,
        };
    }
    d.rearrange(r, alt);
    let rn = &mut d.nodes[r as usize];
    rn.e = new_e_r;
    rn.theta = new_e_r as f64 / rn.pairs() as f64;
    let pn = &mut d.nodes[p as usize];
    pn.e = new_e_p;
    pn.theta = new_e_p as f64 / pn.pairs() as f64;
    McmcStep {
        accepted: true,
        delta,
    }
}

/// Result of an MCMC hierarchy fit.
#[derive(Debug, Clone)]
pub struct HrgFitResult {
    /// Dendrogram at the maximum log-likelihood ever visited.
    pub best: Dendrogram,
    /// Its log-likelihood, recomputed exactly.
    pub best_loglik: f64,
    /// Thinned `(step, running log-likelihood)` samples over the whole run.
    pub trace: Vec<(u64, f64)>,
    pub seed: u64,
}

/// Default sampling budgets: `10 n^2` burn-in and `100 n^2` recorded steps.
pub fn default_budgets(n_vertices: usize) -> (u64, u64) {
    let sq = (n_vertices * n_vertices) as u64;
    (10 * sq, 100 * sq)
}

/// Fits a dendrogram to a connected simple graph by Metropolis sampling:
/// seeds a random balanced dendrogram, runs `burn_in + steps` moves, and
/// returns the best dendrogram ever visited. Deterministic for a given seed.
pub fn fit(graph: &BinaryGraph, steps: u64, burn_in: u64, seed: u64) -> Result<HrgFitResult> {
    let n = graph.n_vertices();
    if n < 3 {
        return Err(Error::TooFewVertices { got: n, need: 3 });
    }
    let components = connected_components(graph);
    if components.len() > 1 {
        return Err(Error::Disconnected {
            components: components.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Dendrogram::random_balanced(graph.ids().to_vec(), &mut rng);
    d.recompute_edge_counts(graph);
    let mut running = d.loglik_from_fields();

    let total = burn_in + steps;
    let thin = (total / 1000).max(1);
    let mut trace = Vec::with_capacity((total / thin) as usize + 2);
    trace.push((0, running));

    let mut best = d.clone();
    let mut best_running = running;
    for step in 1..=total {
        let outcome = mcmc_step(&mut d, graph, &mut rng);
        running += outcome.delta;
        if running > best_running {
            best_running = running;
            best = d.clone();
        }
        if step % thin == 0 {
            trace.push((step, running));
        }
    }
    if trace.last().map(|&(s, _)| s) != Some(total) {
        trace.push((total, running));
    }

    let best_loglik = log_likelihood(graph, &best)?;
    Ok(HrgFitResult {
        best,
        best_loglik,
        trace,
        seed,
    })
}

fn needs_quoting(label: &str) -> bool {
    label.is_empty()
        || label.chars().any(|c| {
            c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | '\'' | ':' | ';' | ',')
        })
}

fn format_label(label: &str) -> String {
    if needs_quoting(label) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_owned()
    }
}

/// Serializes a dendrogram as a Newick string: leaf labels are document ids,
/// internal support values are the node connection probabilities, children
/// are ordered by least leaf id.
pub fn export_newick(d: &Dendrogram) -> String {
    fn rec(d: &Dendrogram, c: Child, out: &mut String) -> usize {
        match c {
            Child::Leaf(l) => {
                out.push_str(&format_label(d.leaf_ids[l as usize].as_str()));
                l as usize
            }
            Child::Node(x) => {
                let node = &d.nodes[x as usize];
                let mut left = String::new();
                let mut right = String::new();
                let ml = rec(d, node.left, &mut left);
                let mr = rec(d, node.right, &mut right);
                let (first, second, m) = if d.leaf_ids[ml] <= d.leaf_ids[mr] {
                    (left, right, ml)
                } else {
                    (right, left, mr)
                };
                out.push('(');
                out.push_str(&first);
                out.push(',');
                out.push_str(&second);
                out.push(')');
                out.push_str(&format!("{}", node.theta));
                m
            }
        }
    }
    let mut out = String::new();
    rec(d, Child::Node(d.root), &mut out);
    out.push(';');
    out
}

struct NewickParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> NewickParser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::NewickParse {
            pos: self.pos,
            msg: msg.to_owned(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn label(&mut self) -> Result<String> {
        self.skip_ws();
        if self.peek() == Some(b'\'') {
            self.pos += 1;
            let mut out = String::new();
            loop {
                match self.peek() {
                    Some(b'\'') => {
                        if self.bytes.get(self.pos + 1) == Some(&b'\'') {
                            out.push('\'');
                            self.pos += 2;
                        } else {
                            self.pos += 1;
                            return Ok(out);
                        }
                    }
                    Some(_) => {
                        let start = self.pos;
                        while self.peek().map(|b| b != b'\'').unwrap_or(false) {
                            self.pos += 1;
                        }
                        out.push_str(
                            std::str::from_utf8(&self.bytes[start..self.pos])
                                .map_err(|_| self.err("invalid utf-8 in label"))?,
                        );
                    }
                    None => return Err(self.err("unterminated quoted label")),
                }
            }
        }
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() || matches!(b, b'(' | b')' | b',' | b';' | b':') {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected label"));
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| self.err("invalid utf-8 in label"))?
            .to_owned())
    }

    fn node(&mut self, d: &mut Dendrogram) -> Result<Child> {
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let left = self.node(d)?;
            self.skip_ws();
            if self.peek() != Some(b',') {
                return Err(self.err("expected ',' in binary node"));
            }
            self.pos += 1;
            let right = self.node(d)?;
            self.skip_ws();
            if self.peek() != Some(b')') {
                return Err(self.err("expected ')'"));
            }
            self.pos += 1;
            self.skip_ws();
            let theta = match self.peek() {
                Some(b) if b != b',' && b != b')' && b != b';' => {
                    let text = self.label()?;
                    text.parse::<f64>()
                        .map_err(|_| self.err("internal support value is not a number"))?
                }
                _ => f64::NAN,
            };
            let child = d.push_internal(left, right);
            if let Child::Node(x) = child {
                d.nodes[x as usize].theta = theta;
            }
            Ok(child)
        } else {
            let label = self.label()?;
            let id = DocId::new(label).map_err(|_| self.err("empty leaf label"))?;
            let leaf = d.leaf_ids.len() as u32;
            d.leaf_ids.push(id);
            d.leaf_parent.push(u32::MAX);
            Ok(Child::Leaf(leaf))
        }
    }
}

/// Parses a Newick string produced by [`export_newick`] back into a
/// dendrogram (edge counts are not recoverable and are left at zero).
pub fn parse_newick(text: &str) -> Result<Dendrogram> {
    let mut parser = NewickParser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let mut d = Dendrogram {
        leaf_ids: Vec::new(),
        nodes: Vec::new(),
        leaf_parent: Vec::new(),
        root: 0,
    };
    let root = parser.node(&mut d)?;
    parser.skip_ws();
    if parser.peek() != Some(b';') {
        return Err(parser.err("expected trailing ';'"));
    }
    parser.pos += 1;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.err("trailing content after ';'"));
    }
    match root {
        Child::Node(r) => d.root = r,
        Child::Leaf(_) => return Err(parser.err("single-leaf tree is not a dendrogram")),
    }
    Ok(d)
}
