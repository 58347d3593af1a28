//! Finite graphs with exact chromatic and colouring-number solvers.
//!
//! Nodes are string identifiers; edges are unordered pairs with no
//! self-loops. The chromatic solver is a DSATUR-style branch and bound
//! with a greedy clique lower bound. It is exact; when a step budget
//! runs out it returns the bracketing bounds instead of a wrong answer.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simple undirected graph. Nodes are kept sorted, so every derived
/// quantity (orders, tie-breaks, serialized form) is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    nodes: Vec<String>,
    adj: Vec<Vec<usize>>,
    edges: BTreeSet<(usize, usize)>,
}

/// Wire format: `{"nodes": [...], "edges": [["u","v"], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Graph> {
        Graph::new(f.nodes, &f.edges)
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> GraphFile {
        GraphFile {
            edges: g.edge_names(),
            nodes: g.nodes,
        }
    }
}

impl Graph {
    /// Build a graph from node names and edge name pairs. Node names must
    /// be unique; edges must join two distinct declared nodes. Repeated
    /// edges (in either orientation) collapse to one.
    pub fn new(mut nodes: Vec<String>, edge_names: &[(String, String)]) -> Result<Graph> {
        nodes.sort();
        if nodes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph("duplicate node identifier".into()));
        }
        let index: BTreeMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut edges = BTreeSet::new();
        for (a, b) in edge_names {
            let u = *index
                .get(a.as_str())
                .ok_or_else(|| Error::InvalidGraph(format!("edge endpoint {a:?} not a node")))?;
            let v = *index
                .get(b.as_str())
                .ok_or_else(|| Error::InvalidGraph(format!("edge endpoint {b:?} not a node")))?;
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {a:?}")));
            }
            edges.insert((u.min(v), u.max(v)));
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { nodes, adj, edges })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Edges as canonical index pairs `(u, v)` with `u < v`, ascending.
    pub fn edge_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Edges as name pairs, in canonical order.
    pub fn edge_names(&self) -> Vec<(String, String)> {
        self.edges
            .iter()
            .map(|&(u, v)| (self.nodes[u].clone(), self.nodes[v].clone()))
            .collect()
    }

    /// Subgraph induced by `keep`, which must be a subset of the nodes.
    pub fn induced_subgraph(&self, keep: &BTreeSet<String>) -> Result<Graph> {
        for name in keep {
            if self.index_of(name).is_none() {
                return Err(Error::DomainMismatch(format!(
                    "induced subgraph: {name:?} is not a node"
                )));
            }
        }
        let nodes: Vec<String> = keep.iter().cloned().collect();
        let edges: Vec<(String, String)> = self
            .edges
            .iter()
            .filter(|&&(u, v)| keep.contains(&self.nodes[u]) && keep.contains(&self.nodes[v]))
            .map(|&(u, v)| (self.nodes[u].clone(), self.nodes[v].clone()))
            .collect();
        Graph::new(nodes, &edges)
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Graph {
        let nodes = gen_names(n);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((nodes[u].clone(), nodes[v].clone()));
            }
        }
        Graph::new(nodes, &edges).expect("complete graph is well formed")
    }

    /// Cycle on `n >= 3` nodes.
    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "a cycle needs at least 3 nodes");
        let nodes = gen_names(n);
        let edges: Vec<_> = (0..n)
            .map(|i| (nodes[i].clone(), nodes[(i + 1) % n].clone()))
            .collect();
        Graph::new(nodes, &edges).expect("cycle is well formed")
    }

    /// Path on `n` nodes (edgeless for `n <= 1`).
    pub fn path(n: usize) -> Graph {
        let nodes = gen_names(n);
        let edges: Vec<_> = (1..n)
            .map(|i| (nodes[i - 1].clone(), nodes[i].clone()))
            .collect();
        Graph::new(nodes, &edges).expect("path is well formed")
    }

    /// Graph with `n` nodes and no edges.
    pub fn edgeless(n: usize) -> Graph {
        Graph::new(gen_names(n), &[]).expect("edgeless graph is well formed")
    }

    /// The Petersen graph: outer 5-cycle, inner pentagram, spokes.
    pub fn petersen() -> Graph {
        let mut nodes = Vec::new();
        for i in 0..5 {
            nodes.push(format!("o{i}"));
            nodes.push(format!("i{i}"));
        }
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((format!("o{i}"), format!("o{}", (i + 1) % 5)));
            edges.push((format!("i{i}"), format!("i{}", (i + 2) % 5)));
            edges.push((format!("o{i}"), format!("i{i}")));
        }
        Graph::new(nodes, &edges).expect("petersen graph is well formed")
    }

    /// Random graph: each of the `n choose 2` edges present independently
    /// with probability `p`. Deterministic for a fixed RNG state.
    pub fn random(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
        let nodes = gen_names(n);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((nodes[u].clone(), nodes[v].clone()));
                }
            }
        }
        Graph::new(nodes, &edges).expect("random graph is well formed")
    }
}

/// Node names `v00, v01, ...`, zero-padded so lexicographic order matches
/// numeric order.
fn gen_names(n: usize) -> Vec<String> {
    let width = if n <= 1 { 1 } else { (n - 1).to_string().len() };
    (0..n).map(|i| format!("v{i:0width$}")).collect()
}

/// Total assignment of colours to nodes. Serialized as a plain
/// `{"node": colour}` object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Colouring {
    pub assignment: BTreeMap<String, u32>,
}

impl Colouring {
    pub fn colour_of(&self, node: &str) -> Option<u32> {
        self.assignment.get(node).copied()
    }

    /// Number of distinct colours in use.
    pub fn colours_used(&self) -> u32 {
        self.assignment.values().collect::<BTreeSet<_>>().len() as u32
    }
}

/// A linear order on the nodes of a graph, given as the full sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeOrder {
    pub sequence: Vec<String>,
}

impl NodeOrder {
    /// Map the sequence to node indices, insisting it is a permutation of
    /// the graph's nodes.
    fn to_indices(&self, g: &Graph) -> Result<Vec<usize>> {
        if self.sequence.len() != g.node_count() {
            return Err(Error::InvalidArgument(format!(
                "order lists {} nodes, graph has {}",
                self.sequence.len(),
                g.node_count()
            )));
        }
        let mut seen = vec![false; g.node_count()];
        let mut out = Vec::with_capacity(self.sequence.len());
        for name in &self.sequence {
            let i = g.index_of(name).ok_or_else(|| {
                Error::DomainMismatch(format!("order mentions unknown node {name:?}"))
            })?;
            if seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "order repeats node {name:?}"
                )));
            }
            seen[i] = true;
            out.push(i);
        }
        Ok(out)
    }
}

/// Check a colouring: total on the nodes and distinct across every edge.
pub fn is_proper(g: &Graph, c: &Colouring) -> Result<bool> {
    for name in c.assignment.keys() {
        if g.index_of(name).is_none() {
            return Err(Error::DomainMismatch(format!(
                "colouring mentions unknown node {name:?}"
            )));
        }
    }
    for name in g.nodes() {
        if !c.assignment.contains_key(name) {
            return Err(Error::DomainMismatch(format!(
                "colouring misses node {name:?}"
            )));
        }
    }
    Ok(g.edge_pairs()
        .all(|(u, v)| c.assignment[g.name(u)] != c.assignment[g.name(v)]))
}

/// First-fit colouring along `ord`: each node takes the least colour not
/// used by a neighbour earlier in the order.
pub fn greedy_colour(g: &Graph, ord: &NodeOrder) -> Result<Colouring> {
    let seq = ord.to_indices(g)?;
    let mut colour: Vec<Option<u32>> = vec![None; g.node_count()];
    for &v in &seq {
        let mut taken: BTreeSet<u32> = BTreeSet::new();
        for &w in g.neighbours(v) {
            if let Some(c) = colour[w] {
                taken.insert(c);
            }
        }
        let mut c = 0;
        while taken.contains(&c) {
            c += 1;
        }
        colour[v] = Some(c);
    }
    Ok(Colouring {
        assignment: g
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), colour[i].expect("order covers all nodes")))
            .collect(),
    })
}

/// Peel minimum-degree nodes (ties by identifier) and report the
/// degeneracy together with the reversed deletion sequence. Greedy
/// colouring along that sequence uses at most `degeneracy + 1` colours.
fn peel(g: &Graph) -> (u32, Vec<usize>) {
    let n = g.node_count();
    let mut deg: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let mut alive = vec![true; n];
    let mut removed = Vec::with_capacity(n);
    let mut degeneracy = 0usize;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&i| alive[i])
            .min_by_key(|&i| (deg[i], i))
            .expect("a live node remains");
        degeneracy = degeneracy.max(deg[v]);
        alive[v] = false;
        removed.push(v);
        for &w in g.neighbours(v) {
            if alive[w] {
                deg[w] -= 1;
            }
        }
    }
    removed.reverse();
    (degeneracy as u32, removed)
}

/// Colouring number: least `k` such that some node order gives every
/// node fewer than `k` neighbours earlier in the order. Equals
/// degeneracy + 1; by convention 0 for the empty graph.
pub fn colouring_number(g: &Graph) -> u32 {
    if g.node_count() == 0 {
        return 0;
    }
    peel(g).0 + 1
}

/// A node order witnessing the colouring number: every node sees fewer
/// than `colouring_number(g)` earlier neighbours.
pub fn degeneracy_order(g: &Graph) -> NodeOrder {
    let (_, seq) = peel(g);
    NodeOrder {
        sequence: seq.into_iter().map(|i| g.name(i).to_string()).collect(),
    }
}

/// Result of the exact chromatic solver. `Bounds` is only returned when
/// the step budget ran out first; the bounds are then still correct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Chromatic {
    Exact { value: u32 },
    Bounds { lo: u32, hi: u32 },
}

impl Chromatic {
    pub fn exact(&self) -> Option<u32> {
        match self {
            Chromatic::Exact { value } => Some(*value),
            Chromatic::Bounds { .. } => None,
        }
    }

    /// Best known lower bound.
    pub fn lower(&self) -> u32 {
        match *self {
            Chromatic::Exact { value } => value,
            Chromatic::Bounds { lo, .. } => lo,
        }
    }

    /// Best known upper bound.
    pub fn upper(&self) -> u32 {
        match *self {
            Chromatic::Exact { value } => value,
            Chromatic::Bounds { hi, .. } => hi,
        }
    }
}

/// Outcome of searching for a colouring with a fixed palette.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PaletteSearch {
    Found { colouring: Colouring },
    Infeasible,
    OutOfBudget,
}

/// Greedy clique, grown over nodes sorted by descending degree. A valid
/// (not necessarily optimal) lower bound for the chromatic number.
fn greedy_clique(g: &Graph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.sort_by_key(|&i| (usize::MAX - g.degree(i), i));
    let mut clique: Vec<usize> = Vec::new();
    for v in order {
        if clique.iter().all(|&u| g.has_edge(u, v)) {
            clique.push(v);
        }
    }
    clique
}

struct BranchBound<'g> {
    g: &'g Graph,
    colour: Vec<Option<u32>>,
    /// Strictly better solutions than this are searched for.
    best: u32,
    best_assignment: Option<Vec<u32>>,
    steps: u64,
    budget: u64,
    out_of_budget: bool,
    /// When set, stop as soon as any colouring with at most this many
    /// colours is found (palette-feasibility mode).
    accept_at: Option<u32>,
    done: bool,
}

impl<'g> BranchBound<'g> {
    /// Pick the uncoloured node with maximal saturation (distinct
    /// neighbour colours), breaking ties by degree then identifier.
    fn pick(&self) -> Option<usize> {
        let mut bestv: Option<(usize, usize, usize)> = None;
        for v in 0..self.g.node_count() {
            if self.colour[v].is_some() {
                continue;
            }
            let sat = self
                .g
                .neighbours(v)
                .iter()
                .filter_map(|&w| self.colour[w])
                .collect::<BTreeSet<u32>>()
                .len();
            let key = (sat, self.g.degree(v), usize::MAX - v);
            if bestv.map_or(true, |(s, d, iv)| key > (s, d, iv)) {
                bestv = Some(key);
            }
        }
        bestv.map(|(_, _, iv)| usize::MAX - iv)
    }

    fn branch(&mut self, used: u32) {
        if self.done || self.out_of_budget {
            return;
        }
        if self.steps >= self.budget {
            self.out_of_budget = true;
            return;
        }
        self.steps += 1;
        if used >= self.best {
            return;
        }
        let Some(v) = self.pick() else {
            self.best = used;
            self.best_assignment = Some(
                self.colour
                    .iter()
                    .map(|c| c.expect("complete assignment"))
                    .collect(),
            );
            if let Some(limit) = self.accept_at {
                if used <= limit {
                    self.done = true;
                }
            }
            return;
        };
        let taken: BTreeSet<u32> = self
            .g
            .neighbours(v)
            .iter()
            .filter_map(|&w| self.colour[w])
            .collect();
        // Colours up to one past the current maximum; anything further is
        // a symmetric duplicate. Stay strictly below the incumbent.
        let top = (used + 1).min(self.best.saturating_sub(1));
        for c in 0..top {
            if taken.contains(&c) {
                continue;
            }
            self.colour[v] = Some(c);
            self.branch(used.max(c + 1));
            self.colour[v] = None;
            if self.done || self.out_of_budget {
                return;
            }
        }
    }
}

/// Exact chromatic number by branch and bound, with a step budget.
/// Returns `Exact` whenever the search completes (or the bounds already
/// pin the value), else correct `Bounds`.
pub fn chromatic_number(g: &Graph, budget: u64) -> Chromatic {
    if g.node_count() == 0 {
        return Chromatic::Exact { value: 0 };
    }
    if g.edge_count() == 0 {
        return Chromatic::Exact { value: 1 };
    }
    let lo = greedy_clique(g).len() as u32;
    let start = greedy_colour(g, &degeneracy_order(g)).expect("degeneracy order is a permutation");
    let hi = start.colours_used();
    if lo == hi {
        return Chromatic::Exact { value: lo };
    }
    let mut bb = BranchBound {
        g,
        colour: vec![None; g.node_count()],
        best: hi,
        best_assignment: None,
        steps: 0,
        budget,
        out_of_budget: false,
        accept_at: None,
        done: false,
    };
    bb.branch(0);
    let hi = bb.best;
    if bb.out_of_budget && lo < hi {
        Chromatic::Bounds { lo, hi }
    } else {
        Chromatic::Exact { value: hi }
    }
}

/// Search for a proper colouring with at most `k` colours.
pub fn find_k_colouring(g: &Graph, k: u32, budget: u64) -> PaletteSearch {
    if g.node_count() == 0 {
        return PaletteSearch::Found {
            colouring: Colouring {
                assignment: BTreeMap::new(),
            },
        };
    }
    if k == 0 {
        return PaletteSearch::Infeasible;
    }
    if g.edge_count() == 0 {
        return PaletteSearch::Found {
            colouring: Colouring {
                assignment: g.nodes().iter().map(|n| (n.clone(), 0)).collect(),
            },
        };
    }
    let start = greedy_colour(g, &degeneracy_order(g)).expect("degeneracy order is a permutation");
    if start.colours_used() <= k {
        return PaletteSearch::Found { colouring: start };
    }
    let mut bb = BranchBound {
        g,
        colour: vec![None; g.node_count()],
        best: k + 1,
        best_assignment: None,
        steps: 0,
        budget,
        out_of_budget: false,
        accept_at: Some(k),
        done: false,
    };
    bb.branch(0);
    match bb.best_assignment {
        Some(assignment) => PaletteSearch::Found {
            colouring: Colouring {
                assignment: g
                    .nodes()
                    .iter()
                    .enumerate()
                    .map(|(i, n)| (n.clone(), assignment[i]))
                    .collect(),
            },
        },
        None if bb.out_of_budget => PaletteSearch::OutOfBudget,
        None => PaletteSearch::Infeasible,
    }
}

/// Default step budget for the solvers: ample for desk-scale graphs.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

#[cfg(test)]
mod tests {
    use super::*;

    fn order_of(g: &Graph, names: &[&str]) -> NodeOrder {
        let _ = g;
        NodeOrder {
            sequence: names.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert!(Graph::new(vec!["a".into(), "a".into()], &[]).is_err());
        assert!(Graph::new(vec!["a".into()], &[("a".into(), "a".into())]).is_err());
        assert!(Graph::new(vec!["a".into()], &[("a".into(), "b".into())]).is_err());
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = Graph::new(
            vec!["a".into(), "b".into()],
            &[("a".into(), "b".into()), ("b".into(), "a".into())],
        )
        .unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn chromatic_of_small_graphs() {
        assert_eq!(
            chromatic_number(&Graph::edgeless(0), DEFAULT_BUDGET),
            Chromatic::Exact { value: 0 }
        );
        assert_eq!(
            chromatic_number(&Graph::edgeless(5), DEFAULT_BUDGET),
            Chromatic::Exact { value: 1 }
        );
        assert_eq!(
            chromatic_number(&Graph::complete(3), DEFAULT_BUDGET),
            Chromatic::Exact { value: 3 }
        );
        assert_eq!(
            chromatic_number(&Graph::cycle(5), DEFAULT_BUDGET),
            Chromatic::Exact { value: 3 }
        );
        assert_eq!(
            chromatic_number(&Graph::petersen(), DEFAULT_BUDGET),
            Chromatic::Exact { value: 3 }
        );
    }

    #[test]
    fn chromatic_budget_returns_bounds_not_guesses() {
        let g = Graph::petersen();
        match chromatic_number(&g, 1) {
            Chromatic::Exact { value } => assert_eq!(value, 3),
            Chromatic::Bounds { lo, hi } => {
                assert!(lo <= 3 && 3 <= hi, "true value inside [{lo}, {hi}]");
            }
        }
    }

    #[test]
    fn colouring_number_of_small_graphs() {
        assert_eq!(colouring_number(&Graph::edgeless(0)), 0);
        assert_eq!(colouring_number(&Graph::path(3)), 2);
        assert_eq!(colouring_number(&Graph::cycle(5)), 3);
        assert_eq!(colouring_number(&Graph::complete(4)), 4);
    }

    #[test]
    fn greedy_colours_path_with_two() {
        let g = Graph::path(3);
        let c = greedy_colour(&g, &order_of(&g, &["v0", "v1", "v2"])).unwrap();
        assert_eq!(c.colour_of("v0"), Some(0));
        assert_eq!(c.colour_of("v1"), Some(1));
        assert_eq!(c.colour_of("v2"), Some(0));
        assert!(is_proper(&g, &c).unwrap());
    }

    #[test]
    fn greedy_around_a_cycle_spends_three() {
        let g = Graph::cycle(5);
        let c = greedy_colour(&g, &order_of(&g, &["v0", "v1", "v2", "v3", "v4"])).unwrap();
        assert_eq!(c.colours_used(), 3);
        assert!(is_proper(&g, &c).unwrap());
    }

    #[test]
    fn greedy_along_degeneracy_order_meets_colouring_number() {
        for g in [
            Graph::petersen(),
            Graph::cycle(6),
            Graph::complete(5),
            Graph::path(7),
        ] {
            let c = greedy_colour(&g, &degeneracy_order(&g)).unwrap();
            assert!(c.colours_used() <= colouring_number(&g));
        }
    }

    #[test]
    fn is_proper_checks_domain_and_edges() {
        let g = Graph::path(2);
        let good = Colouring {
            assignment: [("v0".to_string(), 0), ("v1".to_string(), 1)].into(),
        };
        let bad = Colouring {
            assignment: [("v0".to_string(), 0), ("v1".to_string(), 0)].into(),
        };
        let partial = Colouring {
            assignment: [("v0".to_string(), 0)].into(),
        };
        assert!(is_proper(&g, &good).unwrap());
        assert!(!is_proper(&g, &bad).unwrap());
        assert!(is_proper(&g, &partial).is_err());
    }

    #[test]
    fn induced_subgraph_keeps_inner_edges_only() {
        let g = Graph::cycle(5);
        let keep: BTreeSet<String> = ["v0", "v1", "v3"].iter().map(|s| s.to_string()).collect();
        let sub = g.induced_subgraph(&keep).unwrap();
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edge_count(), 1);
        let missing: BTreeSet<String> = ["zz"].iter().map(|s| s.to_string()).collect();
        assert!(g.induced_subgraph(&missing).is_err());
    }

    #[test]
    fn palette_search_distinguishes_three_outcomes() {
        let g = Graph::cycle(5);
        match find_k_colouring(&g, 3, DEFAULT_BUDGET) {
            PaletteSearch::Found { colouring } => {
                assert!(is_proper(&g, &colouring).unwrap());
                assert!(colouring.colours_used() <= 3);
            }
            other => panic!("expected a colouring, got {other:?}"),
        }
        assert_eq!(
            find_k_colouring(&g, 2, DEFAULT_BUDGET),
            PaletteSearch::Infeasible
        );
        assert_eq!(find_k_colouring(&g, 2, 1), PaletteSearch::OutOfBudget);
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let g = Graph::petersen();
        let text = serde_json::to_string(&g).unwrap();
        let back: Graph = serde_json::from_str(&text).unwrap();
        assert_eq!(g, back);
        assert_eq!(text, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn json_rejects_malformed_input() {
        let bad = r#"{"nodes": ["a"], "edges": [["a", "a"]]}"#;
        assert!(serde_json::from_str::<Graph>(bad).is_err());
    }
}
