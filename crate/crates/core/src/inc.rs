//! Incompactness checkers for graph chains.
//!
//! The object under test is a gap between local and global colour
//! demand: every early graph in a chain (or every small induced
//! subgraph) colours cheaply, yet the whole needs many colours. The
//! checkers certify both halves with the exact solvers and return
//! `Undecided` with the blocking position when a budget runs out, never
//! a guess. The *plus* variant strengthens the cheap half: each early
//! graph is split into parts whose colouring number stays below the
//! threshold, which bounds every subgraph of every part at once.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{chromatic_number, colouring_number, Graph};
use crate::verdict::{ScanGrade, Verdict};

/// An increasing chain of induced subgraphs of its last member, with the
/// colour thresholds the chain is measured against: early graphs must
/// stay below `chi0`, the last must reach `chi1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ChainFile", into = "ChainFile")]
pub struct Chain {
    graphs: Vec<Graph>,
    limits: BTreeSet<usize>,
    chi0: u32,
    chi1: u32,
}

/// Wire format:
/// `{"graphs": [...], "limits": [i, ...], "chi0": c, "chi1": c}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChainFile {
    graphs: Vec<Graph>,
    limits: Vec<usize>,
    chi0: u32,
    chi1: u32,
}

impl TryFrom<ChainFile> for Chain {
    type Error = Error;

    fn try_from(f: ChainFile) -> Result<Chain> {
        Chain::new(f.graphs, &f.limits, f.chi0, f.chi1)
    }
}

impl From<Chain> for ChainFile {
    fn from(c: Chain) -> ChainFile {
        ChainFile {
            graphs: c.graphs,
            limits: c.limits.into_iter().collect(),
            chi0: c.chi0,
            chi1: c.chi1,
        }
    }
}

impl Chain {
    /// Build a chain. Node sets must increase, every graph must be the
    /// last graph induced on its nodes, and each declared limit index
    /// must hold exactly the union of its predecessors' nodes.
    pub fn new(graphs: Vec<Graph>, limits: &[usize], chi0: u32, chi1: u32) -> Result<Chain> {
        if graphs.is_empty() {
            return Err(Error::InvalidArgument("chain has no graphs".into()));
        }
        if chi0 == 0 || chi1 < chi0 {
            return Err(Error::InvalidArgument(format!(
                "thresholds must satisfy 1 <= chi0 <= chi1, got {chi0}, {chi1}"
            )));
        }
        let node_sets: Vec<BTreeSet<String>> = graphs
            .iter()
            .map(|g| g.nodes().iter().cloned().collect())
            .collect();
        for i in 1..graphs.len() {
            if !node_sets[i - 1].is_subset(&node_sets[i]) {
                return Err(Error::InvalidArgument(format!(
                    "graph {} drops nodes of graph {}",
                    i,
                    i - 1
                )));
            }
        }
        let last = graphs.len() - 1;
        for (i, g) in graphs.iter().enumerate() {
            if g != &graphs[last].induced_subgraph(&node_sets[i])? {
                return Err(Error::InvalidArgument(format!(
                    "graph {i} is not the last graph induced on its nodes"
                )));
            }
        }
        let limits: BTreeSet<usize> = limits.iter().copied().collect();
        for &i in &limits {
            if i >= graphs.len() {
                return Err(Error::InvalidArgument(format!(
                    "limit index {i} out of range"
                )));
            }
            let union: BTreeSet<String> = node_sets[..i]
                .iter()
                .flat_map(|s| s.iter().cloned())
                .collect();
            if node_sets[i] != union {
                return Err(Error::InvalidArgument(format!(
                    "limit index {i} does not equal the union of its predecessors"
                )));
            }
        }
        Ok(Chain {
            graphs,
            limits,
            chi0,
            chi1,
        })
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn limits(&self) -> &BTreeSet<usize> {
        &self.limits
    }

    pub fn chi0(&self) -> u32 {
        self.chi0
    }

    pub fn chi1(&self) -> u32 {
        self.chi1
    }

    pub fn last(&self) -> &Graph {
        self.graphs.last().expect("chains are nonempty")
    }
}

/// Why a chain fails its thresholds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "breach", rename_all = "snake_case")]
pub enum ChainBreach {
    /// An early graph already needs `chi0` colours.
    EarlyTooChromatic { index: usize, lower_bound: u32 },
    /// The last graph colours below `chi1`.
    TopTooColourable { upper_bound: u32 },
}

/// Certified chromatic facts when a chain holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEvidence {
    /// Certified upper bounds, one per early graph, each below `chi0`.
    pub early_upper: Vec<u32>,
    /// Certified lower bound of the last graph, at least `chi1`.
    pub top_lower: u32,
}

/// Does every early graph stay chromatically below `chi0` while the last
/// reaches `chi1`? `Undecided` names the first graph the solver could
/// not settle within `budget` steps.
pub fn check_inc_chain(chain: &Chain, budget: u64) -> Verdict<ChainEvidence, ChainBreach> {
    let last = chain.graphs.len() - 1;
    let mut early_upper = Vec::with_capacity(last);
    for (i, g) in chain.graphs[..last].iter().enumerate() {
        let chrom = chromatic_number(g, budget);
        if chrom.lower() >= chain.chi0 {
            return Verdict::Fails(ChainBreach::EarlyTooChromatic {
                index: i,
                lower_bound: chrom.lower(),
            });
        }
        if chrom.upper() >= chain.chi0 {
            return Verdict::Undecided(format!(
                "graph {i} undecided between {} and {} against chi0 = {}",
                chrom.lower(),
                chrom.upper(),
                chain.chi0
            ));
        }
        early_upper.push(chrom.upper());
    }
    let top = chromatic_number(chain.last(), budget);
    if top.upper() < chain.chi1 {
        return Verdict::Fails(ChainBreach::TopTooColourable {
            upper_bound: top.upper(),
        });
    }
    if top.lower() < chain.chi1 {
        return Verdict::Undecided(format!(
            "last graph undecided between {} and {} against chi1 = {}",
            top.lower(),
            top.upper(),
            chain.chi1
        ));
    }
    Verdict::Holds(ChainEvidence {
        early_upper,
        top_lower: top.lower(),
    })
}

/// Why a bracket fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "breach", rename_all = "snake_case")]
pub enum BracketBreach {
    /// A small induced subgraph already needs `chi` colours.
    SmallTooChromatic { nodes: Vec<String>, lower_bound: u32 },
    /// The whole graph colours below `chi`.
    WholeTooColourable { upper_bound: u32 },
}

/// Certified facts when a bracket holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketEvidence {
    pub whole_lower: u32,
    pub scan: ScanGrade,
}

/// Subset scans switch to sampling above this many subsets.
pub const EXHAUSTIVE_SUBSET_LIMIT: u128 = 1 << 15;

/// Does the whole graph need `chi` colours while every induced subgraph
/// on fewer than `lambda` nodes colours below `chi`? Chromatic demand is
/// monotone under induced subgraphs, so only subsets of size
/// `min(lambda - 1, n)` are scanned: exhaustively when there are at most
/// [`EXHAUSTIVE_SUBSET_LIMIT`], otherwise `samples` seeded draws.
pub fn check_inc_bracket(
    g: &Graph,
    lambda: u32,
    chi: u32,
    budget: u64,
    samples: u64,
    rng: &mut impl Rng,
) -> Result<Verdict<BracketEvidence, BracketBreach>> {
    if lambda == 0 || chi == 0 {
        return Err(Error::InvalidArgument(
            "lambda and chi must be positive".into(),
        ));
    }
    let whole = chromatic_number(g, budget);
    if whole.upper() < chi {
        return Ok(Verdict::Fails(BracketBreach::WholeTooColourable {
            upper_bound: whole.upper(),
        }));
    }
    if whole.lower() < chi {
        return Ok(Verdict::Undecided(format!(
            "whole graph undecided between {} and {} against chi = {}",
            whole.lower(),
            whole.upper(),
            chi
        )));
    }

    let n = g.node_count();
    let m = ((lambda - 1) as usize).min(n);
    let check_subset = |nodes: &BTreeSet<String>| -> Result<Option<Verdict<(), BracketBreach>>> {
        let sub = g.induced_subgraph(nodes)?;
        let chrom = chromatic_number(&sub, budget);
        if chrom.lower() >= chi {
            return Ok(Some(Verdict::Fails(BracketBreach::SmallTooChromatic {
                nodes: nodes.iter().cloned().collect(),
                lower_bound: chrom.lower(),
            })));
        }
        if chrom.upper() >= chi {
            return Ok(Some(Verdict::Undecided(format!(
                "subgraph on {nodes:?} undecided against chi = {chi}"
            ))));
        }
        Ok(None)
    };

    let scan = if binomial(n, m) <= EXHAUSTIVE_SUBSET_LIMIT {
        use itertools::Itertools;
        for subset in (0..n).combinations(m) {
            let nodes: BTreeSet<String> =
                subset.iter().map(|&i| g.name(i).to_string()).collect();
            if let Some(v) = check_subset(&nodes)? {
                return Ok(v.map_holds(|_| unreachable!("subset checks never hold")));
            }
        }
        ScanGrade::Exhaustive
    } else {
        for _ in 0..samples {
            let subset = rand::seq::index::sample(rng, n, m);
            let nodes: BTreeSet<String> =
                subset.iter().map(|i| g.name(i).to_string()).collect();
            if let Some(v) = check_subset(&nodes)? {
                return Ok(v.map_holds(|_| unreachable!("subset checks never hold")));
            }
        }
        ScanGrade::Sampled { tried: samples }
    };
    Ok(Verdict::Holds(BracketEvidence {
        whole_lower: whole.lower(),
        scan,
    }))
}

fn binomial(n: usize, m: usize) -> u128 {
    let mut out: u128 = 1;
    for k in 0..m.min(n - m) {
        out = out.saturating_mul((n - k) as u128) / (k as u128 + 1);
        if out > EXHAUSTIVE_SUBSET_LIMIT {
            return u128::MAX;
        }
    }
    out
}

/// A split of a graph's nodes into parts claimed to peel cheaply: each
/// part's induced subgraph is claimed to have colouring number at most
/// `bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    pub parts: Vec<Vec<String>>,
    pub bound: u32,
}

impl PartitionCertificate {
    /// Do the parts partition the graph's nodes?
    pub fn covers(&self, g: &Graph) -> Result<()> {
        let mut seen = BTreeSet::new();
        for part in &self.parts {
            for name in part {
                if g.index_of(name).is_none() {
                    return Err(Error::DomainMismatch(format!(
                        "certificate names unknown node {name:?}"
                    )));
                }
                if !seen.insert(name.clone()) {
                    return Err(Error::InvalidArgument(format!(
                        "certificate repeats node {name:?}"
                    )));
                }
            }
        }
        if seen.len() != g.node_count() {
            return Err(Error::InvalidArgument(format!(
                "certificate covers {} of {} nodes",
                seen.len(),
                g.node_count()
            )));
        }
        Ok(())
    }
}

/// First part that peels worse than its certificate claims.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartDefect {
    pub part_index: usize,
    pub colouring_number: u32,
}

/// Check a partition certificate: the parts must partition the nodes
/// (an error otherwise, the certificate is malformed) and each part must
/// peel within the claimed bound. Exact; never undecided.
pub fn verify_partition_certificate(
    g: &Graph,
    cert: &PartitionCertificate,
) -> Result<Verdict<(), PartDefect>> {
    cert.covers(g)?;
    for (part_index, part) in cert.parts.iter().enumerate() {
        let nodes: BTreeSet<String> = part.iter().cloned().collect();
        let sub = g.induced_subgraph(&nodes)?;
        let value = colouring_number(&sub);
        if value > cert.bound {
            return Ok(Verdict::Fails(PartDefect {
                part_index,
                colouring_number: value,
            }));
        }
    }
    Ok(Verdict::Holds(()))
}

/// Why a plus-chain fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "breach", rename_all = "snake_case")]
pub enum PlusBreach {
    /// A certificate claims a bound at or above `chi0`.
    BoundTooLoose { index: usize, bound: u32 },
    /// A part of an early graph peels worse than claimed.
    PartTooThick { index: usize, defect: PartDefect },
    /// The last graph colours below `chi1`.
    TopTooColourable { upper_bound: u32 },
}

/// Evidence for the plus form: early graphs decompose into parts of
/// small colouring number, the top still needs many colours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlusEvidence {
    /// Parts per early graph.
    pub part_counts: Vec<usize>,
    pub top_lower: u32,
}

/// The strengthened chain check: each early graph carries a partition
/// into parts of colouring number at most its certificate's bound, with
/// every bound below `chi0`; the last graph must still reach `chi1`.
/// Bounding the colouring number bounds the chromatic number of every
/// subgraph of every part at once, which is why this form is stronger
/// than [`check_inc_chain`].
pub fn check_inc_plus(
    chain: &Chain,
    certs: &[PartitionCertificate],
    budget: u64,
) -> Result<Verdict<PlusEvidence, PlusBreach>> {
    let last = chain.graphs().len() - 1;
    if certs.len() != last {
        return Err(Error::InvalidArgument(format!(
            "expected {last} certificates (one per early graph), got {}",
            certs.len()
        )));
    }
    let mut part_counts = Vec::with_capacity(last);
    for (index, (g, cert)) in chain.graphs()[..last].iter().zip(certs).enumerate() {
        if cert.bound >= chain.chi0() {
            return Ok(Verdict::Fails(PlusBreach::BoundTooLoose {
                index,
                bound: cert.bound,
            }));
        }
        match verify_partition_certificate(g, cert)? {
            Verdict::Holds(()) => part_counts.push(cert.parts.len()),
            Verdict::Fails(defect) => {
                return Ok(Verdict::Fails(PlusBreach::PartTooThick { index, defect }))
            }
            Verdict::Undecided(reason) => return Ok(Verdict::Undecided(reason)),
        }
    }
    let top = chromatic_number(chain.last(), budget);
    if top.upper() < chain.chi1() {
        return Ok(Verdict::Fails(PlusBreach::TopTooColourable {
            upper_bound: top.upper(),
        }));
    }
    if top.lower() < chain.chi1() {
        return Ok(Verdict::Undecided(format!(
            "last graph undecided between {} and {} against chi1 = {}",
            top.lower(),
            top.upper(),
            chain.chi1()
        )));
    }
    Ok(Verdict::Holds(PlusEvidence {
        part_counts,
        top_lower: top.lower(),
    }))
}
