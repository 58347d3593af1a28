//! Relation systems and the freeness hierarchy.
//!
//! A relation system is a finite ground set together with `kappa` binary
//! irreflexive relations. A subset `B` is *free* when its elements can
//! be listed in some order and coloured with fewer than `kappa`-many
//! conflicts, precisely:
//!
//! * **precedence**: whenever `nu` relates into `eta` under any relation
//!   and both share a colour, `nu` comes earlier in the order;
//! * **exception bound**: for every `eta`, the set of relation indices
//!   `zeta` such that some earlier `nu` with the same colour relates into
//!   `eta` under `zeta` (its *exception set*) has size `< kappa`.
//!
//! *Strongly free* asks for a colouring for **every** order; *weakly
//! free* drops the order from the exception set. All three deciders are
//! exhaustive within a [`SearchCap`] and answer `Undecided` when capped.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::verdict::{SearchCap, Verdict};

/// Finite ground set with `kappa` irreflexive binary relations.
/// The declared ground order is canonical: every deterministic
/// enumeration in this crate follows it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SystemFile", into = "SystemFile")]
pub struct RelationSystem {
    ground: Vec<String>,
    kappa: u32,
    relations: Vec<BTreeSet<(usize, usize)>>,
}

/// Wire format:
/// `{"ground": [...], "kappa": k, "relations": [[["u","v"], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemFile {
    ground: Vec<String>,
    kappa: u32,
    relations: Vec<Vec<(String, String)>>,
}

impl TryFrom<SystemFile> for RelationSystem {
    type Error = Error;

    fn try_from(f: SystemFile) -> Result<RelationSystem> {
        RelationSystem::new(f.ground, f.kappa, &f.relations)
    }
}

impl From<RelationSystem> for SystemFile {
    fn from(s: RelationSystem) -> SystemFile {
        SystemFile {
            relations: (0..s.kappa)
                .map(|z| {
                    s.relations[z as usize]
                        .iter()
                        .map(|&(u, v)| (s.ground[u].clone(), s.ground[v].clone()))
                        .collect()
                })
                .collect(),
            ground: s.ground,
            kappa: s.kappa,
        }
    }
}

impl RelationSystem {
    /// Build a system. Requires `kappa >= 1`, exactly `kappa` relations,
    /// unique ground identifiers, and irreflexive pairs over the ground.
    pub fn new(
        ground: Vec<String>,
        kappa: u32,
        relations: &[Vec<(String, String)>],
    ) -> Result<RelationSystem> {
        if kappa == 0 {
            return Err(Error::InvalidSystem("kappa must be at least 1".into()));
        }
        if relations.len() != kappa as usize {
            return Err(Error::InvalidSystem(format!(
                "expected {kappa} relations, got {}",
                relations.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for name in &ground {
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidSystem(format!(
                    "duplicate ground element {name:?}"
                )));
            }
        }
        let index: BTreeMap<&str, usize> = ground
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut rels = Vec::with_capacity(relations.len());
        for pairs in relations {
            let mut set = BTreeSet::new();
            for (a, b) in pairs {
                let u = *index.get(a.as_str()).ok_or_else(|| {
                    Error::InvalidSystem(format!("relation endpoint {a:?} not in ground"))
                })?;
                let v = *index.get(b.as_str()).ok_or_else(|| {
                    Error::InvalidSystem(format!("relation endpoint {b:?} not in ground"))
                })?;
                if u == v {
                    return Err(Error::InvalidSystem(format!(
                        "relation pair ({a:?}, {a:?}) is reflexive"
                    )));
                }
                set.insert((u, v));
            }
            rels.push(set);
        }
        Ok(RelationSystem {
            ground,
            kappa,
            relations: rels,
        })
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.ground.iter().position(|n| n == name)
    }

    pub fn element_name(&self, i: usize) -> &str {
        &self.ground[i]
    }

    /// Does `u` relate into `v` under relation `zeta`?
    pub fn related(&self, zeta: u32, u: usize, v: usize) -> bool {
        self.relations[zeta as usize].contains(&(u, v))
    }

    /// Pairs of relation `zeta`, as ground indices.
    pub fn relation_pairs(&self, zeta: u32) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.relations[zeta as usize].iter().copied()
    }

    /// Resolve a set of element names to ground indices, ascending.
    pub fn resolve_subset(&self, b: &BTreeSet<String>) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(b.len());
        for name in b {
            out.push(self.element_index(name).ok_or_else(|| {
                Error::DomainMismatch(format!("element {name:?} not in ground set"))
            })?);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Bitmask per ordered pair: bit `zeta` set when `u` relates into `v`
    /// under `zeta`. Used by the search loops; requires `kappa <= 64`.
    fn pair_masks(&self, elements: &[usize]) -> Vec<Vec<u64>> {
        let m = elements.len();
        let mut masks = vec![vec![0u64; m]; m];
        for z in 0..self.kappa {
            for (i, &u) in elements.iter().enumerate() {
                for (j, &v) in elements.iter().enumerate() {
                    if i != j && self.related(z, u, v) {
                        masks[i][j] |= 1 << z;
                    }
                }
            }
        }
        masks
    }
}

/// Finite stand-ins for the scale parameters a system instance is run
/// at: value space `mu`, subset threshold `lambda`, colour count `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub mu: u32,
    pub lambda: u32,
    pub kappa: u32,
}

impl Params {
    pub fn new(mu: u32, lambda: u32, kappa: u32) -> Result<Params> {
        if mu == 0 || lambda == 0 || kappa == 0 {
            return Err(Error::InvalidArgument(
                "scale parameters must be positive".into(),
            ));
        }
        Ok(Params { mu, lambda, kappa })
    }
}

/// A freeness witness: a colour map `h` on a subset together with a
/// linear order of that subset. Valid when it passes [`verify_witness`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessWitness {
    pub h: BTreeMap<String, u32>,
    pub order: Vec<String>,
}

impl FreenessWitness {
    /// The subset this witness speaks about.
    pub fn domain(&self) -> BTreeSet<String> {
        self.order.iter().cloned().collect()
    }
}

/// Which reading of the precedence clause a verification uses. The
/// global reading compares positions in the full order; the class
/// reading compares positions within each colour class only. They are
/// not asserted equivalent; both are available for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecedenceMode {
    GlobalOrder,
    WithinClass,
}

/// First defect found when a witness fails verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum WitnessViolation {
    /// A colour value is outside the allowed colour space.
    ColourOutOfRange {
        element: String,
        colour: u32,
        bound: u32,
    },
    /// `source` relates into `target` and shares its colour, yet does
    /// not come earlier in the order.
    PrecedenceBroken {
        source: String,
        target: String,
        relation: u32,
    },
    /// An element's exception set is not smaller than the colour bound.
    ExceptionOverflow {
        element: String,
        exceptions: Vec<u32>,
        bound: u32,
    },
}

/// Verification outcome for a witness whose shape was already accepted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "witness", rename_all = "snake_case")]
pub enum WitnessCheck {
    Valid,
    Violation(WitnessViolation),
}

impl WitnessCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, WitnessCheck::Valid)
    }
}

/// Check that `w.order` is a permutation of `b`, `w.h` is total on `b`,
/// and `b` lies in the ground set. Returns `b` as ground indices in the
/// order's sequence.
fn check_witness_shape(
    sys: &RelationSystem,
    b: &BTreeSet<String>,
    w: &FreenessWitness,
) -> Result<Vec<usize>> {
    let order_set: BTreeSet<&String> = w.order.iter().collect();
    if order_set.len() != w.order.len() {
        return Err(Error::InvalidArgument("witness order repeats an element".into()));
    }
    if order_set.len() != b.len() || !b.iter().all(|e| order_set.contains(e)) {
        return Err(Error::InvalidArgument(
            "witness order is not a permutation of the subset".into(),
        ));
    }
    if w.h.len() != b.len() || !b.iter().all(|e| w.h.contains_key(e)) {
        return Err(Error::InvalidArgument(
            "witness colour map is not total on the subset".into(),
        ));
    }
    w.order
        .iter()
        .map(|name| {
            sys.element_index(name)
                .ok_or_else(|| Error::DomainMismatch(format!("element {name:?} not in ground set")))
        })
        .collect()
}

/// Exception set of `eta` under a witness: relation indices `zeta` such
/// that some `nu` earlier in the order, with the same colour, relates
/// into `eta` under `zeta`.
pub fn exception_set(
    sys: &RelationSystem,
    b: &BTreeSet<String>,
    eta: &str,
    w: &FreenessWitness,
) -> Result<BTreeSet<u32>> {
    let seq = check_witness_shape(sys, b, w)?;
    let pos = w
        .order
        .iter()
        .position(|n| n == eta)
        .ok_or_else(|| Error::DomainMismatch(format!("element {eta:?} not in the subset")))?;
    let eta_idx = seq[pos];
    let eta_colour = w.h[eta];
    let mut out = BTreeSet::new();
    for z in 0..sys.kappa() {
        for (p, &nu_idx) in seq.iter().enumerate().take(pos) {
            if w.h[&w.order[p]] == eta_colour && sys.related(z, nu_idx, eta_idx) {
                out.insert(z);
                break;
            }
        }
    }
    Ok(out)
}

/// Order-free exception set: relation indices `zeta` such that some
/// element of `b` with `eta`'s colour relates into `eta` under `zeta`.
pub fn weak_exception_set(
    sys: &RelationSystem,
    b: &BTreeSet<String>,
    eta: &str,
    h: &BTreeMap<String, u32>,
) -> Result<BTreeSet<u32>> {
    let indices = sys.resolve_subset(b)?;
    if h.len() != b.len() || !b.iter().all(|e| h.contains_key(e)) {
        return Err(Error::InvalidArgument(
            "colour map is not total on the subset".into(),
        ));
    }
    let eta_idx = sys
        .element_index(eta)
        .filter(|_| b.contains(eta))
        .ok_or_else(|| Error::DomainMismatch(format!("element {eta:?} not in the subset")))?;
    let eta_colour = h[eta];
    let mut out = BTreeSet::new();
    for z in 0..sys.kappa() {
        for &nu_idx in &indices {
            if nu_idx != eta_idx
                && h[sys.element_name(nu_idx)] == eta_colour
                && sys.related(z, nu_idx, eta_idx)
            {
                out.insert(z);
                break;
            }
        }
    }
    Ok(out)
}

/// Verify a witness against the standard colour space (`kappa`) with the
/// global precedence reading.
pub fn verify_witness(
    sys: &RelationSystem,
    b: &BTreeSet<String>,
    w: &FreenessWitness,
) -> Result<WitnessCheck> {
    verify_witness_bounded(sys, b, w, sys.kappa(), PrecedenceMode::GlobalOrder)
}

/// Verify a witness against an explicit colour space `bound`. A witness
/// produced from a free decomposition naturally lives at `kappa * kappa`
/// colours; passing that bound here checks exactly that statement. The
/// exception bound is always the system's `kappa`: exception sets hold
/// relation indices, so a wider bound would make the clause vacuous.
pub fn verify_witness_bounded(
    sys: &RelationSystem,
    b: &BTreeSet<String>,
    w: &FreenessWitness,
    bound: u32,
    mode: PrecedenceMode,
) -> Result<WitnessCheck> {
    let seq = check_witness_shape(sys, b, w)?;
    let colours: Vec<u32> = w.order.iter().map(|n| w.h[n]).collect();
    for (p, &c) in colours.iter().enumerate() {
        if c >= bound {
            return Ok(WitnessCheck::Violation(WitnessViolation::ColourOutOfRange {
                element: w.order[p].clone(),
                colour: c,
                bound,
            }));
        }
    }
    // Position of each listed element under the chosen precedence
    // reading: its index in the full order, or within its colour class.
    let position: Vec<usize> = match mode {
        PrecedenceMode::GlobalOrder => (0..seq.len()).collect(),
        PrecedenceMode::WithinClass => {
            let mut next: BTreeMap<u32, usize> = BTreeMap::new();
            colours
                .iter()
                .map(|&c| {
                    let slot = next.entry(c).or_insert(0);
                    let p = *slot;
                    *slot += 1;
                    p
                })
                .collect()
        }
    };
    for z in 0..sys.kappa() {
        for (i, &u) in seq.iter().enumerate() {
            for (j, &v) in seq.iter().enumerate() {
                if i != j
                    && colours[i] == colours[j]
                    && sys.related(z, u, v)
                    && position[i] >= position[j]
                {
                    return Ok(WitnessCheck::Violation(WitnessViolation::PrecedenceBroken {
                        source: w.order[i].clone(),
                        target: w.order[j].clone(),
                        relation: z,
                    }));
                }
            }
        }
    }
    for (j, eta) in w.order.iter().enumerate() {
        let mut exceptions = BTreeSet::new();
        for z in 0..sys.kappa() {
            for i in 0..seq.len() {
                if position[i] < position[j]
                    && colours[i] == colours[j]
                    && sys.related(z, seq[i], seq[j])
                {
                    exceptions.insert(z);
                    break;
                }
            }
        }
        if exceptions.len() as u32 >= sys.kappa() {
            return Ok(WitnessCheck::Violation(WitnessViolation::ExceptionOverflow {
                element: eta.clone(),
                exceptions: exceptions.into_iter().collect(),
                bound: sys.kappa(),
            }));
        }
    }
    Ok(WitnessCheck::Valid)
}

/// Shared guard for the exhaustive searches.
fn check_cap(sys: &RelationSystem, size: usize, limit: usize, cap: &SearchCap) -> Option<String> {
    if size > limit {
        Some(format!("subset size {size} exceeds cap {limit}"))
    } else if sys.kappa() > cap.max_kappa {
        Some(format!(
            "kappa {} exceeds cap {}",
            sys.kappa(),
            cap.max_kappa
        ))
    } else {
        None
    }
}

/// Depth-first search for a witness over a fixed element sequence
/// problem: positions are filled left to right, each with an element and
/// a colour; both defect clauses are checked incrementally. Returns the
/// first witness in the deterministic enumeration, `Ok(None)` when the
/// search space is exhausted, or `Err(steps)` when the budget runs out.
struct WitnessSearch<'a> {
    masks: &'a [Vec<u64>],
    kappa: u32,
    /// `fixed_order[pos] = element slot` when the order is imposed;
    /// empty when the search also chooses the order.
    fixed_order: Option<&'a [usize]>,
    steps: u64,
    max_steps: u64,
}

enum SearchEnd {
    Found(Vec<(usize, u32)>),
    Exhausted,
    OutOfBudget,
}

impl<'a> WitnessSearch<'a> {
    fn run(&mut self) -> SearchEnd {
        let m = self.masks.len();
        let mut placed: Vec<(usize, u32)> = Vec::with_capacity(m);
        let mut used = vec![false; m];
        match self.extend(&mut placed, &mut used) {
            Some(true) => SearchEnd::Found(placed),
            Some(false) => SearchEnd::Exhausted,
            None => SearchEnd::OutOfBudget,
        }
    }

    /// `Some(true)` found, `Some(false)` exhausted, `None` out of budget.
    fn extend(&mut self, placed: &mut Vec<(usize, u32)>, used: &mut Vec<bool>) -> Option<bool> {
        let m = self.masks.len();
        if placed.len() == m {
            return Some(true);
        }
        let pos = placed.len();
        let candidates: Vec<usize> = match self.fixed_order {
            Some(order) => vec![order[pos]],
            None => (0..m).filter(|&x| !used[x]).collect(),
        };
        for x in candidates {
            for c in 0..self.kappa {
                if self.steps >= self.max_steps {
                    return None;
                }
                self.steps += 1;
                if !self.admissible(placed, x, c) {
                    continue;
                }
                placed.push((x, c));
                used[x] = true;
                match self.extend(placed, used) {
                    Some(true) => return Some(true),
                    Some(false) => {}
                    None => return None,
                }
                used[x] = false;
                placed.pop();
            }
        }
        Some(false)
    }

    /// May `x` take colour `c` at the end of the current prefix?
    /// Precedence: `x` must not relate into an earlier element of the
    /// same colour. Exception bound: the relations along which earlier
    /// same-coloured elements relate into `x` must number fewer than
    /// `kappa`. Both conditions are final once `x` is placed, so
    /// checking them here prunes exactly the dead branches.
    fn admissible(&self, placed: &[(usize, u32)], x: usize, c: u32) -> bool {
        let mut exceptions = 0u64;
        for &(y, cy) in placed {
            if cy != c {
                continue;
            }
            if self.masks[x][y] != 0 {
                return false;
            }
            exceptions |= self.masks[y][x];
        }
        (exceptions.count_ones() as u32) < self.kappa
    }
}

/// Is `b` free? Exhaustive search over orders and colourings with
/// incremental pruning; the returned witness is the first one in the
/// deterministic (element, colour) depth-first enumeration.
pub fn is_free(
    sys: &RelationSystem,
    b: &BTreeSet<String>,
    cap: &SearchCap,
) -> Result<Verdict<FreenessWitness, ()>> {
    let elements = sys.resolve_subset(b)?;
    if let Some(reason) = check_cap(sys, elements.len(), cap.max_elements, cap) {
        return Ok(Verdict::Undecided(reason));
    }
    let masks = sys.pair_masks(&elements);
    let mut search = WitnessSearch {
        masks: &masks,
        kappa: sys.kappa(),
        fixed_order: None,
        steps: 0,
        max_steps: cap.max_steps,
    };
    Ok(match search.run() {
        SearchEnd::Found(placed) => Verdict::Holds(FreenessWitness {
            h: placed
                .iter()
                .map(|&(x, c)| (sys.element_name(elements[x]).to_string(), c))
                .collect(),
            order: placed
                .iter()
                .map(|&(x, _)| sys.element_name(elements[x]).to_string())
                .collect(),
        }),
        SearchEnd::Exhausted => Verdict::Fails(()),
        SearchEnd::OutOfBudget => {
            Verdict::Undecided(format!("step budget {} exhausted", cap.max_steps))
        }
    })
}

/// Certificate for strong freeness: one witness per order, listed in the
/// deterministic order enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongCertificate {
    pub witnesses: Vec<FreenessWitness>,
}

/// An order that admits no colour map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongCounterexample {
    pub order: Vec<String>,
}

/// Is `b` strongly free: does every order of `b` admit a colour map?
/// Orders are scanned in lexicographic element order; the certificate
/// maps each order to its first admissible colour map.
pub fn is_strongly_free(
    sys: &RelationSystem,
    b: &BTreeSet<String>,
    cap: &SearchCap,
) -> Result<Verdict<StrongCertificate, StrongCounterexample>> {
    let elements = sys.resolve_subset(b)?;
    if let Some(reason) = check_cap(sys, elements.len(), cap.max_elements_strong, cap) {
        return Ok(Verdict::Undecided(reason));
    }
    let masks = sys.pair_masks(&elements);
    let orders = permutations(elements.len());
    // Each order gets its own budget, so an out-of-budget answer does
    // not depend on how the scan was scheduled.
    let results: Vec<SearchEnd> = par::map_indices(orders.len(), |i| {
        let mut search = WitnessSearch {
            masks: &masks,
            kappa: sys.kappa(),
            fixed_order: Some(&orders[i]),
            steps: 0,
            max_steps: cap.max_steps,
        };
        search.run()
    });
    let mut witnesses = Vec::with_capacity(results.len());
    for (i, end) in results.into_iter().enumerate() {
        let name_order = |order: &[usize]| -> Vec<String> {
            order
                .iter()
                .map(|&x| sys.element_name(elements[x]).to_string())
                .collect()
        };
        match end {
            SearchEnd::Found(placed) => witnesses.push(FreenessWitness {
                h: placed
                    .iter()
                    .map(|&(x, c)| (sys.element_name(elements[x]).to_string(), c))
                    .collect(),
                order: name_order(&orders[i]),
            }),
            SearchEnd::Exhausted => {
                return Ok(Verdict::Fails(StrongCounterexample {
                    order: name_order(&orders[i]),
                }))
            }
            SearchEnd::OutOfBudget => {
                return Ok(Verdict::Undecided(format!(
                    "step budget {} exhausted on one order",
                    cap.max_steps
                )))
            }
        }
    }
    Ok(Verdict::Holds(StrongCertificate { witnesses }))
}

/// All permutations of `0..m` in lexicographic order.
fn permutations(m: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..m).permutations(m).collect()
}

/// Colour map witnessing weak freeness (no order involved).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakWitness {
    pub h: BTreeMap<String, u32>,
}

/// Is `b` weakly free: is there a colour map whose order-free exception
/// sets are all smaller than `kappa`?
pub fn is_weakly_free(
    sys: &RelationSystem,
    b: &BTreeSet<String>,
    cap: &SearchCap,
) -> Result<Verdict<WeakWitness, ()>> {
    let elements = sys.resolve_subset(b)?;
    if let Some(reason) = check_cap(sys, elements.len(), cap.max_elements, cap) {
        return Ok(Verdict::Undecided(reason));
    }
    let masks = sys.pair_masks(&elements);
    let m = elements.len();
    let kappa = sys.kappa();
    let mut colours: Vec<u32> = Vec::with_capacity(m);
    let mut steps = 0u64;

    // Exception masks only grow as colours are added, so a prefix that
    // already overflows can be pruned.
    fn overflow(masks: &[Vec<u64>], colours: &[u32], kappa: u32) -> bool {
        let placed = colours.len();
        for i in 0..placed {
            let mut exc = 0u64;
            for j in 0..placed {
                if i != j && colours[i] == colours[j] {
                    exc |= masks[j][i];
                }
            }
            if exc.count_ones() as u32 >= kappa {
                return true;
            }
        }
        false
    }

    fn descend(
        masks: &[Vec<u64>],
        colours: &mut Vec<u32>,
        m: usize,
        kappa: u32,
        steps: &mut u64,
        max_steps: u64,
    ) -> Option<bool> {
        if colours.len() == m {
            return Some(true);
        }
        for c in 0..kappa {
            if *steps >= max_steps {
                return None;
            }
            *steps += 1;
            colours.push(c);
            if !overflow(masks, colours, kappa) {
                match descend(masks, colours, m, kappa, steps, max_steps) {
                    Some(true) => return Some(true),
                    Some(false) => {}
                    None => return None,
                }
            }
            colours.pop();
        }
        Some(false)
    }

    Ok(
        match descend(&masks, &mut colours, m, kappa, &mut steps, cap.max_steps) {
            Some(true) => Verdict::Holds(WeakWitness {
                h: colours
                    .iter()
                    .enumerate()
                    .map(|(x, &c)| (sys.element_name(elements[x]).to_string(), c))
                    .collect(),
            }),
            Some(false) => Verdict::Fails(()),
            None => Verdict::Undecided(format!("step budget {} exhausted", cap.max_steps)),
        },
    )
}

/// A subset found non-free during a lambda-freeness scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonFreeSubset {
    pub elements: Vec<String>,
}

/// Is every subset of size `< lambda` free? On failure reports a minimal
/// non-free subset (smallest size, then first in the subset enumeration
/// by ground position). Freeness is monotone under subsets, so the scan
/// visits sizes in ascending order and stops at the first defect.
pub fn check_lambda_free(
    sys: &RelationSystem,
    lambda: u32,
    cap: &SearchCap,
) -> Result<Verdict<(), NonFreeSubset>> {
    use itertools::Itertools;
    let n = sys.ground().len();
    let top = (lambda as usize).saturating_sub(1).min(n);
    for size in 1..=top {
        let subsets: Vec<Vec<usize>> = (0..n).combinations(size).collect();
        let verdicts: Vec<Verdict<FreenessWitness, ()>> =
            par::map_indices(subsets.len(), |i| {
                let b: BTreeSet<String> = subsets[i]
                    .iter()
                    .map(|&x| sys.element_name(x).to_string())
                    .collect();
                is_free(sys, &b, cap).expect("subset of the ground set is well formed")
            });
        for (i, v) in verdicts.into_iter().enumerate() {
            let named = || -> Vec<String> {
                subsets[i]
                    .iter()
                    .map(|&x| sys.element_name(x).to_string())
                    .collect()
            };
            match v {
                Verdict::Holds(_) => {}
                Verdict::Fails(()) => {
                    return Ok(Verdict::Fails(NonFreeSubset { elements: named() }))
                }
                Verdict::Undecided(reason) => {
                    return Ok(Verdict::Undecided(format!(
                        "subset {:?} undecided: {reason}",
                        named()
                    )))
                }
            }
        }
    }
    Ok(Verdict::Holds(()))
}

/// Positive payload of a chain-witness check: a freeness witness per
/// chain member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainCertificate {
    pub member_witnesses: Vec<FreenessWitness>,
}

/// Which clause a chain witness broke.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "defect", rename_all = "snake_case")]
pub enum ChainDefect {
    /// A chain member is not free.
    MemberNotFree { index: usize, members: Vec<String> },
    /// The full ground set is free, so the chain cannot witness
    /// non-freeness of the whole.
    GroundIsFree { witness: FreenessWitness },
}

/// Check a putative incompactness witness: an increasing chain of
/// subsets with union the ground set, each member free, while the ground
/// set itself is not free.
///
/// At this crate's finite scale the last member of such a chain *is* the
/// ground set, so the two semantic clauses exclude each other and the
/// check can never hold; it reports precisely which clause broke, which
/// is the finite content of the definition. Structural defects (chain
/// not increasing, union not the ground set) are input errors.
pub fn verify_chain_witness(
    sys: &RelationSystem,
    chain: &[BTreeSet<String>],
    cap: &SearchCap,
) -> Result<Verdict<ChainCertificate, ChainDefect>> {
    if chain.is_empty() {
        return Err(Error::InvalidArgument("chain is empty".into()));
    }
    for member in chain {
        sys.resolve_subset(member)?;
    }
    for i in 1..chain.len() {
        if !chain[i - 1].is_subset(&chain[i]) {
            return Err(Error::InvalidArgument(format!(
                "chain member {} is not a subset of member {}",
                i - 1,
                i
            )));
        }
    }
    let union: BTreeSet<String> = chain.iter().flatten().cloned().collect();
    let ground: BTreeSet<String> = sys.ground().iter().cloned().collect();
    if union != ground {
        return Err(Error::InvalidArgument(
            "chain union is not the ground set".into(),
        ));
    }
    let mut member_witnesses = Vec::with_capacity(chain.len());
    for (index, member) in chain.iter().enumerate() {
        match is_free(sys, member, cap)? {
            Verdict::Holds(w) => member_witnesses.push(w),
            Verdict::Fails(()) => {
                return Ok(Verdict::Fails(ChainDefect::MemberNotFree {
                    index,
                    members: member.iter().cloned().collect(),
                }))
            }
            Verdict::Undecided(reason) => {
                return Ok(Verdict::Undecided(format!(
                    "chain member {index} undecided: {reason}"
                )))
            }
        }
    }
    match is_free(sys, &ground, cap)? {
        Verdict::Holds(witness) => Ok(Verdict::Fails(ChainDefect::GroundIsFree { witness })),
        Verdict::Fails(()) => Ok(Verdict::Holds(ChainCertificate { member_witnesses })),
        Verdict::Undecided(reason) => Ok(Verdict::Undecided(format!(
            "ground set undecided: {reason}"
        ))),
    }
}

/// Seeded random system: elements `e0..`, each ordered pair entering
/// each relation independently with probability `density`.
pub fn gen_random(
    elements: usize,
    kappa: u32,
    density: f64,
    rng: &mut impl rand::Rng,
) -> Result<RelationSystem> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidArgument(
            "density must lie in [0, 1]".into(),
        ));
    }
    let width = elements.saturating_sub(1).to_string().len();
    let ground: Vec<String> = (0..elements).map(|i| format!("e{i:0width$}")).collect();
    let relations: Vec<Vec<(String, String)>> = (0..kappa)
        .map(|_| {
            let mut pairs = Vec::new();
            for u in 0..elements {
                for v in 0..elements {
                    if u != v && rng.gen_bool(density) {
                        pairs.push((ground[u].clone(), ground[v].clone()));
                    }
                }
            }
            pairs
        })
        .collect();
    RelationSystem::new(ground, kappa, &relations)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    /// kappa = 1 system with the single pair (x, y).
    fn edge_system() -> RelationSystem {
        RelationSystem::new(
            vec!["x".into(), "y".into()],
            1,
            &[vec![("x".into(), "y".into())]],
        )
        .unwrap()
    }

    fn two_relation_system() -> RelationSystem {
        RelationSystem::new(
            vec!["x".into(), "y".into(), "z".into()],
            2,
            &[
                vec![("x".into(), "y".into())],
                vec![("y".into(), "z".into())],
            ],
        )
        .unwrap()
    }

    #[test]
    fn constructor_rejects_malformed_systems() {
        assert!(RelationSystem::new(vec!["x".into()], 0, &[]).is_err());
        assert!(RelationSystem::new(vec!["x".into()], 2, &[vec![]]).is_err());
        assert!(RelationSystem::new(
            vec!["x".into()],
            1,
            &[vec![("x".into(), "x".into())]],
        )
        .is_err());
        assert!(RelationSystem::new(
            vec!["x".into()],
            1,
            &[vec![("x".into(), "w".into())]],
        )
        .is_err());
        assert!(RelationSystem::new(vec!["x".into(), "x".into()], 1, &[vec![]]).is_err());
    }

    #[test]
    fn exception_sets_follow_order_and_colours() {
        let sys = RelationSystem::new(
            vec!["x".into(), "y".into()],
            2,
            &[vec![("x".into(), "y".into())], vec![]],
        )
        .unwrap();
        let w = FreenessWitness {
            h: [("x".to_string(), 0), ("y".to_string(), 0)].into(),
            order: vec!["x".into(), "y".into()],
        };
        let b = set(&["x", "y"]);
        assert_eq!(
            exception_set(&sys, &b, "y", &w).unwrap(),
            BTreeSet::from([0])
        );
        assert_eq!(exception_set(&sys, &b, "x", &w).unwrap(), BTreeSet::new());
        // Different colours empty the exception set.
        let w2 = FreenessWitness {
            h: [("x".to_string(), 0), ("y".to_string(), 1)].into(),
            order: vec!["x".into(), "y".into()],
        };
        assert_eq!(exception_set(&sys, &b, "y", &w2).unwrap(), BTreeSet::new());
    }

    #[test]
    fn weak_exception_set_ignores_order() {
        let sys = edge_system();
        let b = set(&["x", "y"]);
        let h: BTreeMap<String, u32> = [("x".to_string(), 0), ("y".to_string(), 0)].into();
        assert_eq!(
            weak_exception_set(&sys, &b, "y", &h).unwrap(),
            BTreeSet::from([0])
        );
        assert_eq!(weak_exception_set(&sys, &b, "x", &h).unwrap(), BTreeSet::new());
    }

    #[test]
    fn verify_witness_reports_first_defect() {
        let sys = edge_system();
        let b = set(&["x", "y"]);
        // Forward order, same colour: exception set of y is {0}, which is
        // not below the bound 1.
        let w = FreenessWitness {
            h: [("x".to_string(), 0), ("y".to_string(), 0)].into(),
            order: vec!["x".into(), "y".into()],
        };
        match verify_witness(&sys, &b, &w).unwrap() {
            WitnessCheck::Violation(WitnessViolation::ExceptionOverflow { element, .. }) => {
                assert_eq!(element, "y");
            }
            other => panic!("expected exception overflow, got {other:?}"),
        }
        // Reversed order: x relates into y but no longer precedes it.
        let w = FreenessWitness {
            h: [("x".to_string(), 0), ("y".to_string(), 0)].into(),
            order: vec!["y".into(), "x".into()],
        };
        match verify_witness(&sys, &b, &w).unwrap() {
            WitnessCheck::Violation(WitnessViolation::PrecedenceBroken {
                source,
                target,
                relation,
            }) => {
                assert_eq!((source.as_str(), target.as_str(), relation), ("x", "y", 0));
            }
            other => panic!("expected precedence violation, got {other:?}"),
        }
        // Colour out of the declared space.
        let w = FreenessWitness {
            h: [("x".to_string(), 0), ("y".to_string(), 7)].into(),
            order: vec!["x".into(), "y".into()],
        };
        assert!(matches!(
            verify_witness(&sys, &b, &w).unwrap(),
            WitnessCheck::Violation(WitnessViolation::ColourOutOfRange { .. })
        ));
    }

    #[test]
    fn verify_witness_rejects_malformed_shapes() {
        let sys = edge_system();
        let b = set(&["x", "y"]);
        let w = FreenessWitness {
            h: [("x".to_string(), 0)].into(),
            order: vec!["x".into()],
        };
        assert!(verify_witness(&sys, &b, &w).is_err());
    }

    #[test]
    fn within_class_mode_agrees_on_these_witnesses() {
        let sys = two_relation_system();
        let b = set(&["x", "y", "z"]);
        let w = FreenessWitness {
            h: [
                ("x".to_string(), 0),
                ("y".to_string(), 1),
                ("z".to_string(), 0),
            ]
            .into(),
            order: vec!["x".into(), "y".into(), "z".into()],
        };
        let global =
            verify_witness_bounded(&sys, &b, &w, sys.kappa(), PrecedenceMode::GlobalOrder)
                .unwrap();
        let class = verify_witness_bounded(&sys, &b, &w, sys.kappa(), PrecedenceMode::WithinClass)
            .unwrap();
        assert_eq!(global, class);
        assert!(global.is_valid());
    }

    #[test]
    fn single_relation_pair_is_not_free() {
        let sys = edge_system();
        let verdict = is_free(&sys, &set(&["x", "y"]), &SearchCap::small()).unwrap();
        assert!(verdict.fails());
        // Each singleton is free.
        assert!(is_free(&sys, &set(&["x"]), &SearchCap::small())
            .unwrap()
            .holds());
    }

    #[test]
    fn found_witnesses_verify() {
        let sys = two_relation_system();
        let b = set(&["x", "y", "z"]);
        match is_free(&sys, &b, &SearchCap::small()).unwrap() {
            Verdict::Holds(w) => {
                assert!(verify_witness(&sys, &b, &w).unwrap().is_valid());
            }
            other => panic!("expected free, got {other:?}"),
        }
    }

    #[test]
    fn freeness_is_monotone_under_subsets_here() {
        let sys = two_relation_system();
        let cap = SearchCap::small();
        assert!(is_free(&sys, &set(&["x", "y", "z"]), &cap).unwrap().holds());
        for sub in [
            set(&["x", "y"]),
            set(&["y", "z"]),
            set(&["x", "z"]),
            set(&["x"]),
            set(&[]),
        ] {
            assert!(is_free(&sys, &sub, &cap).unwrap().holds());
        }
    }

    #[test]
    fn opposed_pairs_are_strongly_free_with_two_colours() {
        let sys = RelationSystem::new(
            vec!["x".into(), "y".into()],
            2,
            &[
                vec![("x".into(), "y".into())],
                vec![("y".into(), "x".into())],
            ],
        )
        .unwrap();
        let b = set(&["x", "y"]);
        match is_strongly_free(&sys, &b, &SearchCap::small()).unwrap() {
            Verdict::Holds(cert) => {
                assert_eq!(cert.witnesses.len(), 2);
                for w in &cert.witnesses {
                    assert!(verify_witness(&sys, &b, &w).unwrap().is_valid());
                }
            }
            other => panic!("expected strongly free, got {other:?}"),
        }
    }

    #[test]
    fn strong_counterexample_is_the_first_bad_order() {
        let sys = edge_system();
        match is_strongly_free(&sys, &set(&["x", "y"]), &SearchCap::small()).unwrap() {
            Verdict::Fails(cx) => assert_eq!(cx.order, vec!["x".to_string(), "y".to_string()]),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn weak_freeness_examples() {
        assert!(is_weakly_free(&edge_system(), &set(&["x", "y"]), &SearchCap::small())
            .unwrap()
            .fails());
        // One orientation per relation: a shared colour costs each element
        // only one exception, so the constant colouring already works.
        let one_way = RelationSystem::new(
            vec!["x".into(), "y".into()],
            2,
            &[
                vec![("x".into(), "y".into())],
                vec![("y".into(), "x".into())],
            ],
        )
        .unwrap();
        match is_weakly_free(&one_way, &set(&["x", "y"]), &SearchCap::small()).unwrap() {
            Verdict::Holds(w) => assert_eq!(w.h["x"], w.h["y"]),
            other => panic!("expected weakly free, got {other:?}"),
        }
        // Both orientations in both relations: a shared colour overflows
        // both exception sets, so any witness must separate the pair.
        let both_ways = RelationSystem::new(
            vec!["x".into(), "y".into()],
            2,
            &[
                vec![("x".into(), "y".into()), ("y".into(), "x".into())],
                vec![("x".into(), "y".into()), ("y".into(), "x".into())],
            ],
        )
        .unwrap();
        match is_weakly_free(&both_ways, &set(&["x", "y"]), &SearchCap::small()).unwrap() {
            Verdict::Holds(w) => assert_ne!(w.h["x"], w.h["y"]),
            other => panic!("expected weakly free, got {other:?}"),
        }
    }

    #[test]
    fn lambda_freeness_scans_report_minimal_defects() {
        let sys = edge_system();
        assert!(check_lambda_free(&sys, 2, &SearchCap::small())
            .unwrap()
            .holds());
        match check_lambda_free(&sys, 3, &SearchCap::small()).unwrap() {
            Verdict::Fails(defect) => {
                assert_eq!(defect.elements, vec!["x".to_string(), "y".to_string()]);
            }
            other => panic!("expected a non-free pair, got {other:?}"),
        }
    }

    #[test]
    fn caps_yield_undecided_not_guesses() {
        let sys = edge_system();
        let tiny = SearchCap {
            max_elements: 1,
            max_elements_strong: 1,
            max_kappa: 4,
            max_steps: 10,
        };
        assert!(is_free(&sys, &set(&["x", "y"]), &tiny)
            .unwrap()
            .is_undecided());
        let no_steps = SearchCap {
            max_steps: 0,
            ..SearchCap::small()
        };
        assert!(is_free(&sys, &set(&["x", "y"]), &no_steps)
            .unwrap()
            .is_undecided());
    }

    #[test]
    fn chain_witness_clauses_exclude_each_other() {
        // Last member equals the ground set and is not free: the member
        // clause breaks.
        let sys = edge_system();
        let chain = vec![set(&["x"]), set(&["x", "y"])];
        match verify_chain_witness(&sys, &chain, &SearchCap::small()).unwrap() {
            Verdict::Fails(ChainDefect::MemberNotFree { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected member defect, got {other:?}"),
        }
        // Free ground set: the non-freeness clause breaks instead.
        let sys = two_relation_system();
        let chain = vec![set(&["x"]), set(&["x", "y"]), set(&["x", "y", "z"])];
        match verify_chain_witness(&sys, &chain, &SearchCap::small()).unwrap() {
            Verdict::Fails(ChainDefect::GroundIsFree { witness }) => {
                assert!(verify_witness(&sys, &set(&["x", "y", "z"]), &witness)
                    .unwrap()
                    .is_valid());
            }
            other => panic!("expected ground-is-free defect, got {other:?}"),
        }
    }

    #[test]
    fn chain_witness_rejects_bad_shapes() {
        let sys = two_relation_system();
        // Not nested.
        let chain = vec![set(&["x", "y"]), set(&["y", "z"])];
        assert!(verify_chain_witness(&sys, &chain, &SearchCap::small()).is_err());
        // Union short of the ground set.
        let chain = vec![set(&["x"]), set(&["x", "y"])];
        assert!(verify_chain_witness(&sys, &chain, &SearchCap::small()).is_err());
    }

    #[test]
    fn params_must_be_positive() {
        assert!(Params::new(1, 1, 1).is_ok());
        assert!(Params::new(0, 1, 1).is_err());
        assert!(Params::new(1, 0, 1).is_err());
        assert!(Params::new(1, 1, 0).is_err());
    }

    #[test]
    fn system_json_round_trip() {
        let sys = two_relation_system();
        let text = serde_json::to_string(&sys).unwrap();
        let back: RelationSystem = serde_json::from_str(&text).unwrap();
        assert_eq!(sys, back);
    }
}
