//! Function families, transversals, and free decompositions.
//!
//! A family is a finite list of functions `kappa -> mu`, given as value
//! tuples. Members are identified by index; equal tuples are distinct
//! members. A *transversal* of a subfamily picks a value from each
//! member's range, all values distinct. A subfamily is *free for `k`
//! pieces* when it splits into `k` pieces that each have a transversal;
//! with `k = 1` this collapses to plain transversal existence.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::verdict::{SearchCap, Verdict};

/// Finite family of functions `kappa -> mu` as value tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FamilyFile", into = "FamilyFile")]
pub struct Family {
    kappa: u32,
    mu: u32,
    members: Vec<Vec<u32>>,
    normal: bool,
}

/// Wire format: `{"kappa": k, "mu": m, "members": [[v0, ...], ...]}`,
/// plus an optional `"normal": true` flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct FamilyFile {
    kappa: u32,
    mu: u32,
    members: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    normal: bool,
}

impl TryFrom<FamilyFile> for Family {
    type Error = Error;

    fn try_from(f: FamilyFile) -> Result<Family> {
        Family::new(f.kappa, f.mu, f.members, f.normal)
    }
}

impl From<Family> for FamilyFile {
    fn from(f: Family) -> FamilyFile {
        FamilyFile {
            kappa: f.kappa,
            mu: f.mu,
            members: f.members,
            normal: f.normal,
        }
    }
}

impl Family {
    /// Build a family: `kappa, mu >= 1`, every member a `kappa`-tuple of
    /// values below `mu`. With `normal` set, additionally require that
    /// distinct members have distinct ranges and that a value identifies
    /// the coordinate it appears at (per-coordinate value sets are
    /// pairwise disjoint).
    pub fn new(kappa: u32, mu: u32, members: Vec<Vec<u32>>, normal: bool) -> Result<Family> {
        if kappa == 0 || mu == 0 {
            return Err(Error::InvalidFamily("kappa and mu must be positive".into()));
        }
        for (i, member) in members.iter().enumerate() {
            if member.len() != kappa as usize {
                return Err(Error::InvalidFamily(format!(
                    "member {i} has {} coordinates, expected {kappa}",
                    member.len()
                )));
            }
            if let Some(&v) = member.iter().find(|&&v| v >= mu) {
                return Err(Error::InvalidFamily(format!(
                    "member {i} uses value {v}, outside 0..{mu}"
                )));
            }
        }
        if normal {
            let mut ranges = BTreeSet::new();
            for (i, member) in members.iter().enumerate() {
                let range: BTreeSet<u32> = member.iter().copied().collect();
                if !ranges.insert(range) {
                    return Err(Error::InvalidFamily(format!(
                        "normality violated: member {i} repeats an earlier range"
                    )));
                }
            }
            let mut owner: BTreeMap<u32, usize> = BTreeMap::new();
            for member in &members {
                for (coord, &v) in member.iter().enumerate() {
                    match owner.get(&v) {
                        Some(&c) if c != coord => {
                            return Err(Error::InvalidFamily(format!(
                                "normality violated: value {v} appears at coordinates {c} and {coord}"
                            )));
                        }
                        _ => {
                            owner.insert(v, coord);
                        }
                    }
                }
            }
        }
        Ok(Family {
            kappa,
            mu,
            members,
            normal,
        })
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_normal(&self) -> bool {
        self.normal
    }

    pub fn member(&self, i: usize) -> &[u32] {
        &self.members[i]
    }

    /// Value set of member `i`.
    pub fn range(&self, i: usize) -> BTreeSet<u32> {
        self.members[i].iter().copied().collect()
    }

    /// Validate a subfamily given as member indices: in range, no
    /// repeats. Returns the indices sorted ascending.
    pub fn resolve_subfamily(&self, sub: &[usize]) -> Result<Vec<usize>> {
        let mut out = sub.to_vec();
        out.sort_unstable();
        if out.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "subfamily repeats a member index".into(),
            ));
        }
        if let Some(&i) = out.iter().find(|&&i| i >= self.members.len()) {
            return Err(Error::InvalidArgument(format!(
                "member index {i} out of range (family has {})",
                self.members.len()
            )));
        }
        Ok(out)
    }

    /// All member indices.
    pub fn all(&self) -> Vec<usize> {
        (0..self.members.len()).collect()
    }
}

/// A choice of pairwise distinct values, one from each member's range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transversal {
    pub choice: BTreeMap<usize, u32>,
}

impl Transversal {
    /// Is this a valid transversal of `sub` in `fam`?
    pub fn is_valid(&self, fam: &Family, sub: &[usize]) -> bool {
        let Ok(sub) = fam.resolve_subfamily(sub) else {
            return false;
        };
        if self.choice.len() != sub.len() {
            return false;
        }
        let mut seen = BTreeSet::new();
        for &i in &sub {
            match self.choice.get(&i) {
                Some(&v) if fam.range(i).contains(&v) && seen.insert(v) => {}
                _ => return false,
            }
        }
        true
    }
}

/// Hall-violation certificate: a subfamily whose ranges jointly contain
/// fewer values than it has members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingSet {
    pub members: Vec<usize>,
    pub union_of_ranges: Vec<u32>,
}

/// Maximum matching members -> values by augmenting paths, deterministic
/// in member index order. Returns the value chosen per slot (position in
/// `ranges`).
pub(crate) fn max_matching(ranges: &[BTreeSet<u32>]) -> Vec<Option<u32>> {
    let mut member_of: BTreeMap<u32, usize> = BTreeMap::new();
    let mut value_of: Vec<Option<u32>> = vec![None; ranges.len()];
    for start in 0..ranges.len() {
        let mut visited: BTreeSet<u32> = BTreeSet::new();
        augment(start, ranges, &mut member_of, &mut value_of, &mut visited);
    }
    value_of
}

fn augment(
    slot: usize,
    ranges: &[BTreeSet<u32>],
    member_of: &mut BTreeMap<u32, usize>,
    value_of: &mut Vec<Option<u32>>,
    visited: &mut BTreeSet<u32>,
) -> bool {
    for &v in &ranges[slot] {
        if visited.contains(&v) {
            continue;
        }
        visited.insert(v);
        let free = match member_of.get(&v) {
            None => true,
            Some(&other) => augment(other, ranges, member_of, value_of, visited),
        };
        if free {
            member_of.insert(v, slot);
            value_of[slot] = Some(v);
            return true;
        }
    }
    false
}

/// Find a transversal of `sub`, or a blocking subfamily showing none
/// exists. Exact (bipartite matching); never undecided.
pub fn find_transversal(fam: &Family, sub: &[usize]) -> Result<Verdict<Transversal, BlockingSet>> {
    let sub = fam.resolve_subfamily(sub)?;
    let ranges: Vec<BTreeSet<u32>> = sub.iter().map(|&i| fam.range(i)).collect();
    let value_of = max_matching(&ranges);
    if value_of.iter().all(|v| v.is_some()) {
        return Ok(Verdict::Holds(Transversal {
            choice: sub
                .iter()
                .zip(&value_of)
                .map(|(&i, v)| (i, v.expect("all slots matched")))
                .collect(),
        }));
    }
    // An unmatched slot seeds the alternating-reachability argument:
    // every value seen from the blocked set is matched, and each matched
    // partner joins the set, so the set's ranges hold one value fewer
    // than it has members.
    let member_of: BTreeMap<u32, usize> = value_of
        .iter()
        .enumerate()
        .filter_map(|(slot, v)| v.map(|v| (v, slot)))
        .collect();
    let start = value_of
        .iter()
        .position(|v| v.is_none())
        .expect("an unmatched slot exists");
    let mut block: BTreeSet<usize> = BTreeSet::from([start]);
    let mut values: BTreeSet<u32> = BTreeSet::new();
    let mut frontier = vec![start];
    while let Some(slot) = frontier.pop() {
        for &v in &ranges[slot] {
            if values.insert(v) {
                let partner = member_of[&v];
                if block.insert(partner) {
                    frontier.push(partner);
                }
            }
        }
    }
    Ok(Verdict::Fails(BlockingSet {
        members: block.into_iter().map(|slot| sub[slot]).collect(),
        union_of_ranges: values.into_iter().collect(),
    }))
}

/// A split of a subfamily into pieces that each carry a transversal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// `pieces[p]` lists the member indices of piece `p`; trailing
    /// pieces may be empty.
    pub pieces: Vec<Vec<usize>>,
    /// One transversal per piece, empty for empty pieces.
    pub transversals: Vec<Transversal>,
}

impl Decomposition {
    /// Do the pieces partition `sub` and carry valid transversals?
    pub fn is_valid(&self, fam: &Family, sub: &[usize]) -> bool {
        let Ok(sub) = fam.resolve_subfamily(sub) else {
            return false;
        };
        if self.pieces.len() != self.transversals.len() {
            return false;
        }
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        for piece in &self.pieces {
            for &i in piece {
                if !seen.insert(i) {
                    return false;
                }
            }
        }
        if seen != sub.iter().copied().collect() {
            return false;
        }
        self.pieces
            .iter()
            .zip(&self.transversals)
            .all(|(piece, t)| t.is_valid(fam, piece))
    }

    /// Index of the piece containing member `i`, if any.
    pub fn piece_of(&self, i: usize) -> Option<usize> {
        self.pieces.iter().position(|p| p.contains(&i))
    }
}

/// Split `sub` into `pieces` parts, each with a transversal, by
/// backtracking. Members are placed in ascending range-size order
/// (fail-first); each placement keeps its piece matchable, checked by an
/// incremental augmenting step. Symmetric piece permutations are
/// skipped, so the all-in-one-piece split is found first whenever the
/// whole subfamily has a transversal.
pub fn is_free_family(
    fam: &Family,
    sub: &[usize],
    pieces: u32,
    cap: &SearchCap,
) -> Result<Verdict<Decomposition, ()>> {
    if pieces == 0 {
        return Err(Error::InvalidArgument("piece count must be positive".into()));
    }
    let sub = fam.resolve_subfamily(sub)?;
    let mut order: Vec<usize> = sub.clone();
    order.sort_by_key(|&i| (fam.range(i).len(), i));

    struct Piece {
        members: Vec<usize>,
        matching: BTreeMap<u32, usize>,
    }
    struct State<'f> {
        fam: &'f Family,
        order: Vec<usize>,
        pieces: Vec<Piece>,
        steps: u64,
        max_steps: u64,
        out_of_budget: bool,
    }
    impl<'f> State<'f> {
        fn place(&mut self, pos: usize) -> bool {
            if pos == self.order.len() {
                return true;
            }
            let member = self.order[pos];
            let mut used = 0;
            while used < self.pieces.len() && !self.pieces[used].members.is_empty() {
                used += 1;
            }
            let limit = (used + 1).min(self.pieces.len());
            for p in 0..limit {
                if self.steps >= self.max_steps {
                    self.out_of_budget = true;
                    return false;
                }
                self.steps += 1;
                let snapshot = self.pieces[p].matching.clone();
                if self.try_add(p, member) {
                    self.pieces[p].members.push(member);
                    if self.place(pos + 1) {
                        return true;
                    }
                    self.pieces[p].members.pop();
                }
                self.pieces[p].matching = snapshot;
                if self.out_of_budget {
                    return false;
                }
            }
            false
        }

        /// Augment the piece's matching to cover `member`. The existing
        /// matching already covers the piece, so one augmenting pass
        /// decides feasibility.
        fn try_add(&mut self, p: usize, member: usize) -> bool {
            let piece = &mut self.pieces[p];
            let mut slots: Vec<usize> = piece.members.clone();
            slots.push(member);
            let ranges: Vec<BTreeSet<u32>> = slots.iter().map(|&i| self.fam.range(i)).collect();
            // Rebuild matching keyed by slot position for the augment step.
            let mut member_of: BTreeMap<u32, usize> = BTreeMap::new();
            let mut value_of: Vec<Option<u32>> = vec![None; slots.len()];
            for (&v, &m) in &piece.matching {
                let slot = slots.iter().position(|&s| s == m).expect("matched member in piece");
                member_of.insert(v, slot);
                value_of[slot] = Some(v);
            }
            let mut visited = BTreeSet::new();
            let new_slot = slots.len() - 1;
            if augment(new_slot, &ranges, &mut member_of, &mut value_of, &mut visited) {
                piece.matching = member_of
                    .into_iter()
                    .map(|(v, slot)| (v, slots[slot]))
                    .collect();
                true
            } else {
                false
            }
        }
    }

    let mut state = State {
        fam,
        order,
        pieces: (0..pieces)
            .map(|_| Piece {
                members: Vec::new(),
                matching: BTreeMap::new(),
            })
            .collect(),
        steps: 0,
        max_steps: cap.max_steps,
        out_of_budget: false,
    };
    let found = state.place(0);
    if state.out_of_budget {
        return Ok(Verdict::Undecided(format!(
            "step budget {} exhausted",
            cap.max_steps
        )));
    }
    if !found {
        return Ok(Verdict::Fails(()));
    }
    let mut pieces_out = Vec::with_capacity(state.pieces.len());
    let mut transversals = Vec::with_capacity(state.pieces.len());
    for piece in &state.pieces {
        let mut members = piece.members.clone();
        members.sort_unstable();
        transversals.push(Transversal {
            choice: piece.matching.iter().map(|(&v, &m)| (m, v)).collect(),
        });
        pieces_out.push(members);
    }
    Ok(Verdict::Holds(Decomposition {
        pieces: pieces_out,
        transversals,
    }))
}

/// A subfamily of size `< lambda` with no transversal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockedSubfamily {
    pub members: Vec<usize>,
}

/// Does every subfamily of size `< lambda` have a transversal? On
/// failure reports a minimal blocked subfamily (smallest, then first in
/// index order). Transversal existence is monotone under subfamilies,
/// so scanning sizes upward finds a minimal defect first.
pub fn check_family_lambda_free(
    fam: &Family,
    lambda: u32,
) -> Result<Verdict<(), BlockedSubfamily>> {
    use itertools::Itertools;
    let n = fam.len();
    let top = (lambda as usize).saturating_sub(1).min(n);
    for size in 1..=top {
        let subs: Vec<Vec<usize>> = (0..n).combinations(size).collect();
        let blocked: Vec<bool> = par::map_indices(subs.len(), |i| {
            find_transversal(fam, &subs[i])
                .expect("indices are in range")
                .fails()
        });
        if let Some(i) = blocked.iter().position(|&b| b) {
            return Ok(Verdict::Fails(BlockedSubfamily {
                members: subs[i].clone(),
            }));
        }
    }
    Ok(Verdict::Holds(()))
}

/// Free decompositions for every prefix of an increasing chain of
/// subfamilies. This is the finite content of building a family up as a
/// union of free pieces; no limit behaviour is claimed.
pub fn check_family_chain(
    fam: &Family,
    chain: &[Vec<usize>],
    pieces: u32,
    cap: &SearchCap,
) -> Result<Verdict<Vec<Decomposition>, usize>> {
    if chain.is_empty() {
        return Err(Error::InvalidArgument("chain is empty".into()));
    }
    let mut previous: BTreeSet<usize> = BTreeSet::new();
    let mut decompositions = Vec::with_capacity(chain.len());
    for (index, link) in chain.iter().enumerate() {
        let members = fam.resolve_subfamily(link)?;
        let as_set: BTreeSet<usize> = members.iter().copied().collect();
        if !previous.is_subset(&as_set) {
            return Err(Error::InvalidArgument(format!(
                "chain member {index} does not contain member {}",
                index.saturating_sub(1)
            )));
        }
        previous = as_set;
        match is_free_family(fam, &members, pieces, cap)? {
            Verdict::Holds(d) => decompositions.push(d),
            Verdict::Fails(()) => return Ok(Verdict::Fails(index)),
            Verdict::Undecided(reason) => {
                return Ok(Verdict::Undecided(format!(
                    "chain member {index} undecided: {reason}"
                )))
            }
        }
    }
    Ok(Verdict::Holds(decompositions))
}

/// Pigeonhole family: `n + 1` members over `kappa = mu = n`, each a
/// cyclic shift of the identity tuple. All ranges equal the full value
/// set, so every subfamily of size `<= n` has a transversal while the
/// whole family, one member too many, has none.
pub fn gen_hall(n: u32) -> Result<Family> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let members: Vec<Vec<u32>> = (0..=n)
        .map(|i| (0..n).map(|c| (c + i) % n).collect())
        .collect();
    Family::new(n, n, members, false)
}

/// Binary-tree family: `2^k` members over `kappa = k`, coordinate `i`
/// holding an injective code of the member's first `i + 1` bits. Codes
/// for length-`l` prefixes live in `[2^l, 2^(l+1))`, so a value pins
/// down its coordinate and the family is normal.
pub fn gen_branches(k: u32) -> Result<Family> {
    if k == 0 || k > 16 {
        return Err(Error::InvalidArgument("k must be in 1..=16".into()));
    }
    let members: Vec<Vec<u32>> = (0..(1u32 << k))
        .map(|m| {
            (0..k)
                .map(|i| {
                    let prefix = m >> (k - 1 - i);
                    (1 << (i + 1)) | prefix
                })
                .collect()
        })
        .collect();
    Family::new(k, 1 << (k + 1), members, true)
}

/// Seeded random family: `count` members with uniform values.
pub fn gen_random(kappa: u32, mu: u32, count: usize, rng: &mut impl Rng) -> Result<Family> {
    if kappa == 0 || mu == 0 {
        return Err(Error::InvalidArgument("kappa and mu must be positive".into()));
    }
    let members = (0..count)
        .map(|_| (0..kappa).map(|_| rng.gen_range(0..mu)).collect())
        .collect();
    Family::new(kappa, mu, members, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constructor_rejects_malformed_families() {
        assert!(Family::new(0, 1, vec![], false).is_err());
        assert!(Family::new(2, 3, vec![vec![0]], false).is_err());
        assert!(Family::new(2, 3, vec![vec![0, 3]], false).is_err());
    }

    #[test]
    fn normality_is_validated() {
        // Same range twice.
        assert!(Family::new(1, 2, vec![vec![0], vec![0]], true).is_err());
        // Value 0 at two different coordinates.
        assert!(Family::new(2, 2, vec![vec![0, 1], vec![1, 0]], true).is_err());
        assert!(Family::new(2, 4, vec![vec![0, 2], vec![1, 3]], true).is_ok());
    }

    #[test]
    fn transversal_found_and_valid() {
        let fam = Family::new(2, 3, vec![vec![0, 1], vec![0, 2]], false).unwrap();
        match find_transversal(&fam, &[0, 1]).unwrap() {
            Verdict::Holds(t) => assert!(t.is_valid(&fam, &[0, 1])),
            other => panic!("expected transversal, got {other:?}"),
        }
    }

    #[test]
    fn blocking_set_certifies_failure() {
        // Two members with the single-value range {0}.
        let fam = gen_hall(1).unwrap();
        match find_transversal(&fam, &[0, 1]).unwrap() {
            Verdict::Fails(b) => {
                assert!(b.union_of_ranges.len() < b.members.len());
                assert_eq!(b.members, vec![0, 1]);
            }
            other => panic!("expected blocked, got {other:?}"),
        }
    }

    #[test]
    fn one_piece_freeness_is_transversal_existence() {
        let cap = SearchCap::small();
        let fams = [
            gen_hall(2).unwrap(),
            gen_branches(2).unwrap(),
            Family::new(1, 2, vec![vec![0], vec![1], vec![0]], false).unwrap(),
        ];
        for fam in &fams {
            let sub = fam.all();
            let direct = find_transversal(fam, &sub).unwrap().holds();
            let via_pieces = is_free_family(fam, &sub, 1, &cap).unwrap().holds();
            assert_eq!(direct, via_pieces);
        }
    }

    #[test]
    fn whole_family_with_transversal_goes_into_one_piece() {
        let fam = Family::new(2, 3, vec![vec![0, 1], vec![0, 2], vec![1, 2]], false).unwrap();
        match is_free_family(&fam, &[0, 1, 2], 2, &SearchCap::small()).unwrap() {
            Verdict::Holds(d) => {
                assert!(d.is_valid(&fam, &[0, 1, 2]));
                assert_eq!(d.pieces[0].len(), 3);
                assert!(d.pieces[1].is_empty());
            }
            other => panic!("expected decomposition, got {other:?}"),
        }
    }

    #[test]
    fn decomposition_uses_extra_pieces_when_needed() {
        // Three members with range {0, 1}: no single transversal, but two
        // pieces suffice.
        let fam = Family::new(2, 2, vec![vec![0, 1], vec![1, 0], vec![0, 1]], false).unwrap();
        assert!(find_transversal(&fam, &[0, 1, 2]).unwrap().fails());
        match is_free_family(&fam, &[0, 1, 2], 2, &SearchCap::small()).unwrap() {
            Verdict::Holds(d) => assert!(d.is_valid(&fam, &[0, 1, 2])),
            other => panic!("expected decomposition, got {other:?}"),
        }
        // One piece cannot do it.
        assert!(is_free_family(&fam, &[0, 1, 2], 1, &SearchCap::small())
            .unwrap()
            .fails());
    }

    #[test]
    fn hall_families_block_exactly_at_the_whole() {
        for n in 1..=4u32 {
            let fam = gen_hall(n).unwrap();
            assert_eq!(fam.len(), n as usize + 1);
            assert!(check_family_lambda_free(&fam, n + 1).unwrap().holds());
            match find_transversal(&fam, &fam.all()).unwrap() {
                Verdict::Fails(b) => {
                    assert!(b.union_of_ranges.len() < b.members.len());
                }
                other => panic!("expected the whole hall family blocked, got {other:?}"),
            }
            match check_family_lambda_free(&fam, n + 2).unwrap() {
                Verdict::Fails(blocked) => assert_eq!(blocked.members.len(), n as usize + 1),
                other => panic!("expected defect at the whole family, got {other:?}"),
            }
        }
    }

    #[test]
    fn branch_families_share_prefix_codes() {
        let fam = gen_branches(1).unwrap();
        assert_eq!(fam.len(), 2);
        assert_ne!(fam.member(0)[0], fam.member(1)[0]);

        let fam = gen_branches(2).unwrap();
        assert_eq!(fam.len(), 4);
        // Coordinate 0 codes the first bit: equal within sibling pairs.
        assert_eq!(fam.member(0)[0], fam.member(1)[0]);
        assert_eq!(fam.member(2)[0], fam.member(3)[0]);
        assert_ne!(fam.member(0)[0], fam.member(2)[0]);
        // Coordinate 1 codes the full string: all distinct.
        let full: BTreeSet<u32> = (0..4).map(|i| fam.member(i)[1]).collect();
        assert_eq!(full.len(), 4);
        assert!(fam.is_normal());

        for k in 1..=3u32 {
            let fam = gen_branches(k).unwrap();
            assert!(find_transversal(&fam, &fam.all()).unwrap().holds());
        }
    }

    #[test]
    fn random_families_are_seed_deterministic() {
        let a = gen_random(3, 5, 6, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = gen_random(3, 5, 6, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let c = gen_random(3, 5, 6, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn family_chain_checker_validates_prefixes() {
        let fam = gen_hall(2).unwrap();
        let chain = vec![vec![0], vec![0, 1], vec![0, 1, 2]];
        // Two pieces decompose every prefix of hall(2).
        assert!(check_family_chain(&fam, &chain, 2, &SearchCap::small())
            .unwrap()
            .holds());
        // One piece fails at the full family.
        match check_family_chain(&fam, &chain, 1, &SearchCap::small()).unwrap() {
            Verdict::Fails(index) => assert_eq!(index, 2),
            other => panic!("expected failure at the last link, got {other:?}"),
        }
        // Non-nested chains are rejected.
        assert!(check_family_chain(&fam, &[vec![0, 1], vec![1, 2]], 1, &SearchCap::small())
            .is_err());
    }

    #[test]
    fn family_json_round_trip() {
        let fam = gen_branches(2).unwrap();
        let text = serde_json::to_string(&fam).unwrap();
        let back: Family = serde_json::from_str(&text).unwrap();
        assert_eq!(fam, back);
        assert!(serde_json::from_str::<Family>(r#"{"kappa":0,"mu":1,"members":[]}"#).is_err());
    }
}
