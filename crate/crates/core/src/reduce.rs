//! Reductions between families, systems, and graphs.
//!
//! A function family turns into a relation system whose freeness mirrors
//! free decomposability: members become elements, and relation `epsilon`
//! links two members exactly when they agree at coordinate `epsilon`,
//! oriented by a fixed base order. A free decomposition converts to a
//! freeness witness over `kappa * kappa` colours and back; both
//! directions are verified constructions, not searches.
//!
//! A graph turns into a system by repeating its edge set, oriented by a
//! node order, as every relation. Same-coloured neighbours then cost all
//! `kappa` exceptions at once, so exception sets are all-or-nothing and
//! system freeness is exactly `kappa`-colourability.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{Decomposition, Family, Transversal};
use crate::graph::Graph;
use crate::relsys::{
    exception_set, verify_witness_bounded, FreenessWitness, PrecedenceMode, RelationSystem,
    WitnessCheck,
};
use crate::verdict::Verdict;

/// Bijection `kappa x kappa -> kappa * kappa`, `(zeta, epsilon) ->
/// zeta * kappa + epsilon`. Pairs piece indices with coordinates when a
/// decomposition becomes a witness, and witness classes with greedy
/// colours when a witness colours a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColourPairing {
    kappa: u32,
}

impl ColourPairing {
    pub fn new(kappa: u32) -> Result<ColourPairing> {
        if kappa == 0 {
            return Err(Error::InvalidArgument("kappa must be positive".into()));
        }
        Ok(ColourPairing { kappa })
    }

    pub fn pair(&self, zeta: u32, epsilon: u32) -> u32 {
        debug_assert!(epsilon < self.kappa);
        zeta * self.kappa + epsilon
    }

    pub fn unpair(&self, colour: u32) -> (u32, u32) {
        (colour / self.kappa, colour % self.kappa)
    }

    /// Size of the paired space when both halves run over `kappa`.
    pub fn square(&self) -> u32 {
        self.kappa * self.kappa
    }
}

/// Canonical element name for family member `i`.
pub fn member_name(i: usize) -> String {
    format!("f{i}")
}

/// Inverse of [`member_name`].
pub fn parse_member_name(name: &str) -> Result<usize> {
    name.strip_prefix('f')
        .and_then(|digits| digits.parse().ok())
        .ok_or_else(|| Error::InvalidArgument(format!("{name:?} is not a member name")))
}

/// Derive the relation system of a family over the base order `base`
/// (a permutation of all member indices). Element `f{i}` stands for
/// member `i`; relation `epsilon` holds the pairs that agree at
/// coordinate `epsilon`, earlier base member first.
pub fn family_to_system(fam: &Family, base: &[usize]) -> Result<RelationSystem> {
    let sorted = fam.resolve_subfamily(base)?;
    if sorted.len() != fam.len() {
        return Err(Error::InvalidArgument(format!(
            "base order lists {} of {} members",
            sorted.len(),
            fam.len()
        )));
    }
    let ground: Vec<String> = base.iter().map(|&i| member_name(i)).collect();
    let relations: Vec<Vec<(String, String)>> = (0..fam.kappa() as usize)
        .map(|eps| {
            let mut pairs = Vec::new();
            for a in 0..base.len() {
                for b in (a + 1)..base.len() {
                    if fam.member(base[a])[eps] == fam.member(base[b])[eps] {
                        pairs.push((ground[a].clone(), ground[b].clone()));
                    }
                }
            }
            pairs
        })
        .collect();
    RelationSystem::new(ground, fam.kappa(), &relations)
}

/// A freeness witness together with the colour space it lives in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedWitness {
    pub witness: FreenessWitness,
    pub colour_bound: u32,
}

/// Convert a free decomposition into a witness for the derived system.
/// Member `i` in piece `zeta` is coloured `pair(zeta, epsilon)` where
/// `epsilon` is the least coordinate holding its transversal value; the
/// order is the base order. The exception sets of the result dodge each
/// member's own `epsilon`, so they stay below `kappa` even though the
/// colours range over `pieces * kappa`.
pub fn decomposition_to_witness(
    fam: &Family,
    base: &[usize],
    d: &Decomposition,
) -> Result<PairedWitness> {
    if !d.is_valid(fam, &fam.all()) {
        return Err(Error::InvalidArgument(
            "decomposition does not split the whole family into transversal pieces".into(),
        ));
    }
    let sys = family_to_system(fam, base)?;
    let pairing = ColourPairing::new(fam.kappa())?;
    let mut h = BTreeMap::new();
    for (zeta, (piece, t)) in d.pieces.iter().zip(&d.transversals).enumerate() {
        for &i in piece {
            let value = t.choice[&i];
            let eps = fam.member(i)
                .iter()
                .position(|&v| v == value)
                .expect("transversal values come from the member's range");
            h.insert(member_name(i), pairing.pair(zeta as u32, eps as u32));
        }
    }
    let witness = FreenessWitness {
        h,
        order: base.iter().map(|&i| member_name(i)).collect(),
    };
    let colour_bound = d.pieces.len() as u32 * fam.kappa();
    let b: BTreeSet<String> = witness.order.iter().cloned().collect();
    match verify_witness_bounded(&sys, &b, &witness, colour_bound, PrecedenceMode::GlobalOrder)? {
        WitnessCheck::Valid => Ok(PairedWitness {
            witness,
            colour_bound,
        }),
        WitnessCheck::Violation(v) => Err(Error::InvalidArgument(format!(
            "derived witness fails verification: {v:?}"
        ))),
    }
}

/// Convert a verified witness for the derived system back into a free
/// decomposition. Each member picks `zeta`, the least relation index
/// outside its exception set, and contributes its value at coordinate
/// `zeta`; members sharing `(colour, zeta)` form a piece. Two such
/// members cannot agree at `zeta`, or the base-earlier one would put
/// `zeta` into the later one's exception set, so the piece choices are
/// pairwise distinct transversals.
pub fn witness_to_partition(
    fam: &Family,
    base: &[usize],
    w: &FreenessWitness,
) -> Result<Decomposition> {
    let sys = family_to_system(fam, base)?;
    let b: BTreeSet<String> = sys.ground().iter().cloned().collect();
    let colour_bound = w.h.values().copied().max().map_or(1, |c| c + 1);
    let bound = colour_bound.max(sys.kappa());
    match verify_witness_bounded(&sys, &b, w, bound, PrecedenceMode::GlobalOrder)? {
        WitnessCheck::Valid => {}
        WitnessCheck::Violation(v) => {
            return Err(Error::InvalidArgument(format!(
                "witness fails verification: {v:?}"
            )))
        }
    }
    let mut groups: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
    for name in sys.ground() {
        let member = parse_member_name(name)?;
        let u = exception_set(&sys, &b, name, w)?;
        let zeta = (0..sys.kappa())
            .find(|z| !u.contains(z))
            .ok_or_else(|| {
                Error::InvalidArgument(
                    "witness-verification inconsistency: a full exception set survived".into(),
                )
            })?;
        groups.entry((w.h[name], zeta)).or_default().push(member);
    }
    let mut pieces = Vec::with_capacity(groups.len());
    let mut transversals = Vec::with_capacity(groups.len());
    for ((_, zeta), mut members) in groups {
        members.sort_unstable();
        let choice: BTreeMap<usize, u32> = members
            .iter()
            .map(|&i| (i, fam.member(i)[zeta as usize]))
            .collect();
        transversals.push(Transversal { choice });
        pieces.push(members);
    }
    let d = Decomposition {
        pieces,
        transversals,
    };
    debug_assert!(d.is_valid(fam, &fam.all()));
    Ok(d)
}

/// Derive the relation system of a graph over the node order `ord` (a
/// permutation of all nodes): every one of the `kappa` relations is the
/// edge set, oriented earlier node first.
pub fn graph_to_system(g: &Graph, ord: &[String], kappa: u32) -> Result<RelationSystem> {
    if kappa == 0 {
        return Err(Error::InvalidArgument("kappa must be positive".into()));
    }
    if ord.len() != g.node_count() {
        return Err(Error::InvalidArgument(format!(
            "order lists {} of {} nodes",
            ord.len(),
            g.node_count()
        )));
    }
    let mut position: BTreeMap<usize, usize> = BTreeMap::new();
    for (p, name) in ord.iter().enumerate() {
        let i = g
            .index_of(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown node {name:?}")))?;
        if position.insert(i, p).is_some() {
            return Err(Error::InvalidArgument(format!("node {name:?} repeats")));
        }
    }
    let oriented: Vec<(String, String)> = g
        .edge_pairs()
        .map(|(u, v)| {
            if position[&u] < position[&v] {
                (g.name(u).to_string(), g.name(v).to_string())
            } else {
                (g.name(v).to_string(), g.name(u).to_string())
            }
        })
        .collect();
    let relations: Vec<Vec<(String, String)>> = (0..kappa).map(|_| oriented.clone()).collect();
    RelationSystem::new(ord.to_vec(), kappa, &relations)
}

/// A sampled exception set that is neither empty nor everything.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DichotomyBreach {
    pub element: String,
    pub exceptions: Vec<u32>,
    pub sample: u64,
}

/// Sample random colourings and orders of a graph-derived system and
/// check each exception set is empty or all of `kappa`. The relations
/// are identical, so one same-coloured earlier neighbour triggers every
/// index at once; anything in between would mean the reduction is wrong.
pub fn exception_dichotomy_check(
    g: &Graph,
    kappa: u32,
    samples: u64,
    rng: &mut impl Rng,
) -> Result<Verdict<u64, DichotomyBreach>> {
    let ord: Vec<String> = g.nodes().to_vec();
    let sys = graph_to_system(g, &ord, kappa)?;
    let b: BTreeSet<String> = ord.iter().cloned().collect();
    for sample in 0..samples {
        let mut order = ord.clone();
        order.shuffle(rng);
        let h: BTreeMap<String, u32> = ord
            .iter()
            .map(|n| (n.clone(), rng.gen_range(0..kappa)))
            .collect();
        let w = FreenessWitness { h, order };
        for name in &ord {
            let u = exception_set(&sys, &b, name, &w)?;
            if !(u.is_empty() || u.len() as u32 == kappa) {
                return Ok(Verdict::Fails(DichotomyBreach {
                    element: name.clone(),
                    exceptions: u.into_iter().collect(),
                    sample,
                }));
            }
        }
    }
    Ok(Verdict::Holds(samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{self, find_transversal, is_free_family};
    use crate::relsys::is_free;
    use crate::verdict::SearchCap;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity_base(fam: &Family) -> Vec<usize> {
        fam.all()
    }

    #[test]
    fn pairing_round_trips() {
        let p = ColourPairing::new(3).unwrap();
        for zeta in 0..5 {
            for eps in 0..3 {
                assert_eq!(p.unpair(p.pair(zeta, eps)), (zeta, eps));
            }
        }
        assert_eq!(p.square(), 9);
        assert!(ColourPairing::new(0).is_err());
    }

    #[test]
    fn member_names_round_trip() {
        assert_eq!(parse_member_name(&member_name(17)).unwrap(), 17);
        assert!(parse_member_name("g3").is_err());
    }

    #[test]
    fn derived_relations_record_coordinate_agreements() {
        let fam = family::gen_branches(2).unwrap();
        let sys = family_to_system(&fam, &identity_base(&fam)).unwrap();
        // Coordinate 0 codes the first bit: sibling pairs agree.
        let r0: Vec<(usize, usize)> = sys.relation_pairs(0).collect();
        assert_eq!(r0, vec![(0, 1), (2, 3)]);
        // Coordinate 1 codes the full string: no agreements.
        assert_eq!(sys.relation_pairs(1).count(), 0);
    }

    #[test]
    fn base_order_orients_the_relations() {
        let fam = Family::new(1, 2, vec![vec![0], vec![0]], false).unwrap();
        let forward = family_to_system(&fam, &[0, 1]).unwrap();
        assert!(forward.related(0, 0, 1));
        let backward = family_to_system(&fam, &[1, 0]).unwrap();
        // Ground order is (f1, f0), and the pair points from f1 to f0.
        assert_eq!(backward.ground(), ["f1", "f0"]);
        assert!(backward.related(0, 0, 1));
    }

    #[test]
    fn pigeonhole_system_collapses_only_at_kappa_one() {
        let cap = SearchCap::small();
        // hall(1): two members sharing the one-point range. The derived
        // kappa = 1 system has a related pair, so it is not free.
        let fam = family::gen_hall(1).unwrap();
        let sys = family_to_system(&fam, &identity_base(&fam)).unwrap();
        assert!(is_free(&sys, &sys.ground().iter().cloned().collect(), &cap)
            .unwrap()
            .fails());
        // hall(2) and up: the whole family still has no transversal, yet
        // the derived system is free at its own kappa. The failure of
        // transversals is invisible to strict-kappa freeness here.
        for n in 2..=3u32 {
            let fam = family::gen_hall(n).unwrap();
            assert!(find_transversal(&fam, &fam.all()).unwrap().fails());
            let sys = family_to_system(&fam, &identity_base(&fam)).unwrap();
            assert!(is_free(&sys, &sys.ground().iter().cloned().collect(), &cap)
                .unwrap()
                .holds());
        }
    }

    #[test]
    fn decomposition_witness_round_trip() {
        let cap = SearchCap::small();
        let fam = Family::new(2, 2, vec![vec![0, 1], vec![1, 0], vec![0, 1]], false).unwrap();
        let base = identity_base(&fam);
        let d = match is_free_family(&fam, &fam.all(), 2, &cap).unwrap() {
            Verdict::Holds(d) => d,
            other => panic!("expected decomposition, got {other:?}"),
        };
        // Forward: the witness verifies (checked inside) and stays in
        // the paired colour space.
        let paired = decomposition_to_witness(&fam, &base, &d).unwrap();
        assert_eq!(paired.colour_bound, 4);
        assert!(paired.witness.h.values().all(|&c| c < 4));
        // Back: the partition is a valid decomposition again.
        let back = witness_to_partition(&fam, &base, &paired.witness).unwrap();
        assert!(back.is_valid(&fam, &fam.all()));
    }

    #[test]
    fn round_trip_survives_random_free_families(){
        let cap = SearchCap::small();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = 0;
        while seen < 10 {
            let fam = family::gen_random(2, 4, 5, &mut rng).unwrap();
            let Verdict::Holds(d) = is_free_family(&fam, &fam.all(), 2, &cap).unwrap() else {
                continue;
            };
            seen += 1;
            let base = identity_base(&fam);
            let paired = decomposition_to_witness(&fam, &base, &d).unwrap();
            let back = witness_to_partition(&fam, &base, &paired.witness).unwrap();
            assert!(back.is_valid(&fam, &fam.all()));
        }
    }

    #[test]
    fn graph_system_freeness_is_colourability() {
        let cap = SearchCap::small();
        let g = Graph::complete(3);
        let ord: Vec<String> = g.nodes().to_vec();
        // Two colours cannot split a triangle.
        let sys = graph_to_system(&g, &ord, 2).unwrap();
        let all = sys.ground().iter().cloned().collect();
        assert!(is_free(&sys, &all, &cap).unwrap().fails());
        // Three can.
        let sys = graph_to_system(&g, &ord, 3).unwrap();
        let all = sys.ground().iter().cloned().collect();
        assert!(is_free(&sys, &all, &cap).unwrap().holds());
    }

    #[test]
    fn graph_exception_sets_are_all_or_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Graph::petersen();
        match exception_dichotomy_check(&g, 3, 25, &mut rng).unwrap() {
            Verdict::Holds(samples) => assert_eq!(samples, 25),
            other => panic!("dichotomy breached: {other:?}"),
        }
    }

    #[test]
    fn malformed_orders_are_rejected() {
        let g = Graph::complete(2);
        assert!(graph_to_system(&g, &["v0".into()], 1).is_err());
        assert!(graph_to_system(&g, &["v0".into(), "v0".into()], 1).is_err());
        assert!(graph_to_system(&g, &["v0".into(), "vx".into()], 1).is_err());
        let fam = family::gen_hall(1).unwrap();
        assert!(family_to_system(&fam, &[0]).is_err());
        assert!(family_to_system(&fam, &[0, 0]).is_err());
    }
}
