//! Seeded cross-check battery: every fast solver against its
//! brute-force oracle, plus the structural invariants that tie the
//! modules together. One line per check; a failed line carries the
//! first offending instance.

use std::collections::BTreeSet;

use anyhow::{bail, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use incompact_core::family;
use incompact_core::graph::{self, Graph};
use incompact_core::model::{self, BuildParams};
use incompact_core::reduce;
use incompact_core::relsys::{self, WitnessCheck};
use incompact_core::verdict::{SearchCap, Verdict};

use crate::oracle;

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub samples: u64,
    pub cap: SearchCap,
    pub checks: Vec<CheckLine>,
    pub passed: bool,
}

type Check = fn(u64, u64, &SearchCap) -> Result<CheckLine>;

const CHECKS: [(&str, Check); 8] = [
    ("chromatic-vs-oracle", check_chromatic),
    ("colouring-number-vs-oracle", check_colouring_number),
    ("palette-vs-oracle", check_palette),
    ("transversal-vs-oracle", check_transversal),
    ("freeness-hierarchy", check_hierarchy),
    ("witness-colouring", check_witness_colouring),
    ("reduction-dichotomy", check_dichotomy),
    ("family-witness-round-trip", check_round_trip),
];

/// Run the battery. `selector` is `all` or a single check name.
pub fn run(selector: &str, seed: u64, samples: u64, cap: &SearchCap) -> Result<SuiteReport> {
    let chosen: Vec<&(&str, Check)> = if selector == "all" {
        CHECKS.iter().collect()
    } else {
        CHECKS.iter().filter(|(n, _)| *n == selector).collect()
    };
    if chosen.is_empty() {
        let names: Vec<&str> = CHECKS.iter().map(|(n, _)| *n).collect();
        bail!(
            "unknown check {selector:?}; expected \"all\" or one of: {}",
            names.join(", ")
        );
    }
    let mut checks = Vec::new();
    for (_, f) in &chosen {
        checks.push(f(seed, samples, cap)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        seed,
        samples,
        cap: *cap,
        checks,
        passed,
    })
}

fn line(name: &str, bad: Option<String>, count: u64) -> CheckLine {
    match bad {
        None => CheckLine {
            name: name.into(),
            passed: true,
            detail: format!("{count} instances agree"),
        },
        Some(detail) => CheckLine {
            name: name.into(),
            passed: false,
            detail,
        },
    }
}

fn random_graph(s: u64, rng: &mut ChaCha8Rng) -> Graph {
    let n = 1 + (s % 7) as usize;
    let p = [0.2, 0.5, 0.8][(s % 3) as usize];
    Graph::random(n, p, rng)
}

fn check_chromatic(seed: u64, samples: u64, _cap: &SearchCap) -> Result<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = None;
    for s in 0..samples {
        let g = random_graph(s, &mut rng);
        let fast = graph::chromatic_number(&g, graph::DEFAULT_BUDGET);
        let slow = oracle::chromatic_brute(&g);
        if fast.exact() != Some(slow) {
            bad = Some(format!("instance {s}: solver {fast:?}, oracle {slow}"));
            break;
        }
    }
    Ok(line("chromatic-vs-oracle", bad, samples))
}

fn check_colouring_number(seed: u64, samples: u64, _cap: &SearchCap) -> Result<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = None;
    for s in 0..samples {
        let g = random_graph(s, &mut rng);
        let fast = graph::colouring_number(&g);
        let slow = oracle::colouring_number_brute(&g);
        if fast != slow {
            bad = Some(format!("instance {s}: solver {fast}, oracle {slow}"));
            break;
        }
    }
    Ok(line("colouring-number-vs-oracle", bad, samples))
}

fn check_palette(seed: u64, samples: u64, _cap: &SearchCap) -> Result<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = None;
    'outer: for s in 0..samples {
        let g = random_graph(s, &mut rng);
        for k in 1..=3u32 {
            let slow = oracle::k_colourable_brute(&g, k);
            match graph::find_k_colouring(&g, k, graph::DEFAULT_BUDGET) {
                graph::PaletteSearch::Found { colouring: c } => {
                    let ok = graph::is_proper(&g, &c)? && c.colours_used() <= k && slow;
                    if !ok {
                        bad = Some(format!("instance {s}, k={k}: bad colouring"));
                        break 'outer;
                    }
                }
                graph::PaletteSearch::Infeasible => {
                    if slow {
                        bad = Some(format!("instance {s}, k={k}: solver says infeasible, oracle colours it"));
                        break 'outer;
                    }
                }
                graph::PaletteSearch::OutOfBudget => {}
            }
        }
    }
    Ok(line("palette-vs-oracle", bad, samples))
}

fn check_transversal(seed: u64, samples: u64, _cap: &SearchCap) -> Result<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = None;
    for s in 0..samples {
        let kappa = 1 + (s % 3) as u32;
        let mu = 2 + (s % 4) as u32;
        let count = 1 + (s % 6) as usize;
        let fam = family::gen_random(kappa, mu, count, &mut rng)?;
        let sub = fam.all();
        let slow = oracle::has_transversal_brute(&fam, &sub);
        match family::find_transversal(&fam, &sub)? {
            Verdict::Holds(t) => {
                if !slow || !t.is_valid(&fam, &sub) {
                    bad = Some(format!("instance {s}: claimed transversal is wrong"));
                    break;
                }
            }
            Verdict::Fails(b) => {
                let blocks = b.union_of_ranges.len() < b.members.len()
                    && b.members.iter().all(|&i| {
                        fam.range(i).iter().all(|v| b.union_of_ranges.contains(v))
                    });
                if slow || !blocks {
                    bad = Some(format!("instance {s}: blocking certificate is wrong"));
                    break;
                }
            }
            Verdict::Undecided(r) => {
                bad = Some(format!("instance {s}: matching cannot be undecided ({r})"));
                break;
            }
        }
    }
    Ok(line("transversal-vs-oracle", bad, samples))
}

fn random_system(s: u64, rng: &mut ChaCha8Rng) -> Result<incompact_core::relsys::RelationSystem> {
    let elements = 2 + (s % 3) as usize;
    let kappa = 1 + (s % 3) as u32;
    let density = 0.15 + 0.1 * (s % 4) as f64;
    Ok(relsys::gen_random(elements, kappa, density, rng)?)
}

fn check_hierarchy(seed: u64, samples: u64, cap: &SearchCap) -> Result<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = None;
    for s in 0..samples {
        let sys = random_system(s, &mut rng)?;
        let b: BTreeSet<String> = sys.ground().iter().cloned().collect();
        let strong = relsys::is_strongly_free(&sys, &b, cap)?;
        let free = relsys::is_free(&sys, &b, cap)?;
        let weak = relsys::is_weakly_free(&sys, &b, cap)?;
        if strong.holds() && free.fails() {
            bad = Some(format!("instance {s}: strongly free but not free"));
            break;
        }
        if free.holds() && weak.fails() {
            bad = Some(format!("instance {s}: free but not weakly free"));
            break;
        }
        if let Verdict::Holds(w) = &free {
            if relsys::verify_witness(&sys, &b, w)? != WitnessCheck::Valid {
                bad = Some(format!("instance {s}: returned witness fails verification"));
                break;
            }
        }
    }
    Ok(line("freeness-hierarchy", bad, samples))
}

fn check_witness_colouring(seed: u64, samples: u64, cap: &SearchCap) -> Result<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = None;
    let mut used = 0;
    for s in 0..samples {
        let sys = random_system(s, &mut rng)?;
        let b: BTreeSet<String> = sys.ground().iter().cloned().collect();
        let Verdict::Holds(w) = relsys::is_free(&sys, &b, cap)? else {
            continue;
        };
        used += 1;
        let params = BuildParams {
            depth: 1,
            witness_cap: 1,
            u_cap: 2,
            max_universe: 600,
        };
        let st = model::saturate(&sys, &params)?.structure;
        let g = model::graph_of(&st)?;
        let c = model::colour_from_witness(&st, &sys, &w)?;
        let square = sys.kappa() * sys.kappa();
        let bound_ok = c.assignment.values().all(|&v| v < square);
        if !graph::is_proper(&g, &c)? || !bound_ok {
            bad = Some(format!("instance {s}: witness colouring is improper or too wide"));
            break;
        }
    }
    Ok(line("witness-colouring", bad, used))
}

fn check_dichotomy(seed: u64, samples: u64, cap: &SearchCap) -> Result<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = None;
    for s in 0..samples {
        let n = 2 + (s % 5) as usize;
        let g = Graph::random(n, 0.4, &mut rng);
        let kappa = 2 + (s % 2) as u32;
        if let Verdict::Fails(breach) = reduce::exception_dichotomy_check(&g, kappa, 4, &mut rng)? {
            bad = Some(format!("instance {s}: exception set {:?} at {}", breach.exceptions, breach.element));
            break;
        }
        // Freeness of the derived system is exactly kappa-colourability.
        let ord: Vec<String> = g.nodes().to_vec();
        let sys = reduce::graph_to_system(&g, &ord, kappa)?;
        let b: BTreeSet<String> = ord.iter().cloned().collect();
        let freeness = relsys::is_free(&sys, &b, cap)?;
        if !freeness.is_undecided() {
            let chi = oracle::chromatic_brute(&g);
            if freeness.holds() != (chi <= kappa) {
                bad = Some(format!("instance {s}: freeness {} vs chromatic {chi} at kappa {kappa}", freeness.holds()));
                break;
            }
        }
    }
    Ok(line("reduction-dichotomy", bad, samples))
}

fn check_round_trip(seed: u64, samples: u64, cap: &SearchCap) -> Result<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = None;
    let mut used = 0;
    for s in 0..samples {
        let kappa = 1 + (s % 3) as u32;
        let mu = 2 + (s % 3) as u32;
        let count = 2 + (s % 3) as usize;
        let fam = family::gen_random(kappa, mu, count, &mut rng)?;
        let all = fam.all();
        let Verdict::Holds(d) = family::is_free_family(&fam, &all, 2, cap)? else {
            continue;
        };
        used += 1;
        let base = fam.all();
        let pw = reduce::decomposition_to_witness(&fam, &base, &d)?;
        let d2 = reduce::witness_to_partition(&fam, &base, &pw.witness)?;
        if !d2.is_valid(&fam, &all) {
            bad = Some(format!("instance {s}: round-tripped decomposition is invalid"));
            break;
        }
        let pieces_ok = d2
            .pieces
            .iter()
            .all(|p| family::find_transversal(&fam, p).map(|v| v.holds()).unwrap_or(false));
        if !pieces_ok {
            bad = Some(format!("instance {s}: a round-tripped piece has no transversal"));
            break;
        }
    }
    Ok(line("family-witness-round-trip", bad, used))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_battery_passes_at_small_scale() {
        let report = run("all", 7, 10, &SearchCap::small()).unwrap();
        assert!(report.passed, "{:?}", report.checks);
        assert_eq!(report.checks.len(), 8);
    }

    #[test]
    fn selector_picks_one_check() {
        let report = run("chromatic-vs-oracle", 7, 5, &SearchCap::small()).unwrap();
        assert_eq!(report.checks.len(), 1);
        assert!(report.passed);
    }

    #[test]
    fn unknown_selector_is_rejected() {
        assert!(run("no-such-check", 7, 5, &SearchCap::small()).is_err());
    }
}
