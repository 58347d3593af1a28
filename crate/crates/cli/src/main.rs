//! `incompact`: a workbench over JSON files for finite graphs, relation
//! systems, function families and their derived structures.
//!
//! Exit codes, stable across versions: 0 the property holds (or the
//! command simply succeeded), 1 the property fails and the report
//! carries the evidence, 2 malformed input or usage, 3 undecided under
//! the given caps. Checking subcommands write a report envelope with
//! input digests and a result digest; generators and reductions write
//! the bare object so their output feeds the next command.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use incompact_core::family::{self, Family};
use incompact_core::graph::{self, Colouring, Graph};
use incompact_core::inc::{self, Chain, PartitionCertificate};
use incompact_core::model::{self, BuildParams, CegarParams, SaturationResult, Structure};
use incompact_core::reduce::{self, PairedWitness};
use incompact_core::relsys::{self, FreenessWitness, RelationSystem};
use incompact_core::verdict::{SearchCap, Verdict};

use incompact_cli::report::{Report, ReportBuilder};
use incompact_cli::{demo, suite};

#[derive(Parser)]
#[command(
    name = "incompact",
    version,
    about = "Workbench for graphs, relation systems and function families"
)]
struct Cli {
    /// Write the JSON output here instead of standard output.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,

    /// Output layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    format: Format,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// Compact single-line JSON.
    Json,
    /// Indented JSON.
    Pretty,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a built-in object as JSON.
    #[command(subcommand)]
    Gen(Gen),
    /// Does the (sub)family have a system of distinct representatives?
    Transversal {
        /// Family file.
        family: PathBuf,
        /// Member indices, comma separated; the whole family if absent.
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<usize>>,
    },
    /// Is a subset of the ground set free?
    Free(FreeArgs),
    /// Is the subset free under every order of its elements?
    StronglyFree(FreeArgs),
    /// Is the subset weakly free (no order, only small exception sets)?
    WeaklyFree(FreeArgs),
    /// Are all subsets (or subfamilies) below a size bound free?
    LambdaFree {
        /// Relation system file.
        #[arg(long, conflicts_with = "family")]
        system: Option<PathBuf>,
        /// Family file: checks transversals of small subfamilies instead.
        #[arg(long)]
        family: Option<PathBuf>,
        /// Strict size bound: subsets of fewer than this many elements.
        #[arg(long)]
        lambda: u32,
        /// Search cap: small, medium or custom:<elements>.
        #[arg(long)]
        cap: Option<String>,
    },
    /// Translate between object kinds.
    #[command(subcommand)]
    Reduce(Reduce),
    /// Grow the layered structure of a relation system.
    Saturate {
        /// Relation system file.
        system: PathBuf,
        /// Levels to build beyond the base.
        #[arg(long, default_value_t = 1)]
        depth: u32,
        /// Fresh points per (element, relation subset) per level.
        #[arg(long, default_value_t = 2)]
        witness_cap: usize,
        /// Largest relation subset instantiated.
        #[arg(long, default_value_t = 2)]
        u_cap: usize,
        /// Hard ceiling on the point count.
        #[arg(long, default_value_t = 2000)]
        max_universe: usize,
    },
    /// Derived graph of a structure: successor arrows as edges.
    Graph {
        /// Structure file (bare or as written by saturate).
        structure: PathBuf,
    },
    /// Exact chromatic number within a step budget.
    Chrom {
        /// Graph file.
        graph: PathBuf,
        /// Solver step budget.
        #[arg(long, default_value_t = graph::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Exact colouring number (least k so some order keeps every node
    /// below k earlier neighbours).
    Colnum {
        /// Graph file.
        graph: PathBuf,
    },
    /// Colour a structure's derived graph from a freeness witness.
    ColourWitness {
        /// Structure file (bare or as written by saturate).
        structure: PathBuf,
        /// Relation system file.
        system: PathBuf,
        /// Witness file (bare or paired, as written by reduce).
        witness: PathBuf,
    },
    /// Mine a proper colouring of a derived graph: either a concrete
    /// missing point or a colour map with small exception sets.
    Extract {
        /// Structure file (bare or as written by saturate).
        structure: PathBuf,
        /// Relation system file.
        system: PathBuf,
        /// Colouring file, {"point": colour}.
        colouring: PathBuf,
        /// Conflict budget; the system's kappa if absent.
        #[arg(long)]
        budget: Option<u32>,
    },
    /// Chromatic probe: grow the structure until the colour budget is
    /// certified insufficient or a stable extraction appears.
    Cegar {
        /// Relation system file.
        system: PathBuf,
        /// Colour budget to refute.
        #[arg(long, default_value_t = 2)]
        colours: u32,
        #[arg(long, default_value_t = 32)]
        max_rounds: u32,
        /// Deepest level a requested point may take.
        #[arg(long, default_value_t = 4)]
        max_depth: u32,
        /// Initial saturation depth.
        #[arg(long, default_value_t = 1)]
        depth: u32,
        #[arg(long, default_value_t = 2)]
        witness_cap: usize,
        #[arg(long, default_value_t = 2)]
        u_cap: usize,
        #[arg(long, default_value_t = 2000)]
        max_universe: usize,
        /// Step budget for each colouring search.
        #[arg(long, default_value_t = graph::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Incompactness checks on graph chains and single graphs.
    #[command(subcommand)]
    IncCheck(IncCheck),
    /// Cross-check the fast solvers against brute-force oracles.
    Suite {
        /// "all" or one check name.
        #[arg(default_value = "all")]
        selector: String,
        #[arg(long, default_value_t = 0xC0FFEE)]
        seed: u64,
        /// Instances per check.
        #[arg(long, default_value_t = 40)]
        samples: u64,
        /// Search cap: small, medium or custom:<elements>.
        #[arg(long)]
        cap: Option<String>,
    },
    /// End-to-end walkthrough on the pigeonhole family (1 <= n <= 4).
    Demo {
        #[arg(default_value_t = 2)]
        n: u32,
        /// Search cap: small, medium or custom:<elements>.
        #[arg(long)]
        cap: Option<String>,
    },
}

#[derive(Args)]
struct FreeArgs {
    /// Relation system file.
    system: PathBuf,
    /// Element names, comma separated; the whole ground set if absent.
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<String>>,
    /// Search cap: small, medium or custom:<elements>.
    #[arg(long)]
    cap: Option<String>,
}

#[derive(Subcommand)]
enum Gen {
    /// Pigeonhole family: n + 1 cyclic shifts over n values.
    Hall {
        #[arg(long)]
        n: u32,
    },
    /// Binary-branch family: 2^k members agreeing along shared prefixes.
    Branches {
        #[arg(long)]
        k: u32,
    },
    /// Seeded random family.
    RandomFamily {
        /// Coordinates per member.
        #[arg(long)]
        kappa: u32,
        /// Value space size.
        #[arg(long)]
        mu: u32,
        /// Number of members.
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Complete graph on n nodes.
    Complete {
        #[arg(long)]
        n: usize,
    },
    /// Cycle on n >= 3 nodes.
    Cycle {
        #[arg(long)]
        n: usize,
    },
    /// Path on n nodes.
    Path {
        #[arg(long)]
        n: usize,
    },
    /// n nodes, no edges.
    Edgeless {
        #[arg(long)]
        n: usize,
    },
    /// The Petersen graph.
    Petersen,
    /// Seeded random graph, each edge present with the given probability.
    RandomGraph {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edge_prob: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Seeded random relation system.
    RandomSystem {
        #[arg(long)]
        elements: usize,
        #[arg(long)]
        kappa: u32,
        /// Probability of each ordered pair entering each relation.
        #[arg(long)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Reduce {
    /// Family members as ground elements; relation eps joins members
    /// agreeing at coordinate eps, earlier base member first.
    FamilyToSystem {
        family: PathBuf,
        /// Base order as member indices; identity if absent.
        #[arg(long, value_delimiter = ',')]
        base: Option<Vec<usize>>,
    },
    /// One relation per colour index, each the same oriented edge set.
    GraphToSystem {
        graph: PathBuf,
        #[arg(long)]
        kappa: u32,
        /// Node order for edge orientation; sorted node names if absent.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<String>>,
    },
    /// Free decomposition -> verified witness of the derived system.
    DecompositionToWitness {
        family: PathBuf,
        decomposition: PathBuf,
        #[arg(long, value_delimiter = ',')]
        base: Option<Vec<usize>>,
    },
    /// Verified witness -> free decomposition of the family.
    WitnessToPartition {
        family: PathBuf,
        witness: PathBuf,
        #[arg(long, value_delimiter = ',')]
        base: Option<Vec<usize>>,
    },
}

#[derive(Subcommand)]
enum IncCheck {
    /// Early prefixes colour below chi0 while the last graph reaches chi1.
    Chain {
        /// Chain file.
        chain: PathBuf,
        #[arg(long, default_value_t = graph::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Whole graph needs chi colours, every small induced subgraph fewer.
    Bracket {
        /// Graph file.
        graph: PathBuf,
        /// Strict node-count bound on the scanned subgraphs.
        #[arg(long)]
        lambda: u32,
        /// Colour demand on the whole graph.
        #[arg(long, conflicts_with = "kappa")]
        chi: Option<u32>,
        /// Alias: probe chi = kappa + 1.
        #[arg(long)]
        kappa: Option<u32>,
        #[arg(long, default_value_t = graph::DEFAULT_BUDGET)]
        budget: u64,
        /// Subset draws when the subset space is too large to exhaust.
        #[arg(long, default_value_t = 512)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Chain check strengthened by partition certificates on the early
    /// graphs.
    Plus {
        /// Chain file.
        chain: PathBuf,
        /// JSON array of partition certificates, one per early graph.
        certificates: PathBuf,
        #[arg(long, default_value_t = graph::DEFAULT_BUDGET)]
        budget: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Where output goes: JSON to `out` or stdout; human notes to whichever
/// stream the JSON is not using.
struct Sink {
    out: Option<PathBuf>,
    format: Format,
}

impl Sink {
    fn write(&self, value: &impl Serialize) -> Result<()> {
        let mut text = match self.format {
            Format::Json => serde_json::to_string(value)?,
            Format::Pretty => serde_json::to_string_pretty(value)?,
        };
        text.push('\n');
        match &self.out {
            Some(path) => fs::write(path, &text)
                .with_context(|| format!("writing {}", path.display()))?,
            None => print!("{text}"),
        }
        Ok(())
    }

    fn note(&self, line: &str) {
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}

struct Loaded<T> {
    value: T,
    bytes: Vec<u8>,
}

fn load<T: DeserializeOwned>(path: &Path, what: &str) -> Result<Loaded<T>> {
    let bytes = fs::read(path)
        .with_context(|| format!("reading {what} file {}", path.display()))?;
    let value = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing {what} file {}", path.display()))?;
    Ok(Loaded { value, bytes })
}

/// Structures circulate bare and wrapped in a saturation result; accept
/// both so `saturate` output feeds `graph`, `colour-witness`, `extract`.
fn load_structure(path: &Path) -> Result<Loaded<Structure>> {
    let bytes = fs::read(path)
        .with_context(|| format!("reading structure file {}", path.display()))?;
    if let Ok(st) = serde_json::from_slice::<Structure>(&bytes) {
        return Ok(Loaded { value: st, bytes });
    }
    let sat: SaturationResult = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing structure file {}", path.display()))?;
    Ok(Loaded { value: sat.structure, bytes })
}

/// Witnesses circulate bare and paired with their colour bound.
fn load_witness(path: &Path) -> Result<Loaded<FreenessWitness>> {
    let bytes = fs::read(path)
        .with_context(|| format!("reading witness file {}", path.display()))?;
    if let Ok(w) = serde_json::from_slice::<FreenessWitness>(&bytes) {
        return Ok(Loaded { value: w, bytes });
    }
    let pw: PairedWitness = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing witness file {}", path.display()))?;
    Ok(Loaded { value: pw.witness, bytes })
}

fn resolve_cap(flag: &Option<String>) -> Result<SearchCap> {
    let text = match flag {
        Some(t) => t.clone(),
        None => std::env::var("INCOMPACT_CAP").unwrap_or_else(|_| "small".into()),
    };
    match text.as_str() {
        "small" => Ok(SearchCap::small()),
        "medium" => Ok(SearchCap::medium()),
        other => {
            let n = other
                .strip_prefix("custom:")
                .ok_or_else(|| anyhow!("cap must be small, medium or custom:<elements>"))?
                .parse::<usize>()
                .context("custom cap wants an element count")?;
            Ok(SearchCap::custom(n))
        }
    }
}

fn verdict_code<Y, N>(v: &Verdict<Y, N>) -> ExitCode {
    match v {
        Verdict::Holds(_) => ExitCode::SUCCESS,
        Verdict::Fails(_) => ExitCode::from(1),
        Verdict::Undecided(_) => ExitCode::from(3),
    }
}

fn verdict_word<Y, N>(v: &Verdict<Y, N>) -> &'static str {
    match v {
        Verdict::Holds(_) => "holds",
        Verdict::Fails(_) => "fails",
        Verdict::Undecided(_) => "undecided",
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let sink = Sink {
        out: cli.out,
        format: cli.format,
    };
    match cli.command {
        Cmd::Gen(g) => run_gen(g, &sink),
        Cmd::Transversal { family, subset } => run_transversal(&family, subset, &sink),
        Cmd::Free(args) => run_free(args, &sink, Hierarchy::Plain),
        Cmd::StronglyFree(args) => run_free(args, &sink, Hierarchy::Strong),
        Cmd::WeaklyFree(args) => run_free(args, &sink, Hierarchy::Weak),
        Cmd::LambdaFree {
            system,
            family,
            lambda,
            cap,
        } => run_lambda_free(system, family, lambda, &cap, &sink),
        Cmd::Reduce(r) => run_reduce(r, &sink),
        Cmd::Saturate {
            system,
            depth,
            witness_cap,
            u_cap,
            max_universe,
        } => {
            let sys = load::<RelationSystem>(&system, "system")?;
            let params = BuildParams {
                depth,
                witness_cap,
                u_cap,
                max_universe,
            };
            let sat = model::saturate(&sys.value, &params)?;
            sink.note(&format!(
                "saturate: {} points, depth {} of {}{}",
                sat.structure.len(),
                sat.achieved_depth,
                depth,
                if sat.truncated { " (truncated)" } else { "" }
            ));
            sink.write(&sat)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Graph { structure } => {
            let st = load_structure(&structure)?;
            let g = model::graph_of(&st.value)?;
            sink.note(&format!(
                "graph: {} nodes, {} edges",
                g.node_count(),
                g.edge_count()
            ));
            sink.write(&g)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Chrom { graph: path, budget } => {
            let g = load::<Graph>(&path, "graph")?;
            let mut rb = ReportBuilder::new("chrom");
            rb.input("graph", &g.bytes);
            let t = Instant::now();
            let outcome = graph::chromatic_number(&g.value, budget);
            rb.timing("solve", t.elapsed());
            let code = match outcome.exact() {
                Some(_) => ExitCode::SUCCESS,
                None => ExitCode::from(3),
            };
            sink.note(&format!(
                "chrom: lower {} upper {}",
                outcome.lower(),
                outcome.upper()
            ));
            sink.write(&rb.finish(json!({ "budget": budget, "outcome": outcome }))?)?;
            Ok(code)
        }
        Cmd::Colnum { graph: path } => {
            let g = load::<Graph>(&path, "graph")?;
            let mut rb = ReportBuilder::new("colnum");
            rb.input("graph", &g.bytes);
            let t = Instant::now();
            let value = graph::colouring_number(&g.value);
            let order = graph::degeneracy_order(&g.value);
            rb.timing("solve", t.elapsed());
            sink.note(&format!("colnum: {value}"));
            sink.write(&rb.finish(json!({ "value": value, "order": order }))?)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ColourWitness {
            structure,
            system,
            witness,
        } => {
            let st = load_structure(&structure)?;
            let sys = load::<RelationSystem>(&system, "system")?;
            let w = load_witness(&witness)?;
            let colouring = model::colour_from_witness(&st.value, &sys.value, &w.value)?;
            sink.note(&format!(
                "colour-witness: {} colours over {} points",
                colouring.colours_used(),
                st.value.len()
            ));
            sink.write(&colouring)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Extract {
            structure,
            system,
            colouring,
            budget,
        } => {
            let st = load_structure(&structure)?;
            let sys = load::<RelationSystem>(&system, "system")?;
            let col = load::<Colouring>(&colouring, "colouring")?;
            let budget = budget.unwrap_or_else(|| sys.value.kappa());
            let mut rb = ReportBuilder::new("extract");
            rb.input("structure", &st.bytes);
            rb.input("system", &sys.bytes);
            rb.input("colouring", &col.bytes);
            let t = Instant::now();
            let outcome = model::extract_from_colouring(&st.value, &sys.value, &col.value, budget)?;
            rb.timing("solve", t.elapsed());
            let word = match &outcome {
                model::Extraction::SaturationGap(g) => format!("missing point under {}", g.eta),
                model::Extraction::SmallExceptions(_) => "small exception sets".into(),
            };
            sink.note(&format!("extract: {word}"));
            sink.write(&rb.finish(json!({ "budget": budget, "outcome": outcome }))?)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Cegar {
            system,
            colours,
            max_rounds,
            max_depth,
            depth,
            witness_cap,
            u_cap,
            max_universe,
            budget,
        } => {
            let sys = load::<RelationSystem>(&system, "system")?;
            let params = CegarParams {
                max_rounds,
                max_depth,
                build: BuildParams {
                    depth,
                    witness_cap,
                    u_cap,
                    max_universe,
                },
                solver_budget: budget,
            };
            let mut rb = ReportBuilder::new("cegar");
            rb.input("system", &sys.bytes);
            let t = Instant::now();
            let run = model::cegar_chromatic(&sys.value, colours, &params)?;
            rb.timing("solve", t.elapsed());
            let code = verdict_code(&run.verdict);
            sink.note(&format!(
                "cegar: {} after {} rounds",
                verdict_word(&run.verdict),
                run.records.len()
            ));
            sink.write(&rb.finish(json!({
                "colours": colours,
                "params": params,
                "run": run,
            }))?)?;
            Ok(code)
        }
        Cmd::IncCheck(ic) => run_inc_check(ic, &sink),
        Cmd::Suite {
            selector,
            seed,
            samples,
            cap,
        } => {
            let cap = resolve_cap(&cap)?;
            let report = suite::run(&selector, seed, samples, &cap)?;
            for check in &report.checks {
                let mark = if check.passed { "ok" } else { "FAIL" };
                sink.note(&format!("{mark} {} - {}", check.name, check.detail));
            }
            let code = if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
            let mut rb = ReportBuilder::new("suite");
            sink.write(&rb_finish_with(&mut rb, &report)?)?;
            Ok(code)
        }
        Cmd::Demo { n, cap } => {
            let cap = resolve_cap(&cap)?;
            let (report, timings) = demo::demo_incompactness(n, &cap)?;
            let code = if report.certified {
                ExitCode::SUCCESS
            } else if report.undecided {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            };
            sink.note(&format!("demo n={n}: {}", report.conclusion));
            let mut rb = ReportBuilder::new("demo");
            rb.timings(timings);
            sink.write(&rb_finish_with(&mut rb, &report)?)?;
            Ok(code)
        }
    }
}

/// finish() consumes the builder; this keeps call sites that have no
/// inputs to record down to one line.
fn rb_finish_with(rb: &mut ReportBuilder, result: &impl Serialize) -> Result<Report> {
    std::mem::take(rb).finish(serde_json::to_value(result)?)
}

fn run_gen(gen: Gen, sink: &Sink) -> Result<ExitCode> {
    let value: Value = match gen {
        Gen::Hall { n } => serde_json::to_value(family::gen_hall(n)?)?,
        Gen::Branches { k } => serde_json::to_value(family::gen_branches(k)?)?,
        Gen::RandomFamily {
            kappa,
            mu,
            count,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            serde_json::to_value(family::gen_random(kappa, mu, count, &mut rng)?)?
        }
        Gen::Complete { n } => serde_json::to_value(Graph::complete(n))?,
        Gen::Cycle { n } => {
            if n < 3 {
                bail!("a cycle needs at least 3 nodes");
            }
            serde_json::to_value(Graph::cycle(n))?
        }
        Gen::Path { n } => serde_json::to_value(Graph::path(n))?,
        Gen::Edgeless { n } => serde_json::to_value(Graph::edgeless(n))?,
        Gen::Petersen => serde_json::to_value(Graph::petersen())?,
        Gen::RandomGraph {
            nodes,
            edge_prob,
            seed,
        } => {
            if !(0.0..=1.0).contains(&edge_prob) {
                bail!("edge probability must lie in [0, 1]");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            serde_json::to_value(Graph::random(nodes, edge_prob, &mut rng))?
        }
        Gen::RandomSystem {
            elements,
            kappa,
            density,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            serde_json::to_value(relsys::gen_random(elements, kappa, density, &mut rng)?)?
        }
    };
    sink.write(&value)?;
    Ok(ExitCode::SUCCESS)
}

fn run_transversal(path: &Path, subset: Option<Vec<usize>>, sink: &Sink) -> Result<ExitCode> {
    let fam = load::<Family>(path, "family")?;
    let sub = subset.unwrap_or_else(|| fam.value.all());
    let mut rb = ReportBuilder::new("transversal");
    rb.input("family", &fam.bytes);
    let t = Instant::now();
    let outcome = family::find_transversal(&fam.value, &sub)?;
    rb.timing("solve", t.elapsed());
    let code = verdict_code(&outcome);
    sink.note(&format!("transversal: {}", verdict_word(&outcome)));
    sink.write(&rb.finish(json!({ "members": sub, "outcome": outcome }))?)?;
    Ok(code)
}

enum Hierarchy {
    Plain,
    Strong,
    Weak,
}

fn run_free(args: FreeArgs, sink: &Sink, level: Hierarchy) -> Result<ExitCode> {
    let sys = load::<RelationSystem>(&args.system, "system")?;
    let subset: BTreeSet<String> = match &args.subset {
        Some(names) => names.iter().cloned().collect(),
        None => sys.value.ground().iter().cloned().collect(),
    };
    let cap = resolve_cap(&args.cap)?;
    let name = match level {
        Hierarchy::Plain => "free",
        Hierarchy::Strong => "strongly-free",
        Hierarchy::Weak => "weakly-free",
    };
    let mut rb = ReportBuilder::new(name);
    rb.input("system", &sys.bytes);
    let t = Instant::now();
    let (outcome, code, word) = match level {
        Hierarchy::Plain => pack(&relsys::is_free(&sys.value, &subset, &cap)?)?,
        Hierarchy::Strong => pack(&relsys::is_strongly_free(&sys.value, &subset, &cap)?)?,
        Hierarchy::Weak => pack(&relsys::is_weakly_free(&sys.value, &subset, &cap)?)?,
    };
    rb.timing("solve", t.elapsed());
    sink.note(&format!("{name}: {word}"));
    sink.write(&rb.finish(json!({
        "subset": subset,
        "cap": cap,
        "outcome": outcome,
    }))?)?;
    Ok(code)
}

fn pack<Y: Serialize, N: Serialize>(v: &Verdict<Y, N>) -> Result<(Value, ExitCode, &'static str)> {
    Ok((serde_json::to_value(v)?, verdict_code(v), verdict_word(v)))
}

fn run_lambda_free(
    system: Option<PathBuf>,
    family: Option<PathBuf>,
    lambda: u32,
    cap: &Option<String>,
    sink: &Sink,
) -> Result<ExitCode> {
    let cap = resolve_cap(cap)?;
    let mut rb = ReportBuilder::new("lambda-free");
    let (outcome, code, word) = match (system, family) {
        (Some(path), None) => {
            let sys = load::<RelationSystem>(&path, "system")?;
            rb.input("system", &sys.bytes);
            pack(&relsys::check_lambda_free(&sys.value, lambda, &cap)?)?
        }
        (None, Some(path)) => {
            let fam = load::<Family>(&path, "family")?;
            rb.input("family", &fam.bytes);
            pack(&family::check_family_lambda_free(&fam.value, lambda)?)?
        }
        _ => bail!("pass exactly one of --system or --family"),
    };
    sink.note(&format!("lambda-free: {word}"));
    sink.write(&rb.finish(json!({
        "lambda": lambda,
        "cap": cap,
        "outcome": outcome,
    }))?)?;
    Ok(code)
}

fn run_reduce(reduce_cmd: Reduce, sink: &Sink) -> Result<ExitCode> {
    match reduce_cmd {
        Reduce::FamilyToSystem { family, base } => {
            let fam = load::<Family>(&family, "family")?;
            let base = base.unwrap_or_else(|| fam.value.all());
            let sys = reduce::family_to_system(&fam.value, &base)?;
            sink.note(&format!(
                "family-to-system: {} elements, kappa {}",
                sys.ground().len(),
                sys.kappa()
            ));
            sink.write(&sys)?;
        }
        Reduce::GraphToSystem { graph, kappa, order } => {
            let g = load::<Graph>(&graph, "graph")?;
            let ord = order.unwrap_or_else(|| g.value.nodes().to_vec());
            let sys = reduce::graph_to_system(&g.value, &ord, kappa)?;
            sink.note(&format!(
                "graph-to-system: {} elements, kappa {}",
                sys.ground().len(),
                sys.kappa()
            ));
            sink.write(&sys)?;
        }
        Reduce::DecompositionToWitness {
            family,
            decomposition,
            base,
        } => {
            let fam = load::<Family>(&family, "family")?;
            let d = load::<family::Decomposition>(&decomposition, "decomposition")?;
            let base = base.unwrap_or_else(|| fam.value.all());
            let pw = reduce::decomposition_to_witness(&fam.value, &base, &d.value)?;
            sink.note(&format!(
                "decomposition-to-witness: colour bound {}",
                pw.colour_bound
            ));
            sink.write(&pw)?;
        }
        Reduce::WitnessToPartition { family, witness, base } => {
            let fam = load::<Family>(&family, "family")?;
            let w = load_witness(&witness)?;
            let base = base.unwrap_or_else(|| fam.value.all());
            let d = reduce::witness_to_partition(&fam.value, &base, &w.value)?;
            sink.note(&format!("witness-to-partition: {} pieces", d.pieces.len()));
            sink.write(&d)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_inc_check(ic: IncCheck, sink: &Sink) -> Result<ExitCode> {
    match ic {
        IncCheck::Chain { chain, budget } => {
            let ch = load::<Chain>(&chain, "chain")?;
            let mut rb = ReportBuilder::new("inc-check chain");
            rb.input("chain", &ch.bytes);
            let t = Instant::now();
            let outcome = inc::check_inc_chain(&ch.value, budget);
            rb.timing("solve", t.elapsed());
            let code = verdict_code(&outcome);
            sink.note(&format!("inc-check chain: {}", verdict_word(&outcome)));
            sink.write(&rb.finish(json!({ "budget": budget, "outcome": outcome }))?)?;
            Ok(code)
        }
        IncCheck::Bracket {
            graph: path,
            lambda,
            chi,
            kappa,
            budget,
            samples,
            seed,
        } => {
            let g = load::<Graph>(&path, "graph")?;
            let chi = match (chi, kappa) {
                (Some(c), None) => c,
                (None, Some(k)) => k + 1,
                _ => bail!("pass exactly one of --chi or --kappa"),
            };
            let mut rb = ReportBuilder::new("inc-check bracket");
            rb.input("graph", &g.bytes);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = Instant::now();
            let outcome =
                inc::check_inc_bracket(&g.value, lambda, chi, budget, samples, &mut rng)?;
            rb.timing("solve", t.elapsed());
            let code = verdict_code(&outcome);
            sink.note(&format!("inc-check bracket: {}", verdict_word(&outcome)));
            sink.write(&rb.finish(json!({
                "lambda": lambda,
                "chi": chi,
                "seed": seed,
                "outcome": outcome,
            }))?)?;
            Ok(code)
        }
        IncCheck::Plus {
            chain,
            certificates,
            budget,
        } => {
            let ch = load::<Chain>(&chain, "chain")?;
            let certs = load::<Vec<PartitionCertificate>>(&certificates, "certificates")?;
            let mut rb = ReportBuilder::new("inc-check plus");
            rb.input("chain", &ch.bytes);
            rb.input("certificates", &certs.bytes);
            let t = Instant::now();
            let outcome = inc::check_inc_plus(&ch.value, &certs.value, budget)?;
            rb.timing("solve", t.elapsed());
            let code = verdict_code(&outcome);
            sink.note(&format!("inc-check plus: {}", verdict_word(&outcome)));
            sink.write(&rb.finish(json!({ "budget": budget, "outcome": outcome }))?)?;
            Ok(code)
        }
    }
}
