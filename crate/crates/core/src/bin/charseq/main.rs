//! `charseq`: detect configurations, test persistence, run constructions and
//! check the example packages, writing a JSON report.
//!
//! Exit codes: 0 found, 1 not found or obstructed, 2 input error, 3 resource
//! budget exceeded. `CHARSEQ_MEMORY_BUDGET` (bytes, optional K/M/G suffix)
//! caps the memory of the enumerations.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use charseq::configs::{
    detect_array, detect_compatible_order, detect_diagram, detect_empty_graph, detect_empty_tuple, detect_ip_shattering,
    detect_order_property, detect_tree, find_embedding, ArrayConfig, EmbedMode, OrderConvention, ShatterMode, T0Config,
};
use charseq::constructions::{self as cons, ConstructionReport, Staged};
use charseq::formula::{parse_formula, Signature};
use charseq::localize::{persistence_search, Bounds, PersistenceStatus};
use charseq::models::{
    gen_dense_order, gen_eq_relations, gen_random_graph, gen_subset_lattice, oracle_check, ExamplePackage, GraphMode,
};
use charseq::report::{Report, Status};
use charseq::sequence::SamplePolicy;
use charseq::{CharSequence, FiniteStructure, Tuple};

const BUDGET_VAR: &str = "CHARSEQ_MEMORY_BUDGET";

#[derive(Parser, Debug, Serialize)]
#[command(name = "charseq", version, about = "Characteristic sequences of partitioned formulas")]
struct Cli {
    /// Worker threads; the report does not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    #[serde(skip)]
    threads: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip)]
    pretty: bool,
    /// Leave `timings` empty so reports compare byte for byte.
    #[arg(long, global = true)]
    #[serde(skip)]
    no_timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Search for a configuration in the sequence.
    Detect(DetectArgs),
    /// Test whether a configuration survives every bounded localization.
    Persist(PersistArgs),
    /// Run a construction and validate its output.
    Construct(ConstructArgs),
    /// Check that `P_k` determines the levels up to `n_max`.
    Support(SupportArgs),
    /// Compare computed levels with a package's closed form.
    OracleCheck(OracleArgs),
    /// Run the acceptance criteria.
    VerifyPaper(VerifyArgs),
    /// Print every level on subsets of a parameter list.
    DumpLevels(DumpArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PackageKind {
    RandomGraph,
    Paley,
    SubsetLattice,
    EqRelations,
    DenseOrder,
    Custom,
}

#[derive(Args, Debug, Clone, Serialize)]
struct PackageArgs {
    #[arg(long, value_enum, default_value = "random-graph")]
    package: PackageKind,
    /// Vertices of a sampled random graph or points of a dense order.
    #[arg(long, default_value_t = 16)]
    vertices: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    edge_prob: f64,
    /// Prime for the Paley graph.
    #[arg(long, default_value_t = 61)]
    q: u32,
    /// Ground set size of the subset lattice.
    #[arg(long, default_value_t = 4)]
    points: usize,
    #[arg(long, default_value_t = 3)]
    num_x: usize,
    #[arg(long, default_value_t = 3)]
    num_classes: usize,
    #[arg(long, default_value_t = 9)]
    class_size: usize,
    /// Structure JSON for `--package custom`.
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Partitioned formula, e.g. `phi(x; y,z) := R(x,y) & !R(x,z)`.
    #[arg(long)]
    formula: Option<String>,
    #[arg(long)]
    level_cap: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DetectKind {
    EmptyTuple,
    EmptyGraph,
    Order,
    CompatibleOrder,
    Array,
    Tree,
    Diagram,
    Ip,
    T0,
}

#[derive(Args, Debug, Serialize)]
struct DetectArgs {
    #[command(flatten)]
    package: PackageArgs,
    #[arg(long, value_enum)]
    config: DetectKind,
    /// Level of emptiness, or rows of an array.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Members of an empty graph.
    #[arg(long, default_value_t = 3)]
    size: usize,
    /// Length of an order witness.
    #[arg(long, default_value_t = 3)]
    length: usize,
    #[arg(long)]
    non_strict: bool,
    /// Order witness over `k`-sets against `(n-k)`-sets, as `k,n`.
    #[arg(long)]
    partition: Option<String>,
    /// Columns of an array.
    #[arg(long, default_value_t = 2)]
    cols: usize,
    #[arg(long, default_value_t = 2)]
    r_max: usize,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long, default_value_t = 2)]
    branching: usize,
    /// Sibling inconsistency arity of a tree, or shattering half-size.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    full_shatter: bool,
    /// Sets checked by a compatible order.
    #[arg(long, default_value_t = 3)]
    n_check: usize,
    /// Configuration JSON `{"v": .., "E": [[..], ..]}`.
    #[arg(long)]
    t0: Option<String>,
    #[arg(long)]
    monotone: bool,
    /// Parameter tuples to search, as JSON; all of `P_1` by default.
    #[arg(long)]
    region: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct BoundsArgs {
    #[arg(long, default_value_t = 2)]
    m_max: usize,
    #[arg(long, default_value_t = 2)]
    b_max: usize,
    #[arg(long, default_value_t = 3)]
    bounds_r_max: usize,
    #[arg(long, default_value_t = charseq::localize::DEFAULT_L_CHECK)]
    l_check: usize,
    /// Parameters localizations may use, as JSON; all of `P_1` by default.
    #[arg(long)]
    bounds_region: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct PersistArgs {
    #[command(flatten)]
    package: PackageArgs,
    #[arg(long)]
    t0: String,
    /// Complete base set as JSON.
    #[arg(long, default_value = "[]")]
    base: String,
    #[command(flatten)]
    bounds: BoundsArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ConstructionKind {
    UniversalWitness,
    SupportFailure,
    IpArray,
    Sharpen,
    Springboard,
    OrderDividing,
    Sop2Tree,
    OrderTree,
    EmptyGraphTree,
    EmptyTupleArray,
    RgExtension,
    Coding,
}

#[derive(Args, Debug, Serialize)]
struct ConstructArgs {
    #[command(flatten)]
    package: PackageArgs,
    #[arg(long, value_enum)]
    construction: ConstructionKind,
    #[arg(long)]
    t0: Option<String>,
    /// Lattice points for the subset-lattice constructions.
    #[arg(long, default_value_t = 6)]
    lattice_points: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    r_max: usize,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long, default_value_t = 2)]
    branching: usize,
    #[arg(long, default_value_t = 5)]
    length: usize,
    /// Formula whose independence feeds `ip-array`.
    #[arg(long)]
    phi: Option<String>,
    /// Array JSON for `sharpen` and `springboard`.
    #[arg(long)]
    array: Option<String>,
    #[arg(long, default_value = "[]")]
    a_bar: String,
    #[arg(long, default_value_t = cons::DEFAULT_SPACING)]
    spacing: usize,
    #[arg(long, default_value_t = 3)]
    mu: usize,
    #[arg(long, default_value = "[]")]
    base: String,
    /// Vertices joined to the solution, for `rg-extension`.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pos: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    neg: Vec<u32>,
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    #[command(flatten)]
    bounds: BoundsArgs,
}

#[derive(Args, Debug, Serialize)]
struct SupportArgs {
    #[command(flatten)]
    package: PackageArgs,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    /// Sample this many sets per level instead of enumerating.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    sample_seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    #[command(flatten)]
    package: PackageArgs,
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    /// Levels up to this size are enumerated; larger ones are sampled.
    #[arg(long, default_value_t = 2)]
    exhaustive_max: usize,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    sample_seed: u64,
    /// Count missing witnesses as failures too.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// Criteria to run; all by default.
    #[arg(long, value_delimiter = ',')]
    only: Vec<usize>,
}

#[derive(Args, Debug, Serialize)]
struct DumpArgs {
    #[command(flatten)]
    package: PackageArgs,
    /// Parameter tuples as JSON; the first `limit` members of `P_1` by default.
    #[arg(long)]
    params: Option<String>,
    #[arg(long, default_value_t = 4)]
    limit: usize,
    #[arg(long, default_value_t = 2)]
    n_max: usize,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Lib(charseq::Error),
}

impl From<charseq::Error> for Failure {
    fn from(e: charseq::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Lib(e) if e.is_resource() => 3,
            _ => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| Failure::Input(format!("{what}: {e}")))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Bytes with an optional K, M or G suffix.
fn parse_budget(text: &str) -> CliResult<usize> {
    let t = text.trim();
    let (digits, scale) = match t.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some('K') => (&t[..t.len() - 1], 1usize << 10),
        Some('M') => (&t[..t.len() - 1], 1 << 20),
        Some('G') => (&t[..t.len() - 1], 1 << 30),
        _ => (t, 1),
    };
    digits
        .trim()
        .parse::<usize>()
        .ok()
        .and_then(|n| n.checked_mul(scale))
        .ok_or_else(|| Failure::Input(format!("{BUDGET_VAR}: cannot read `{text}` as a byte count")))
}

fn budget_from_env() -> CliResult<Option<usize>> {
    match std::env::var(BUDGET_VAR) {
        Ok(v) => parse_budget(&v).map(Some),
        Err(_) => Ok(None),
    }
}

/// Fails with a resource error when `sets` cached level sets would not fit.
fn check_budget(budget: Option<usize>, sets: u128, what: &str) -> CliResult<()> {
    const BYTES_PER_SET: u128 = 128;
    match budget {
        Some(b) if sets.saturating_mul(BYTES_PER_SET) > b as u128 => Err(Failure::Lib(charseq::Error::ResourceBudget(format!(
            "{what} caches about {} bytes, budget is {b}",
            sets.saturating_mul(BYTES_PER_SET)
        )))),
        _ => Ok(()),
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

struct Loaded {
    cs: CharSequence,
    package: Option<ExamplePackage>,
    structure: Arc<FiniteStructure>,
}

fn load(p: &PackageArgs) -> CliResult<Loaded> {
    let package = match p.package {
        PackageKind::RandomGraph => Some(gen_random_graph(p.vertices, GraphMode::Sampled { seed: p.seed, p: p.edge_prob })?),
        PackageKind::Paley => Some(gen_random_graph(0, GraphMode::Paley { q: p.q })?),
        PackageKind::SubsetLattice => Some(gen_subset_lattice(p.points)?),
        PackageKind::EqRelations => Some(gen_eq_relations(p.num_x, p.num_classes, p.class_size)?),
        PackageKind::DenseOrder => Some(gen_dense_order(p.vertices)?),
        PackageKind::Custom => None,
    };
    let (structure, phi) = match &package {
        Some(pkg) => {
            let phi = match &p.formula {
                Some(f) => parse_formula(f, &Signature::of(&pkg.structure))?,
                None => pkg.phi.clone(),
            };
            (pkg.structure.clone(), phi)
        }
        None => {
            let path = p.structure.as_ref().ok_or_else(|| Failure::Input("--package custom needs --structure".into()))?;
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let s = FiniteStructure::from_json(&text)?;
            let f = p.formula.as_ref().ok_or_else(|| Failure::Input("--package custom needs --formula".into()))?;
            let phi = parse_formula(f, &Signature::of(&s))?;
            (Arc::new(s), phi)
        }
    };
    let mut cs = CharSequence::new(structure.clone(), phi)?;
    if let Some(cap) = p.level_cap {
        cs = cs.with_level_cap(cap);
    }
    Ok(Loaded { cs, package, structure })
}

fn region(cs: &CharSequence, text: &Option<String>) -> CliResult<Vec<Tuple>> {
    match text {
        Some(t) => parse_json("--region", t),
        None => Ok(cs.p1_set().to_vec()),
    }
}

fn bounds(b: &BoundsArgs, budget: Option<usize>) -> CliResult<Bounds> {
    let mut out = Bounds::new(b.m_max, b.b_max, b.bounds_r_max).with_memory_budget(budget);
    out.l_check = b.l_check;
    if let Some(r) = &b.bounds_region {
        out = out.with_region(parse_json("--bounds-region", r)?);
    }
    Ok(out)
}

fn found<T: Serialize>(report: &mut Report, check: &str, result: Option<T>) {
    match result {
        Some(w) => {
            report.witnesses.push(to_json(&w));
            report.verdict(check, Status::Found, Value::Null);
        }
        None => report.verdict(check, Status::NotFound, Value::Null),
    }
}

fn detect(a: &DetectArgs, report: &mut Report) -> CliResult<()> {
    let l = report.timed("load", || load(&a.package))?;
    let cs = &l.cs;
    let region = region(cs, &a.region)?;
    let name = to_json(&a.config).as_str().unwrap_or_default().to_string();
    match a.config {
        DetectKind::EmptyTuple => {
            let r = report.timed("search", || detect_empty_tuple(cs, a.n, &region))?;
            found(report, &name, r);
        }
        DetectKind::EmptyGraph => {
            let r = report.timed("search", || detect_empty_graph(cs, a.n, a.size, &region))?;
            found(report, &name, r);
        }
        DetectKind::Order => {
            let partition = match &a.partition {
                Some(p) => {
                    let parts: Vec<usize> = p.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>().map_err(|_| Failure::Input(format!("--partition: expected `k,n`, got `{p}`")))?;
                    match parts[..] {
                        [k, n] => Some((k, n)),
                        _ => return Err(Failure::Input(format!("--partition: expected `k,n`, got `{p}`"))),
                    }
                }
                None => None,
            };
            let conv = if a.non_strict { OrderConvention::NonStrict } else { OrderConvention::Strict };
            let r = report.timed("search", || detect_order_property(cs, a.length, conv, partition, &region))?;
            found(report, &name, r);
        }
        DetectKind::CompatibleOrder => {
            let r = report.timed("search", || detect_compatible_order(cs, a.length, a.n_check))?;
            found(report, &name, r);
        }
        DetectKind::Array => {
            let r = report.timed("search", || detect_array(cs, a.n, a.cols, a.r_max, &region))?;
            found(report, &name, r);
        }
        DetectKind::Tree => {
            let r = report.timed("search", || detect_tree(cs, a.depth, a.branching, a.k, a.strict, &region))?;
            found(report, &name, r);
        }
        DetectKind::Diagram => {
            let r = report.timed("search", || detect_diagram(cs, a.depth, &region))?;
            found(report, &name, r);
        }
        DetectKind::Ip => {
            let mode = if a.full_shatter { ShatterMode::FullShatter } else { ShatterMode::ExactK };
            let r = report.timed("search", || detect_ip_shattering(cs, a.k, mode, &region))?;
            found(report, &name, r);
        }
        DetectKind::T0 => {
            let text = a.t0.as_ref().ok_or_else(|| Failure::Input("--config t0 needs --t0".into()))?;
            let x: T0Config = parse_json("--t0", text)?;
            let mode = if a.monotone { EmbedMode::Monotone } else { EmbedMode::Exact };
            let r = report.timed("search", || find_embedding(cs, &x, &region, mode))?;
            found(report, &name, r);
        }
    }
    Ok(())
}

fn persist(a: &PersistArgs, report: &mut Report, budget: Option<usize>) -> CliResult<()> {
    let l = report.timed("load", || load(&a.package))?;
    let x: T0Config = parse_json("--t0", &a.t0)?;
    let base: Vec<Tuple> = parse_json("--base", &a.base)?;
    let b = bounds(&a.bounds, budget)?;
    let v = report.timed("search", || persistence_search(&l.cs, &x, &base, &b))?;
    let status = match v.status {
        PersistenceStatus::PersistsAtScale => Status::Found,
        PersistenceStatus::Killed => Status::Obstructed,
    };
    report.verdict("persistence", status, json!({ "localizations_checked": v.localizations_checked, "killer": v.killer }));
    for (i, w) in &v.witnesses {
        report.witnesses.push(json!({ "localization": i, "witness": w }));
    }
    Ok(())
}

fn record<T: Serialize>(report: &mut Report, r: ConstructionReport<T>) {
    let status = if r.validation.passed { Status::Found } else { Status::Fail };
    report.verdict(r.construction.clone(), status, json!({ "input": r.input, "checks": r.validation.checks }));
    report.witnesses.push(to_json(&r.output));
    report.traces.extend(r.trace);
}

fn record_staged<T: Serialize>(report: &mut Report, r: ConstructionReport<Staged<T>>) {
    let status = match (&r.output, r.validation.passed) {
        (Staged::Obstructed(_), _) => Status::Obstructed,
        (Staged::Built(_), true) => Status::Found,
        (Staged::Built(_), false) => Status::Fail,
    };
    report.verdict(r.construction.clone(), status, json!({ "input": r.input, "checks": r.validation.checks }));
    report.witnesses.push(to_json(&r.output));
    report.traces.extend(r.trace);
}

fn construct(a: &ConstructArgs, report: &mut Report, budget: Option<usize>) -> CliResult<()> {
    let t0 = || -> CliResult<T0Config> { parse_json("--t0", a.t0.as_deref().ok_or_else(|| Failure::Input("--t0 is required".into()))?) };
    let array = || -> CliResult<ArrayConfig> { parse_json("--array", a.array.as_deref().ok_or_else(|| Failure::Input("--array is required".into()))?) };
    match a.construction {
        ConstructionKind::UniversalWitness => {
            let x = t0()?;
            let r = report.timed("construct", || cons::universal_witness(&x, a.lattice_points))?;
            record(report, r);
            return Ok(());
        }
        ConstructionKind::SupportFailure => {
            let r = report.timed("construct", || cons::support_failure_witness(a.k, a.lattice_points))?;
            record(report, r);
            return Ok(());
        }
        _ => {}
    }
    let l = report.timed("load", || load(&a.package))?;
    let cs = &l.cs;
    let base: Vec<Tuple> = parse_json("--base", &a.base)?;
    let b = bounds(&a.bounds, budget)?;
    match a.construction {
        ConstructionKind::UniversalWitness | ConstructionKind::SupportFailure => unreachable!("handled above"),
        ConstructionKind::IpArray => {
            let text = a.phi.as_deref().unwrap_or("phi(x; y) := R(x,y)");
            let phi = parse_formula(text, &Signature::of(&l.structure))?;
            let cs_phi = CharSequence::new(l.structure.clone(), phi)?;
            let seq = report.timed("search", || cons::find_ip_sequence(&cs_phi, cs, a.m, a.r_max))?;
            match seq {
                Some(seq) => {
                    let r = report.timed("construct", || cons::array_from_ip(&cs_phi, cs, &seq, a.m, a.r_max))?;
                    record(report, r);
                }
                None => report.verdict("find_ip_sequence", Status::NotFound, Value::Null),
            }
        }
        ConstructionKind::Sharpen => {
            let arr = array()?;
            let a_bar: Vec<Tuple> = parse_json("--a-bar", &a.a_bar)?;
            let r = report.timed("construct", || cons::sharpen_array(cs, &arr, &a_bar, a.spacing))?;
            record(report, r);
        }
        ConstructionKind::Springboard => {
            let arr = array()?;
            let r = report.timed("construct", || cons::springboard_check(cs, &arr, a.mu, b.l_check))?;
            let status = if r.passes { Status::Pass } else { Status::Fail };
            report.verdict("springboard_check", status, Value::Null);
            report.witnesses.push(to_json(&r));
        }
        ConstructionKind::OrderDividing => {
            let w = report.timed("search", || detect_order_property(cs, a.length, OrderConvention::Strict, None, cs.p1_set()))?;
            match w {
                Some(w) => {
                    let r = report.timed("construct", || cons::dividing_from_order_property(cs, &w))?;
                    record(report, r);
                }
                None => report.verdict("detect_order_property", Status::NotFound, Value::Null),
            }
        }
        ConstructionKind::Sop2Tree => {
            let need = cons::interval_supply(a.depth, a.branching);
            let co = report.timed("search", || detect_compatible_order(cs, need, 3))?;
            match co {
                Some(co) => {
                    let r = report.timed("construct", || cons::sop2_tree_from_compatible_order(cs, &co, a.depth, a.branching))?;
                    record(report, r);
                }
                None => report.verdict("detect_compatible_order", Status::NotFound, json!({ "length": need })),
            }
        }
        ConstructionKind::OrderTree => {
            let r = report.timed("construct", || cons::tree_from_persistent_order(cs, a.depth, a.branching, &b))?;
            record_staged(report, r);
        }
        ConstructionKind::EmptyGraphTree => {
            let r = report.timed("construct", || cons::tree_from_persistent_empty_graph(cs, a.k, a.depth, a.branching, &b, &base))?;
            record_staged(report, r);
        }
        ConstructionKind::EmptyTupleArray => {
            let r = report.timed("construct", || cons::array_from_persistent_empty_tuple(cs, a.n, a.m, a.k, &b, &base))?;
            record_staged(report, r);
        }
        ConstructionKind::RgExtension => {
            let r = report.timed("construct", || cons::rg_solution_extension(cs, &a.pos, &a.neg, b.l_check))?;
            record(report, r);
        }
        ConstructionKind::Coding => {
            let params = cs.all_params().count();
            check_budget(budget, (1..=a.n_max).map(|n| binom(params, n)).sum(), "coding check")?;
            let r = report.timed("construct", || cons::verify_coding(l.structure.clone(), cs.phi(), a.n_max))?;
            let status = if r.passed() { Status::Pass } else { Status::Fail };
            report.verdict("verify_coding", status, Value::Null);
            report.witnesses.push(to_json(&r));
        }
    }
    Ok(())
}

fn support(a: &SupportArgs, report: &mut Report, budget: Option<usize>) -> CliResult<()> {
    let l = report.timed("load", || load(&a.package))?;
    let policy = match a.samples {
        Some(count) => SamplePolicy::Sampled { seed: a.sample_seed, count },
        None => {
            let p1 = l.cs.p1_set().len();
            check_budget(budget, (1..=a.n_max).map(|n| binom(p1, n)).sum(), "exhaustive support check")?;
            SamplePolicy::Exhaustive
        }
    };
    let r = report.timed("check", || l.cs.support(a.k, a.n_max, policy))?;
    let status = if r.supported { Status::Pass } else { Status::Fail };
    report.verdict(format!("support({}, {})", a.k, a.n_max), status, json!({ "sets_checked": r.sets_checked }));
    if let Some(c) = r.counterexample {
        report.witnesses.push(to_json(&c));
    }
    Ok(())
}

fn oracle(a: &OracleArgs, report: &mut Report, budget: Option<usize>) -> CliResult<()> {
    let l = report.timed("load", || load(&a.package))?;
    let pkg = l.package.as_ref().ok_or_else(|| Failure::Input("oracle-check needs an example package".into()))?;
    if a.package.formula.is_some() {
        return Err(Failure::Input("oracle-check compares the package formula; drop --formula".into()));
    }
    let params = l.cs.all_params().count();
    check_budget(budget, (1..=a.exhaustive_max.min(a.n_max)).map(|n| binom(params, n)).sum(), "exhaustive oracle check")?;
    let policy = SamplePolicy::Sampled { seed: a.sample_seed, count: a.samples };
    let r = report.timed("check", || oracle_check(pkg, &l.cs, a.n_max, a.exhaustive_max, policy));
    let ok = r.spurious() == 0 && (!a.strict || r.missing_witness() == 0);
    report.verdict(
        "oracle",
        if ok { Status::Pass } else { Status::Fail },
        json!({
            "sets_checked": r.sets_checked,
            "unpredicted": r.unpredicted,
            "spurious": r.spurious(),
            "missing_witness": r.missing_witness(),
            "provenance": pkg.provenance,
        }),
    );
    report.witnesses.extend(r.disagreements.iter().take(20).map(to_json));
    Ok(())
}

fn verify(a: &VerifyArgs, report: &mut Report) -> CliResult<()> {
    let all = charseq::verify::criteria();
    if let Some(bad) = a.only.iter().find(|id| !all.iter().any(|c| c.id == **id)) {
        return Err(Failure::Input(format!("no criterion {bad}")));
    }
    for c in all.into_iter().filter(|c| a.only.is_empty() || a.only.contains(&c.id)) {
        let outcome = report.timed(&format!("criterion {:02}", c.id), || std::panic::catch_unwind(c.run));
        let (status, notes) = match outcome {
            Ok(o) => (if o.pass { Status::Pass } else { Status::Fail }, o.notes),
            Err(_) => (Status::Fail, vec!["panicked".to_string()]),
        };
        report.verdict(format!("criterion {}: {}", c.id, c.name), status, to_json(&notes));
    }
    Ok(())
}

fn dump(a: &DumpArgs, report: &mut Report, budget: Option<usize>) -> CliResult<()> {
    let l = report.timed("load", || load(&a.package))?;
    let params: Vec<Tuple> = match &a.params {
        Some(p) => parse_json("--params", p)?,
        None => l.cs.p1_set().iter().take(a.limit).cloned().collect(),
    };
    check_budget(budget, (1..=a.n_max).map(|n| binom(params.len(), n)).sum(), "level dump")?;
    let text = report.timed("dump", || l.cs.dump_levels(&params, a.n_max))?;
    report.traces.extend(text.lines().map(|line| Value::String(line.to_string())));
    report.verdict("dump-levels", Status::Pass, json!({ "params": params.len(), "n_max": a.n_max }));
    Ok(())
}

fn execute(cli: &Cli) -> (Report, i32) {
    execute_with_budget(cli, budget_from_env())
}

fn execute_with_budget(cli: &Cli, budget: CliResult<Option<usize>>) -> (Report, i32) {
    let mut report = Report::new(to_json(cli));
    let run = |report: &mut Report| -> CliResult<()> {
        let budget = budget?;
        match &cli.command {
            Command::Detect(a) => detect(a, report),
            Command::Persist(a) => persist(a, report, budget),
            Command::Construct(a) => construct(a, report, budget),
            Command::Support(a) => support(a, report, budget),
            Command::OracleCheck(a) => oracle(a, report, budget),
            Command::VerifyPaper(a) => verify(a, report),
            Command::DumpLevels(a) => dump(a, report, budget),
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            report.verdict("error", Status::Fail, json!({ "message": e.to_string() }));
            return (report, 2);
        }
    };
    let code = match pool.install(|| run(&mut report)) {
        Ok(()) => report.exit_code(),
        Err(f) => {
            report.verdict("error", Status::Fail, json!({ "message": f.message() }));
            f.exit_code()
        }
    };
    if cli.no_timings {
        report.timings.clear();
    }
    (report, code)
}

fn main() {
    let cli = Cli::parse();
    let (report, code) = execute(&cli);
    let text = report.to_json(cli.pretty);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("cannot write {}: {e}", path.display());
                std::process::exit(2);
            }
        }
        None => println!("{text}"),
    }
    std::process::exit(code);
}

#[cfg(test)]
mod tests;
