//! The acceptance criteria as runnable checks with pinned tolerances. Each
//! criterion recomputes its verdict from scratch, using brute-force oracles
//! where the library result is being judged.

use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::configs::*;
use crate::constructions::*;
use crate::formula::{parse_formula, Signature};
use crate::localize::*;
use crate::models::*;
use crate::sequence::{Relative, SamplePolicy};
use crate::{CharSequence, Tuple};

const RANDOM_GRAPH_SEEDS: [u64; 3] = [1, 2, 3];
const CRITERION_1_LIMIT: Duration = Duration::from_secs(60);
const CRITERION_3_LIMIT: Duration = Duration::from_secs(600);
const ORACLE_SAMPLES: usize = 500;
const AXIOM_SAMPLES: usize = 1000;
const PLANTED_ARRAYS: usize = 20;
const PERSISTENCE_BOUNDS: (usize, usize, usize) = (2, 2, 3);

/// Result of one criterion: overall pass and one note per check.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Outcome {
    pub pass: bool,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn new() -> Self {
        Self { pass: true, notes: Vec::new() }
    }

    pub fn check(&mut self, ok: bool, note: impl Into<String>) {
        self.pass &= ok;
        let note = note.into();
        self.notes.push(if ok { note } else { format!("FAILED {note}") });
    }
}

fn bounds() -> Bounds {
    let (m, b, r) = PERSISTENCE_BOUNDS;
    Bounds::new(m, b, r)
}

fn random_graph(v: usize, seed: u64) -> ExamplePackage {
    gen_random_graph(v, GraphMode::Sampled { seed, p: 0.5 }).unwrap()
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    for seed in RANDOM_GRAPH_SEEDS {
        let start = Instant::now();
        let pkg = random_graph(16, seed);
        let cs = pkg.sequence();
        let report = oracle_check(&pkg, &cs, 4, 3, SamplePolicy::Sampled { seed, count: ORACLE_SAMPLES });
        out.check(
            report.spurious() == 0,
            format!("seed {seed}: {} sets, {} spurious, {} missing-witness", report.sets_checked, report.spurious(), report.missing_witness()),
        );
        let support = cs.support(2, 4, SamplePolicy::Exhaustive).unwrap();
        out.check(support.supported, format!("seed {seed}: support(2, 4) = {} counterexample {:?}", support.supported, support.counterexample));
        let t = start.elapsed();
        out.check(t < CRITERION_1_LIMIT, format!("seed {seed}: {t:.1?}"));
    }
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    for seed in RANDOM_GRAPH_SEEDS {
        let cs = random_graph(16, seed).sequence();
        let p1 = cs.p1_set().to_vec();
        let three = detect_empty_graph(&cs, 2, 3, &p1).unwrap();
        out.check(three.is_some(), format!("seed {seed}: size-3 empty graph {:?}", three));
        let four = detect_empty_graph(&cs, 2, 4, &p1).unwrap();
        out.check(four.is_none(), format!("seed {seed}: size-4 empty graph {:?}", four));
    }
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let packages = [("random graph v=12", random_graph(12, 1)), ("equivalence relations (3, 4, 3)", gen_eq_relations(3, 4, 3).unwrap())];
    for (name, pkg) in packages {
        let start = Instant::now();
        let cs = pkg.sequence();
        let p1 = cs.p1_set().to_vec();
        let w = detect_order_property(&cs, 4, OrderConvention::Strict, None, &p1).unwrap();
        let t = start.elapsed();
        out.check(w.is_none(), format!("{name}: length-4 order witness {:?}", w.map(|w| (w.a, w.b))));
        out.check(t < CRITERION_3_LIMIT, format!("{name}: {t:.1?}"));
    }
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    let four = downward_closed_families(4);
    out.check(four.len() == 166, format!("{} families on 4 vertices", four.len()));
    let mut total = 0;
    let mut failed = Vec::new();
    for x in (1..=4).flat_map(downward_closed_families) {
        total += 1;
        let r = universal_witness(&x, x.maximal().len() + x.v).unwrap();
        if !r.validation.passed || !matches_exactly(&gen_subset_lattice(x.maximal().len() + x.v).unwrap().sequence(), &x, &r.output) {
            failed.push(x.e.clone());
        }
    }
    out.check(failed.is_empty(), format!("{total} families on at most 4 vertices realized exactly, failures {failed:?}"));
    for k in [2, 3] {
        let r = support_failure_witness(k, 6).unwrap();
        let cs = gen_subset_lattice(6).unwrap().sequence();
        let subsets = r.output.params.iter().cloned().combinations(k).all(|c| cs.holds_raw(&c));
        let whole = cs.holds_raw(&r.output.params);
        out.check(r.validation.passed && subsets && !whole, format!("support-{k} failure at N=6: {:?}", r.output.params));
    }
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let pkg = random_graph(32, 1);
    let cs_theta = pkg.sequence();
    let sig = Signature::of(&pkg.structure);
    let cs_phi = CharSequence::new(pkg.structure.clone(), parse_formula("phi(x; y) := R(x,y)", &sig).unwrap()).unwrap();
    let p1 = cs_theta.p1_set().to_vec();
    let shattered = detect_ip_shattering(&cs_theta, 2, ShatterMode::ExactK, &p1).unwrap();
    out.check(shattered.as_ref().is_some_and(|w| w.validate(&cs_theta)), format!("theta shattering k=2: {:?}", shattered.map(|w| w.params)));
    let Some(seq) = find_ip_sequence(&cs_phi, &cs_theta, 5, 2).unwrap() else {
        out.check(false, "no independence sequence for 5 columns");
        return out;
    };
    let prefix_shattered = detect_ip_shattering(&cs_phi, 2, ShatterMode::ExactK, &seq[..4]).unwrap();
    out.check(prefix_shattered.is_some_and(|w| w.validate(&cs_phi)), format!("phi independence prefix {:?}", &seq[..4]));
    let array = match array_from_ip(&cs_phi, &cs_theta, &seq, 5, 2) {
        Ok(r) => r.output,
        Err(e) => {
            out.check(false, format!("array_from_ip: {e}"));
            return out;
        }
    };
    let sharp = is_sharp(&cs_theta, &array, 2).unwrap();
    out.check(
        array.cols() == 5 && array.rows == 2 && array.is_valid(&cs_theta) && sharp.sharp,
        format!("({}, {})-array valid and sharp", array.cols(), array.rows),
    );
    match ip_from_sharp_array(&cs_theta, &array, 1) {
        Ok(r) => {
            let phi_1 = CharSequence::new(pkg.structure.clone(), crate::formula::conjunct(cs_theta.phi(), 1).unwrap()).unwrap();
            out.check(r.validation.passed && r.output.validate(&phi_1), format!("shattering witness from the array, k_check=1: {:?}", r.output.params));
        }
        Err(e) => out.check(false, format!("ip_from_sharp_array: {e}")),
    }
    out
}

/// Re-runs a verdict's killer and witnesses from its serialized form.
fn replay(cs: &CharSequence, x: &T0Config, a: &[Tuple], text: &str) -> bool {
    let v: PersistenceVerdict = serde_json::from_str(text).unwrap();
    let entries = enumerate_localizations(cs, a, &v.bounds).unwrap();
    let witnesses_ok = v.witnesses.iter().all(|(i, w)| {
        matches_exactly(cs, x, w) && w.iter().all(|t| entries[*i].extension.contains(t))
    });
    let killer_ok = match &v.killer {
        None => v.status == PersistenceStatus::PersistsAtScale && v.localizations_checked == entries.len(),
        Some(k) => {
            let set = localized_set(cs, &k.localization).unwrap();
            v.status == PersistenceStatus::Killed
                && entries[k.index].localization == k.localization
                && set.len() == k.extension_size
                && find_embedding(cs, x, &set, EmbedMode::Exact).unwrap().is_none()
        }
    };
    witnesses_ok && killer_ok
}

fn persistence_in_pool(cs: &CharSequence, x: &T0Config, a: &[Tuple], b: &Bounds, threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| serde_json::to_string(&persistence_search(cs, x, a, b).unwrap()).unwrap())
}

fn tp2_region(cs: &CharSequence) -> Vec<Tuple> {
    let mut p1 = cs.p1_set().to_vec();
    p1.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    p1.truncate(12);
    p1
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let x = T0Config::empty_graph(2);
    let dense = gen_dense_order(12).unwrap().sequence();
    let tp2 = gen_eq_relations(3, 3, 9).unwrap().sequence();
    let rg = random_graph(10, 1).sequence();
    let nested = vec![vec![2, 9], vec![3, 8]];
    let cases: [(&str, &CharSequence, Vec<Tuple>, Bounds, PersistenceStatus); 3] = [
        ("dense order around nested intervals", &dense, nested, bounds(), PersistenceStatus::Killed),
        ("equivalence relations (3, 3, 9) around the empty set", &tp2, Vec::new(), bounds().with_region(tp2_region(&tp2)), PersistenceStatus::PersistsAtScale),
        ("random graph v=10 around the empty set", &rg, Vec::new(), bounds(), PersistenceStatus::PersistsAtScale),
    ];
    for (name, cs, a, b, expected) in cases {
        let one = persistence_in_pool(cs, &x, &a, &b, 1);
        let four = persistence_in_pool(cs, &x, &a, &b, 4);
        let v: PersistenceVerdict = serde_json::from_str(&one).unwrap();
        out.check(v.status == expected, format!("{name}: {:?} after {} localizations, killer {:?}", v.status, v.localizations_checked, v.killer.map(|k| k.localization)));
        out.check(one == four, format!("{name}: identical verdicts on 1 and 4 threads"));
        out.check(replay(cs, &x, &a, &one), format!("{name}: verdict replayed"));
    }
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    let dense = gen_dense_order(12).unwrap().sequence();
    let found = find_complete_localization(&dense, &[vec![2, 9], vec![3, 8]], 2, &bounds()).unwrap();
    let ok = found.as_ref().is_some_and(|e| {
        let set = localized_set(&dense, &e.localization).unwrap();
        set == e.extension && set.iter().combinations(2).all(|c| dense.holds_raw(&[c[0].clone(), c[1].clone()]))
    });
    out.check(ok, format!("dense order: {:?}", found.map(|e| e.localization)));
    let rg = random_graph(10, 1).sequence();
    let found = find_complete_localization(&rg, &[], 2, &bounds()).unwrap();
    out.check(found.is_none(), format!("random graph v=10: {:?}", found.map(|e| (e.localization, e.extension.len()))));
    out
}

/// Levels of the subset lattice from the definition: some set inside every
/// `y` and outside every `z`.
fn lattice_holds(n_points: usize, set: &[&Tuple]) -> bool {
    (0u32..1 << n_points).any(|x| set.iter().all(|t| x & !t[0] == 0 && x & !t[1] != 0))
}

fn planted_by_definition(a: &ArrayConfig) -> (bool, bool) {
    let holds = |cells: &[Cell]| lattice_holds(PLANT_POINTS, &cells.iter().map(|&c| a.get(c)).collect::<Vec<_>>());
    let columns_fail = (0..a.cols()).all(|col| !holds(&(0..a.rows).map(|row| Cell { col, row }).collect::<Vec<_>>()));
    let cross_hold = (1..=a.r_max).all(|s| {
        (0..a.cols()).combinations(s).all(|cols| {
            (0..s).map(|_| 0..a.rows).multi_cartesian_product().all(|rows| {
                holds(&cols.iter().zip(&rows).map(|(&col, &row)| Cell { col, row }).collect::<Vec<_>>())
            })
        })
    });
    let sharp = paths(a, a.r_max).iter().all(|p| holds(p));
    (columns_fail && cross_hold, sharp)
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    let cs = gen_subset_lattice(PLANT_POINTS).unwrap().sequence();
    for (variant, order, shift, a) in planted_arrays(PLANTED_ARRAYS) {
        let name = format!("{variant:?} {order:?} shift {shift}");
        let (valid, sharp) = planted_by_definition(&a);
        let planted = valid && !sharp && a.cols() == 8 && a.rows == 3;
        match sharpen_array(&cs, &a, &[], DEFAULT_SPACING) {
            Ok(r) => {
                let view = Relative::new(&cs, &r.output.a_bar);
                let arr = &r.output.array;
                let sharp = is_sharp(&view, arr, arr.r_max).unwrap().sharp;
                out.check(
                    planted && r.validation.passed && sharp && r.output.rounds.len() <= 1 && (2..=3).contains(&arr.rows),
                    format!(
                        "{name}: planted (8, 3) not sharp, {} round(s) to a sharp ({}, {}) over {} parameters",
                        r.output.rounds.len(),
                        arr.cols(),
                        arr.rows,
                        r.output.a_bar.len()
                    ),
                );
            }
            Err(e) => out.check(false, format!("{name}: planted {planted}, {e}")),
        }
    }
    out
}

/// Independent audit of every stage localization recorded in a trace.
fn reaudit(cs: &CharSequence, trace: &[Value], base: &[Tuple], l_check: usize) -> (usize, bool) {
    let mut count = 0;
    let mut ok = true;
    for entry in trace {
        let audit = entry.get("audit").unwrap_or(entry);
        let Some(f) = audit.get("localization") else { continue };
        let f: Localization = serde_json::from_value(f.clone()).unwrap();
        let set = localized_set(cs, &f).unwrap();
        count += 1;
        ok &= base.iter().all(|t| set.contains(t)) && is_nontrivial(cs, &f, l_check).unwrap();
    }
    (count, ok)
}

fn criterion_9() -> Outcome {
    let mut out = Outcome::new();
    let dense = gen_dense_order(12).unwrap().sequence();
    let p1 = dense.p1_set().to_vec();
    let w = detect_order_property(&dense, 5, OrderConvention::Strict, None, &p1).unwrap().unwrap();
    let d = dividing_from_order_property(&dense, &w).unwrap();
    let again = dense.extract_dividing_witness(&d.output.tuples, d.output.n, 2).unwrap();
    out.check(d.validation.passed && again.is_some() && d.output.tuples.len() == 4, format!("dividing family of {} from a length-5 order witness", d.output.tuples.len()));

    let co = detect_compatible_order(&dense, interval_supply(2, 2), 3).unwrap().unwrap();
    let tree = sop2_tree_from_compatible_order(&dense, &co, 2, 2).unwrap();
    out.check(
        tree.validation.passed && tree.output.strict && tree.output.validate(&dense) && tree.output.labels.len() == 7,
        format!("strict tree d=2 b=2 from a compatible order of length {}", co.len()),
    );

    let chain = gen_dense_order(30).unwrap().sequence();
    let b = bounds();
    let r = tree_from_persistent_order(&chain, 2, 3, &b).unwrap();
    let built = r.output.built().is_some_and(|t| t.validate(&chain));
    let (stages, audited) = reaudit(&chain, &r.trace, &[], b.l_check);
    out.check(r.validation.passed && built && audited && stages == 4, format!("order tree d=2 b=3 on a 30-chain, {stages} stages audited"));

    let paley = gen_random_graph(0, GraphMode::Paley { q: 61 }).unwrap().sequence();
    let r = array_from_persistent_empty_tuple(&paley, 2, 4, 3, &b, &[]).unwrap();
    let built = r.output.built().is_some_and(|a| a.cols() == 4 && a.rows == 2 && a.is_valid(&paley));
    let (stages, audited) = reaudit(&paley, &r.trace, &[], b.l_check);
    out.check(
        r.validation.passed && built && audited && stages == 4,
        format!("(4, 2)-array for P_3 in random-graph theta (Paley 61), {stages} stages audited"),
    );
    out
}

/// Every set of at most four members of `P_1` in the subset lattice on four
/// points, plus every non-member alone.
fn complete_graph_sweep() -> (usize, Vec<Vec<Tuple>>) {
    let cs = gen_subset_lattice(4).unwrap().sequence();
    let p1 = cs.p1_set().to_vec();
    let mut bad = Vec::new();
    let mut checked = 0;
    for t in cs.all_params().filter(|t| !p1.contains(t)) {
        checked += 1;
        let r = cs.complete_graph_check(std::slice::from_ref(&t), 4).unwrap();
        if r.complete || r.realized {
            bad.push(vec![t]);
        }
    }
    for n in 1..=4 {
        for a in p1.iter().cloned().combinations(n) {
            checked += 1;
            let r = cs.complete_graph_check(&a, 4).unwrap();
            if !r.comparable || r.complete != r.realized {
                bad.push(a);
            }
            if cs.cache_len() > 1 << 20 {
                cs.clear_cache();
            }
        }
    }
    (checked, bad)
}

fn criterion_10() -> Outcome {
    let mut out = Outcome::new();
    let packages = [
        random_graph(16, 1),
        gen_subset_lattice(4).unwrap(),
        gen_eq_relations(3, 4, 3).unwrap(),
        gen_dense_order(10).unwrap(),
    ];
    for pkg in &packages {
        let cs = pkg.sequence();
        let r = cs.verify_basic_properties(4, SamplePolicy::Sampled { seed: 1, count: AXIOM_SAMPLES });
        out.check(r.passed() && r.queries == AXIOM_SAMPLES, format!("{}: {} queries, violations {:?}", pkg.name, r.queries, r.violations));
    }
    let (checked, bad) = complete_graph_sweep();
    out.check(bad.is_empty(), format!("complete graphs against direct witnesses on {checked} sets, mismatches {bad:?}"));
    let base = random_graph(5, 3);
    let phi = parse_formula("phi(x; y) := R(x,y)", &Signature::of(&base.structure)).unwrap();
    let coding = verify_coding(base.structure.clone(), &phi, 3).unwrap();
    let summary: Vec<String> = coding.cases.iter().map(|c| format!("{} {} sets {} mismatches", c.case, c.checked, c.mismatches.len())).collect();
    out.check(coding.passed(), format!("coding on 5 vertices: {}", summary.join(", ")));
    out
}

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub run: fn() -> Outcome,
}

pub fn criteria() -> Vec<Criterion> {
    let table: [(&'static str, fn() -> Outcome); 10] = [
        ("random-graph oracle and support 2", criterion_1),
        ("random-graph empty-graph bound 3", criterion_2),
        ("no order property of length 4", criterion_3),
        ("subset-lattice universality", criterion_4),
        ("independence round trip", criterion_5),
        ("persistence dichotomy", criterion_6),
        ("complete localizations", criterion_7),
        ("sharpening planted arrays", criterion_8),
        ("construction validity", criterion_9),
        ("axioms, complete graphs, coding", criterion_10),
    ];
    table.into_iter().enumerate().map(|(i, (name, run))| Criterion { id: i + 1, name, run }).collect()
}
