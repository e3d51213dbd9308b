//! Generators for the worked example structures, each with a closed-form
//! prediction of its levels.
//!
//! The closed forms describe the infinite models the finite structures stand
//! in for. Where the finite structure lacks the needed extension or density
//! properties the prediction can be wrong, and [`oracle_check`] classifies
//! every disagreement.

use std::collections::BTreeSet;
use std::sync::Arc;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{parse_formula, PartitionedFormula, Signature};
use crate::sequence::{canonical, CharSequence, SamplePolicy};
use crate::structure::{Elem, FiniteStructure, StructureBuilder, Tuple};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum GraphMode {
    Sampled { seed: u64, p: f64 },
    /// Quadratic-residue graph on a prime `q = 1 mod 4`.
    Paley { q: u32 },
}

/// Closed-form level predictions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Oracle {
    /// Levels hold iff no vertex is used both positively and negatively.
    RandomGraph,
    /// Levels hold iff the common intersection of the positive sets escapes
    /// every negative set.
    SubsetLattice,
    /// First two levels of the parametrized equivalence relations; later
    /// levels have no prediction.
    EqRelations { num_classes: usize, class_size: usize, classes: Vec<Vec<usize>> },
    /// Levels hold iff some point lies strictly between every left and right endpoint.
    DenseOrder,
}

#[derive(Clone, Debug)]
pub struct ExamplePackage {
    pub name: String,
    pub structure: Arc<FiniteStructure>,
    pub phi: PartitionedFormula,
    pub oracle: Oracle,
    /// Known gaps between the finite structure and the model it stands in for.
    pub provenance: String,
}

impl ExamplePackage {
    pub fn sequence(&self) -> CharSequence {
        CharSequence::new(Arc::clone(&self.structure), self.phi.clone()).expect("package formula compiles")
    }

    /// Predicted truth of the level on the underlying set, if the oracle has one.
    pub fn predict(&self, set: &[Tuple]) -> Option<bool> {
        let set = canonical(set);
        if set.is_empty() {
            return Some(true);
        }
        match &self.oracle {
            Oracle::RandomGraph => {
                let ys: BTreeSet<Elem> = set.iter().map(|t| t[0]).collect();
                Some(set.iter().all(|t| !ys.contains(&t[1])))
            }
            Oracle::SubsetLattice => {
                let meet = set.iter().fold(!0u32, |acc, t| acc & t[0]);
                Some(set.iter().all(|t| meet & !t[1] != 0))
            }
            Oracle::DenseOrder => {
                let lo = set.iter().map(|t| t[0]).max().unwrap();
                let hi = set.iter().map(|t| t[1]).min().unwrap();
                Some(lo + 1 < hi)
            }
            Oracle::EqRelations { classes, .. } => {
                let same = |x: Elem, a: Elem, b: Elem| classes[x as usize][a as usize] == classes[x as usize][b as usize];
                // Tuples are (x, z, w).
                let p1 = |t: &Tuple| !same(t[0], t[1], t[2]);
                match set.len() {
                    1 => Some(p1(&set[0])),
                    2 => {
                        let (a, b) = (&set[0], &set[1]);
                        let mut ok = p1(a) && p1(b);
                        if a[0] == b[0] {
                            ok = ok && same(a[0], a[1], b[1]) && !same(a[0], a[2], b[1]) && !same(a[0], b[2], a[1]);
                        }
                        Some(ok)
                    }
                    _ => None,
                }
            }
        }
    }
}

/// The random graph, with `phi(x; y,z) := R(x,y) & !R(x,z)`.
pub fn gen_random_graph(v: usize, mode: GraphMode) -> Result<ExamplePackage> {
    let (v, edges, note) = match mode {
        GraphMode::Sampled { seed, p } => {
            if v < 4 || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("sampled graph needs v >= 4 and 0 <= p <= 1, got v={v}, p={p}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for a in 0..v as Elem {
                for b in a + 1..v as Elem {
                    if rng.gen_bool(p) {
                        edges.push((a, b));
                    }
                }
            }
            (v, edges, format!("G({v}, {p}) sample, seed {seed}"))
        }
        GraphMode::Paley { q } => {
            if q % 4 != 1 || q < 5 || !(2..q).take_while(|d| d * d <= q).all(|d| q % d != 0) {
                return Err(Error::InvalidArgument(format!("Paley graph needs a prime q = 1 mod 4, got {q}")));
            }
            let squares: BTreeSet<u32> = (1..q).map(|a| a * a % q).collect();
            let edges = (0..q).flat_map(|a| (a + 1..q).map(move |b| (a, b))).filter(|(a, b)| squares.contains(&(b - a))).collect();
            (q as usize, edges, format!("Paley graph on {q} vertices"))
        }
    };
    let tuples = edges.iter().flat_map(|&(a, b)| [vec![a, b], vec![b, a]]);
    let s = StructureBuilder::new().sort("V", v).relation("R", &["V", "V"], tuples).build()?;
    let phi = parse_formula("phi(x; y,z) := R(x,y) & !R(x,z)", &Signature::of(&s))?;
    Ok(ExamplePackage {
        name: "random-graph".into(),
        structure: Arc::new(s),
        phi,
        oracle: Oracle::RandomGraph,
        provenance: format!("{note}; finite graphs lack the extension property, so predicted-true sets may have no witness"),
    })
}

/// Subsets of `{0..n-1}` encoded as bitmasks, with inclusion and equality,
/// and `phi(x; y,z) := sub(x,y) & !sub(x,z)`.
pub fn gen_subset_lattice(n: usize) -> Result<ExamplePackage> {
    if !(2..=12).contains(&n) {
        return Err(Error::InvalidArgument(format!("subset lattice size must be in 2..=12, got {n}")));
    }
    let size = 1u32 << n;
    let sub = (0..size).flat_map(|a| (0..size).filter(move |b| a & !b == 0).map(move |b| vec![a, b]));
    let eq = (0..size).map(|a| vec![a, a]);
    let s = StructureBuilder::new()
        .sort("S", size as usize)
        .relation("sub", &["S", "S"], sub)
        .relation("eq", &["S", "S"], eq)
        .build()?;
    let phi = parse_formula("phi(x; y,z) := sub(x,y) & !sub(x,z)", &Signature::of(&s))?;
    Ok(ExamplePackage {
        name: "subset-lattice".into(),
        structure: Arc::new(s),
        phi,
        oracle: Oracle::SubsetLattice,
        provenance: format!("all subsets of a {n}-element set; the intersection of the positive sets is a witness, so the prediction is exact"),
    })
}

/// The literal closed form `{} != meet(y) and meet(y) not inside join(z)`,
/// which is stronger than the true level condition.
pub fn subset_lattice_literal_form(set: &[Tuple]) -> bool {
    let meet = set.iter().fold(!0u32, |acc, t| acc & t[0]);
    let join = set.iter().fold(0u32, |acc, t| acc | t[1]);
    meet != 0 && meet & !join != 0
}

/// Whether `class_size == num_classes^(num_x - 1)`, so the points are the
/// grid `num_classes^num_x` and partition `s` reads coordinate `s`.
fn is_product(num_x: usize, num_classes: usize, class_size: usize) -> bool {
    (num_classes as u128).checked_pow(num_x as u32 - 1) == Some(class_size as u128)
}

/// Class labels for each of `num_x` partitions of `num_classes * class_size`
/// points into equal classes, chosen so that classes of distinct partitions
/// overlap as evenly as possible. On product sizes the partitions are fully
/// independent: any classes of distinct partitions meet.
fn cross_cutting_partitions(num_x: usize, num_classes: usize, class_size: usize) -> Vec<Vec<usize>> {
    let n = num_classes * class_size;
    if is_product(num_x, num_classes, class_size) {
        return (0..num_x).map(|s| (0..n).map(|p| p / num_classes.pow(s as u32) % num_classes).collect()).collect();
    }
    let mut parts: Vec<Vec<usize>> = Vec::with_capacity(num_x);
    for s in 0..num_x {
        // Point p = r * num_classes + c sits in row r, column c; partition s
        // shifts row r by s * r, walking the torus diagonally.
        let labels: Vec<usize> = (0..n)
            .map(|p| {
                let (r, c) = (p / num_classes, p % num_classes);
                (c + s * r) % num_classes
            })
            .collect();
        parts.push(labels);
    }
    parts
}

/// Parametrized equivalence relations `E(x, y, z)` with
/// `phi(y; x,z,w) := E(x,y,z) & !E(x,z,w)`.
pub fn gen_eq_relations(num_x: usize, num_classes: usize, class_size: usize) -> Result<ExamplePackage> {
    if num_x < 2 || num_classes < 2 || class_size < 2 {
        return Err(Error::InvalidArgument("equivalence-relation parameters must all be at least 2".into()));
    }
    if num_x > num_classes && !is_product(num_x, num_classes, class_size) {
        return Err(Error::InvalidArgument(format!(
            "class arithmetic mismatch: {num_x} distinct partitions need at least as many classes, got {num_classes}"
        )));
    }
    let classes = cross_cutting_partitions(num_x, num_classes, class_size);
    let ny = num_classes * class_size;
    let mut tuples = Vec::new();
    for (x, labels) in classes.iter().enumerate() {
        for a in 0..ny {
            for b in 0..ny {
                if labels[a] == labels[b] {
                    tuples.push(vec![x as Elem, a as Elem, b as Elem]);
                }
            }
        }
    }
    let s = StructureBuilder::new()
        .sort("X", num_x)
        .sort("Y", ny)
        .relation("E", &["X", "Y", "Y"], tuples)
        .build()?;
    let phi = parse_formula("phi(y; x,z,w) := E(x,y,z) & !E(x,z,w)", &Signature::of(&s))?;
    Ok(ExamplePackage {
        name: "eq-relations".into(),
        structure: Arc::new(s),
        phi,
        oracle: Oracle::EqRelations { num_classes, class_size, classes },
        provenance: format!(
            "{num_x} partitions of {ny} points into {num_classes} classes of {class_size}; classes of distinct partitions \
             need not meet, so predicted-true pairs across partitions may have no witness"
        ),
    })
}

/// A finite chain with `phi(x; y,z) := lt(y,x) & lt(x,z)`.
pub fn gen_dense_order(v: usize) -> Result<ExamplePackage> {
    if v < 8 {
        return Err(Error::InvalidArgument(format!("chain length must be at least 8, got {v}")));
    }
    let lt = (0..v as Elem).flat_map(|a| (a + 1..v as Elem).map(move |b| vec![a, b]));
    let s = StructureBuilder::new().sort("V", v).relation("lt", &["V", "V"], lt).build()?;
    let phi = parse_formula("phi(x; y,z) := lt(y,x) & lt(x,z)", &Signature::of(&s))?;
    Ok(ExamplePackage {
        name: "dense-order".into(),
        structure: Arc::new(s),
        phi,
        oracle: Oracle::DenseOrder,
        provenance: format!("{v}-element chain; density is replaced by requiring a point strictly inside, which is exact"),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DisagreementKind {
    /// Predicted true, but the finite structure has no witness.
    MissingWitness,
    /// Predicted false, but a witness exists.
    Spurious,
}

#[derive(Clone, Debug, Serialize)]
pub struct Disagreement {
    pub set: Vec<Tuple>,
    pub kind: DisagreementKind,
    pub witness: Option<Tuple>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct OracleReport {
    pub package: String,
    pub sets_checked: usize,
    pub unpredicted: usize,
    pub disagreements: Vec<Disagreement>,
}

impl OracleReport {
    pub fn spurious(&self) -> usize {
        self.disagreements.iter().filter(|d| d.kind == DisagreementKind::Spurious).count()
    }

    pub fn missing_witness(&self) -> usize {
        self.disagreements.iter().filter(|d| d.kind == DisagreementKind::MissingWitness).count()
    }
}

/// Compares predicted and computed levels on sets of size `n` drawn from all
/// parameter tuples.
pub fn oracle_check_level(pkg: &ExamplePackage, cs: &CharSequence, n: usize, policy: SamplePolicy, report: &mut OracleReport) {
    let all: Vec<Tuple> = cs.all_params().collect();
    let check = |set: Vec<Tuple>, report: &mut OracleReport| {
        report.sets_checked += 1;
        let Some(pred) = pkg.predict(&set) else {
            report.unpredicted += 1;
            return;
        };
        let got = cs.holds_key(set.clone()).expect("within level cap");
        if pred != got {
            let kind = if pred { DisagreementKind::MissingWitness } else { DisagreementKind::Spurious };
            let witness = cs.witness(&set).ok().flatten();
            report.disagreements.push(Disagreement { set, kind, witness });
        }
    };
    match policy {
        SamplePolicy::Exhaustive => {
            for set in all.iter().cloned().combinations(n) {
                check(set, report);
            }
        }
        SamplePolicy::Sampled { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9));
            let p1 = cs.p1_set().to_vec();
            let mut drawn = 0;
            while drawn < count {
                let pool = if !p1.is_empty() && rng.gen_bool(0.5) { &p1 } else { &all };
                if pool.len() < n {
                    break;
                }
                let set = canonical(&pool.choose_multiple(&mut rng, n).cloned().collect::<Vec<_>>());
                if set.len() == n {
                    check(set, report);
                    drawn += 1;
                }
            }
        }
    }
}

/// Cross-validates the closed form against computed levels for every size up
/// to `n_max`. Sizes up to `exhaustive_max` are enumerated; larger sizes use
/// the sampling policy.
pub fn oracle_check(pkg: &ExamplePackage, cs: &CharSequence, n_max: usize, exhaustive_max: usize, policy: SamplePolicy) -> OracleReport {
    let mut report = OracleReport { package: pkg.name.clone(), ..Default::default() };
    for n in 1..=n_max {
        let p = if n <= exhaustive_max { SamplePolicy::Exhaustive } else { policy };
        oracle_check_level(pkg, cs, n, p, &mut report);
    }
    report
}

#[cfg(test)]
mod tests;
