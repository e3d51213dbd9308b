//! Characteristic sequences: the hypergraphs `P_n(y_1..y_n) := exists x. phi(x;y_1) & .. & phi(x;y_n)`.
//!
//! Levels are stored on canonical tuple sets (sorted, deduplicated). Truth is
//! computed from per-parameter trace bitsets over the object tuples, so a query
//! is an intersection and its first set bit is the lexicographically least
//! witness.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock, RwLock};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::formula::{CompiledFormula, PartitionedFormula};
use crate::structure::{FiniteStructure, SortId, Tuple, TupleIter};

/// Object domains larger than this are evaluated without trace bitsets.
const TRACE_LIMIT: usize = 1 << 22;

pub const DEFAULT_LEVEL_CAP: usize = 6;

/// How a check draws its inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SamplePolicy {
    Exhaustive,
    Sampled { seed: u64, count: usize },
}

pub struct CharSequence {
    structure: Arc<FiniteStructure>,
    phi: PartitionedFormula,
    compiled: CompiledFormula,
    level_cap: usize,
    object_count: usize,
    traces: RwLock<HashMap<Tuple, Arc<BitSet>>>,
    cache: RwLock<HashMap<Vec<Tuple>, bool>>,
    witnesses: RwLock<HashMap<Vec<Tuple>, Tuple>>,
    p1: OnceLock<Vec<Tuple>>,
}

impl std::fmt::Debug for CharSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CharSequence").field("phi", &self.phi.to_string()).field("level_cap", &self.level_cap).finish()
    }
}

/// Sorted, deduplicated copy of a tuple list.
pub fn canonical(tuples: &[Tuple]) -> Vec<Tuple> {
    let mut key = tuples.to_vec();
    key.sort();
    key.dedup();
    key
}

impl CharSequence {
    pub fn new(structure: Arc<FiniteStructure>, phi: PartitionedFormula) -> Result<Self> {
        let compiled = CompiledFormula::new(&structure, &phi)?;
        let object_count = structure.tuple_count(&compiled.x_sig);
        Ok(Self {
            structure,
            phi,
            compiled,
            level_cap: DEFAULT_LEVEL_CAP,
            object_count,
            traces: RwLock::new(HashMap::new()),
            cache: RwLock::new(HashMap::new()),
            witnesses: RwLock::new(HashMap::new()),
            p1: OnceLock::new(),
        })
    }

    pub fn with_level_cap(mut self, cap: usize) -> Self {
        self.level_cap = cap.max(1);
        self
    }

    /// Level cap `max(6, base + 4)` for work around a base set of the given size.
    pub fn with_base_size(self, base: usize) -> Self {
        self.with_level_cap(DEFAULT_LEVEL_CAP.max(base + 4))
    }

    pub fn structure(&self) -> &FiniteStructure {
        &self.structure
    }

    pub fn structure_arc(&self) -> Arc<FiniteStructure> {
        Arc::clone(&self.structure)
    }

    pub fn phi(&self) -> &PartitionedFormula {
        &self.phi
    }

    pub fn compiled(&self) -> &CompiledFormula {
        &self.compiled
    }

    pub fn level_cap(&self) -> usize {
        self.level_cap
    }

    pub fn param_sig(&self) -> &[SortId] {
        &self.compiled.y_sig
    }

    pub fn object_sig(&self) -> &[SortId] {
        &self.compiled.x_sig
    }

    /// All parameter tuples, in lexicographic order.
    pub fn all_params(&self) -> TupleIter {
        TupleIter::new(&self.structure, &self.compiled.y_sig)
    }

    /// Object tuples `x` with `phi(x; t)`, as ranks in the object enumeration.
    pub fn trace(&self, t: &Tuple) -> Arc<BitSet> {
        if let Some(b) = self.traces.read().unwrap().get(t) {
            return Arc::clone(b);
        }
        let mut bits = BitSet::new(self.object_count);
        for (i, x) in TupleIter::new(&self.structure, &self.compiled.x_sig).enumerate() {
            if self.compiled.satisfies(&self.structure, &x, t) {
                bits.insert(i);
            }
        }
        let bits = Arc::new(bits);
        self.traces.write().unwrap().entry(t.clone()).or_insert_with(|| Arc::clone(&bits));
        bits
    }

    fn check_params(&self, tuples: &[Tuple]) -> Result<()> {
        tuples.iter().try_for_each(|t| self.structure.check_tuple(&self.compiled.y_sig, t))
    }

    /// Direct evaluation of `exists x. AND phi(x; t)` over the list as given,
    /// bypassing the cache and the trace bitsets.
    pub fn holds_raw(&self, tuples: &[Tuple]) -> bool {
        self.raw_witness(tuples).is_some()
    }

    /// Least object tuple satisfying every instance, by direct evaluation.
    pub fn raw_witness(&self, tuples: &[Tuple]) -> Option<Tuple> {
        TupleIter::new(&self.structure, &self.compiled.x_sig)
            .find(|x| tuples.iter().all(|t| self.compiled.satisfies(&self.structure, x, t)))
    }

    fn evaluate_key(&self, key: &[Tuple]) -> Option<Tuple> {
        if self.object_count > TRACE_LIMIT {
            return self.raw_witness(key);
        }
        let mut acc = BitSet::full(self.object_count);
        for t in key {
            acc.intersect_with(&self.trace(t));
            if acc.is_empty() {
                return None;
            }
        }
        acc.first().map(|i| self.structure.tuple_unrank(&self.compiled.x_sig, i))
    }

    fn cached_false_subset(&self, key: &[Tuple]) -> bool {
        let cache = self.cache.read().unwrap();
        let n = key.len();
        if n <= 6 {
            (1..(1u32 << n) - 1).any(|mask| {
                let sub: Vec<Tuple> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| key[i].clone()).collect();
                cache.get(&sub) == Some(&false)
            })
        } else {
            key.iter().any(|t| cache.get(std::slice::from_ref(t)) == Some(&false))
                || (0..n).any(|skip| {
                    let sub: Vec<Tuple> = key.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, t)| t.clone()).collect();
                    cache.get(&sub) == Some(&false)
                })
        }
    }

    /// `P_n` on the underlying set of `tuples`.
    pub fn holds(&self, tuples: &[Tuple]) -> Result<bool> {
        self.check_params(tuples)?;
        self.holds_key(canonical(tuples))
    }

    /// Like [`holds`](Self::holds) for an already canonical, validated key.
    pub fn holds_key(&self, key: Vec<Tuple>) -> Result<bool> {
        if key.len() > self.level_cap {
            return Err(Error::LevelCap { size: key.len(), cap: self.level_cap });
        }
        if let Some(&v) = self.cache.read().unwrap().get(&key) {
            return Ok(v);
        }
        if key.len() > 1 && self.cached_false_subset(&key) {
            self.cache.write().unwrap().insert(key, false);
            return Ok(false);
        }
        let w = self.evaluate_key(&key);
        let value = w.is_some();
        if let Some(w) = w {
            self.witnesses.write().unwrap().insert(key.clone(), w);
        }
        self.cache.write().unwrap().insert(key, value);
        Ok(value)
    }

    /// Convenience for search code working inside `P_1`: panics only on level
    /// cap violations, which callers rule out by construction.
    pub fn holds_set(&self, tuples: &[&Tuple]) -> bool {
        let key = canonical(&tuples.iter().map(|t| (*t).clone()).collect::<Vec<_>>());
        self.holds_key(key).expect("set within level cap")
    }

    /// Stored witness for a true level query.
    pub fn witness(&self, tuples: &[Tuple]) -> Result<Option<Tuple>> {
        let key = canonical(tuples);
        if !self.holds(&key)? {
            return Ok(None);
        }
        if let Some(w) = self.witnesses.read().unwrap().get(&key) {
            return Ok(Some(w.clone()));
        }
        // Answered by the cache before the witness was recorded elsewhere.
        let w = self.evaluate_key(&key);
        if let Some(w) = &w {
            self.witnesses.write().unwrap().insert(key, w.clone());
        }
        Ok(w)
    }

    /// `P_1` as a sorted list.
    pub fn p1_set(&self) -> &[Tuple] {
        self.p1.get_or_init(|| {
            let all: Vec<Tuple> = self.all_params().collect();
            all.into_iter().filter(|t| self.holds_key(vec![t.clone()]).unwrap_or(false)).collect()
        })
    }

    /// Whether every subset of `a` of size at most `n_max` holds.
    pub fn is_complete(&self, a: &[Tuple], n_max: usize) -> Result<bool> {
        let a = canonical(a);
        self.check_params(&a)?;
        let n = n_max.min(a.len());
        if n == 0 {
            return Ok(true);
        }
        for sub in a.iter().cloned().combinations(n) {
            if !self.holds_key(sub)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    /// Drops cached levels and witnesses; traces and `P_1` are kept.
    pub fn clear_cache(&self) {
        self.cache.write().unwrap().clear();
        self.witnesses.write().unwrap().clear();
    }

    /// A cached true set with a cached false nonempty subset, if any.
    pub fn audit_downward_closure(&self) -> Option<(Vec<Tuple>, Vec<Tuple>)> {
        let cache = self.cache.read().unwrap();
        let mut keys: Vec<&Vec<Tuple>> = cache.iter().filter(|(_, &v)| v).map(|(k, _)| k).collect();
        keys.sort();
        for k in keys {
            for r in 1..k.len() {
                for sub in k.iter().cloned().combinations(r) {
                    if cache.get(&sub) == Some(&false) {
                        return Some((k.clone(), sub));
                    }
                }
            }
        }
        None
    }

    /// Stored witnesses that fail to satisfy their key, if any.
    pub fn audit_witnesses(&self) -> Vec<Vec<Tuple>> {
        let ws = self.witnesses.read().unwrap();
        let mut bad: Vec<Vec<Tuple>> = ws
            .iter()
            .filter(|(k, x)| !k.iter().all(|t| self.compiled.satisfies(&self.structure, x, t)))
            .map(|(k, _)| k.clone())
            .collect();
        bad.sort();
        bad
    }

    /// Tab-separated listing of every level-`n` set drawn from `region`, for
    /// `n <= n_max`.
    pub fn dump_levels(&self, region: &[Tuple], n_max: usize) -> Result<String> {
        let region = canonical(region);
        self.check_params(&region)?;
        let mut out = String::new();
        for n in 1..=n_max.min(region.len()) {
            for set in region.iter().cloned().combinations(n) {
                let w = self.witness(&set)?;
                let set_text = serde_json::to_string(&set).expect("tuples serialize");
                match w {
                    Some(w) => {
                        let w_text = serde_json::to_string(&w).expect("tuple serializes");
                        writeln!(out, "{n}\t{set_text}\t1\t{w_text}").unwrap();
                    }
                    None => writeln!(out, "{n}\t{set_text}\t0").unwrap(),
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyViolation {
    pub property: &'static str,
    pub tuples: Vec<Tuple>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BasicPropertiesReport {
    pub queries: usize,
    pub violations: Vec<PropertyViolation>,
}

impl BasicPropertiesReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportReport {
    pub k: usize,
    pub n_max: usize,
    pub supported: bool,
    pub counterexample: Option<Vec<Tuple>>,
    pub sets_checked: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompleteGraphReport {
    /// Every subset of size at most `n_max` holds.
    pub complete: bool,
    /// A single object tuple realizes every instance, by direct evaluation.
    pub realized: bool,
    pub witness: Option<Tuple>,
    /// Whether `n_max` reaches `|A|`, so the two sides must agree.
    pub comparable: bool,
}

impl CompleteGraphReport {
    pub fn consistent(&self) -> bool {
        !self.comparable || self.complete == self.realized
    }
}

/// A family of `phi_n` instances that is 1-consistent and k-inconsistent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DividingWitness {
    /// Each entry is an `n`-fold concatenated parameter tuple.
    pub tuples: Vec<Tuple>,
    pub n: usize,
    pub k: usize,
}

impl CharSequence {
    /// Splits an `n`-fold concatenated tuple into its `n` parameter tuples.
    pub fn split_concat(&self, t: &[crate::structure::Elem], n: usize) -> Result<Vec<Tuple>> {
        let l = self.param_sig().len();
        if t.len() != n * l {
            return Err(Error::Arity { expected: n * l, found: t.len() });
        }
        Ok(t.chunks(l).map(|c| c.to_vec()).collect())
    }

    fn sample_list(&self, rng: &mut ChaCha8Rng, n_max: usize, all: &[Tuple]) -> Vec<Tuple> {
        let p1 = self.p1_set();
        let len = rng.gen_range(1..=n_max);
        if !p1.is_empty() && rng.gen_bool(0.5) && self.object_count <= TRACE_LIMIT {
            // Bias towards true instances: members of one random object's trace.
            let x = rng.gen_range(0..self.object_count);
            let members: Vec<&Tuple> = p1.iter().filter(|t| self.trace(t).contains(x)).collect();
            if !members.is_empty() {
                return (0..len).map(|_| (*members.choose(rng).unwrap()).clone()).collect();
            }
        }
        (0..len)
            .map(|_| {
                if !p1.is_empty() && rng.gen_bool(0.8) {
                    p1.choose(rng).unwrap().clone()
                } else {
                    all.choose(rng).unwrap().clone()
                }
            })
            .collect()
    }

    /// Checks reflexivity, symmetry and monotonicity with direct evaluation,
    /// and agreement of the cached levels with it.
    pub fn verify_basic_properties(&self, n_max: usize, policy: SamplePolicy) -> BasicPropertiesReport {
        let n_max = n_max.min(self.level_cap).max(1);
        let all: Vec<Tuple> = self.all_params().collect();
        let lists: Vec<Vec<Tuple>> = match policy {
            SamplePolicy::Exhaustive => {
                (1..=n_max.min(all.len())).flat_map(|n| all.iter().cloned().combinations(n)).collect()
            }
            SamplePolicy::Sampled { seed, count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count).map(|_| self.sample_list(&mut rng, n_max, &all)).collect()
            }
        };
        let mut report = BasicPropertiesReport::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for list in lists {
            report.queries += 1;
            let base = self.holds_raw(&list);
            let mut flag = |p: &'static str| report.violations.push(PropertyViolation { property: p, tuples: list.clone() });
            let set = canonical(&list);
            let mut repeated = list.clone();
            repeated.push(list[rng.gen_range(0..list.len())].clone());
            if self.holds_raw(&set) != base || self.holds_raw(&repeated) != base {
                flag("reflexivity");
            }
            let mut perm = list.clone();
            perm.shuffle(&mut rng);
            if self.holds_raw(&perm) != base {
                flag("symmetry");
            }
            if base && list.len() > 1 {
                for skip in 0..list.len() {
                    let mut sub = list.clone();
                    sub.remove(skip);
                    if !self.holds_raw(&sub) {
                        flag("monotonicity");
                        break;
                    }
                }
            }
            if set.len() <= self.level_cap && self.holds_key(set).ok() != Some(base) {
                flag("cache agreement");
            }
        }
        report
    }

    /// All `k`-complete subsets of `region` of size `n`, i.e. sets every
    /// `k`-subset of which holds, visited in lexicographic order of indices.
    fn k_complete_sets(&self, region: &[Tuple], k: usize, n: usize, visit: &mut dyn FnMut(&[usize]) -> bool) {
        fn rec(
            cs: &CharSequence,
            region: &[Tuple],
            k: usize,
            n: usize,
            chosen: &mut Vec<usize>,
            start: usize,
            visit: &mut dyn FnMut(&[usize]) -> bool,
        ) -> bool {
            if chosen.len() == n {
                return visit(chosen);
            }
            for i in start..region.len() {
                let ok = {
                    let need = (k - 1).min(chosen.len());
                    chosen.iter().copied().combinations(need).all(|sub| {
                        let mut set: Vec<&Tuple> = sub.iter().map(|&j| &region[j]).collect();
                        set.push(&region[i]);
                        cs.holds_set(&set)
                    })
                };
                if ok {
                    chosen.push(i);
                    let go_on = rec(cs, region, k, n, chosen, i + 1, visit);
                    chosen.pop();
                    if !go_on {
                        return false;
                    }
                }
            }
            true
        }
        rec(self, region, k, n, &mut Vec::new(), 0, visit);
    }

    /// Whether `P_n` on subsets of `P_1` is determined by `P_k` on their
    /// `k`-subsets, for every `n <= n_max`.
    pub fn support(&self, k: usize, n_max: usize, policy: SamplePolicy) -> Result<SupportReport> {
        if k == 0 || k > n_max {
            return Err(Error::InvalidArgument(format!("support needs 1 <= k <= n_max, got k={k}, n_max={n_max}")));
        }
        if n_max > self.level_cap {
            return Err(Error::LevelCap { size: n_max, cap: self.level_cap });
        }
        let region = self.p1_set().to_vec();
        let mut report = SupportReport { k, n_max, supported: true, counterexample: None, sets_checked: 0 };
        match policy {
            SamplePolicy::Exhaustive => {
                for n in k + 1..=n_max {
                    let mut found = None;
                    let mut checked = 0;
                    self.k_complete_sets(&region, k, n, &mut |idx| {
                        checked += 1;
                        let set: Vec<&Tuple> = idx.iter().map(|&i| &region[i]).collect();
                        if !self.holds_set(&set) {
                            found = Some(set.into_iter().cloned().collect());
                            return false;
                        }
                        true
                    });
                    report.sets_checked += checked;
                    if found.is_some() {
                        report.supported = false;
                        report.counterexample = found;
                        return Ok(report);
                    }
                }
            }
            SamplePolicy::Sampled { seed, count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..count {
                    let n = rng.gen_range(k + 1..=n_max.max(k + 1));
                    if n > n_max || region.is_empty() {
                        break;
                    }
                    // Grow a random k-complete set greedily.
                    let mut set: Vec<Tuple> = Vec::new();
                    let mut order: Vec<usize> = (0..region.len()).collect();
                    order.shuffle(&mut rng);
                    for i in order {
                        if set.len() == n {
                            break;
                        }
                        let t = &region[i];
                        if set.contains(t) {
                            continue;
                        }
                        let need = (k - 1).min(set.len());
                        let ok = set.iter().combinations(need).all(|sub| {
                            let mut s: Vec<&Tuple> = sub;
                            s.push(t);
                            self.holds_set(&s)
                        });
                        if ok {
                            set.push(t.clone());
                        }
                    }
                    if set.len() <= k {
                        continue;
                    }
                    report.sets_checked += 1;
                    let refs: Vec<&Tuple> = set.iter().collect();
                    if !self.holds_set(&refs) {
                        report.supported = false;
                        report.counterexample = Some(canonical(&set));
                        return Ok(report);
                    }
                }
            }
        }
        Ok(report)
    }

    /// Compares completeness of `a` up to `n_max` with direct realization of
    /// the partial type `{phi(x; t) : t in a}`.
    pub fn complete_graph_check(&self, a: &[Tuple], n_max: usize) -> Result<CompleteGraphReport> {
        let a = canonical(a);
        self.check_params(&a)?;
        let complete = self.is_complete(&a, n_max.min(self.level_cap))?;
        let witness = self.raw_witness(&a);
        Ok(CompleteGraphReport {
            complete,
            realized: witness.is_some(),
            witness,
            comparable: n_max >= a.len() && a.len() <= self.level_cap,
        })
    }

    /// Returns `Y` as a dividing family when every `k`-subset of `Y` is
    /// inconsistent at level `n * k`.
    pub fn extract_dividing_witness(&self, ys: &[Tuple], n: usize, k: usize) -> Result<Option<DividingWitness>> {
        let ys = canonical(ys);
        let split: Vec<Vec<Tuple>> = ys.iter().map(|y| self.split_concat(y, n)).collect::<Result<_>>()?;
        for parts in &split {
            self.check_params(parts)?;
            if !self.holds(parts)? {
                return Err(Error::NotInLevel(n));
            }
        }
        if k < 2 {
            return Ok(None);
        }
        if ys.len() < k {
            // No k members to be consistent.
            return Ok(Some(DividingWitness { tuples: ys, n, k }));
        }
        for combo in (0..ys.len()).combinations(k) {
            let all: Vec<Tuple> = combo.iter().flat_map(|&i| split[i].iter().cloned()).collect();
            if self.holds(&all)? {
                return Ok(None);
            }
        }
        Ok(Some(DividingWitness { tuples: ys, n, k }))
    }
}

/// Read access to the levels of a sequence, shared by plain sequences and
/// their relativizations.
pub trait Levels: Sync {
    /// Truth of the level on the underlying set of `tuples`. The set, after
    /// any parameters the view adds, must fit under [`level_cap`](Self::level_cap).
    fn holds_refs(&self, tuples: &[&Tuple]) -> bool;

    /// Largest set size [`holds_refs`](Self::holds_refs) accepts.
    fn level_cap(&self) -> usize;

    fn base(&self) -> &CharSequence;
}

impl Levels for CharSequence {
    fn holds_refs(&self, tuples: &[&Tuple]) -> bool {
        self.holds_set(tuples)
    }

    fn level_cap(&self) -> usize {
        self.level_cap
    }

    fn base(&self) -> &CharSequence {
        self
    }
}

/// The sequence of `phi(x; y) & phi(x; a_1) & .. & phi(x; a_k)`, computed as
/// `P_{n+k}(y_1..y_n, a_1..a_k)` on the underlying sequence.
#[derive(Debug)]
pub struct Relative<'a> {
    pub cs: &'a CharSequence,
    pub extra: Vec<Tuple>,
}

impl<'a> Relative<'a> {
    pub fn new(cs: &'a CharSequence, extra: &[Tuple]) -> Self {
        Self { cs, extra: canonical(extra) }
    }
}

impl Levels for Relative<'_> {
    fn holds_refs(&self, tuples: &[&Tuple]) -> bool {
        let mut all: Vec<&Tuple> = tuples.to_vec();
        all.extend(self.extra.iter());
        self.cs.holds_set(&all)
    }

    fn level_cap(&self) -> usize {
        self.cs.level_cap.saturating_sub(self.extra.len())
    }

    fn base(&self) -> &CharSequence {
        self.cs
    }
}

#[cfg(test)]
mod tests;
