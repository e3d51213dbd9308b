//! Localizations `P^f_n`: finite conjunctions of levels with parameters that
//! restrict where parameters may be drawn from, and bounded persistence.

use std::collections::{HashMap, HashSet};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::configs::{find_embedding, EmbedMode, T0Config};
use crate::error::{Error, Result};
use crate::formula::star_localize;
use crate::sequence::{canonical, CharSequence};
use crate::structure::Tuple;

/// One conjunct `P_level(y_positions.., params..)` of a localization.
/// Serialized as `[level, positions, params]` with 1-based positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(usize, Vec<usize>, Vec<Tuple>)", into = "(usize, Vec<usize>, Vec<Tuple>)")]
pub struct Conjunct {
    pub level: usize,
    /// 0-based positions of the localized variables.
    pub positions: Vec<usize>,
    pub params: Vec<Tuple>,
}

impl TryFrom<(usize, Vec<usize>, Vec<Tuple>)> for Conjunct {
    type Error = String;

    fn try_from((level, positions, params): (usize, Vec<usize>, Vec<Tuple>)) -> std::result::Result<Self, String> {
        let positions = positions
            .into_iter()
            .map(|p| p.checked_sub(1).ok_or_else(|| "positions are 1-based".to_string()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { level, positions, params })
    }
}

impl From<Conjunct> for (usize, Vec<usize>, Vec<Tuple>) {
    fn from(c: Conjunct) -> Self {
        (c.level, c.positions.iter().map(|p| p + 1).collect(), c.params)
    }
}

impl Conjunct {
    pub fn new(positions: Vec<usize>, params: Vec<Tuple>) -> Self {
        Self { level: positions.len() + params.len(), positions, params }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Localization {
    pub arity: usize,
    pub conjuncts: Vec<Conjunct>,
}

impl Localization {
    pub fn empty(arity: usize) -> Self {
        Self { arity, conjuncts: Vec::new() }
    }

    /// The arity-1 localization `P_2(y, b)` for each `b`, conjoined.
    pub fn consistent_with(params: &[Tuple]) -> Self {
        Self { arity: 1, conjuncts: params.iter().map(|b| Conjunct::new(vec![0], vec![b.clone()])).collect() }
    }

    /// The arity-1 localization `P_{r+1}(y, b_1..b_r)` with one conjunct.
    pub fn jointly_consistent(params: &[Tuple]) -> Self {
        let params = canonical(params);
        if params.is_empty() {
            return Self::empty(1);
        }
        Self { arity: 1, conjuncts: vec![Conjunct::new(vec![0], params)] }
    }

    /// Distinct parameters used by the conjuncts.
    pub fn parameter_set(&self) -> Vec<Tuple> {
        canonical(&self.conjuncts.iter().flat_map(|c| c.params.iter().cloned()).collect::<Vec<_>>())
    }

    /// Key of the canonical order: conjunct count, level vector, parameters.
    pub fn order_key(&self) -> (usize, Vec<usize>, Vec<Vec<Tuple>>) {
        (
            self.conjuncts.len(),
            self.conjuncts.iter().map(|c| c.level).collect(),
            self.conjuncts.iter().map(|c| c.params.clone()).collect(),
        )
    }

    fn check(&self, cs: &CharSequence) -> Result<()> {
        for c in &self.conjuncts {
            if let Some(&p) = c.positions.iter().find(|&&p| p >= self.arity) {
                return Err(Error::InvalidArgument(format!("position {} out of range for arity {}", p + 1, self.arity)));
            }
            if c.level != c.positions.len() + c.params.len() {
                return Err(Error::InvalidArgument(format!(
                    "conjunct level {} differs from its {} arguments",
                    c.level,
                    c.positions.len() + c.params.len()
                )));
            }
            if c.level > cs.level_cap() {
                return Err(Error::LevelCap { size: c.level, cap: cs.level_cap() });
            }
            for b in &c.params {
                if !cs.holds(std::slice::from_ref(b))? {
                    return Err(Error::NotInP1(b.clone()));
                }
            }
        }
        Ok(())
    }
}

/// `P^f_n(tuples)`: every conjunct holds on its selected tuples with its parameters.
pub fn apply_localization(cs: &CharSequence, f: &Localization, tuples: &[Tuple]) -> Result<bool> {
    if tuples.len() != f.arity {
        return Err(Error::Arity { expected: f.arity, found: tuples.len() });
    }
    f.check(cs)?;
    for c in &f.conjuncts {
        let args: Vec<Tuple> = c.positions.iter().map(|&p| tuples[p].clone()).chain(c.params.iter().cloned()).collect();
        if !cs.holds(&args)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Members of `P_1` satisfying an arity-1 localization.
pub fn localized_set(cs: &CharSequence, f: &Localization) -> Result<Vec<Tuple>> {
    if f.arity != 1 {
        return Err(Error::InvalidArgument("localized sets need arity 1".into()));
    }
    f.check(cs)?;
    let mut out = Vec::new();
    for t in cs.p1_set() {
        if apply_localization(cs, f, std::slice::from_ref(t))? {
            out.push(t.clone());
        }
    }
    Ok(out)
}

/// A set of `size` members of `set` holding at level `size`, least first.
pub fn find_complete_subset(cs: &CharSequence, set: &[Tuple], size: usize) -> Option<Vec<Tuple>> {
    if size == 0 {
        return Some(Vec::new());
    }
    let mut chosen: Vec<usize> = Vec::new();
    fn rec(cs: &CharSequence, set: &[Tuple], size: usize, start: usize, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == size {
            return true;
        }
        for i in start..set.len() {
            if set.len() - i < size - chosen.len() {
                break;
            }
            chosen.push(i);
            let refs: Vec<&Tuple> = chosen.iter().map(|&j| &set[j]).collect();
            if cs.holds_set(&refs) && rec(cs, set, size, i + 1, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    rec(cs, set, size.min(cs.level_cap()), 0, &mut chosen).then(|| chosen.iter().map(|&i| set[i].clone()).collect())
}

/// Nontriviality up to `l_check`: a complete graph of size `l_check` (hence of
/// every smaller size) inside the localized set. Returns the certificate.
pub fn nontrivial_certificate(cs: &CharSequence, f: &Localization, l_check: usize) -> Result<Option<Vec<Tuple>>> {
    let set = localized_set(cs, f)?;
    Ok(find_complete_subset(cs, &set, l_check.min(cs.level_cap())))
}

pub fn is_nontrivial(cs: &CharSequence, f: &Localization, l_check: usize) -> Result<bool> {
    Ok(nontrivial_certificate(cs, f, l_check)?.is_some())
}

pub const DEFAULT_L_CHECK: usize = 3;

/// Finite bounds on the localizations considered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub m_max: usize,
    pub b_max: usize,
    pub r_max: usize,
    /// Where parameters come from; all of `P_1` when absent.
    pub region: Option<Vec<Tuple>>,
    /// Size of the complete graph demanded for nontriviality.
    pub l_check: usize,
    /// Bytes the enumeration may hold; unlimited when absent.
    pub memory_budget: Option<usize>,
}

impl Bounds {
    pub fn new(m_max: usize, b_max: usize, r_max: usize) -> Self {
        Self { m_max, b_max, r_max, region: None, l_check: DEFAULT_L_CHECK, memory_budget: None }
    }

    pub fn with_region(mut self, region: Vec<Tuple>) -> Self {
        self.region = Some(canonical(&region));
        self
    }

    pub fn with_memory_budget(mut self, bytes: Option<usize>) -> Self {
        self.memory_budget = bytes;
        self
    }
}

/// A localization with its extension inside `P_1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalizedEntry {
    pub localization: Localization,
    pub extension: Vec<Tuple>,
    pub certificate: Vec<Tuple>,
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Every nontrivial localization of `P_1` within `bounds` whose localized set
/// contains `a`, one per distinct localized set, in canonical order.
pub fn enumerate_localizations(cs: &CharSequence, a: &[Tuple], bounds: &Bounds) -> Result<Vec<LocalizedEntry>> {
    let p1: Vec<Tuple> = cs.p1_set().to_vec();
    let index: HashMap<&Tuple, usize> = p1.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let a = canonical(a);
    let a_idx: Vec<usize> = a
        .iter()
        .map(|t| index.get(t).copied().ok_or_else(|| Error::NotInP1(t.clone())))
        .collect::<Result<_>>()?;
    let region: Vec<Tuple> = match &bounds.region {
        Some(r) => canonical(r).into_iter().filter(|t| index.contains_key(t)).collect(),
        None => p1.clone(),
    };
    let max_params = bounds.b_max.min(bounds.r_max.saturating_sub(1)).min(cs.level_cap().saturating_sub(1));
    let max_b = bounds.b_max.min(region.len());
    // Upper bound on the memory before committing to it.
    let conj_count: u128 = (1..=max_params).map(|s| binom(region.len(), s)).sum();
    let set_count: u128 = (0..=max_b).map(|s| binom(region.len(), s)).sum();
    let per_set: u128 = 1u128 << max_b.min(16);
    let row_bytes = (p1.len() / 8 + 64) as u128;
    let estimate = conj_count * row_bytes + set_count * per_set * 96;
    if let Some(budget) = bounds.memory_budget {
        if estimate > budget as u128 {
            return Err(Error::ResourceBudget(format!(
                "localization enumeration needs about {estimate} bytes for {conj_count} conjuncts, budget is {budget}"
            )));
        }
    }
    // Extension of P_{s+1}(y, beta) for every parameter set beta, from traces.
    let traces: Vec<std::sync::Arc<BitSet>> = p1.iter().map(|t| cs.trace(t)).collect();
    let region_idx: Vec<usize> = region.iter().map(|t| index[t]).collect();
    let betas: Vec<Vec<usize>> = (1..=max_params).flat_map(|s| region_idx.iter().copied().combinations(s)).collect();
    let exts: Vec<Option<BitSet>> = betas
        .par_iter()
        .map(|beta| {
            let mut acc = (*traces[beta[0]]).clone();
            for &b in &beta[1..] {
                acc.intersect_with(&traces[b]);
            }
            let mut ext = BitSet::new(p1.len());
            if !acc.is_empty() {
                for (i, tr) in traces.iter().enumerate() {
                    if tr.intersects(&acc) {
                        ext.insert(i);
                    }
                }
            }
            (!ext.is_empty() && a_idx.iter().all(|&i| ext.contains(i))).then_some(ext)
        })
        .collect();
    let conj_ext: HashMap<Vec<usize>, BitSet> =
        betas.into_iter().zip(exts).filter_map(|(b, e)| e.map(|e| (b, e))).collect();
    // Localizations grouped by their exact parameter set.
    let mut candidates: Vec<((usize, Vec<usize>, Vec<Vec<Tuple>>), Vec<Vec<usize>>)> = Vec::new();
    candidates.push(((0, Vec::new(), Vec::new()), Vec::new()));
    for size in 1..=max_b {
        for bset in region_idx.iter().copied().combinations(size) {
            let usable: Vec<&Vec<usize>> = (1..=size.min(max_params))
                .flat_map(|s| bset.iter().copied().combinations(s))
                .filter_map(|sub| conj_ext.get_key_value(&sub).map(|(k, _)| k))
                .collect();
            for m in 1..=bounds.m_max.min(usable.len()) {
                for combo in usable.iter().combinations(m) {
                    let covered: HashSet<usize> = combo.iter().flat_map(|c| c.iter().copied()).collect();
                    if covered.len() != size {
                        continue;
                    }
                    let mut conj: Vec<Vec<usize>> = combo.into_iter().map(|c| (*c).clone()).collect();
                    conj.sort_by(|x, y| (x.len(), x.iter().map(|&i| &p1[i]).collect::<Vec<_>>())
                        .cmp(&(y.len(), y.iter().map(|&i| &p1[i]).collect::<Vec<_>>())));
                    let key = (
                        conj.len(),
                        conj.iter().map(|c| c.len() + 1).collect(),
                        conj.iter().map(|c| c.iter().map(|&i| p1[i].clone()).collect()).collect(),
                    );
                    candidates.push((key, conj));
                }
            }
        }
    }
    candidates.sort_by(|x, y| x.0.cmp(&y.0));
    let mut seen: HashSet<BitSet> = HashSet::new();
    let mut trivial: HashSet<BitSet> = HashSet::new();
    let mut out = Vec::new();
    let full = BitSet::full(p1.len());
    let l_check = bounds.l_check.min(cs.level_cap());
    for (_, conj) in candidates {
        let mut ext = full.clone();
        for c in &conj {
            ext.intersect_with(&conj_ext[c]);
        }
        if ext.is_empty() || seen.contains(&ext) || trivial.contains(&ext) {
            continue;
        }
        let members: Vec<Tuple> = ext.iter().map(|i| p1[i].clone()).collect();
        match find_complete_subset(cs, &members, l_check) {
            Some(cert) => {
                seen.insert(ext);
                out.push(LocalizedEntry {
                    localization: Localization {
                        arity: 1,
                        conjuncts: conj
                            .iter()
                            .map(|c| Conjunct::new(vec![0], c.iter().map(|&i| p1[i].clone()).collect()))
                            .collect(),
                    },
                    extension: members,
                    certificate: cert,
                });
            }
            None => {
                trivial.insert(ext);
            }
        }
    }
    Ok(out)
}

/// Members of `region` whose addition keeps `a` complete up to the level cap.
pub fn one_point_extensions(cs: &CharSequence, a: &[Tuple], region: &[Tuple]) -> Result<Vec<Tuple>> {
    let a = canonical(a);
    let cap = cs.level_cap();
    if !cs.is_complete(&a, cap)? {
        return Err(Error::NotComplete(format!("{a:?}")));
    }
    let s = a.len().min(cap - 1);
    let mut out = Vec::new();
    for t in canonical(region) {
        cs.structure().check_tuple(cs.param_sig(), &t)?;
        let ok = a.iter().combinations(s).all(|sub| {
            let mut set: Vec<&Tuple> = sub;
            set.push(&t);
            cs.holds_set(&set)
        });
        if ok {
            out.push(t);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PersistenceStatus {
    PersistsAtScale,
    Killed,
}

/// The canonically least localization without witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Killer {
    pub index: usize,
    pub localization: Localization,
    pub extension_size: usize,
    /// Least induced sub-configuration with no witnesses in the localized set.
    pub fragment: T0Config,
    pub fragment_vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersistenceVerdict {
    pub status: PersistenceStatus,
    pub bounds: Bounds,
    pub localizations_checked: usize,
    pub killer: Option<Killer>,
    /// Witness per localization index, up to the killer when killed.
    pub witnesses: Vec<(usize, Vec<Tuple>)>,
}

/// The configuration induced on `vertices`, renumbered in order.
pub fn induced(x: &T0Config, vertices: &[usize]) -> T0Config {
    let pos: HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let sets = x
        .e
        .iter()
        .filter(|s| s.iter().all(|v| pos.contains_key(v)))
        .map(|s| s.iter().map(|v| pos[v]).collect::<Vec<_>>());
    T0Config::new(vertices.len(), sets).expect("induced sets are valid")
}

/// Search for witnesses of `x` in every localization around `a` within
/// `bounds`. Levels in the pattern are the global ones; localization only
/// restricts where witnesses are drawn from.
pub fn persistence_search(cs: &CharSequence, x: &T0Config, a: &[Tuple], bounds: &Bounds) -> Result<PersistenceVerdict> {
    if let Some((s, t)) = x.violation() {
        return Err(Error::InvalidArgument(format!("configuration not closed under subsets: {s:?} contains {t:?}")));
    }
    let a = canonical(a);
    if !cs.is_complete(&a, cs.level_cap())? {
        return Err(Error::NotComplete(format!("{a:?}")));
    }
    let entries = enumerate_localizations(cs, &a, bounds)?;
    let results: Vec<Result<Option<Vec<Tuple>>>> =
        entries.par_iter().map(|e| find_embedding(cs, x, &e.extension, EmbedMode::Exact)).collect();
    let mut witnesses = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r? {
            Some(w) => witnesses.push((i, w)),
            None => {
                let e = &entries[i];
                let (fragment_vertices, fragment) = least_fragment(cs, x, &e.extension)?;
                return Ok(PersistenceVerdict {
                    status: PersistenceStatus::Killed,
                    bounds: bounds.clone(),
                    localizations_checked: i + 1,
                    killer: Some(Killer {
                        index: i,
                        localization: e.localization.clone(),
                        extension_size: e.extension.len(),
                        fragment,
                        fragment_vertices,
                    }),
                    witnesses,
                });
            }
        }
    }
    Ok(PersistenceVerdict {
        status: PersistenceStatus::PersistsAtScale,
        bounds: bounds.clone(),
        localizations_checked: entries.len(),
        killer: None,
        witnesses,
    })
}

fn least_fragment(cs: &CharSequence, x: &T0Config, region: &[Tuple]) -> Result<(Vec<usize>, T0Config)> {
    for size in 1..=x.v {
        for vs in (0..x.v).combinations(size) {
            let sub = induced(x, &vs);
            if find_embedding(cs, &sub, region, EmbedMode::Exact)?.is_none() {
                return Ok((vs, sub));
            }
        }
    }
    Ok(((0..x.v).collect(), x.clone()))
}

/// A nontrivial localization around `a` within `bounds` whose localized set
/// is `P_n`-complete, least in canonical order.
pub fn find_complete_localization(cs: &CharSequence, a: &[Tuple], n: usize, bounds: &Bounds) -> Result<Option<LocalizedEntry>> {
    if n == 0 || n > cs.level_cap() {
        return Err(Error::LevelCap { size: n, cap: cs.level_cap() });
    }
    let a = canonical(a);
    if !cs.is_complete(&a, cs.level_cap())? {
        return Err(Error::NotComplete(format!("{a:?}")));
    }
    let entries = enumerate_localizations(cs, &a, bounds)?;
    let complete: Vec<bool> = entries
        .par_iter()
        .map(|e| e.extension.iter().combinations(n.min(e.extension.len())).all(|c| cs.holds_set(&c)))
        .collect();
    Ok(entries.into_iter().zip(complete).find(|(_, c)| *c).map(|(e, _)| e))
}

/// The sequence of the formula localized by `f` and the parameters `a_bar`.
pub fn star_localized_sequence(cs: &CharSequence, f: &Localization, a_bar: &[Tuple]) -> Result<CharSequence> {
    let phi = star_localize(cs.structure(), cs.phi(), f, a_bar)?;
    Ok(CharSequence::new(cs.structure_arc(), phi)?.with_level_cap(cs.level_cap()))
}

/// Compares the localized sequence with `P^f_1(y_1) & .. & P^f_1(y_n) &
/// P_{n+k}(y.., a_bar..)` on the given parameter lists; returns the mismatches.
pub fn star_identity_mismatches(
    cs: &CharSequence,
    star: &CharSequence,
    f: &Localization,
    a_bar: &[Tuple],
    samples: &[Vec<Tuple>],
) -> Result<Vec<Vec<Tuple>>> {
    let mut bad = Vec::new();
    for ys in samples {
        let mut rhs = true;
        for y in ys {
            rhs &= apply_localization(cs, f, std::slice::from_ref(y))?;
        }
        let mut all = ys.clone();
        all.extend(a_bar.iter().cloned());
        rhs = rhs && cs.holds(&all)?;
        if star.holds(ys)? != rhs {
            bad.push(ys.clone());
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests;
