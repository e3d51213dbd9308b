use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::sequence::{canonical, CharSequence, Levels};
use crate::structure::Tuple;

/// Members of `region` in `P_1`, sorted and deduplicated.
pub fn p1_members(cs: &dyn Levels, region: &[Tuple]) -> Vec<Tuple> {
    canonical(region).into_iter().filter(|t| cs.holds_refs(&[t])).collect()
}

fn check_cap(cs: &dyn Levels, n: usize) -> Result<()> {
    if n > cs.level_cap() {
        Err(Error::LevelCap { size: n, cap: cs.level_cap() })
    } else {
        Ok(())
    }
}

/// `n` distinct members of `P_1` from `region` whose set fails `P_n`, least in
/// lexicographic order.
pub fn detect_empty_tuple(cs: &dyn Levels, n: usize, region: &[Tuple]) -> Result<Option<Vec<Tuple>>> {
    check_cap(cs, n)?;
    if n == 0 {
        return Ok(None);
    }
    let p1 = p1_members(cs, region);
    Ok(p1.into_iter().combinations(n).find(|c| !cs.holds_refs(&c.iter().collect::<Vec<_>>())))
}

/// A set of `size` members of `P_1` from `region` with every `n`-subset
/// failing `P_n`.
pub fn detect_empty_graph(cs: &dyn Levels, n: usize, size: usize, region: &[Tuple]) -> Result<Option<Vec<Tuple>>> {
    check_cap(cs, n)?;
    if n < 2 {
        return Err(Error::InvalidArgument("empty graphs need n >= 2".into()));
    }
    let p1 = p1_members(cs, region);
    let mut chosen: Vec<usize> = Vec::new();
    fn rec(cs: &dyn Levels, p1: &[Tuple], n: usize, size: usize, start: usize, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == size {
            return true;
        }
        for i in start..p1.len() {
            if p1.len() - i < size - chosen.len() {
                break;
            }
            let ok = chosen.len() + 1 < n
                || chosen.iter().combinations(n - 1).all(|sub| {
                    let mut set: Vec<&Tuple> = sub.iter().map(|&&j| &p1[j]).collect();
                    set.push(&p1[i]);
                    !cs.holds_refs(&set)
                });
            if ok {
                chosen.push(i);
                if rec(cs, p1, n, size, i + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    if size < n {
        return Err(Error::InvalidArgument("empty graph size must be at least n".into()));
    }
    Ok(rec(cs, &p1, n, size, 0, &mut chosen).then(|| chosen.iter().map(|&i| p1[i].clone()).collect()))
}

/// Which index pattern an order witness realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OrderConvention {
    /// Holds exactly when `i < j`.
    #[default]
    Strict,
    /// Holds exactly when `i <= j`.
    NonStrict,
}

impl OrderConvention {
    fn expect(self, i: usize, j: usize) -> bool {
        match self {
            Self::Strict => i < j,
            Self::NonStrict => i <= j,
        }
    }
}

/// Pairs `(a_i, b_i)` with the level on `a_i` and `b_j` together holding
/// exactly per the convention. Without a partition every `a_i`, `b_j` is one
/// tuple and the level is `P_2`; with partition `(k, n)` the `a_i` are
/// `k`-sets, the `b_j` are `(n-k)`-sets and the level is `P_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderWitness {
    pub length: usize,
    pub a: Vec<Vec<Tuple>>,
    pub b: Vec<Vec<Tuple>>,
    pub convention: OrderConvention,
    pub partition: Option<(usize, usize)>,
}

impl OrderWitness {
    /// Re-check of the full biconditional with fresh level queries.
    pub fn validate(&self, cs: &dyn Levels) -> bool {
        self.a.len() == self.length
            && self.b.len() == self.length
            && (0..self.length).all(|i| {
                (0..self.length).all(|j| {
                    let set: Vec<&Tuple> = self.a[i].iter().chain(self.b[j].iter()).collect();
                    cs.holds_refs(&set) == self.convention.expect(i, j)
                })
            })
    }
}

/// Exhaustive search for an order witness of length `ell` inside `region`.
pub fn detect_order_property(
    cs: &dyn Levels,
    ell: usize,
    convention: OrderConvention,
    partition: Option<(usize, usize)>,
    region: &[Tuple],
) -> Result<Option<OrderWitness>> {
    if ell < 2 {
        return Err(Error::InvalidArgument("order witnesses need length >= 2".into()));
    }
    let (k, n) = partition.unwrap_or((1, 2));
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("partition ({k}, {n}) needs 0 < k < n")));
    }
    check_cap(cs, n)?;
    let p1 = p1_members(cs, region);
    let a_units: Vec<Vec<Tuple>> = p1.iter().cloned().combinations(k).collect();
    let b_units: Vec<Vec<Tuple>> = if n - k == k { a_units.clone() } else { p1.iter().cloned().combinations(n - k).collect() };
    // rel[a] = set of b units with the level holding on a and b together.
    let rel: Vec<BitSet> = a_units
        .iter()
        .map(|a| {
            let mut row = BitSet::new(b_units.len());
            for (j, b) in b_units.iter().enumerate() {
                let set: Vec<&Tuple> = a.iter().chain(b.iter()).collect();
                if cs.holds_refs(&set) {
                    row.insert(j);
                }
            }
            row
        })
        .collect();
    // Units with identical rows (columns) are interchangeable: search the quotient.
    let mut row_class: Vec<usize> = Vec::new();
    let mut rows_seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for row in &rel {
        let key: Vec<u64> = row.iter().map(|j| j as u64).collect();
        let next = rows_seen.len();
        row_class.push(*rows_seen.entry(key).or_insert(next));
    }
    let a_rep: Vec<usize> = (0..rows_seen.len()).map(|c| row_class.iter().position(|&r| r == c).unwrap()).collect();
    let mut cols_full: Vec<Vec<usize>> = vec![Vec::new(); b_units.len()];
    for &i in &a_rep {
        for j in rel[i].iter() {
            cols_full[j].push(i);
        }
    }
    let mut col_seen: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut col_class: Vec<usize> = Vec::new();
    for c in &cols_full {
        let next = col_seen.len();
        col_class.push(*col_seen.entry(c.clone()).or_insert(next));
    }
    let b_rep: Vec<usize> = (0..col_seen.len()).map(|c| col_class.iter().position(|&r| r == c).unwrap()).collect();
    let (na, nb) = (a_rep.len(), b_rep.len());
    let qrel: Vec<BitSet> = a_rep
        .iter()
        .map(|&i| {
            let mut row = BitSet::new(nb);
            for (q, &j) in b_rep.iter().enumerate() {
                if rel[i].contains(j) {
                    row.insert(q);
                }
            }
            row
        })
        .collect();
    let mut qcol: Vec<BitSet> = vec![BitSet::new(na); nb];
    for (i, row) in qrel.iter().enumerate() {
        for j in row.iter() {
            qcol[j].insert(i);
        }
    }
    let mut a_idx: Vec<usize> = Vec::new();
    let mut b_idx: Vec<usize> = Vec::new();
    let found = order_rec(ell, convention, &qrel, &qcol, na, nb, &mut a_idx, &mut b_idx);
    Ok(found.then(|| OrderWitness {
        length: ell,
        a: a_idx.iter().map(|&i| a_units[a_rep[i]].clone()).collect(),
        b: b_idx.iter().map(|&j| b_units[b_rep[j]].clone()).collect(),
        convention,
        partition,
    }))
}

#[allow(clippy::too_many_arguments)]
fn order_rec(
    ell: usize,
    conv: OrderConvention,
    rel: &[BitSet],
    col: &[BitSet],
    na: usize,
    nb: usize,
    a_idx: &mut Vec<usize>,
    b_idx: &mut Vec<usize>,
) -> bool {
    let i = b_idx.len();
    if i == ell {
        return true;
    }
    if a_idx.len() == i {
        // Place a_i against the b_j already chosen (all j < i).
        let mut cand = BitSet::full(na);
        for (j, &b) in b_idx.iter().enumerate() {
            if conv.expect(i, j) {
                cand.intersect_with(&col[b]);
            } else {
                cand.difference_with(&col[b]);
            }
        }
        for a in cand.iter().collect::<Vec<_>>() {
            a_idx.push(a);
            if order_rec(ell, conv, rel, col, na, nb, a_idx, b_idx) {
                return true;
            }
            a_idx.pop();
        }
        false
    } else {
        let mut cand = BitSet::full(nb);
        for (j, &a) in a_idx.iter().enumerate() {
            if conv.expect(j, i) {
                cand.intersect_with(&rel[a]);
            } else {
                cand.difference_with(&rel[a]);
            }
        }
        for b in cand.iter().collect::<Vec<_>>() {
            b_idx.push(b);
            if order_rec(ell, conv, rel, col, na, nb, a_idx, b_idx) {
                return true;
            }
            b_idx.pop();
        }
        false
    }
}

/// Halves `a_i`, `b_i` of parameter tuples such that the level on any pairs
/// `(a_i, b_j)` holds exactly when every `i` is below every `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatibleOrder {
    pub a: Vec<Tuple>,
    pub b: Vec<Tuple>,
}

impl CompatibleOrder {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// The parameter tuple `(a_i, b_j)`.
    pub fn pair(&self, i: usize, j: usize) -> Tuple {
        let mut t = self.a[i].clone();
        t.extend_from_slice(&self.b[j]);
        t
    }

    /// Re-check of the biconditional on every set of at most `n_check` pairs.
    pub fn validate(&self, cs: &dyn Levels, n_check: usize) -> bool {
        compatible_violation(cs, &self.a, &self.b, n_check.min(cs.level_cap())).is_none()
    }
}

fn compatible_violation(cs: &dyn Levels, a: &[Tuple], b: &[Tuple], n_check: usize) -> Option<Vec<(usize, usize)>> {
    let ell = a.len();
    let pairs: Vec<(usize, usize)> = (0..ell).cartesian_product(0..ell).collect();
    let tuples: Vec<Tuple> = pairs
        .iter()
        .map(|&(i, j)| {
            let mut t = a[i].clone();
            t.extend_from_slice(&b[j]);
            t
        })
        .collect();
    for n in 1..=n_check.min(pairs.len()) {
        for sub in (0..pairs.len()).combinations(n) {
            let max_a = sub.iter().map(|&p| pairs[p].0).max().unwrap();
            let min_b = sub.iter().map(|&p| pairs[p].1).min().unwrap();
            let set: Vec<&Tuple> = sub.iter().map(|&p| &tuples[p]).collect();
            if cs.holds_refs(&set) != (max_a < min_b) {
                return Some(sub.iter().map(|&p| pairs[p]).collect());
            }
        }
    }
    None
}

/// Exhaustive search for a compatible order of length `ell`, checked on all
/// sets of at most `n_check` pairs. The parameter variables split into equal
/// halves.
pub fn detect_compatible_order(cs: &dyn Levels, ell: usize, n_check: usize) -> Result<Option<CompatibleOrder>> {
    let base = cs.base();
    let sig = base.param_sig().to_vec();
    if sig.len() % 2 != 0 || sig.is_empty() {
        return Err(Error::InvalidArgument("compatible orders need an even number of parameter variables".into()));
    }
    if ell == 0 {
        return Err(Error::InvalidArgument("length must be positive".into()));
    }
    let n_check = n_check.min(cs.level_cap()).max(2.min(cs.level_cap()));
    let h = sig.len() / 2;
    let s = base.structure();
    let a_cands: Vec<Tuple> = crate::structure::TupleIter::new(s, &sig[..h]).collect();
    let b_cands: Vec<Tuple> = crate::structure::TupleIter::new(s, &sig[h..]).collect();
    let mut a: Vec<Tuple> = Vec::new();
    let mut b: Vec<Tuple> = Vec::new();
    let join = |x: &Tuple, y: &Tuple| {
        let mut t = x.clone();
        t.extend_from_slice(y);
        t
    };
    // Pairwise consistency of the partial sequence after its last addition.
    let pairwise_ok = |a: &[Tuple], b: &[Tuple]| -> bool {
        let la = a.len();
        let lb = b.len();
        let new_a = la > lb;
        let pairs: Vec<(usize, usize)> = (0..la).cartesian_product(0..lb).collect();
        let fresh: Vec<usize> = (0..pairs.len())
            .filter(|&p| if new_a { pairs[p].0 == la - 1 } else { pairs[p].1 == lb - 1 })
            .collect();
        let tup: Vec<Tuple> = pairs.iter().map(|&(i, j)| join(&a[i], &b[j])).collect();
        for &p in &fresh {
            let (i, j) = pairs[p];
            if cs.holds_refs(&[&tup[p]]) != (i < j) {
                return false;
            }
            for q in 0..pairs.len() {
                if q == p || (fresh.contains(&q) && q < p) {
                    continue;
                }
                let (i2, j2) = pairs[q];
                if cs.holds_refs(&[&tup[p], &tup[q]]) != (i.max(i2) < j.min(j2)) {
                    return false;
                }
            }
        }
        true
    };
    #[allow(clippy::too_many_arguments)]
    fn rec(
        cs: &dyn Levels,
        ell: usize,
        n_check: usize,
        a_c: &[Tuple],
        b_c: &[Tuple],
        a: &mut Vec<Tuple>,
        b: &mut Vec<Tuple>,
        ok: &dyn Fn(&[Tuple], &[Tuple]) -> bool,
    ) -> bool {
        if b.len() == ell {
            return compatible_violation(cs, a, b, n_check).is_none();
        }
        let placing_a = a.len() == b.len();
        let cands = if placing_a { a_c } else { b_c };
        for c in cands {
            if placing_a {
                a.push(c.clone());
            } else {
                b.push(c.clone());
            }
            if ok(a, b) && rec(cs, ell, n_check, a_c, b_c, a, b, ok) {
                return true;
            }
            if placing_a {
                a.pop();
            } else {
                b.pop();
            }
        }
        false
    }
    let found = rec(cs, ell, n_check, &a_cands, &b_cands, &mut a, &mut b, &pairwise_ok);
    Ok(found.then_some(CompatibleOrder { a, b }))
}

/// Which patterns a shattering witness realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ShatterMode {
    /// Every subset of size exactly `k` of the `2k` parameters.
    #[default]
    ExactK,
    /// Every subset of the `2k` parameters.
    FullShatter,
}

/// Parameters `y_1..y_2k` with, for each required pattern `sigma`, an object
/// `x` such that `phi(x; y_i)` holds exactly for `i` in `sigma`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatterWitness {
    pub k: usize,
    pub mode: ShatterMode,
    pub params: Vec<Tuple>,
    pub realizers: Vec<(Vec<usize>, Tuple)>,
}

impl ShatterWitness {
    /// Re-check by direct evaluation of the formula.
    pub fn validate(&self, cs: &CharSequence) -> bool {
        let patterns = patterns(self.params.len(), self.k, self.mode);
        patterns.len() == self.realizers.len()
            && patterns.iter().zip(&self.realizers).all(|(sigma, (s2, x))| {
                sigma == s2
                    && self
                        .params
                        .iter()
                        .enumerate()
                        .all(|(i, y)| cs.compiled().satisfies(cs.structure(), x, y) == sigma.contains(&i))
            })
    }
}

fn patterns(m: usize, k: usize, mode: ShatterMode) -> Vec<Vec<usize>> {
    match mode {
        ShatterMode::ExactK => (0..m).combinations(k).collect(),
        ShatterMode::FullShatter => (0..=m).flat_map(|s| (0..m).combinations(s)).collect(),
    }
}

/// Search for `2k` parameters from `region` shattered per `mode`.
pub fn detect_ip_shattering(cs: &CharSequence, k: usize, mode: ShatterMode, region: &[Tuple]) -> Result<Option<ShatterWitness>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let m = 2 * k;
    // A trace that is empty or full cannot split any pattern.
    let cands: Vec<(Tuple, std::sync::Arc<BitSet>)> = canonical(region)
        .into_iter()
        .map(|t| {
            let tr = cs.trace(&t);
            (t, tr)
        })
        .filter(|(_, tr)| {
            let c = tr.count();
            c > 0 && c < tr.len()
        })
        .collect();
    if cands.is_empty() {
        return Ok(None);
    }
    let universe = cands[0].1.len();
    let mut chosen: Vec<usize> = Vec::new();
    fn realized(cands: &[(Tuple, std::sync::Arc<BitSet>)], chosen: &[usize], sigma: &[usize], universe: usize) -> Option<usize> {
        let mut acc = BitSet::full(universe);
        for (pos, &c) in chosen.iter().enumerate() {
            if sigma.contains(&pos) {
                acc.intersect_with(&cands[c].1);
            } else {
                acc.difference_with(&cands[c].1);
            }
            if acc.is_empty() {
                return None;
            }
        }
        acc.first()
    }
    fn partial_ok(cands: &[(Tuple, std::sync::Arc<BitSet>)], chosen: &[usize], k: usize, mode: ShatterMode, universe: usize) -> bool {
        let len = chosen.len();
        let m = 2 * k;
        (0..=len).all(|s| {
            // Patterns on the prefix that extend to a required pattern.
            let extendable = match mode {
                ShatterMode::ExactK => s <= k && len - s <= m - k,
                ShatterMode::FullShatter => true,
            };
            !extendable || (0..len).combinations(s).all(|sigma| realized(cands, chosen, &sigma, universe).is_some())
        })
    }
    fn rec(cands: &[(Tuple, std::sync::Arc<BitSet>)], chosen: &mut Vec<usize>, start: usize, k: usize, mode: ShatterMode, universe: usize) -> bool {
        if chosen.len() == 2 * k {
            return true;
        }
        for c in start..cands.len() {
            chosen.push(c);
            if partial_ok(cands, chosen, k, mode, universe) && rec(cands, chosen, c + 1, k, mode, universe) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    if !rec(&cands, &mut chosen, 0, k, mode, universe) {
        return Ok(None);
    }
    let x_sig = cs.object_sig().to_vec();
    let realizers = patterns(m, k, mode)
        .into_iter()
        .map(|sigma| {
            let x = realized(&cands, &chosen, &sigma, universe).expect("checked");
            (sigma, cs.structure().tuple_unrank(&x_sig, x))
        })
        .collect();
    Ok(Some(ShatterWitness { k, mode, params: chosen.iter().map(|&c| cands[c].0.clone()).collect(), realizers }))
}

/// Node labels of a binary tree: siblings fail `P_2`, root-to-node chains hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramConfig {
    pub depth: usize,
    #[serde(with = "super::node_labels")]
    pub labels: BTreeMap<Vec<usize>, Tuple>,
}

impl DiagramConfig {
    pub fn validate(&self, cs: &dyn Levels) -> bool {
        let tree = TreeConfig { depth: self.depth, branching: 2, k: 2, strict: false, labels: self.labels.clone() };
        tree.shape_ok() && tree.chains_hold(cs) && tree.siblings_empty(cs)
    }
}

/// Node labels of a `b`-branching tree of depth `d`: chains hold, sibling
/// families are `P_k`-empty; strict trees also fail `P_2` on every
/// incomparable pair and hold it on every comparable one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub depth: usize,
    pub branching: usize,
    pub k: usize,
    pub strict: bool,
    #[serde(with = "super::node_labels")]
    pub labels: BTreeMap<Vec<usize>, Tuple>,
}

/// Every node of a `b`-branching tree of depth `d`, in preorder.
pub fn tree_nodes(depth: usize, branching: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(node: &mut Vec<usize>, depth: usize, b: usize, out: &mut Vec<Vec<usize>>) {
        out.push(node.clone());
        if node.len() < depth {
            for i in 0..b {
                node.push(i);
                rec(node, depth, b, out);
                node.pop();
            }
        }
    }
    rec(&mut Vec::new(), depth, branching, &mut out);
    out
}

fn comparable(a: &[usize], b: &[usize]) -> bool {
    a.starts_with(b) || b.starts_with(a)
}

impl TreeConfig {
    fn shape_ok(&self) -> bool {
        let nodes = tree_nodes(self.depth, self.branching);
        nodes.len() == self.labels.len() && nodes.iter().all(|n| self.labels.contains_key(n))
    }

    fn chain(&self, leaf: &[usize]) -> Vec<&Tuple> {
        (0..=leaf.len()).map(|l| &self.labels[&leaf[..l]]).collect()
    }

    fn chains_hold(&self, cs: &dyn Levels) -> bool {
        tree_nodes(self.depth, self.branching)
            .iter()
            .filter(|n| n.len() == self.depth)
            .all(|leaf| cs.holds_refs(&self.chain(leaf)))
    }

    fn siblings_empty(&self, cs: &dyn Levels) -> bool {
        tree_nodes(self.depth, self.branching).iter().filter(|n| n.len() < self.depth).all(|parent| {
            let kids: Vec<&Tuple> = (0..self.branching)
                .map(|i| {
                    let mut c = parent.clone();
                    c.push(i);
                    &self.labels[&c]
                })
                .collect();
            sibling_family_ok(cs, &kids, self.k)
        })
    }

    fn strict_ok(&self, cs: &dyn Levels) -> bool {
        let nodes: Vec<&Vec<usize>> = self.labels.keys().collect();
        nodes.iter().tuple_combinations().all(|(a, b)| {
            cs.holds_refs(&[&self.labels[*a], &self.labels[*b]]) == comparable(a, b)
        })
    }

    /// Re-check of every tree invariant with fresh level queries.
    pub fn validate(&self, cs: &dyn Levels) -> bool {
        self.shape_ok() && self.chains_hold(cs) && self.siblings_empty(cs) && (!self.strict || self.strict_ok(cs))
    }

    /// Labels along the path to `node`, root first.
    pub fn branch(&self, node: &[usize]) -> Vec<Tuple> {
        (0..=node.len()).map(|l| self.labels[&node[..l]].clone()).collect()
    }
}

/// Each member in `P_1` and every `k`-subset failing `P_k`; vacuous below `k` members.
fn sibling_family_ok(cs: &dyn Levels, kids: &[&Tuple], k: usize) -> bool {
    kids.iter().all(|t| cs.holds_refs(&[t]))
        && (kids.len() < k || kids.iter().combinations(k).all(|c| !cs.holds_refs(&c.into_iter().copied().collect::<Vec<_>>())))
}

/// A depth-`d` binary diagram inside `region`.
pub fn detect_diagram(cs: &dyn Levels, depth: usize, region: &[Tuple]) -> Result<Option<DiagramConfig>> {
    Ok(detect_tree(cs, depth, 2, 2, false, region)?.map(|t| DiagramConfig { depth, labels: t.labels }))
}

/// A tree inside `region`. Non-strict trees are searched subtree by subtree;
/// strict trees by a global backtracking in preorder.
pub fn detect_tree(
    cs: &dyn Levels,
    depth: usize,
    branching: usize,
    k: usize,
    strict: bool,
    region: &[Tuple],
) -> Result<Option<TreeConfig>> {
    check_cap(cs, depth + 1)?;
    if branching == 0 {
        return Err(Error::InvalidArgument("branching must be positive".into()));
    }
    if k < 2 {
        return Err(Error::InvalidArgument("sibling inconsistency arity k must be at least 2".into()));
    }
    check_cap(cs, k)?;
    let p1 = p1_members(cs, region);
    let labels = if strict {
        strict_tree(cs, depth, branching, k, &p1)
    } else {
        nonstrict_tree(cs, depth, branching, k, &p1)
    };
    Ok(labels.map(|labels| TreeConfig { depth, branching, k, strict, labels }))
}

type Subtree = Vec<(Vec<usize>, Tuple)>;

/// Labels for the descendants of the last node of `chain`, named relative to it.
fn below(cs: &dyn Levels, depth: usize, b: usize, k: usize, p1: &[Tuple], chain: &mut Vec<usize>) -> Option<Subtree> {
    if chain.len() == depth + 1 {
        return Some(Vec::new());
    }
    let mut memo: HashMap<usize, Option<Subtree>> = HashMap::new();
    let mut kids: Vec<usize> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn pick(
        cs: &dyn Levels,
        depth: usize,
        b: usize,
        k: usize,
        p1: &[Tuple],
        chain: &mut Vec<usize>,
        kids: &mut Vec<usize>,
        memo: &mut HashMap<usize, Option<Subtree>>,
    ) -> bool {
        if kids.len() == b {
            return true;
        }
        let start = kids.last().map_or(0, |&c| c + 1);
        for c in start..p1.len() {
            let fam_ok = kids.len() + 1 < k
                || kids.iter().combinations(k - 1).all(|sub| {
                    let mut set: Vec<&Tuple> = sub.iter().map(|&&j| &p1[j]).collect();
                    set.push(&p1[c]);
                    !cs.holds_refs(&set)
                });
            if !fam_ok {
                continue;
            }
            if !memo.contains_key(&c) {
                chain.push(c);
                let set: Vec<&Tuple> = chain.iter().map(|&j| &p1[j]).collect();
                let r = if cs.holds_refs(&set) { below(cs, depth, b, k, p1, chain) } else { None };
                chain.pop();
                memo.insert(c, r);
            }
            if memo[&c].is_some() {
                kids.push(c);
                if pick(cs, depth, b, k, p1, chain, kids, memo) {
                    return true;
                }
                kids.pop();
            }
        }
        false
    }
    if !pick(cs, depth, b, k, p1, chain, &mut kids, &mut memo) {
        return None;
    }
    let mut out = Vec::new();
    for (i, c) in kids.iter().enumerate() {
        out.push((vec![i], p1[*c].clone()));
        for (rel, t) in memo[c].as_ref().expect("solved") {
            let mut name = vec![i];
            name.extend_from_slice(rel);
            out.push((name, t.clone()));
        }
    }
    Some(out)
}

fn nonstrict_tree(cs: &dyn Levels, depth: usize, b: usize, k: usize, p1: &[Tuple]) -> Option<BTreeMap<Vec<usize>, Tuple>> {
    for r in 0..p1.len() {
        let mut chain = vec![r];
        if let Some(sub) = below(cs, depth, b, k, p1, &mut chain) {
            let mut labels: BTreeMap<Vec<usize>, Tuple> = sub.into_iter().collect();
            labels.insert(Vec::new(), p1[r].clone());
            return Some(labels);
        }
    }
    None
}

fn strict_tree(cs: &dyn Levels, depth: usize, b: usize, k: usize, p1: &[Tuple]) -> Option<BTreeMap<Vec<usize>, Tuple>> {
    let nodes = tree_nodes(depth, b);
    let mut assign: Vec<usize> = Vec::new();
    fn rec(cs: &dyn Levels, nodes: &[Vec<usize>], k: usize, p1: &[Tuple], assign: &mut Vec<usize>) -> bool {
        let pos = assign.len();
        if pos == nodes.len() {
            return true;
        }
        let node = &nodes[pos];
        for c in 0..p1.len() {
            let t = &p1[c];
            let ok = (0..pos).all(|q| {
                let other = &nodes[q];
                let u = &p1[assign[q]];
                cs.holds_refs(&[t, u]) == comparable(node, other)
            }) && {
                let chain: Vec<&Tuple> = (0..node.len())
                    .map(|l| &p1[assign[nodes.iter().position(|n| n[..] == node[..l]).unwrap()]])
                    .chain(std::iter::once(t))
                    .collect();
                cs.holds_refs(&chain)
            } && {
                // Once the last sibling is placed the family must be P_k-empty.
                let last = node.last().copied();
                match last {
                    Some(i) if i + 1 == nodes.iter().filter(|n| n.len() == node.len() && n[..n.len() - 1] == node[..node.len() - 1]).count() => {
                        let parent = &node[..node.len() - 1];
                        let mut kids: Vec<&Tuple> = (0..pos)
                            .filter(|&q| nodes[q].len() == node.len() && nodes[q][..nodes[q].len() - 1] == *parent)
                            .map(|q| &p1[assign[q]])
                            .collect();
                        kids.push(t);
                        sibling_family_ok(cs, &kids, k)
                    }
                    _ => true,
                }
            };
            if ok {
                assign.push(c);
                if rec(cs, nodes, k, p1, assign) {
                    return true;
                }
                assign.pop();
            }
        }
        false
    }
    rec(cs, &nodes, k, p1, &mut assign).then(|| nodes.iter().cloned().zip(assign.iter().map(|&c| p1[c].clone())).collect())
}
