use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use super::{audit_stage, json, ConstructionReport, Obstruction, StageAudit, Staged, Validation};
use crate::bitset::BitSet;
use crate::configs::{p1_members, tree_nodes, CompatibleOrder, OrderConvention, OrderWitness, TreeConfig};
use crate::error::{Error, Result};
use crate::localize::{Bounds, Localization};
use crate::sequence::{CharSequence, DividingWitness};
use crate::structure::Tuple;

/// The family `{phi_n(x; a_i, b_{i+1})}` read off a strict order witness:
/// each instance holds since `i < i+1`, and any two instances `i < j`
/// together contain `a_j, b_{i+1}` with `j >= i+1`, so they fail.
pub fn dividing_from_order_property(cs: &CharSequence, w: &OrderWitness) -> Result<ConstructionReport<DividingWitness>> {
    if w.convention != OrderConvention::Strict {
        return Err(Error::InvalidArgument("dividing families come from strict order witnesses".into()));
    }
    if !w.validate(cs) {
        return Err(Error::Validation("order witness does not realize its pattern".into()));
    }
    let n = w.partition.map_or(2, |(_, n)| n);
    let family: Vec<Tuple> = (0..w.length.saturating_sub(1)).map(|i| w.a[i].iter().chain(&w.b[i + 1]).flatten().copied().collect()).collect();
    let mut validation = Validation::new();
    let extracted = cs.extract_dividing_witness(&family, n, 2)?;
    validation.check("1-consistent and 2-inconsistent", extracted.is_some());
    let output = extracted.ok_or_else(|| Error::Validation("family is not 2-inconsistent".into()))?;
    Ok(ConstructionReport {
        construction: "dividing_from_order_property".into(),
        input: json(w),
        output,
        validation,
        trace: Vec::new(),
    })
}

/// Indices a nested-interval tree of depth `d` and branching `b` consumes:
/// a leaf interval spans two indices and a parent splits into `b` children
/// sharing endpoints.
pub fn interval_supply(depth: usize, branching: usize) -> usize {
    (0..depth).fold(2, |g, _| branching * (g - 1) + 1)
}

/// A strict tree labelled by pairs `(a_i, b_j)` over nested intervals
/// `[i, j]` of the witness indices. Children of `[i, j]` are `b` consecutive
/// subintervals `[k_l, k_{l+1}]` with `k_0 = i`, `k_b = j`, so chains are
/// nested (max left index below min right index) and incomparable nodes
/// have disjoint interiors.
pub fn sop2_tree_from_compatible_order(
    cs: &CharSequence,
    w: &CompatibleOrder,
    depth: usize,
    branching: usize,
) -> Result<ConstructionReport<TreeConfig>> {
    if branching == 0 {
        return Err(Error::InvalidArgument("branching must be positive".into()));
    }
    let need = interval_supply(depth, branching);
    if w.len() < need {
        return Err(Error::InvalidArgument(format!("depth {depth}, branching {branching} need {need} indices, witness has {}", w.len())));
    }
    let mut validation = Validation::new();
    validation.check("witness pattern on pairs", w.validate(cs, 2));
    let mut labels = BTreeMap::new();
    let mut trace = Vec::new();
    let mut frontier: Vec<(Vec<usize>, usize, usize)> = vec![(Vec::new(), 0, need - 1)];
    for level in 0..=depth {
        trace.push(json!({ "depth": level, "intervals": frontier.iter().map(|(_, i, j)| (i, j)).collect::<Vec<_>>() }));
        let mut next = Vec::new();
        for (node, i, j) in &frontier {
            labels.insert(node.clone(), w.pair(*i, *j));
            if level < depth {
                let step = interval_supply(depth - level - 1, branching) - 1;
                for l in 0..branching {
                    let mut child = node.clone();
                    child.push(l);
                    next.push((child, i + l * step, i + (l + 1) * step));
                }
                debug_assert_eq!(i + branching * step, *j);
            }
        }
        frontier = next;
    }
    let tree = TreeConfig { depth, branching, k: 2, strict: true, labels };
    validation.check("strict tree", tree.validate(cs));
    if !validation.passed {
        return Err(Error::Validation(format!("tree rejected: {:?}", validation.checks)));
    }
    Ok(ConstructionReport {
        construction: "sop2_tree_from_compatible_order".into(),
        input: json!({ "witness": json(w), "depth": depth, "branching": branching }),
        output: tree,
        validation,
        trace,
    })
}

/// A tree of parameter pairs `(c_eta, d_eta)` for nodes `eta` of length
/// `1..=depth`: sibling pairs realize `P_2(c_i, d_j) <=> i <= j` and every
/// branch is complete.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairTree {
    pub depth: usize,
    pub branching: usize,
    #[serde(serialize_with = "crate::configs::node_labels::serialize")]
    pub labels: BTreeMap<Vec<usize>, (Tuple, Tuple)>,
}

impl PairTree {
    /// Parameters along the path to `node`, root side first.
    pub fn branch(&self, node: &[usize]) -> Vec<Tuple> {
        (1..=node.len())
            .flat_map(|l| {
                let (c, d) = &self.labels[&node[..l]];
                [c.clone(), d.clone()]
            })
            .collect()
    }

    pub fn validate(&self, cs: &CharSequence) -> bool {
        let nodes: Vec<Vec<usize>> = tree_nodes(self.depth, self.branching).into_iter().filter(|n| !n.is_empty()).collect();
        if nodes.len() != self.labels.len() || nodes.iter().any(|n| !self.labels.contains_key(n)) {
            return false;
        }
        let chains = nodes
            .iter()
            .filter(|n| n.len() == self.depth)
            .all(|leaf| cs.is_complete(&self.branch(leaf), cs.level_cap()).unwrap_or(false));
        let siblings = tree_nodes(self.depth.saturating_sub(1), self.branching).iter().filter(|_| self.depth > 0).all(|parent| {
            let kids: Vec<&(Tuple, Tuple)> = (0..self.branching)
                .map(|i| {
                    let mut c = parent.clone();
                    c.push(i);
                    &self.labels[&c]
                })
                .collect();
            let w = OrderWitness {
                length: self.branching,
                a: kids.iter().map(|(c, _)| vec![c.clone()]).collect(),
                b: kids.iter().map(|(_, d)| vec![d.clone()]).collect(),
                convention: OrderConvention::NonStrict,
                partition: None,
            };
            w.validate(cs)
        });
        chains && siblings
    }
}

type PairSubtree = Vec<(Vec<usize>, (usize, usize))>;

/// Search state for order witnesses inside successive localizations. A
/// localization by branch parameters `E` is determined by the objects
/// consistent with `E`, so results are memoized on that object set.
struct OrderTreeSearch<'a> {
    units: &'a [Tuple],
    traces: Vec<Arc<BitSet>>,
    /// `meets[u]`: units `v` with `P_2(u, v)`.
    meets: Vec<BitSet>,
    branching: usize,
    memo: HashMap<(BitSet, usize), Option<PairSubtree>>,
}

impl OrderTreeSearch<'_> {
    /// Sibling pairs below a branch with consistent objects `acc`, each
    /// extending `levels` further levels.
    fn subtree(&mut self, acc: &BitSet, levels: usize) -> Option<PairSubtree> {
        if levels == 0 {
            return Some(Vec::new());
        }
        let key = (acc.clone(), levels);
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let n = self.units.len();
        let mut region = BitSet::new(n);
        for (u, tr) in self.traces.iter().enumerate() {
            if tr.intersects(acc) {
                region.insert(u);
            }
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut kids: Vec<Option<PairSubtree>> = Vec::new();
        let found = self.place(acc, &region, levels, &mut pairs, &mut kids);
        let out = found.then(|| {
            let mut out = Vec::new();
            for (i, (&p, sub)) in pairs.iter().zip(&kids).enumerate() {
                out.push((vec![i], p));
                for (rel, q) in sub.as_ref().expect("solved") {
                    let mut name = vec![i];
                    name.extend_from_slice(rel);
                    out.push((name, *q));
                }
            }
            out
        });
        self.memo.insert(key, out.clone());
        out
    }

    fn place(&mut self, acc: &BitSet, region: &BitSet, levels: usize, pairs: &mut Vec<(usize, usize)>, kids: &mut Vec<Option<PairSubtree>>) -> bool {
        if pairs.len() == self.branching {
            return true;
        }
        let mut cand_a = region.clone();
        for &(c, d) in pairs.iter() {
            cand_a.remove(c);
            cand_a.remove(d);
            cand_a.difference_with(&self.meets[d]);
        }
        for a in cand_a.iter().collect::<Vec<_>>() {
            let mut with_a = acc.clone();
            with_a.intersect_with(&self.traces[a]);
            let mut cand_b = region.clone();
            cand_b.remove(a);
            for &(c, d) in pairs.iter() {
                cand_b.remove(c);
                cand_b.remove(d);
            }
            for b in cand_b.iter().collect::<Vec<_>>() {
                // Every earlier c_i and the new c must meet d inside the branch.
                let mut joint = with_a.clone();
                joint.intersect_with(&self.traces[b]);
                if joint.is_empty() {
                    continue;
                }
                let earlier_ok = pairs.iter().all(|&(c, _)| {
                    let mut t = acc.clone();
                    t.intersect_with(&self.traces[c]);
                    t.intersects(&self.traces[b])
                });
                if !earlier_ok {
                    continue;
                }
                let Some(sub) = self.subtree(&joint, levels - 1) else { continue };
                pairs.push((a, b));
                kids.push(Some(sub));
                if self.place(acc, region, levels, pairs, kids) {
                    return true;
                }
                pairs.pop();
                kids.pop();
            }
        }
        false
    }
}

/// Staged tree of order witnesses: the children of a node are an order
/// witness (`P_2(c_i, d_j) <=> i <= j`) of length `branching` among the
/// parameters consistent with the branch so far, each pair chosen so that
/// the construction can continue below it. When no such witness exists at
/// a node, the node and its localization are returned instead.
pub fn tree_from_persistent_order(
    cs: &CharSequence,
    depth: usize,
    branching: usize,
    bounds: &Bounds,
) -> Result<ConstructionReport<Staged<PairTree>>> {
    if branching < 2 {
        return Err(Error::InvalidArgument("order witnesses need length >= 2".into()));
    }
    if 2 * depth > cs.level_cap() {
        return Err(Error::LevelCap { size: 2 * depth, cap: cs.level_cap() });
    }
    let region = bounds.region.clone().unwrap_or_else(|| cs.p1_set().to_vec());
    let units = p1_members(cs, &region);
    let traces: Vec<Arc<BitSet>> = units.iter().map(|t| cs.trace(t)).collect();
    let meets: Vec<BitSet> = (0..units.len())
        .map(|u| {
            let mut row = BitSet::new(units.len());
            for v in 0..units.len() {
                if traces[u].intersects(&traces[v]) {
                    row.insert(v);
                }
            }
            row
        })
        .collect();
    let objects = traces.first().map_or(0, |t| t.len());
    let mut search = OrderTreeSearch { units: &units, traces, meets, branching, memo: HashMap::new() };
    let full = BitSet::full(objects);
    let input = json!({ "depth": depth, "branching": branching, "bounds": json(bounds) });
    let mut validation = Validation::new();
    let Some(sub) = search.subtree(&full, depth) else {
        let any = depth > 0 && search.subtree(&full, 1).is_some();
        let reason = if any {
            format!("order witnesses of length {branching} exist but none extends to depth {depth}")
        } else {
            format!("no order witness of length {branching}")
        };
        let obstruction = Obstruction {
            stage: 0,
            node: Vec::new(),
            base: Vec::new(),
            localization: Localization::empty(1),
            candidates: units.len(),
            reason,
        };
        validation.check("obstruction at the root", true);
        return Ok(ConstructionReport {
            construction: "tree_from_persistent_order".into(),
            input,
            output: Staged::Obstructed(obstruction),
            validation,
            trace: Vec::new(),
        });
    };
    let labels: BTreeMap<Vec<usize>, (Tuple, Tuple)> =
        sub.into_iter().map(|(node, (c, d))| (node, (units[c].clone(), units[d].clone()))).collect();
    let tree = PairTree { depth, branching, labels };
    let mut trace = Vec::new();
    let mut audits: Vec<StageAudit> = Vec::new();
    for node in tree_nodes(depth.saturating_sub(1), branching).into_iter().filter(|_| depth > 0) {
        let base = tree.branch(&node);
        let f = Localization::jointly_consistent(&base);
        let audit = audit_stage(cs, node.len(), &node, &f, &[], bounds.l_check)?;
        trace.push(json(&audit));
        audits.push(audit);
    }
    validation.check("stage localizations nontrivial and containing the base", audits.iter().all(StageAudit::ok));
    validation.check("tree of order witnesses", tree.validate(cs));
    Ok(ConstructionReport {
        construction: "tree_from_persistent_order".into(),
        input,
        output: Staged::Built(tree),
        validation,
        trace,
    })
}
