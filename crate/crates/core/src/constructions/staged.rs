use itertools::Itertools;
use serde_json::json;

use super::{audit_stage, json, ConstructionReport, Obstruction, StageAudit, Staged, Validation};
use crate::configs::{detect_empty_tuple, ArrayConfig, TreeConfig};
use crate::error::{Error, Result};
use crate::localize::{localized_set, one_point_extensions, Bounds, Conjunct, Localization};
use crate::sequence::{canonical, CharSequence};
use crate::structure::Tuple;

fn region_of(cs: &CharSequence, bounds: &Bounds) -> Vec<Tuple> {
    canonical(&bounds.region.clone().unwrap_or_else(|| cs.p1_set().to_vec()))
}

/// Least `size`-element family from `cands` in which every `k`-subset holds
/// and every `(k+1)`-subset fails.
fn sharply_inconsistent_family(cs: &CharSequence, cands: &[Tuple], k: usize, size: usize) -> Option<Vec<Tuple>> {
    fn rec(cs: &CharSequence, cands: &[Tuple], k: usize, size: usize, start: usize, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == size {
            return true;
        }
        for i in start..cands.len() {
            if cands.len() - i < size - chosen.len() {
                break;
            }
            let consistent = (0..k.min(chosen.len() + 1)).all(|s| {
                chosen.iter().combinations(s).all(|sub| {
                    let mut set: Vec<&Tuple> = sub.iter().map(|&&j| &cands[j]).collect();
                    set.push(&cands[i]);
                    cs.holds_set(&set)
                })
            });
            let inconsistent = chosen.len() < k
                || chosen.iter().combinations(k).all(|sub| {
                    let mut set: Vec<&Tuple> = sub.iter().map(|&&j| &cands[j]).collect();
                    set.push(&cands[i]);
                    !cs.holds_set(&set)
                });
            if consistent && inconsistent {
                chosen.push(i);
                if rec(cs, cands, k, size, i + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    rec(cs, cands, k, size, 0, &mut chosen).then(|| chosen.iter().map(|&i| cands[i].clone()).collect())
}

/// Staged tree over the complete base `a`: the root is the least one-point
/// extension of `a`, and the children of each node are the least
/// `branching`-element family among one-point extensions of the branch set
/// that is `k`-consistent and `(k+1)`-inconsistent. Greedy: the first node
/// with no such family is returned as an obstruction.
pub fn tree_from_persistent_empty_graph(
    cs: &CharSequence,
    k: usize,
    depth: usize,
    branching: usize,
    bounds: &Bounds,
    a: &[Tuple],
) -> Result<ConstructionReport<Staged<TreeConfig>>> {
    if k == 0 || branching == 0 {
        return Err(Error::InvalidArgument("k and branching must be positive".into()));
    }
    let a = canonical(a);
    let cap = cs.level_cap();
    if k + 1 > cap || a.len() + depth + 1 > cap {
        return Err(Error::LevelCap { size: (k + 1).max(a.len() + depth + 1), cap });
    }
    if !cs.is_complete(&a, cap)? {
        return Err(Error::NotComplete(format!("{a:?}")));
    }
    let region = region_of(cs, bounds);
    let input = json!({ "k": k, "depth": depth, "branching": branching, "bounds": json(bounds), "base": a });
    let mut trace = Vec::new();
    let mut audits: Vec<StageAudit> = Vec::new();
    let obstructed = |stage: usize, node: Vec<usize>, base: Vec<Tuple>, candidates: usize, reason: String, trace: Vec<_>| {
        let localization = Localization::jointly_consistent(&base);
        let mut validation = Validation::new();
        validation.check("obstruction names the branch set", true);
        ConstructionReport {
            construction: "tree_from_persistent_empty_graph".into(),
            input: input.clone(),
            output: Staged::Obstructed(Obstruction { stage, node, base, localization, candidates, reason }),
            validation,
            trace,
        }
    };
    let root_cands: Vec<Tuple> = one_point_extensions(cs, &a, &region)?.into_iter().filter(|t| !a.contains(t)).collect();
    let Some(root) = root_cands.first().cloned() else {
        return Ok(obstructed(0, Vec::new(), a.clone(), 0, "no one-point extension of the base".into(), trace));
    };
    let mut labels = std::collections::BTreeMap::new();
    labels.insert(Vec::new(), root);
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for stage in 0..depth {
        let mut next = Vec::new();
        for node in frontier {
            let chain: Vec<Tuple> = (0..=node.len()).map(|l| labels[&node[..l]].clone()).collect();
            let base = canonical(&[a.clone(), chain].concat());
            let f = Localization::jointly_consistent(&base);
            let audit = audit_stage(cs, stage, &node, &f, &base, bounds.l_check)?;
            let cands: Vec<Tuple> = one_point_extensions(cs, &base, &region)?.into_iter().filter(|t| !base.contains(t)).collect();
            let family = sharply_inconsistent_family(cs, &cands, k, branching);
            trace.push(json!({ "stage": stage, "node": node, "base": base, "candidates": cands.len(), "family": family, "audit": json(&audit) }));
            audits.push(audit);
            let Some(family) = family else {
                let reason = format!("no {branching} one-point extensions that are {k}-consistent and {}-inconsistent", k + 1);
                return Ok(obstructed(stage, node, base, cands.len(), reason, trace));
            };
            for (i, c) in family.into_iter().enumerate() {
                let mut child = node.clone();
                child.push(i);
                labels.insert(child.clone(), c);
                next.push(child);
            }
        }
        frontier = next;
    }
    let tree = TreeConfig { depth, branching, k: k + 1, strict: false, labels };
    let mut validation = Validation::new();
    validation.check("stage localizations nontrivial and containing the base", audits.iter().all(StageAudit::ok));
    validation.check("chains hold and sibling families are inconsistent", tree.validate(cs));
    let branches_complete = tree
        .labels
        .keys()
        .filter(|n| n.len() == depth)
        .all(|leaf| cs.is_complete(&[a.clone(), tree.branch(leaf)].concat(), cap).unwrap_or(false));
    validation.check("each branch with the base complete", branches_complete);
    Ok(ConstructionReport {
        construction: "tree_from_persistent_empty_graph".into(),
        input,
        output: Staged::Built(tree),
        validation,
        trace,
    })
}

/// Staged array over the complete base `a`. Stage `j` localizes to the
/// parameters `y` with `P(y, a, x)` for every `x` taking at most one member
/// from each earlier column and at most `k - 1` in total, keeps those that
/// one-point extend `a` together with every such `x`, and takes the least
/// `n`-tuple failing `P_n` there as column `j`. The result is checked as an
/// `(m, n)`-array for `P_k`.
pub fn array_from_persistent_empty_tuple(
    cs: &CharSequence,
    n: usize,
    m: usize,
    k: usize,
    bounds: &Bounds,
    a: &[Tuple],
) -> Result<ConstructionReport<Staged<ArrayConfig>>> {
    let cap = cs.level_cap();
    if n < 2 || m == 0 || k < n || k > cap {
        return Err(Error::InvalidArgument(format!("need 2 <= n <= k <= {cap} and m >= 1")));
    }
    let a = canonical(a);
    if a.len() + k > cap {
        return Err(Error::LevelCap { size: a.len() + k, cap });
    }
    if !cs.is_complete(&a, cap)? {
        return Err(Error::NotComplete(format!("{a:?}")));
    }
    let region = region_of(cs, bounds);
    let input = json!({ "n": n, "m": m, "k": k, "bounds": json(bounds), "base": a });
    let mut columns: Vec<Vec<Tuple>> = Vec::new();
    let mut trace = Vec::new();
    let mut audits: Vec<StageAudit> = Vec::new();
    let mut validation = Validation::new();
    for stage in 0..m {
        let cross: Vec<Vec<Tuple>> = (0..=(k - 1).min(stage))
            .flat_map(|s| {
                let cols = &columns;
                (0..stage).combinations(s).flat_map(move |which| which.iter().map(|&c| cols[c].iter().cloned()).multi_cartesian_product())
            })
            .collect();
        let conjuncts: Vec<Conjunct> = cross
            .iter()
            .map(|x| canonical(&[a.clone(), x.clone()].concat()))
            .filter(|p| !p.is_empty())
            .unique()
            .map(|p| Conjunct::new(vec![0], p))
            .collect();
        let f = Localization { arity: 1, conjuncts };
        let audit = audit_stage(cs, stage, &[stage], &f, &a, bounds.l_check)?;
        let localized = localized_set(cs, &f)?;
        let mut cands = Vec::new();
        for t in localized.iter().filter(|t| region.binary_search(t).is_ok()) {
            let mut ok = true;
            for x in &cross {
                let set = canonical(&[a.clone(), x.clone(), vec![t.clone()]].concat());
                if !cs.is_complete(&set, cap)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                cands.push(t.clone());
            }
        }
        let used: Vec<&Tuple> = columns.iter().flatten().collect();
        cands.retain(|t| !used.contains(&t));
        let found = detect_empty_tuple(cs, n, &cands)?;
        trace.push(json!({
            "stage": stage,
            "conjuncts": f.conjuncts.len(),
            "localized_size": localized.len(),
            "candidates": cands.len(),
            "column": found,
            "audit": json(&audit),
        }));
        audits.push(audit);
        let Some(col) = found else {
            validation.check("obstruction names the stage localization", true);
            let obstruction = Obstruction {
                stage,
                node: vec![stage],
                base: a.clone(),
                localization: f,
                candidates: cands.len(),
                reason: format!("no {n}-tuple failing P_{n} among the candidates"),
            };
            return Ok(ConstructionReport {
                construction: "array_from_persistent_empty_tuple".into(),
                input,
                output: Staged::Obstructed(obstruction),
                validation,
                trace,
            });
        };
        columns.push(col);
    }
    let array = ArrayConfig::new(columns, k)?;
    validation.check("stage localizations nontrivial and containing the base", audits.iter().all(StageAudit::ok));
    let violation = array.violation(cs);
    validation.check("array conditions", violation.is_none());
    if let Some(v) = violation {
        trace.push(json!({ "violation": json(&v) }));
    }
    Ok(ConstructionReport {
        construction: "array_from_persistent_empty_tuple".into(),
        input,
        output: Staged::Built(array),
        validation,
        trace,
    })
}
