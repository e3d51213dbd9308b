use itertools::Itertools;
use serde::Serialize;
use serde_json::json;

use super::{ConstructionReport, Validation};
use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::sequence::{canonical, CharSequence};
use crate::structure::{Elem, Tuple};

/// The pieces of a definable extension of a positive base in the random
/// graph sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionExtension {
    /// The base `{(c, d) : c in C, d in D}`.
    pub base: Vec<Tuple>,
    /// The fresh pair `(a, b)`.
    pub pivot: Tuple,
    /// Members of `P_1` failing `P_2` with the pivot, less `(b, a)`.
    pub w: Vec<Tuple>,
    /// A maximal `P_2`-complete subset of `w` over the seed.
    pub solution: Vec<Tuple>,
    /// Members of `P_1` holding `P_2` with every member of the solution.
    pub g: Vec<Tuple>,
    pub base_in_g: bool,
    pub g_pairwise_complete: bool,
    /// Largest `n <= l_check` with every `n`-subset of `g` holding.
    pub g_complete_up_to: usize,
    /// Most members of `w` failing `P_2` with a single member of `w`.
    pub max_incompatible_partners: usize,
}

/// Builds `w`, a solution `s` seeded by `{(b, d)} ∪ {(c, a)}` and extended
/// greedily in canonical order, and the set `g` it defines, for the type
/// generated by `x R c` (`c` in `pos`) and `not x R d` (`d` in `neg`).
pub fn rg_solution_extension(cs: &CharSequence, pos: &[Elem], neg: &[Elem], l_check: usize) -> Result<ConstructionReport<SolutionExtension>> {
    if cs.param_sig().len() != 2 || cs.param_sig()[0] != cs.param_sig()[1] {
        return Err(Error::InvalidArgument("expected pairs of vertices as parameters".into()));
    }
    if l_check > cs.level_cap() {
        return Err(Error::LevelCap { size: l_check, cap: cs.level_cap() });
    }
    let v = cs.structure().sort_size(cs.param_sig()[0]) as Elem;
    let used: Vec<Elem> = pos.iter().chain(neg).copied().collect();
    let fresh: Vec<Elem> = (0..v).filter(|x| !used.contains(x)).take(2).collect();
    let [a, b] = fresh[..] else {
        return Err(Error::InvalidArgument("no fresh pair outside the generators".into()));
    };
    let base = canonical(&pos.iter().cartesian_product(neg).map(|(&c, &d)| vec![c, d]).collect::<Vec<_>>());
    let pivot = vec![a, b];
    // Direct trace intersections: the sets here are too large to cache every query.
    let holds = |set: &[&Tuple]| {
        let mut acc = BitSet::full(v as usize);
        set.iter().all(|t| {
            acc.intersect_with(&cs.trace(t));
            !acc.is_empty()
        })
    };
    let p1 = cs.p1_set();
    let w: Vec<Tuple> = p1.iter().filter(|t| **t != vec![b, a] && !holds(&[*t, &pivot])).cloned().collect();
    let seed = canonical(&neg.iter().map(|&d| vec![b, d]).chain(pos.iter().map(|&c| vec![c, a])).collect::<Vec<_>>());
    let mut solution: Vec<Tuple> = Vec::new();
    for t in seed.iter().chain(&w) {
        if !solution.contains(t) && solution.iter().all(|s| holds(&[t, s])) {
            solution.push(t.clone());
        }
    }
    let seed_kept = seed.iter().all(|t| solution.contains(t));
    solution.sort();
    let g: Vec<Tuple> = p1.iter().filter(|y| solution.iter().all(|s| holds(&[*y, s]))).cloned().collect();
    let base_in_g = base.iter().all(|t| g.contains(t));
    let mut g_complete_up_to = 1;
    for n in 2..=l_check {
        if !g.iter().combinations(n).all(|c| holds(&c)) {
            break;
        }
        g_complete_up_to = n;
    }
    let max_incompatible_partners = w.iter().map(|e| w.iter().filter(|z| !holds(&[e, *z])).count()).max().unwrap_or(0);
    let out = SolutionExtension {
        base,
        pivot,
        w,
        solution,
        g,
        base_in_g,
        g_pairwise_complete: g_complete_up_to >= 2,
        g_complete_up_to,
        max_incompatible_partners,
    };
    let mut validation = Validation::new();
    validation.check("seed is pairwise consistent", seed_kept);
    validation.check("base inside the defined set", out.base_in_g);
    validation.check("defined set pairwise complete", out.g_pairwise_complete);
    validation.check(format!("defined set complete up to {l_check}"), out.g_complete_up_to == l_check.max(1));
    validation.check("at most one incompatible partner in w", out.max_incompatible_partners <= 1);
    Ok(ConstructionReport {
        construction: "rg_solution_extension".into(),
        input: json!({ "pos": pos, "neg": neg, "l_check": l_check }),
        output: out,
        validation,
        trace: Vec::new(),
    })
}
