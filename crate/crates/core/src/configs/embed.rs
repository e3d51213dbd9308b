use serde::{Deserialize, Serialize};

use super::t0::T0Config;
use crate::error::{Error, Result};
use crate::sequence::{canonical, Levels};
use crate::structure::Tuple;

/// How an assignment must match the configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EmbedMode {
    /// Holds exactly on the sets in `E`.
    #[default]
    Exact,
    /// Holds at least on the sets in `E`.
    Monotone,
}

/// First injective assignment of the vertices of `x` into `region`, in
/// lexicographic order of the tuples assigned.
pub fn find_embedding(cs: &dyn Levels, x: &T0Config, region: &[Tuple], mode: EmbedMode) -> Result<Option<Vec<Tuple>>> {
    let mut found = None;
    search(cs, x, region, mode, &mut |a| {
        found = Some(a.to_vec());
        false
    })?;
    Ok(found)
}

/// Every injective assignment, up to `limit` of them.
pub fn find_all_embeddings(
    cs: &dyn Levels,
    x: &T0Config,
    region: &[Tuple],
    mode: EmbedMode,
    limit: usize,
) -> Result<Vec<Vec<Tuple>>> {
    let mut all = Vec::new();
    search(cs, x, region, mode, &mut |a| {
        all.push(a.to_vec());
        all.len() < limit
    })?;
    Ok(all)
}

/// Truth of the pattern on an assignment, checked on every subset.
pub fn matches_exactly(cs: &dyn Levels, x: &T0Config, assignment: &[Tuple]) -> bool {
    if assignment.len() != x.v {
        return false;
    }
    for mask in 1u64..(1u64 << x.v) {
        let sigma: Vec<usize> = (0..x.v).filter(|i| mask >> i & 1 == 1).collect();
        let set: Vec<&Tuple> = sigma.iter().map(|&i| &assignment[i]).collect();
        if cs.holds_refs(&set) != x.contains(&sigma) {
            return false;
        }
    }
    true
}

fn search(
    cs: &dyn Levels,
    x: &T0Config,
    region: &[Tuple],
    mode: EmbedMode,
    emit: &mut dyn FnMut(&[Tuple]) -> bool,
) -> Result<()> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if let Some((s, t)) = x.violation() {
        return Err(Error::InvalidArgument(format!("configuration not closed under subsets: {s:?} contains {t:?}")));
    }
    let needed = match mode {
        EmbedMode::Exact => x.v.min(x.max_set_size() + 1),
        EmbedMode::Monotone => x.max_set_size(),
    };
    if needed > cs.level_cap() {
        return Err(Error::LevelCap { size: needed, cap: cs.level_cap() });
    }
    if x.v > 63 {
        return Err(Error::InvalidArgument("at most 63 vertices".into()));
    }
    let region = canonical(region);
    // Subsets to test when vertex i is placed: those containing i within 0..=i.
    let mut checks: Vec<Vec<(Vec<usize>, bool)>> = Vec::with_capacity(x.v);
    for i in 0..x.v {
        let mut list = Vec::new();
        for mask in 0u64..(1u64 << i) {
            let mut sigma: Vec<usize> = (0..i).filter(|j| mask >> j & 1 == 1).collect();
            sigma.push(i);
            let member = x.contains(&sigma);
            let needs = match mode {
                EmbedMode::Monotone => member,
                // A non-member with a non-member proper subset fails by monotonicity.
                EmbedMode::Exact => member || proper_subsets_in(x, &sigma),
            };
            if needs {
                list.push((sigma, member));
            }
        }
        list.sort_by_key(|(s, _)| s.len());
        checks.push(list);
    }
    let mut assigned: Vec<usize> = Vec::with_capacity(x.v);
    let mut used = vec![false; region.len()];
    rec(cs, &region, &checks, &mut assigned, &mut used, emit);
    Ok(())
}

fn proper_subsets_in(x: &T0Config, sigma: &[usize]) -> bool {
    let k = sigma.len();
    (0..k).all(|drop| {
        let sub: Vec<usize> = sigma.iter().enumerate().filter(|&(j, _)| j != drop).map(|(_, &v)| v).collect();
        sub.is_empty() || x.contains(&sub)
    })
}

fn rec(
    cs: &dyn Levels,
    region: &[Tuple],
    checks: &[Vec<(Vec<usize>, bool)>],
    assigned: &mut Vec<usize>,
    used: &mut [bool],
    emit: &mut dyn FnMut(&[Tuple]) -> bool,
) -> bool {
    let i = assigned.len();
    if i == checks.len() {
        let tuples: Vec<Tuple> = assigned.iter().map(|&r| region[r].clone()).collect();
        return emit(&tuples);
    }
    for r in 0..region.len() {
        if used[r] {
            continue;
        }
        assigned.push(r);
        let ok = checks[i].iter().all(|(sigma, member)| {
            let set: Vec<&Tuple> = sigma.iter().map(|&v| &region[assigned[v]]).collect();
            cs.holds_refs(&set) == *member
        });
        if ok {
            used[r] = true;
            let go_on = rec(cs, region, checks, assigned, used, emit);
            used[r] = false;
            if !go_on {
                assigned.pop();
                return false;
            }
        }
        assigned.pop();
    }
    true
}
