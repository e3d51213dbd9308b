use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite configuration: `v` vertices and the family `E` of vertex sets on
/// which the sequence must hold. Sets outside `E` must fail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct T0Config {
    pub v: usize,
    #[serde(rename = "E")]
    pub e: BTreeSet<Vec<usize>>,
}

impl T0Config {
    pub fn new(v: usize, sets: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let mut e = BTreeSet::new();
        for mut s in sets {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::InvalidArgument("configuration sets must be nonempty".into()));
            }
            if let Some(&bad) = s.iter().find(|&&i| i >= v) {
                return Err(Error::InvalidArgument(format!("vertex {bad} out of range for v={v}")));
            }
            e.insert(s);
        }
        Ok(Self { v, e })
    }

    /// Downward closure of the given generators.
    pub fn generated(v: usize, generators: &[Vec<usize>]) -> Result<Self> {
        let mut sets = Vec::new();
        for g in generators {
            let mut g = g.clone();
            g.sort_unstable();
            g.dedup();
            for mask in 1u64..(1u64 << g.len()) {
                sets.push(g.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect());
            }
        }
        Self::new(v, sets)
    }

    /// `v` pairwise inconsistent vertices, each consistent alone.
    pub fn empty_graph(v: usize) -> Self {
        Self::new(v, (0..v).map(|i| vec![i])).expect("valid")
    }

    /// `v` vertices on which every subset holds.
    pub fn complete(v: usize) -> Self {
        Self::generated(v, &[(0..v).collect()]).expect("valid")
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        self.e.contains(set)
    }

    /// `None` when `E` is closed under nonempty subsets, otherwise the first
    /// `(sigma, tau)` with `sigma` in `E`, `tau` a subset of `sigma`, and `tau`
    /// missing from `E`.
    pub fn violation(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        for s in &self.e {
            for mask in 1u64..(1u64 << s.len()) {
                let t: Vec<usize> = s.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect();
                if !self.e.contains(&t) {
                    return Some((s.clone(), t));
                }
            }
        }
        None
    }

    /// Maximal members of `E`.
    pub fn maximal(&self) -> Vec<Vec<usize>> {
        self.e
            .iter()
            .filter(|s| !self.e.iter().any(|t| t.len() > s.len() && s.iter().all(|x| t.contains(x))))
            .cloned()
            .collect()
    }

    pub fn max_set_size(&self) -> usize {
        self.e.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Consistency with reflexivity, symmetry and monotonicity: `Ok(())` or the
/// violating pair.
pub fn t0_consistent(x: &T0Config) -> std::result::Result<(), (Vec<usize>, Vec<usize>)> {
    match x.violation() {
        None => Ok(()),
        Some(v) => Err(v),
    }
}

/// Every nonempty downward-closed family of nonempty subsets of `0..v`.
pub fn downward_closed_families(v: usize) -> Vec<T0Config> {
    assert!(v <= 5, "family enumeration is exponential in 2^v");
    let subsets: Vec<u32> = (1u32..(1u32 << v)).collect();
    let mut out = Vec::new();
    // Antichains of nonempty subsets generate the families one to one.
    let mut chosen: Vec<u32> = Vec::new();
    fn rec(i: usize, subsets: &[u32], chosen: &mut Vec<u32>, v: usize, out: &mut Vec<T0Config>) {
        if i == subsets.len() {
            if !chosen.is_empty() {
                let gens: Vec<Vec<usize>> =
                    chosen.iter().map(|&m| (0..v).filter(|b| m >> b & 1 == 1).collect()).collect();
                out.push(T0Config::generated(v, &gens).expect("valid"));
            }
            return;
        }
        rec(i + 1, subsets, chosen, v, out);
        let s = subsets[i];
        if chosen.iter().all(|&c| c & s != c && c & s != s) {
            chosen.push(s);
            rec(i + 1, subsets, chosen, v, out);
            chosen.pop();
        }
    }
    rec(0, &subsets, &mut chosen, v, &mut out);
    out.sort_by(|a, b| a.e.cmp(&b.e));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consistency_examples() {
        let ok = T0Config::new(2, [vec![0], vec![1], vec![0, 1]]).unwrap();
        assert!(t0_consistent(&ok).is_ok());
        let bad = T0Config::new(2, [vec![0, 1]]).unwrap();
        assert_eq!(t0_consistent(&bad), Err((vec![0, 1], vec![0])));
    }

    fn brute_families(v: usize) -> Vec<BTreeSet<Vec<usize>>> {
        let subsets: Vec<Vec<usize>> =
            (1u32..(1 << v)).map(|m| (0..v).filter(|b| m >> b & 1 == 1).collect()).collect();
        let mut out = Vec::new();
        for fam in 1u64..(1u64 << subsets.len()) {
            let e: BTreeSet<Vec<usize>> =
                subsets.iter().enumerate().filter(|(i, _)| fam >> i & 1 == 1).map(|(_, s)| s.clone()).collect();
            let closed = e.iter().all(|s| {
                subsets.iter().all(|t| !t.iter().all(|x| s.contains(x)) || e.contains(t))
            });
            if closed {
                out.push(e);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn family_counts_match_brute_force() {
        for v in 1..=4 {
            let fams: Vec<_> = downward_closed_families(v).into_iter().map(|c| c.e).collect();
            assert_eq!(fams, brute_families(v));
        }
        assert_eq!(downward_closed_families(3).len(), 18);
        assert_eq!(downward_closed_families(4).len(), 166);
        assert!(downward_closed_families(3).iter().all(|c| t0_consistent(c).is_ok()));
    }

    #[test]
    fn codec_uses_capital_e() {
        let c = T0Config::empty_graph(2);
        let j = serde_json::to_string(&c).unwrap();
        assert_eq!(j, r#"{"v":2,"E":[[0],[1]]}"#);
        let back: T0Config = serde_json::from_str(&j).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn maximal_sets() {
        let c = T0Config::generated(4, &[vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        assert_eq!(c.maximal(), vec![vec![0, 1], vec![1, 2], vec![2, 3]]);
    }
}
