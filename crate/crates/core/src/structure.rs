//! Finite multi-sorted structures.
//!
//! Elements of each sort are dense indices `0..size`. Relations are stored as
//! sorted tuple sets, with a dense bitmap index when the signature is small
//! enough to make membership a single lookup.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};

/// Element id within a sort.
pub type Elem = u32;

/// An ordered tuple of element ids; the sort of each coordinate is implied by
/// the signature it is used with.
pub type Tuple = Vec<Elem>;

/// Index of a sort inside a [`FiniteStructure`].
pub type SortId = usize;

/// Signatures whose product of sort sizes stays under this bound get a dense
/// membership bitmap.
const DENSE_INDEX_LIMIT: usize = 1 << 26;

#[derive(Clone, Debug)]
pub struct Relation {
    pub name: String,
    pub signature: Vec<SortId>,
    tuples: Vec<Tuple>,
    dense: Option<BitSet>,
    strides: Vec<usize>,
}

impl Relation {
    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn arity(&self) -> usize {
        self.signature.len()
    }

    pub fn contains(&self, t: &[Elem]) -> bool {
        match &self.dense {
            Some(bits) => {
                let idx: usize = t.iter().zip(&self.strides).map(|(&e, &s)| e as usize * s).sum();
                bits.contains(idx)
            }
            None => self.tuples.binary_search_by(|x| x.as_slice().cmp(t)).is_ok(),
        }
    }
}

/// A finite multi-sorted structure. Immutable after construction.
#[derive(Clone, Debug)]
pub struct FiniteStructure {
    sorts: Vec<(String, usize)>,
    relations: Vec<Relation>,
}

/// Human-readable description of a structure; also the on-disk file format.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureSpec {
    pub sorts: BTreeMap<String, usize>,
    pub relations: BTreeMap<String, RelationSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub signature: Vec<String>,
    pub tuples: Vec<Tuple>,
}

/// Incremental builder that reports duplicate names, which a map-based
/// [`StructureSpec`] cannot represent.
#[derive(Clone, Debug, Default)]
pub struct StructureBuilder {
    sorts: Vec<(String, usize)>,
    relations: Vec<(String, Vec<String>, Vec<Tuple>)>,
}

impl StructureBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sort(mut self, name: &str, size: usize) -> Self {
        self.sorts.push((name.to_string(), size));
        self
    }

    pub fn relation<I>(mut self, name: &str, signature: &[&str], tuples: I) -> Self
    where
        I: IntoIterator<Item = Tuple>,
    {
        self.relations.push((
            name.to_string(),
            signature.iter().map(|s| s.to_string()).collect(),
            tuples.into_iter().collect(),
        ));
        self
    }

    pub fn build(self) -> Result<FiniteStructure> {
        let mut sorts: Vec<(String, usize)> = Vec::new();
        for (name, size) in self.sorts {
            if sorts.iter().any(|(n, _)| *n == name) {
                return Err(Error::Structure(format!("duplicate sort `{name}`")));
            }
            if size == 0 {
                return Err(Error::Structure(format!("sort `{name}` must be nonempty")));
            }
            sorts.push((name, size));
        }
        sorts.sort();
        let sort_id = |name: &str| sorts.iter().position(|(n, _)| n == name);

        let mut relations: Vec<Relation> = Vec::new();
        for (name, sig, mut tuples) in self.relations {
            if relations.iter().any(|r| r.name == name) {
                return Err(Error::Structure(format!("duplicate relation `{name}`")));
            }
            let signature = sig
                .iter()
                .map(|s| sort_id(s).ok_or_else(|| Error::UnknownSort(s.clone())))
                .collect::<Result<Vec<_>>>()?;
            for t in &tuples {
                if t.len() != signature.len() {
                    return Err(Error::Structure(format!(
                        "relation `{name}`: tuple {t:?} has arity {}, expected {}",
                        t.len(),
                        signature.len()
                    )));
                }
                for (&e, &s) in t.iter().zip(&signature) {
                    if e as usize >= sorts[s].1 {
                        return Err(Error::Structure(format!(
                            "relation `{name}`: element {e} out-of-range for sort `{}` of size {}",
                            sorts[s].0, sorts[s].1
                        )));
                    }
                }
            }
            tuples.sort();
            tuples.dedup();
            let sizes: Vec<usize> = signature.iter().map(|&s| sorts[s].1).collect();
            let mut strides = vec![1usize; sizes.len()];
            for i in (0..sizes.len().saturating_sub(1)).rev() {
                strides[i] = strides[i + 1].saturating_mul(sizes[i + 1]);
            }
            let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
            let dense = match total {
                Some(total) if total <= DENSE_INDEX_LIMIT => {
                    let mut bits = BitSet::new(total);
                    for t in &tuples {
                        let idx: usize = t.iter().zip(&strides).map(|(&e, &s)| e as usize * s).sum();
                        bits.insert(idx);
                    }
                    Some(bits)
                }
                _ => None,
            };
            relations.push(Relation { name, signature, tuples, dense, strides });
        }
        relations.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(FiniteStructure { sorts, relations })
    }
}

/// Validates a structure description and builds the structure.
pub fn build_structure(spec: &StructureSpec) -> Result<FiniteStructure> {
    let mut b = StructureBuilder::new();
    for (name, &size) in &spec.sorts {
        b = b.sort(name, size);
    }
    for (name, rel) in &spec.relations {
        let sig: Vec<&str> = rel.signature.iter().map(String::as_str).collect();
        b = b.relation(name, &sig, rel.tuples.clone());
    }
    b.build()
}

impl FiniteStructure {
    pub fn sorts(&self) -> &[(String, usize)] {
        &self.sorts
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn sort_id(&self, name: &str) -> Result<SortId> {
        self.sorts
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownSort(name.to_string()))
    }

    pub fn sort_name(&self, id: SortId) -> &str {
        &self.sorts[id].0
    }

    pub fn sort_size(&self, id: SortId) -> usize {
        self.sorts[id].1
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().position(|r| r.name == name).map(|i| &self.relations[i])
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    /// Number of tuples of the given signature.
    pub fn tuple_count(&self, sig: &[SortId]) -> usize {
        sig.iter().map(|&s| self.sort_size(s)).product()
    }

    /// Position of `t` in the lexicographic enumeration of `sig`.
    pub fn tuple_rank(&self, sig: &[SortId], t: &[Elem]) -> usize {
        sig.iter().zip(t).fold(0, |acc, (&s, &e)| acc * self.sort_size(s) + e as usize)
    }

    /// Inverse of [`tuple_rank`](Self::tuple_rank).
    pub fn tuple_unrank(&self, sig: &[SortId], mut rank: usize) -> Tuple {
        let mut t = vec![0; sig.len()];
        for (i, &s) in sig.iter().enumerate().rev() {
            let size = self.sort_size(s);
            t[i] = (rank % size) as Elem;
            rank /= size;
        }
        t
    }

    /// Checks that `t` fits the signature.
    pub fn check_tuple(&self, sig: &[SortId], t: &[Elem]) -> Result<()> {
        if t.len() != sig.len() {
            return Err(Error::Arity { expected: sig.len(), found: t.len() });
        }
        for (&e, &s) in t.iter().zip(sig) {
            if e as usize >= self.sort_size(s) {
                return Err(Error::OutOfRange { elem: e, sort: self.sort_name(s).to_string() });
            }
        }
        Ok(())
    }

    pub fn to_spec(&self) -> StructureSpec {
        StructureSpec {
            sorts: self.sorts.iter().cloned().collect(),
            relations: self
                .relations
                .iter()
                .map(|r| {
                    (
                        r.name.clone(),
                        RelationSpec {
                            signature: r.signature.iter().map(|&s| self.sorts[s].0.clone()).collect(),
                            tuples: r.tuples.clone(),
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("structure spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: StructureSpec =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("structure file: {e}")))?;
        build_structure(&spec)
    }
}

/// All tuples of a signature given by sort names, in lexicographic order.
pub fn enumerate_tuples(s: &FiniteStructure, sig: &[&str]) -> Result<TupleIter> {
    let ids = sig.iter().map(|n| s.sort_id(n)).collect::<Result<Vec<_>>>()?;
    Ok(TupleIter::new(s, &ids))
}

/// Lexicographic odometer over a fixed signature.
#[derive(Clone, Debug)]
pub struct TupleIter {
    sizes: Vec<usize>,
    next: Option<Tuple>,
}

impl TupleIter {
    pub fn new(s: &FiniteStructure, sig: &[SortId]) -> Self {
        let sizes: Vec<usize> = sig.iter().map(|&i| s.sort_size(i)).collect();
        Self { next: Some(vec![0; sizes.len()]), sizes }
    }
}

impl Iterator for TupleIter {
    type Item = Tuple;

    fn next(&mut self) -> Option<Tuple> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            succ[i] += 1;
            if (succ[i] as usize) < self.sizes[i] {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph() -> FiniteStructure {
        StructureBuilder::new().sort("V", 3).relation("R", &["V", "V"], [vec![0, 1]]).build().unwrap()
    }

    #[test]
    fn builds_small_graph() {
        let s = graph();
        assert_eq!(s.sort_size(0), 3);
        assert_eq!(s.relation("R").unwrap().tuples().len(), 1);
        assert!(s.relation("R").unwrap().contains(&[0, 1]));
        assert!(!s.relation("R").unwrap().contains(&[1, 0]));
    }

    #[test]
    fn rejects_out_of_range() {
        let err = StructureBuilder::new()
            .sort("V", 3)
            .relation("R", &["V", "V"], [vec![0, 5]])
            .build()
            .unwrap_err();
        assert!(err.to_string().contains("out-of-range"), "{err}");
    }

    #[test]
    fn rejects_duplicates_and_arity() {
        assert!(StructureBuilder::new().sort("V", 1).sort("V", 2).build().is_err());
        assert!(StructureBuilder::new()
            .sort("V", 2)
            .relation("R", &["V"], [])
            .relation("R", &["V"], [])
            .build()
            .is_err());
        assert!(StructureBuilder::new().sort("V", 2).relation("R", &["V", "V"], [vec![0]]).build().is_err());
        assert!(matches!(
            StructureBuilder::new().sort("V", 2).relation("R", &["W"], []).build(),
            Err(Error::UnknownSort(_))
        ));
    }

    #[test]
    fn two_sorted_ternary() {
        let s = StructureBuilder::new()
            .sort("X", 2)
            .sort("Y", 4)
            .relation("E", &["X", "Y", "Y"], [vec![1, 3, 2], vec![0, 0, 0]])
            .build()
            .unwrap();
        assert!(s.relation("E").unwrap().contains(&[1, 3, 2]));
    }

    #[test]
    fn enumeration_counts_and_order() {
        let s = StructureBuilder::new().sort("X", 2).sort("Y", 3).sort("V", 3).build().unwrap();
        assert_eq!(enumerate_tuples(&s, &["V"]).unwrap().count(), 3);
        let vv: Vec<Tuple> = enumerate_tuples(&s, &["V", "V"]).unwrap().collect();
        assert_eq!(vv.len(), 9);
        assert!(vv.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(enumerate_tuples(&s, &["X", "Y"]).unwrap().count(), 6);
        assert!(enumerate_tuples(&s, &["Z"]).is_err());
        assert_eq!(enumerate_tuples(&s, &[]).unwrap().count(), 1);
    }

    #[test]
    fn rank_roundtrip() {
        let s = StructureBuilder::new().sort("X", 2).sort("Y", 3).build().unwrap();
        let sig = vec![0, 1, 1];
        for (i, t) in TupleIter::new(&s, &sig).enumerate() {
            assert_eq!(s.tuple_rank(&sig, &t), i);
            assert_eq!(s.tuple_unrank(&sig, i), t);
        }
    }

    #[test]
    fn json_roundtrip() {
        let s = graph();
        let back = FiniteStructure::from_json(&s.to_json()).unwrap();
        assert_eq!(back.to_spec(), s.to_spec());
    }
}
