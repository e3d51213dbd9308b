//! Tree labels keyed by node paths, written as `[[node, label], ...]` since
//! JSON object keys must be strings.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<V: Serialize, S: Serializer>(labels: &BTreeMap<Vec<usize>, V>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(labels.iter())
}

pub fn deserialize<'de, V: Deserialize<'de>, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Vec<usize>, V>, D::Error> {
    Ok(Vec::<(Vec<usize>, V)>::deserialize(d)?.into_iter().collect())
}
