//! Serde support for maps keyed by pairs of state indices, written as lists
//! of `{"from", "to", "value"}` entries.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct Entry<V> {
    from: usize,
    to: usize,
    value: V,
}

pub fn serialize<V: Serialize, S: Serializer>(
    map: &BTreeMap<(usize, usize), V>,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(
        map.iter()
            .map(|(&(from, to), value)| Entry { from, to, value }),
    )
}

pub fn deserialize<'de, V: Deserialize<'de>, D: Deserializer<'de>>(
    d: D,
) -> Result<BTreeMap<(usize, usize), V>, D::Error> {
    let entries: Vec<Entry<V>> = Vec::deserialize(d)?;
    Ok(entries
        .into_iter()
        .map(|e| ((e.from, e.to), e.value))
        .collect())
}
