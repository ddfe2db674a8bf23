use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::subsets;

/// A set of coefficient (or frame-vector) positions.
///
/// Stored 0-based and sorted; serialised as a JSON array of 1-based indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ErasureSet {
    indices: Vec<usize>,
}

impl ErasureSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// From 0-based indices, validated against a universe of size `m`.
    pub fn new(indices: impl IntoIterator<Item = usize>, m: usize) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("erasure set has repeated indices".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= m) {
            return Err(Error::IndexOutOfRange { index: bad + 1, len: m });
        }
        Ok(Self { indices })
    }

    /// From 1-based indices.
    pub fn from_one_based(indices: &[usize], m: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i == 0) {
            return Err(Error::IndexOutOfRange { index: bad, len: m });
        }
        Self::new(indices.iter().map(|i| i - 1), m)
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Surviving positions in `0..m`.
    pub fn complement(&self, m: usize) -> Vec<usize> {
        subsets::complement(&self.indices, m)
    }

    /// Re-checks the set against a universe of size `m`.
    pub fn validate(&self, m: usize) -> Result<()> {
        match self.indices.last() {
            Some(&i) if i >= m => Err(Error::IndexOutOfRange { index: i + 1, len: m }),
            _ => Ok(()),
        }
    }
}

impl Serialize for ErasureSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ErasureSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        ErasureSet::from_one_based(&raw, usize::MAX).map_err(serde::de::Error::custom)
    }
}
