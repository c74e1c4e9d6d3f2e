//! Region codes and the configurable region universe.
//!
//! Predictions are made per region per day; the default universe is the
//! fifty US states identified by their two-letter postal codes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Two-letter uppercase region code (e.g. `NY`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionCode([u8; 2]);

impl RegionCode {
    pub fn as_str(&self) -> &str {
        // always ASCII uppercase by construction
        std::str::from_utf8(&self.0).expect("region code is ascii")
    }
}

impl FromStr for RegionCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        if bytes.len() != 2 || !bytes.iter().all(|b| b.is_ascii_alphabetic()) {
            return Err(Error::Invalid(format!(
                "region code must be two ascii letters, got {s:?}"
            )));
        }
        Ok(RegionCode([
            bytes[0].to_ascii_uppercase(),
            bytes[1].to_ascii_uppercase(),
        ]))
    }
}

impl fmt::Display for RegionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for RegionCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RegionCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The fifty US state postal codes, alphabetical.
pub const US_STATES: [&str; 50] = [
    "AK", "AL", "AR", "AZ", "CA", "CO", "CT", "DE", "FL", "GA", "HI", "IA", "ID", "IL", "IN",
    "KS", "KY", "LA", "MA", "MD", "ME", "MI", "MN", "MO", "MS", "MT", "NC", "ND", "NE", "NH",
    "NJ", "NM", "NV", "NY", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VA",
    "VT", "WA", "WI", "WV", "WY",
];

/// Ordered set of region codes a run predicts over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionSet {
    codes: BTreeSet<RegionCode>,
}

impl RegionSet {
    pub fn new(codes: impl IntoIterator<Item = RegionCode>) -> Self {
        RegionSet {
            codes: codes.into_iter().collect(),
        }
    }

    /// The default universe: all fifty US states.
    pub fn us_states() -> Self {
        RegionSet::new(US_STATES.iter().map(|s| s.parse().expect("valid code")))
    }

    /// The first `n` codes of the US state list, handy for small fixtures.
    pub fn us_states_subset(n: usize) -> Self {
        RegionSet::new(
            US_STATES
                .iter()
                .take(n)
                .map(|s| s.parse().expect("valid code")),
        )
    }

    pub fn contains(&self, code: RegionCode) -> bool {
        self.codes.contains(&code)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Iterate in canonical (alphabetical) order.
    pub fn iter(&self) -> impl Iterator<Item = RegionCode> + '_ {
        self.codes.iter().copied()
    }
}
