//! Exact permutation p-values.
//!
//! Every p-value produced by this crate has the form `k/M` with `M` the
//! ensemble size. Keeping the integer numerator lets `<=` comparisons between
//! p-values be exact.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A p-value `count / total`, kept unreduced so the denominator stays `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PValue {
    count: u32,
    total: u32,
}

impl PValue {
    /// Panics unless `1 <= count <= total`.
    pub fn new(count: usize, total: usize) -> Self {
        assert!(
            count >= 1 && count <= total,
            "p-value numerator {count} outside [1, {total}]"
        );
        PValue {
            count: count as u32,
            total: total as u32,
        }
    }

    pub fn count(self) -> usize {
        self.count as usize
    }

    pub fn total(self) -> usize {
        self.total as usize
    }

    pub fn value(self) -> f64 {
        self.count as f64 / self.total as f64
    }

    /// True when `self <= alpha`, tested without rounding the ratio.
    pub fn at_most(self, alpha: f64) -> bool {
        (self.count as f64) <= alpha * self.total as f64
    }
}

impl Ord for PValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.count as u64 * other.total as u64;
        let rhs = other.count as u64 * self.total as u64;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for PValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.count, self.total)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsePValueError(String);

impl fmt::Display for ParsePValueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid p-value {:?}, expected k/M with 1 <= k <= M", self.0)
    }
}

impl std::error::Error for ParsePValueError {}

impl FromStr for PValue {
    type Err = ParsePValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParsePValueError(s.to_string());
        let (k, m) = s.trim().split_once('/').ok_or_else(err)?;
        let k: u32 = k.parse().map_err(|_| err())?;
        let m: u32 = m.parse().map_err(|_| err())?;
        if k == 0 || k > m {
            return Err(err());
        }
        Ok(PValue { count: k, total: m })
    }
}

impl Serialize for PValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
