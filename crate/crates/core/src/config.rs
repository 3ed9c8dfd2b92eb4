//! Enumeration caps and `key=value` threshold overrides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ratio::{self, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest `|Ξ|^n` that may be enumerated word by word.
    pub enumeration: u64,
    /// Largest `|Ξ|^{|C|}` core assignments enumerated by pompom code.
    pub sigma: u64,
    /// Largest product formula (support size or table size) materialized by amplification.
    pub amplification: u64,
    /// Largest `n` for exact subset enumeration of a 1-sided sampler.
    pub exact_one_sided_n: usize,
    /// Largest `n` for exact subset enumeration of a 2-sided sampler.
    pub exact_two_sided_n: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            enumeration: 1 << 20,
            sigma: 1 << 20,
            amplification: 1 << 16,
            exact_one_sided_n: 20,
            exact_two_sided_n: 12,
        }
    }
}

/// `|Ξ|^len` if it does not exceed `cap`.
pub fn checked_count(alphabet_size: usize, len: usize, cap: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..len {
        acc = acc.checked_mul(alphabet_size as u64)?;
        if acc > cap {
            return None;
        }
    }
    (acc <= cap).then_some(acc)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OverrideError {
    #[error("override `{0}` is not of the form key=value")]
    Malformed(String),
    #[error("override `{key}` has invalid value `{value}`")]
    BadValue { key: String, value: String },
}

/// Threshold overrides keyed by dotted names such as `prune.lower`.
///
/// Every threshold that defaults to a formula in `n`, `q`, `|Ξ|` and `ε` reads
/// its override here first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overrides(pub BTreeMap<String, String>);

impl Overrides {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn parse_pair(&mut self, kv: &str) -> Result<(), OverrideError> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| OverrideError::Malformed(kv.to_string()))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(OverrideError::Malformed(kv.to_string()));
        }
        self.0.insert(k.to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn bad(&self, key: &str) -> OverrideError {
        OverrideError::BadValue {
            key: key.to_string(),
            value: self.0.get(key).cloned().unwrap_or_default(),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, OverrideError> {
        self.raw(key)
            .map(|v| v.parse::<usize>().map_err(|_| self.bad(key)))
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, OverrideError> {
        self.raw(key)
            .map(|v| v.parse::<u64>().map_err(|_| self.bad(key)))
            .transpose()
    }

    pub fn ratio(&self, key: &str) -> Result<Option<Ratio>, OverrideError> {
        self.raw(key)
            .map(|v| ratio::parse(v).map_err(|_| self.bad(key)))
            .transpose()
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, OverrideError> {
        self.raw(key)
            .map(|v| match ratio::parse(v) {
                Ok(r) => Ok(ratio::to_f64(&r)),
                Err(_) => v.parse::<f64>().map_err(|_| self.bad(key)),
            })
            .transpose()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
