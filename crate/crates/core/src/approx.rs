//! Limit-computable 0/1 approximations with finite flip histories.
//!
//! An approximation assigns each index `k` an initial bit and a finite,
//! strictly increasing list of stages at which the bit toggles. Because the
//! flip list is finite, the limit exists for every declared index. Indices
//! without a declared history are refused rather than defaulted.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApproxError {
    #[error("index {0} has no declared flip history (domain is {1})")]
    UndeclaredIndex(u64, u64),
    #[error("flip stages for index {0} must be strictly increasing")]
    UnsortedFlips(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexHistory {
    pub initial: bool,
    #[serde(default)]
    pub flips: Vec<u64>,
}

/// A Δ₂-style approximation on indices `0..domain()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaTwoApprox {
    entries: Vec<IndexHistory>,
}

impl DeltaTwoApprox {
    pub fn new(entries: Vec<IndexHistory>) -> Result<Self, ApproxError> {
        for (k, e) in entries.iter().enumerate() {
            if e.flips.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ApproxError::UnsortedFlips(k as u64));
            }
        }
        Ok(DeltaTwoApprox { entries })
    }

    /// All-zero approximation with no flips on `domain` indices.
    pub fn zeros(domain: u64) -> Self {
        DeltaTwoApprox {
            entries: (0..domain)
                .map(|_| IndexHistory {
                    initial: false,
                    flips: vec![],
                })
                .collect(),
        }
    }

    pub fn domain(&self) -> u64 {
        self.entries.len() as u64
    }

    fn entry(&self, k: u64) -> Result<&IndexHistory, ApproxError> {
        self.entries
            .get(k as usize)
            .ok_or(ApproxError::UndeclaredIndex(k, self.domain()))
    }

    /// ξ(k,s): the initial bit toggled once per flip stage ≤ s.
    pub fn approx_at(&self, k: u64, s: u64) -> Result<bool, ApproxError> {
        let e = self.entry(k)?;
        let toggles = e.flips.iter().filter(|&&t| t <= s).count();
        Ok(e.initial ^ (toggles % 2 == 1))
    }

    /// lim_s ξ(k,s).
    pub fn limit_value(&self, k: u64) -> Result<bool, ApproxError> {
        let e = self.entry(k)?;
        Ok(e.initial ^ (e.flips.len() % 2 == 1))
    }

    pub fn flip_count(&self, k: u64) -> Result<u64, ApproxError> {
        Ok(self.entry(k)?.flips.len() as u64)
    }

    /// Stage of the last flip, if any.
    pub fn last_flip(&self, k: u64) -> Result<Option<u64>, ApproxError> {
        Ok(self.entry(k)?.flips.last().copied())
    }
}
