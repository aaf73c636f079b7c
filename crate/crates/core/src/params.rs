//! System configuration: worker count, adversary budget, group layout and alphabet.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default alphabet size, 2^16.
pub const DEFAULT_ALPHABET: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("n = {n} must equal m * (s + u) = {expected}")]
    WorkerCount { n: usize, expected: usize },
    #[error("u = {0} must be at least 1")]
    HonestSurplus(usize),
    #[error("m = {0} must be at least 1")]
    GroupCount(usize),
    #[error("m = {m} must divide p = {p}")]
    GroupDivisibility { m: usize, p: usize },
    #[error("p / m = {0} must be at least 2 (a match tree needs two leaves)")]
    BlockLength(usize),
    #[error("d = {0} must be at least 1")]
    Dimension(usize),
    #[error("q = {0} must be at least 2")]
    Alphabet(u64),
}

/// The tuple `(n, s, u, m, p, d, q)` describing one system.
///
/// Workers are partitioned into `m` groups of `s + u` workers; group `g`
/// holds gradient indices `g * p/m .. (g + 1) * p/m`. All indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeParams {
    pub n: usize,
    pub s: usize,
    pub u: usize,
    pub m: usize,
    pub p: usize,
    pub d: usize,
    pub q: u64,
}

impl SchemeParams {
    /// Builds and validates a configuration, deriving `n = m (s + u)`.
    pub fn new(
        s: usize,
        u: usize,
        m: usize,
        p: usize,
        d: usize,
        q: u64,
    ) -> Result<Self, ParamsError> {
        let params = Self {
            n: m * (s + u),
            s,
            u,
            m,
            p,
            d,
            q,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.u < 1 {
            return Err(ParamsError::HonestSurplus(self.u));
        }
        if self.m < 1 {
            return Err(ParamsError::GroupCount(self.m));
        }
        let expected = self.m * (self.s + self.u);
        if self.n != expected {
            return Err(ParamsError::WorkerCount {
                n: self.n,
                expected,
            });
        }
        if !self.p.is_multiple_of(self.m) {
            return Err(ParamsError::GroupDivisibility {
                m: self.m,
                p: self.p,
            });
        }
        if self.p / self.m < 2 {
            return Err(ParamsError::BlockLength(self.p / self.m));
        }
        if self.d < 1 {
            return Err(ParamsError::Dimension(self.d));
        }
        if self.q < 2 {
            return Err(ParamsError::Alphabet(self.q));
        }
        Ok(())
    }

    /// Workers per group, `s + u`.
    pub fn group_size(&self) -> usize {
        self.s + self.u
    }

    /// Gradients per group, `p / m`.
    pub fn block_len(&self) -> usize {
        self.p / self.m
    }

    /// `⌊s / u⌋`, the number of disagreement gradients an adversary can plant.
    pub fn disagreement_count(&self) -> usize {
        self.s / self.u
    }

    pub fn group_of_worker(&self, worker: usize) -> usize {
        worker / self.group_size()
    }

    pub fn group_of_gradient(&self, index: usize) -> usize {
        index / self.block_len()
    }

    pub fn group_workers(&self, group: usize) -> Range<usize> {
        let size = self.group_size();
        group * size..(group + 1) * size
    }

    pub fn group_gradients(&self, group: usize) -> Range<usize> {
        let len = self.block_len();
        group * len..(group + 1) * len
    }

    /// `log2 q` as a real number; commit bits convert to symbols at `1 / log2 q`.
    pub fn log2_alphabet(&self) -> f64 {
        (self.q as f64).log2()
    }

    /// Bytes per transmitted symbol, `⌈log2 q⌉ / 8`.
    pub fn bytes_per_symbol(&self) -> f64 {
        let bits = u64::BITS - (self.q - 1).leading_zeros();
        f64::from(bits) / 8.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derives_worker_count() {
        let params = SchemeParams::new(2, 1, 2, 8, 3, 5).unwrap();
        assert_eq!(params.n, 6);
        assert_eq!(params.group_workers(1), 3..6);
        assert_eq!(params.group_gradients(1), 4..8);
        assert_eq!(params.group_of_worker(4), 1);
        assert_eq!(params.group_of_gradient(3), 0);
    }

    #[test]
    fn rejects_each_invariant() {
        assert_eq!(
            SchemeParams::new(1, 0, 1, 4, 1, 2),
            Err(ParamsError::HonestSurplus(0))
        );
        assert_eq!(
            SchemeParams::new(1, 1, 0, 4, 1, 2),
            Err(ParamsError::GroupCount(0))
        );
        assert_eq!(
            SchemeParams::new(1, 1, 3, 4, 1, 2),
            Err(ParamsError::GroupDivisibility { m: 3, p: 4 })
        );
        assert_eq!(
            SchemeParams::new(1, 1, 2, 2, 1, 2),
            Err(ParamsError::BlockLength(1))
        );
        assert_eq!(
            SchemeParams::new(1, 1, 1, 4, 0, 2),
            Err(ParamsError::Dimension(0))
        );
        assert_eq!(
            SchemeParams::new(1, 1, 1, 4, 1, 1),
            Err(ParamsError::Alphabet(1))
        );
        let mut params = SchemeParams::new(1, 1, 1, 4, 1, 2).unwrap();
        params.n = 3;
        assert_eq!(
            params.validate(),
            Err(ParamsError::WorkerCount { n: 3, expected: 2 })
        );
    }

    #[test]
    fn symbol_width() {
        let params = SchemeParams::new(0, 1, 1, 2, 1, DEFAULT_ALPHABET).unwrap();
        assert_eq!(params.bytes_per_symbol(), 2.0);
        assert_eq!(params.log2_alphabet(), 16.0);
        let params = SchemeParams::new(0, 1, 1, 2, 1, 5).unwrap();
        assert_eq!(params.bytes_per_symbol(), 3.0 / 8.0);
    }
}
