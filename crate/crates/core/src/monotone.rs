//! Nondecreasing maps over the particle index set and congested block partitions.

use std::ops::Deref;

use crate::error::{Error, Result};

/// A nondecreasing vector of positions indexed like a [`crate::ParticleSystem`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMap(Vec<f64>);

impl MonotoneMap {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "monotone map",
                    index: i,
                });
            }
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidTransport {
                index: i,
                next: i + 1,
                ratio: f64::INFINITY,
            });
        }
        Ok(Self(values))
    }

    /// Wraps values the caller has already produced as a nondecreasing sequence.
    pub(crate) fn from_sorted(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for MonotoneMap {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Inclusive index range `[lo, hi]` with `hi > lo`: one congested zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub lo: usize,
    pub hi: usize,
}

impl Block {
    /// Number of particles in the block.
    pub fn count(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

/// The maximal congested intervals, sorted and disjoint, each with at least two particles.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BlockPartition {
    blocks: Vec<Block>,
}

impl BlockPartition {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        for b in &blocks {
            if b.hi <= b.lo {
                return Err(Error::InvalidConfig(format!(
                    "block [{}, {}] has fewer than two particles",
                    b.lo, b.hi
                )));
            }
        }
        if blocks.windows(2).any(|w| w[1].lo <= w[0].hi) {
            return Err(Error::InvalidConfig(
                "blocks overlap or are out of order".into(),
            ));
        }
        Ok(Self { blocks })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The block containing particle `i`, if it is congested.
    pub fn block_of(&self, i: usize) -> Option<Block> {
        let k = self.blocks.partition_point(|b| b.hi < i);
        self.blocks.get(k).copied().filter(|b| b.contains(i))
    }

    /// Whether particles `i` and `j` sit in the same congested block.
    pub fn joins(&self, i: usize, j: usize) -> bool {
        self.block_of(i).is_some_and(|b| b.contains(j))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter()
    }
}
