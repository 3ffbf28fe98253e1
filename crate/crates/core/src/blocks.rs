//! Block structure of the parameter space and the block-product map.
//!
//! A partition (Δd₁, …, Δd_g) of the d parameter coordinates defines the
//! map u(w) whose j-th entry is the product of the coordinates in block j.
//! When every block has size one the map is the identity and the model is
//! an ordinary regular model in disguise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Partition of the parameter coordinates into contiguous blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockStructure {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockStructure {
    /// Build from block sizes; every size must be at least one.
    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidArgument(
                "block structure needs at least one block".into(),
            ));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidArgument(
                "every block size must be at least 1".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        offsets.push(0);
        let mut acc = 0usize;
        for &s in sizes {
            acc += s;
            offsets.push(acc);
        }
        Ok(BlockStructure {
            sizes: sizes.to_vec(),
            offsets,
        })
    }

    /// All-singleton blocks: the regular case embedding with g = d.
    pub fn singletons(d: usize) -> Result<Self> {
        BlockStructure::new(&vec![1; d])
    }

    /// Total parameter dimension d.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Number of blocks g.
    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Coordinate range of block `j`.
    pub fn range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    /// The block-product map u(w): uⱼ = ∏ of the coordinates in block j.
    pub fn u_map<R: Real>(&self, w: &[R]) -> Result<Vec<R>> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.len(),
            });
        }
        Ok((0..self.num_blocks())
            .map(|j| w[self.range(j)].iter().fold(R::one(), |acc, &v| acc * v))
            .collect())
    }

    /// u(w) written into `out` without the length check; the MCMC inner
    /// loop calls this with preallocated buffers.
    pub(crate) fn u_map_into<R: Real>(&self, w: &[R], out: &mut [R]) {
        debug_assert_eq!(w.len(), self.dim());
        debug_assert_eq!(out.len(), self.num_blocks());
        for j in 0..self.num_blocks() {
            out[j] = w[self.range(j)].iter().fold(R::one(), |acc, &v| acc * v);
        }
    }
}

impl TryFrom<Vec<usize>> for BlockStructure {
    type Error = Error;

    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        BlockStructure::new(&sizes)
    }
}

impl From<BlockStructure> for Vec<usize> {
    fn from(b: BlockStructure) -> Vec<usize> {
        b.sizes
    }
}

impl std::fmt::Display for BlockStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.sizes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}
