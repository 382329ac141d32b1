//! Set partitions of `[n] = {1, ..., n}` and their enumeration.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_partitions`]; Bell(12) = 4,213,597.
pub const MAX_ENUMERATION_N: usize = 12;

/// A partition of `[n]` in canonical form.
///
/// Stored as its restricted growth string: element `i` carries the 0-based
/// index of its block, with blocks numbered by least element. Structural
/// equality is therefore partition equality, and the derived ordering is the
/// lexicographic order of growth strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    rgs: Vec<u32>,
}

impl Partition {
    /// Canonicalizes arbitrary labels: `i` and `j` share a block iff
    /// `labels[i] == labels[j]`.
    pub fn from_labels<T: Eq + Hash>(labels: &[T]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidPartition("a partition needs n >= 1".into()));
        }
        let mut seen: HashMap<&T, u32> = HashMap::with_capacity(labels.len());
        let rgs = labels
            .iter()
            .map(|l| {
                let next = seen.len() as u32;
                *seen.entry(l).or_insert(next)
            })
            .collect();
        Ok(Partition { rgs })
    }

    /// Builds a partition from 1-based blocks, checking that they cover `[n]`
    /// exactly once.
    pub fn from_blocks(blocks: &[Vec<usize>]) -> Result<Self> {
        let n: usize = blocks.iter().map(Vec::len).sum();
        if n == 0 {
            return Err(Error::InvalidPartition("a partition needs n >= 1".into()));
        }
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &i in block {
                if i == 0 || i > n {
                    return Err(Error::InvalidPartition(format!(
                        "element {i} is outside 1..={n}"
                    )));
                }
                if owner[i - 1] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "element {i} appears twice"
                    )));
                }
                owner[i - 1] = b;
            }
        }
        Self::from_labels(&owner)
    }

    /// Trusted constructor for a growth string produced internally.
    pub(crate) fn from_rgs(rgs: Vec<u32>) -> Self {
        debug_assert!(is_restricted_growth(&rgs));
        Partition { rgs }
    }

    pub fn n(&self) -> usize {
        self.rgs.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.rgs.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// The 0-based block index of each element.
    pub fn labels(&self) -> &[u32] {
        &self.rgs
    }

    /// Block sizes, blocks ordered by least element.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_blocks()];
        for &l in &self.rgs {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// 1-based blocks in canonical order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for (i, &l) in self.rgs.iter().enumerate() {
            blocks[l as usize].push(i + 1);
        }
        blocks
    }

    /// The partitions of `[n + 1]` that restrict to `self`: element `n + 1`
    /// joins each existing block in turn, then opens a new one.
    pub fn extensions(&self) -> impl Iterator<Item = Partition> + '_ {
        (0..=self.num_blocks() as u32).map(move |b| {
            let mut rgs = self.rgs.clone();
            rgs.push(b);
            Partition { rgs }
        })
    }
}

fn is_restricted_growth(rgs: &[u32]) -> bool {
    let mut next = 0;
    for &l in rgs {
        if l > next {
            return false;
        }
        if l == next {
            next += 1;
        }
    }
    !rgs.is_empty()
}

/// Formats as `1,3|2`: blocks separated by `|`, elements by `,`.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (b, block) in self.blocks().iter().enumerate() {
            if b > 0 {
                f.write_str("|")?;
            }
            for (k, i) in block.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{i}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let blocks = s
            .split('|')
            .map(|block| {
                block
                    .split(',')
                    .map(|tok| {
                        tok.trim().parse::<usize>().map_err(|_| {
                            Error::InvalidPartition(format!(
                                "cannot parse element {tok:?} in {s:?}"
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::from_blocks(&blocks)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Stick labels `z_1, ..., z_n` chosen by each observation; labels start at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationVector(Vec<usize>);

impl AllocationVector {
    pub fn new(z: Vec<usize>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::InvalidPartition("allocation vector is empty".into()));
        }
        if z.contains(&0) {
            return Err(Error::InvalidPartition(
                "allocation labels start at 1".into(),
            ));
        }
        Ok(AllocationVector(z))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `m(z)`, the largest label.
    pub fn max_label(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// The partition induced by equal labels.
pub fn partition_from_allocations(z: &AllocationVector) -> Partition {
    // label values are positive, so a dense first-occurrence map is enough
    let mut index: HashMap<usize, u32> = HashMap::with_capacity(z.len());
    let rgs = z
        .as_slice()
        .iter()
        .map(|&l| {
            let next = index.len() as u32;
            *index.entry(l).or_insert(next)
        })
        .collect();
    Partition::from_rgs(rgs)
}

/// Lazily yields every partition of `[n]` once, in lexicographic order of
/// restricted growth strings.
pub fn enumerate_partitions(n: usize) -> Result<PartitionIter> {
    if !(1..=MAX_ENUMERATION_N).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            min: 1,
            max: MAX_ENUMERATION_N,
        });
    }
    Ok(PartitionIter {
        rgs: vec![0; n],
        prefix_max: vec![0; n],
        done: false,
    })
}

#[derive(Debug, Clone)]
pub struct PartitionIter {
    rgs: Vec<u32>,
    // prefix_max[i] = max(rgs[0..=i])
    prefix_max: Vec<u32>,
    done: bool,
}

impl PartitionIter {
    fn advance(&mut self) {
        let n = self.rgs.len();
        for i in (1..n).rev() {
            if self.rgs[i] <= self.prefix_max[i - 1] {
                self.rgs[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.rgs[i]);
                let m = self.prefix_max[i];
                for j in i + 1..n {
                    self.rgs[j] = 0;
                    self.prefix_max[j] = m;
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let current = Partition::from_rgs(self.rgs.clone());
        self.advance();
        Some(current)
    }
}
