//! Directly Addressable Codes.
//!
//! Each value is cut into `b`-bit chunks, least significant first. Level `l`
//! stores the `l`-th chunk of every value that has one, plus a bit telling
//! whether the value continues on level `l + 1`. The position of a value's
//! chunk on the next level is the rank of its continuation bit.

use super::{bit_width, BitVector, BitVectorBuilder, IntVector};
use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};

pub const DEFAULT_CHUNK_WIDTH: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Level {
    chunks: IntVector,
    more: BitVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DacSequence {
    chunk_width: u32,
    count: usize,
    levels: Vec<Level>,
}

impl DacSequence {
    pub fn encode(values: &[u64], chunk_width: u32) -> Result<Self> {
        if !(1..=64).contains(&chunk_width) {
            return Err(Error::invalid(format!("DAC chunk width {chunk_width} not in 1..=64")));
        }
        let max_levels = values.iter().map(|&v| levels_for(v, chunk_width)).max().unwrap_or(0);
        let mask = if chunk_width == 64 {
            u64::MAX
        } else {
            (1u64 << chunk_width) - 1
        };
        let mut levels = Vec::with_capacity(max_levels);
        let mut current: Vec<u64> = values.to_vec();
        for _ in 0..max_levels {
            let mut chunks = IntVector::with_width(chunk_width);
            let mut more = BitVectorBuilder::with_capacity(current.len());
            let mut next = Vec::new();
            for &v in &current {
                chunks.push(v & mask);
                let rest = if chunk_width == 64 { 0 } else { v >> chunk_width };
                more.push(rest > 0);
                if rest > 0 {
                    next.push(rest);
                }
            }
            levels.push(Level {
                chunks,
                more: more.build(),
            });
            current = next;
        }
        Ok(Self {
            chunk_width,
            count: values.len(),
            levels,
        })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn chunk_width(&self) -> u32 {
        self.chunk_width
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Random access to the `i`-th value.
    pub fn access(&self, i: usize) -> Option<u64> {
        if i >= self.count {
            return None;
        }
        let mut value = 0u64;
        let mut idx = i;
        for (l, level) in self.levels.iter().enumerate() {
            value |= level.chunks.get(idx) << (l as u32 * self.chunk_width);
            if !level.more.bit(idx) {
                break;
            }
            idx = level.more.rank1_unchecked(idx);
        }
        Some(value)
    }

    /// Number of levels the `i`-th value occupies.
    pub fn levels_of(&self, i: usize) -> Option<usize> {
        if i >= self.count {
            return None;
        }
        let mut idx = i;
        for (l, level) in self.levels.iter().enumerate() {
            if !level.more.bit(idx) {
                return Some(l + 1);
            }
            idx = level.more.rank1_unchecked(idx);
        }
        Some(self.levels.len())
    }

    /// Sequential decode with one cursor per level; no rank queries.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let mut cursors = vec![0usize; self.levels.len()];
        (0..self.count).map(move |_| {
            let mut value = 0u64;
            for (l, level) in self.levels.iter().enumerate() {
                let c = cursors[l];
                cursors[l] += 1;
                value |= level.chunks.get(c) << (l as u32 * self.chunk_width);
                if !level.more.bit(c) {
                    break;
                }
            }
            value
        })
    }

    pub fn size_bytes(&self) -> usize {
        1 + 8
            + 4
            + self
                .levels
                .iter()
                .map(|l| l.chunks.size_bytes() + l.more.size_bytes())
                .sum::<usize>()
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.u8(self.chunk_width as u8);
        w.u64(self.count as u64);
        w.u32(self.levels.len() as u32);
        for level in &self.levels {
            level.chunks.write(w);
            level.more.write(w);
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let chunk_width = r.u8()? as u32;
        let count = r.u64()? as usize;
        let nlevels = r.u32()? as usize;
        if !(1..=64).contains(&chunk_width) || nlevels > 64 {
            return Err(Error::format("bad DAC header"));
        }
        let mut levels = Vec::with_capacity(nlevels);
        let mut expected = count;
        for _ in 0..nlevels {
            let chunks = IntVector::read(r)?;
            let more = BitVector::read(r)?;
            if chunks.len() != expected || more.len() != expected {
                return Err(Error::format("DAC level size mismatch"));
            }
            expected = more.count_ones();
            levels.push(Level { chunks, more });
        }
        if expected != 0 || (count > 0 && nlevels == 0) {
            return Err(Error::format("DAC continuation bits dangle"));
        }
        Ok(Self {
            chunk_width,
            count,
            levels,
        })
    }
}

/// Chunks needed for `v`: ceil(bits(v) / b), at least one.
pub fn levels_for(v: u64, chunk_width: u32) -> usize {
    bit_width(v).div_ceil(chunk_width) as usize
}
