//! Bit vectors with rank/select, packed integer arrays, Directly Addressable
//! Codes and the zigzag mapping between signed and unsigned integers.

mod bitvec;
mod dac;
mod intvec;

pub use bitvec::{BitVector, BitVectorBuilder};
pub use dac::{levels_for, DacSequence, DEFAULT_CHUNK_WIDTH};
pub use intvec::{bit_width, IntVector};

/// Maps 0, -1, 1, -2, 2, ... to 0, 1, 2, 3, 4, ...
#[inline]
pub fn zigzag(x: i64) -> u64 {
    ((x << 1) ^ (x >> 63)) as u64
}

#[inline]
pub fn unzigzag(n: u64) -> i64 {
    ((n >> 1) as i64) ^ -((n & 1) as i64)
}
