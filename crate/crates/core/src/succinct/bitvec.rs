//! Plain bit vector with a two-level rank directory.
//!
//! Positions are 0-based. `rank1(i)` counts the ones in `[0, i)`, which is the
//! same number as a 1-based rank over positions `1..=i`. `select1(j)` takes a
//! 1-based ordinal and returns the 0-based position of the `j`-th one, so
//! `rank1(select1(j) + 1) == j`.

use crate::binio::{Reader, Writer};
use crate::error::Result;

const WORDS_PER_SUPER: usize = 8;
const SUPER_BITS: usize = 64 * WORDS_PER_SUPER;

#[derive(Clone, Default, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
    ones: usize,
    // ones before each superblock
    supers: Vec<u64>,
    // ones before each word, relative to its superblock
    blocks: Vec<u16>,
}

impl std::fmt::Debug for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let bits: String = (0..self.len.min(128))
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect();
        write!(f, "BitVector({} bits: {bits}", self.len)?;
        if self.len > 128 {
            write!(f, "...")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Default, Debug)]
pub struct BitVectorBuilder {
    words: Vec<u64>,
    len: usize,
}

impl BitVectorBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn build(self) -> BitVector {
        BitVector::from_words(self.words, self.len)
    }
}

impl FromIterator<bool> for BitVector {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut b = BitVectorBuilder::new();
        for bit in iter {
            b.push(bit);
        }
        b.build()
    }
}

impl BitVector {
    /// Parses a string of `0`/`1` characters, mostly for tests.
    pub fn from_str_bits(s: &str) -> Self {
        s.chars().filter(|c| *c == '0' || *c == '1').map(|c| c == '1').collect()
    }

    fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.truncate(len.div_ceil(64));
        words.resize(len.div_ceil(64), 0);
        if !len.is_multiple_of(64) {
            let last = words.len() - 1;
            words[last] &= (1u64 << (len % 64)) - 1;
        }
        let mut supers = Vec::with_capacity(words.len().div_ceil(WORDS_PER_SUPER) + 1);
        let mut blocks = Vec::with_capacity(words.len());
        let mut total = 0u64;
        let mut in_super = 0u16;
        for (w, word) in words.iter().enumerate() {
            if w % WORDS_PER_SUPER == 0 {
                supers.push(total);
                in_super = 0;
            }
            blocks.push(in_super);
            let c = word.count_ones();
            in_super += c as u16;
            total += c as u64;
        }
        supers.push(total);
        Self {
            words,
            len,
            ones: total as usize,
            supers,
            blocks,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.bit(i))
    }

    /// Unchecked access; panics past the end of the word array.
    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub(crate) fn rank1_unchecked(&self, i: usize) -> usize {
        let w = i / 64;
        if w >= self.words.len() {
            return self.ones;
        }
        let base = self.supers[w / WORDS_PER_SUPER] as usize + self.blocks[w] as usize;
        let rem = i % 64;
        if rem == 0 {
            base
        } else {
            base + (self.words[w] & ((1u64 << rem) - 1)).count_ones() as usize
        }
    }

    /// Number of ones in `[0, i)`; `None` when `i > len`.
    pub fn rank1(&self, i: usize) -> Option<usize> {
        (i <= self.len).then(|| self.rank1_unchecked(i))
    }

    /// Number of zeros in `[0, i)`; `None` when `i > len`.
    pub fn rank0(&self, i: usize) -> Option<usize> {
        (i <= self.len).then(|| i - self.rank1_unchecked(i))
    }

    pub fn rank(&self, bit: bool, i: usize) -> Option<usize> {
        if bit {
            self.rank1(i)
        } else {
            self.rank0(i)
        }
    }

    /// Position of the `j`-th one (1-based `j`).
    pub fn select1(&self, j: usize) -> Option<usize> {
        if j == 0 || j > self.ones {
            return None;
        }
        // last superblock with fewer than j ones before it
        let nsup = self.supers.len() - 1;
        let (mut lo, mut hi) = (0usize, nsup);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if (self.supers[mid] as usize) < j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut seen = self.supers[lo] as usize;
        for w in lo * WORDS_PER_SUPER..self.words.len() {
            let c = self.words[w].count_ones() as usize;
            if seen + c >= j {
                return Some(w * 64 + select_in_word(self.words[w], j - seen));
            }
            seen += c;
        }
        None
    }

    /// Position of the `j`-th zero (1-based `j`).
    pub fn select0(&self, j: usize) -> Option<usize> {
        if j == 0 || j > self.count_zeros() {
            return None;
        }
        let zeros_before = |s: usize| (s * SUPER_BITS).min(self.len) - self.supers[s] as usize;
        let nsup = self.supers.len() - 1;
        let (mut lo, mut hi) = (0usize, nsup);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if zeros_before(mid) < j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut seen = zeros_before(lo);
        for w in lo * WORDS_PER_SUPER..self.words.len() {
            let word = !self.words[w];
            let c = word.count_ones() as usize;
            if seen + c >= j {
                let p = w * 64 + select_in_word(word, j - seen);
                return (p < self.len).then_some(p);
            }
            seen += c;
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    /// Payload size in bytes (directories are regenerated on load and not counted).
    pub fn size_bytes(&self) -> usize {
        8 + self.words.len() * 8
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.u64(self.len as u64);
        for word in &self.words {
            w.u64(*word);
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let len = r.u64()? as usize;
        let nwords = len.div_ceil(64);
        let bytes = r.bytes(nwords.saturating_mul(8))?;
        let words = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self::from_words(words, len))
    }
}

/// 0-based position of the `k`-th (1-based) set bit of `word`.
#[inline]
fn select_in_word(mut word: u64, k: usize) -> usize {
    for _ in 1..k {
        word &= word - 1;
    }
    word.trailing_zeros() as usize
}
