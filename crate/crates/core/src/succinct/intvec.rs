use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};

/// Fixed-width packed integer array.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct IntVector {
    words: Vec<u64>,
    width: u32,
    len: usize,
}

/// Number of bits needed to write `v` (at least 1).
pub fn bit_width(v: u64) -> u32 {
    (64 - v.leading_zeros()).max(1)
}

impl IntVector {
    pub fn with_width(width: u32) -> Self {
        assert!((1..=64).contains(&width), "width must be in 1..=64");
        Self {
            words: Vec::new(),
            width,
            len: 0,
        }
    }

    /// Packs `values` with the smallest width that fits all of them.
    pub fn from_slice(values: &[u64]) -> Self {
        let width = bit_width(values.iter().copied().max().unwrap_or(0));
        let mut v = Self::with_width(width);
        for &x in values {
            v.push(x);
        }
        v
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn mask(&self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    pub fn push(&mut self, value: u64) {
        assert!(value <= self.mask(), "value {value} exceeds width {}", self.width);
        let bit = self.len * self.width as usize;
        let (w, off) = (bit / 64, bit % 64);
        let needed = (bit + self.width as usize).div_ceil(64);
        if self.words.len() < needed {
            self.words.resize(needed, 0);
        }
        self.words[w] |= value << off;
        if off + self.width as usize > 64 {
            self.words[w + 1] |= value >> (64 - off);
        }
        self.len += 1;
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        let bit = i * self.width as usize;
        let (w, off) = (bit / 64, bit % 64);
        let mut v = self.words[w] >> off;
        if off + self.width as usize > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        v & self.mask()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn size_bytes(&self) -> usize {
        9 + self.words.len() * 8
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.u8(self.width as u8);
        w.u64(self.len as u64);
        for word in &self.words {
            w.u64(*word);
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let width = r.u8()? as u32;
        if !(1..=64).contains(&width) {
            return Err(Error::format(format!("bad packed width {width}")));
        }
        let len = r.u64()? as usize;
        let nwords = len
            .checked_mul(width as usize)
            .ok_or_else(|| Error::format("packed length overflow"))?
            .div_ceil(64);
        let bytes = r.bytes(nwords.saturating_mul(8))?;
        let words = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { words, width, len })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        assert_eq!(bit_width(0), 1);
        assert_eq!(bit_width(1), 1);
        assert_eq!(bit_width(255), 8);
        assert_eq!(bit_width(256), 9);
        assert_eq!(bit_width(u64::MAX), 64);
    }

    #[test]
    fn straddling_words() {
        let values: Vec<u64> = (0..500).map(|i| (i * 7919) % 8191).collect();
        let v = IntVector::from_slice(&values);
        assert_eq!(v.width(), 13);
        assert_eq!(v.iter().collect::<Vec<_>>(), values);

        let mut full = IntVector::with_width(64);
        full.push(u64::MAX);
        full.push(3);
        assert_eq!(full.get(0), u64::MAX);
        assert_eq!(full.get(1), 3);
    }
}
