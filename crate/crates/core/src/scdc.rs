//! (s,c)-Dense Codes over natural numbers.
//!
//! Byte values below `s` are stoppers and end a codeword; the other `c = 256 - s`
//! values are continuers. Values are assumed to be sorted by decreasing
//! frequency already (small numbers are frequent), so no model is stored.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScdcModel {
    s: u32,
}

impl ScdcModel {
    pub fn new(s: u32) -> Result<Self> {
        if !(1..=255).contains(&s) {
            return Err(Error::invalid(format!("stopper count {s} not in 1..=255")));
        }
        Ok(Self { s })
    }

    pub fn stoppers(&self) -> u32 {
        self.s
    }

    pub fn continuers(&self) -> u32 {
        256 - self.s
    }

    /// Codeword length of `v` in bytes.
    pub fn code_len(&self, v: u64) -> usize {
        let (s, c) = (u128::from(self.s), u128::from(self.continuers()));
        let v = u128::from(v);
        // base(k+1) = base(k) + s * c^(k-1)
        let (mut base, mut block, mut k) = (0u128, s, 1usize);
        while v >= base + block {
            base += block;
            block *= c;
            k += 1;
        }
        k
    }

    pub fn encode_into(&self, v: u64, out: &mut Vec<u8>) {
        let (s, c) = (u128::from(self.s), u128::from(self.continuers()));
        let v = u128::from(v);
        let (mut base, mut block, mut k) = (0u128, s, 1usize);
        while v >= base + block {
            base += block;
            block *= c;
            k += 1;
        }
        let x = v - base;
        let mut q = x / s;
        let start = out.len();
        out.resize(start + k, 0);
        out[start + k - 1] = (x % s) as u8;
        for i in (0..k - 1).rev() {
            out[start + i] = (s + q % c) as u8;
            q /= c;
        }
    }

    pub fn encode(&self, values: &[u64]) -> Vec<u8> {
        let mut out = Vec::with_capacity(values.len());
        for &v in values {
            self.encode_into(v, &mut out);
        }
        out
    }

    /// Decodes the codeword starting at `*pos`, advancing `*pos` past it.
    pub fn decode_next(&self, bytes: &[u8], pos: &mut usize) -> Result<u64> {
        let (s, c) = (u128::from(self.s), u128::from(self.continuers()));
        let (mut base, mut block, mut q) = (0u128, s, 0u128);
        let mut p = *pos;
        loop {
            let b = u128::from(
                *bytes
                    .get(p)
                    .ok_or_else(|| Error::format("SCDC stream ends inside a codeword"))?,
            );
            p += 1;
            if b < s {
                let v = base + q * s + b;
                *pos = p;
                return u64::try_from(v).map_err(|_| Error::format("SCDC value overflow"));
            }
            q = q * c + (b - s);
            base += block;
            block = block
                .checked_mul(c)
                .filter(|&b| b <= u128::from(u64::MAX) * 256)
                .ok_or_else(|| Error::format("SCDC codeword too long"))?;
        }
    }

    /// Start of the codeword that ends right before `end`, for backward reading.
    pub fn prev_start(&self, bytes: &[u8], floor: usize, end: usize) -> usize {
        debug_assert!(end > floor);
        let mut p = end - 1;
        while p > floor && u32::from(bytes[p - 1]) >= self.s {
            p -= 1;
        }
        p
    }

    pub fn decode_all(&self, bytes: &[u8]) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < bytes.len() {
            out.push(self.decode_next(bytes, &mut pos)?);
        }
        Ok(out)
    }

    /// Total encoded size of a histogram of `(value, frequency)` pairs.
    pub fn encoded_size(&self, hist: &[(u64, u64)]) -> u64 {
        hist.iter().map(|&(v, f)| f * self.code_len(v) as u64).sum()
    }
}

/// Chooses the stopper count minimizing the encoded size of `hist`, ties
/// going to the smallest `s`.
pub fn choose_s(hist: &[(u64, u64)]) -> ScdcModel {
    let mut best = (u64::MAX, 1);
    for s in 1..=255u32 {
        let model = ScdcModel { s };
        let size = model.encoded_size(hist);
        if size < best.0 {
            best = (size, s);
        }
    }
    ScdcModel { s: best.1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        let m = ScdcModel::new(128).unwrap();
        assert_eq!(m.encode(&[5]), vec![5]);
        assert_eq!(m.encode(&[130]), vec![128, 2]);
        let mut pos = 0;
        assert_eq!(m.decode_next(&[5], &mut pos).unwrap(), 5);
        assert_eq!(pos, 1);
        pos = 0;
        assert_eq!(m.decode_next(&[128, 2], &mut pos).unwrap(), 130);
        assert_eq!(pos, 2);
        pos = 0;
        assert!(m.decode_next(&[128], &mut pos).is_err());
        assert!(ScdcModel::new(0).is_err());
        assert!(ScdcModel::new(256).is_err());
    }

    #[test]
    fn code_boundaries() {
        // s = 128: 1 byte below 128, 2 bytes below 128 + 128*128
        let m = ScdcModel::new(128).unwrap();
        assert_eq!(m.code_len(127), 1);
        assert_eq!(m.code_len(128), 2);
        assert_eq!(m.code_len(128 + 128 * 128 - 1), 2);
        assert_eq!(m.code_len(128 + 128 * 128), 3);
        assert_eq!(m.encode(&[128 + 128 * 128 - 1]), vec![255, 127]);
        assert_eq!(m.encode(&[128 + 128 * 128]), vec![128, 128, 0]);
        let one = ScdcModel::new(255).unwrap();
        assert_eq!(one.encode(&[254, 255, 600]), vec![254, 255, 0, 255, 255, 90]);
    }

    #[test]
    fn roundtrip_and_monotone_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let values: Vec<u64> = (0..100_000)
            .map(|_| match rng.gen_range(0..3) {
                0 => rng.gen_range(0..300),
                1 => rng.gen_range(0..1_000_000),
                _ => rng.gen_range(0..20),
            })
            .collect();
        for s in [1, 64, 128, 230, 255] {
            let m = ScdcModel::new(s).unwrap();
            let bytes = m.encode(&values);
            assert_eq!(m.decode_all(&bytes).unwrap(), values);
            let mut prev = 0;
            for v in (0..200_000u64).step_by(37) {
                let l = m.code_len(v);
                assert!(l >= prev);
                prev = l;
            }
        }
    }

    #[test]
    fn backward_codeword_boundaries() {
        let m = ScdcModel::new(100).unwrap();
        let values = [3u64, 500, 99, 100, 70_000, 0];
        let bytes = m.encode(&values);
        let mut end = bytes.len();
        let mut back = Vec::new();
        while end > 0 {
            let start = m.prev_start(&bytes, 0, end);
            let mut p = start;
            back.push(m.decode_next(&bytes, &mut p).unwrap());
            assert_eq!(p, end);
            end = start;
        }
        back.reverse();
        assert_eq!(back, values);
    }

    #[test]
    fn choose_s_examples() {
        let hist: Vec<(u64, u64)> = (0..100).map(|v| (v, 1 + v % 7)).collect();
        assert_eq!(choose_s(&hist).stoppers(), 100);
        assert_eq!(choose_s(&[(0, 1000)]).stoppers(), 1);
    }

    #[test]
    fn choose_s_is_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let hist: Vec<(u64, u64)> = (0..rng.gen_range(1..400))
                .map(|_| (rng.gen_range(0..5000u64), rng.gen_range(1..1000u64)))
                .collect();
            let chosen = choose_s(&hist);
            // sweep by direct encoding
            let sizes: Vec<usize> = (1..=255)
                .map(|s| {
                    let m = ScdcModel::new(s).unwrap();
                    hist.iter().map(|&(v, f)| m.encode(&[v]).len() * f as usize).sum()
                })
                .collect();
            let min = *sizes.iter().min().unwrap();
            let first = sizes.iter().position(|&x| x == min).unwrap() as u32 + 1;
            assert_eq!(chosen.stoppers(), first);
        }
    }
}
