//! k²-tree over a binary cell matrix.
//!
//! The matrix is padded to a side of `k^h` cells. Nodes are laid out level by
//! level; the bits of every level but the last go to `T`, the last level
//! (the original cells) to `L`. Children of a node are ordered left to right,
//! then top to bottom: child `i` covers column block `i % k` and row block
//! `i / k`. Positions below address the concatenation `T:L`, 0-based.

use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::geom::{Cell, Rect};
use crate::succinct::{BitVector, BitVectorBuilder};

pub const DEFAULT_ARITY: u32 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K2Tree {
    k: u32,
    side: u64,
    levels: u32,
    width: u32,
    height: u32,
    t: BitVector,
    l: BitVector,
}

/// Result of a parent lookup: the block holding the parent node and the
/// parent's ordinal inside that block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParentRef {
    pub block_start: usize,
    pub ordinal: usize,
}

impl ParentRef {
    /// Position of the parent's own 1-bit in `T`.
    pub fn position(&self) -> usize {
        self.block_start + self.ordinal
    }
}

impl K2Tree {
    /// Builds the tree for the set of 1-cells `points` in a `width x height`
    /// matrix. Duplicate points are allowed.
    pub fn build(points: &[Cell], width: u32, height: u32, k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!("k2-tree arity must be >= 2, got {k}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::invalid("matrix must have at least one cell"));
        }
        if let Some(p) = points.iter().find(|p| p.x >= width || p.y >= height) {
            return Err(Error::invalid(format!(
                "cell ({}, {}) outside {width}x{height} matrix",
                p.x, p.y
            )));
        }
        let k64 = u64::from(k);
        let mut side = k64;
        let mut levels = 1u32;
        while side < u64::from(width.max(height)) {
            side *= k64;
            levels += 1;
        }
        let kk = (k * k) as usize;
        let mut t = BitVectorBuilder::new();
        let mut l = BitVectorBuilder::new();
        let mut current: Vec<(u64, u64, Vec<Cell>)> = vec![(0, 0, points.to_vec())];
        let mut size = side;
        for level in 0..levels {
            let child = size / k64;
            let last = level + 1 == levels;
            let mut next = Vec::new();
            for (x0, y0, pts) in current {
                let mut buckets: Vec<Vec<Cell>> = vec![Vec::new(); kk];
                for p in pts {
                    let cx = (u64::from(p.x) - x0) / child;
                    let cy = (u64::from(p.y) - y0) / child;
                    buckets[(cy * k64 + cx) as usize].push(p);
                }
                for (i, bucket) in buckets.into_iter().enumerate() {
                    let bit = !bucket.is_empty();
                    if last {
                        l.push(bit);
                    } else {
                        t.push(bit);
                        if bit {
                            let i = i as u64;
                            next.push((x0 + (i % k64) * child, y0 + (i / k64) * child, bucket));
                        }
                    }
                }
            }
            current = next;
            size = child;
        }
        Ok(Self {
            k,
            side,
            levels,
            width,
            height,
            t: t.build(),
            l: l.build(),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn side(&self) -> u64 {
        self.side
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn t_bits(&self) -> &BitVector {
        &self.t
    }

    pub fn l_bits(&self) -> &BitVector {
        &self.l
    }

    /// Number of 1-cells.
    pub fn count_ones(&self) -> usize {
        self.l.count_ones()
    }

    fn kk(&self) -> usize {
        (self.k * self.k) as usize
    }

    #[inline]
    fn bit(&self, p: usize) -> bool {
        if p < self.t.len() {
            self.t.bit(p)
        } else {
            self.l.bit(p - self.t.len())
        }
    }

    /// First position of the children block of the 1-bit at `p` in `T`.
    /// Results `>= |T|` address `L` at `result - |T|`.
    pub fn child(&self, p: usize) -> Result<usize> {
        if p >= self.t.len() || !self.t.bit(p) {
            return Err(Error::invalid(format!("position {p} is not a 1-bit of T")));
        }
        Ok(self.t.rank1_unchecked(p + 1) * self.kk())
    }

    /// Parent of position `p` in `T:L`; `None` for the root block.
    pub fn parent(&self, p: usize) -> Option<ParentRef> {
        let kk = self.kk();
        if p < kk || p >= self.t.len() + self.l.len() {
            return None;
        }
        let q = self.t.select1(p / kk)?;
        Some(ParentRef {
            block_start: q - q % kk,
            ordinal: q % kk,
        })
    }

    fn check_cell(&self, c: Cell) -> Result<()> {
        if c.x >= self.width {
            return Err(Error::OutOfRange {
                what: "column",
                value: c.x.into(),
                limit: self.width.into(),
            });
        }
        if c.y >= self.height {
            return Err(Error::OutOfRange {
                what: "row",
                value: c.y.into(),
                limit: self.height.into(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, c: Cell) -> Result<bool> {
        Ok(self.leaf_ordinal(c)?.is_some())
    }

    /// 1-based ordinal of the cell among the 1-bits of `L`, or `None` for a 0-cell.
    pub fn leaf_ordinal(&self, c: Cell) -> Result<Option<usize>> {
        self.check_cell(c)?;
        let k = u64::from(self.k);
        let (mut x, mut y) = (u64::from(c.x), u64::from(c.y));
        let mut size = self.side;
        let mut base = 0usize;
        for level in 0..self.levels {
            size /= k;
            let p = base + ((y / size) * k + x / size) as usize;
            if !self.bit(p) {
                return Ok(None);
            }
            if level + 1 == self.levels {
                let n = p - self.t.len();
                return Ok(Some(self.l.rank1_unchecked(n + 1)));
            }
            base = self.t.rank1_unchecked(p + 1) * self.kk();
            x %= size;
            y %= size;
        }
        unreachable!("descent always ends at the leaf level")
    }

    /// Cell of the `ordinal`-th (1-based) 1-bit of `L`, found by walking up.
    pub fn cell_of_leaf(&self, ordinal: usize) -> Result<Cell> {
        let n = self.l.select1(ordinal).ok_or(Error::OutOfRange {
            what: "leaf ordinal",
            value: ordinal as u64,
            limit: self.l.count_ones() as u64,
        })?;
        let kk = self.kk();
        let k = self.k as usize;
        let mut p = self.t.len() + n;
        let (mut x, mut y) = (0u64, 0u64);
        let mut size = 1u64;
        loop {
            let i = p % kk;
            x += (i % k) as u64 * size;
            y += (i / k) as u64 * size;
            if p < kk {
                break;
            }
            p = self
                .t
                .select1(p / kk)
                .ok_or_else(|| Error::corrupt("k2-tree node without parent"))?;
            size *= u64::from(self.k);
        }
        Ok(Cell::new(x as u32, y as u32))
    }

    /// All 1-cells inside `rect` with their leaf ordinals, in depth-first order.
    pub fn report_region(&self, rect: &Rect) -> Vec<(Cell, usize)> {
        let mut out = Vec::new();
        self.report_region_counted(rect, &mut out);
        out
    }

    /// Like [`report_region`](Self::report_region); returns the number of
    /// nodes inspected.
    pub fn report_region_counted(&self, rect: &Rect, out: &mut Vec<(Cell, usize)>) -> usize {
        let bounds = Rect::new(0, 0, self.width - 1, self.height - 1);
        let Some(rect) = rect.intersection(&bounds) else {
            return 0;
        };
        let mut visited = 0;
        self.report_rec(&rect, 0, 0, 0, self.side, 0, out, &mut visited);
        visited
    }

    #[allow(clippy::too_many_arguments)]
    fn report_rec(
        &self,
        rect: &Rect,
        base: usize,
        x0: u64,
        y0: u64,
        size: u64,
        level: u32,
        out: &mut Vec<(Cell, usize)>,
        visited: &mut usize,
    ) {
        let k = u64::from(self.k);
        let child = size / k;
        let last = level + 1 == self.levels;
        for i in 0..self.kk() as u64 {
            let cx = x0 + (i % k) * child;
            let cy = y0 + (i / k) * child;
            if cx > u64::from(rect.x2)
                || cy > u64::from(rect.y2)
                || cx + child <= u64::from(rect.x1)
                || cy + child <= u64::from(rect.y1)
            {
                continue;
            }
            let p = base + i as usize;
            *visited += 1;
            if !self.bit(p) {
                continue;
            }
            if last {
                let n = p - self.t.len();
                out.push((Cell::new(cx as u32, cy as u32), self.l.rank1_unchecked(n + 1)));
            } else {
                let b = self.t.rank1_unchecked(p + 1) * self.kk();
                self.report_rec(rect, b, cx, cy, child, level + 1, out, visited);
            }
        }
    }

    pub fn size_bytes(&self) -> usize {
        4 + 8 + 4 + 4 + self.t.size_bytes() + self.l.size_bytes()
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.u32(self.k);
        w.u64(self.side);
        w.u32(self.width);
        w.u32(self.height);
        self.t.write(w);
        self.l.write(w);
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let k = r.u32()?;
        let side = r.u64()?;
        let width = r.u32()?;
        let rows = r.u32()?;
        if k < 2 || width == 0 || rows == 0 {
            return Err(Error::format("bad k2-tree header"));
        }
        let mut s = u64::from(k);
        let mut levels = 1;
        while s < side {
            s = s
                .checked_mul(u64::from(k))
                .ok_or_else(|| Error::format("k2-tree side overflow"))?;
            levels += 1;
        }
        if s != side || side < u64::from(width.max(rows)) {
            return Err(Error::format("k2-tree side is not a power of k"));
        }
        let t = BitVector::read(r)?;
        let l = BitVector::read(r)?;
        let kk = (k * k) as usize;
        if t.len() % kk != 0 || l.len() % kk != 0 || (t.count_ones() + 1) * kk != t.len() + l.len() {
            return Err(Error::format("k2-tree bitmap sizes inconsistent"));
        }
        Ok(Self {
            k,
            side,
            levels,
            width,
            height: rows,
            t,
            l,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(rng: &mut ChaCha8Rng, n: usize, w: u32, h: u32) -> Vec<Cell> {
        (0..n)
            .map(|_| Cell::new(rng.gen_range(0..w), rng.gen_range(0..h)))
            .collect()
    }

    /// Levelwise enumeration of 1-cells straight from the definition: sort
    /// cells by the sequence of child ordinals from the root down.
    fn levelwise_order(points: &[Cell], k: u32, side: u64) -> Vec<Cell> {
        let mut cells: Vec<Cell> = points.to_vec();
        cells.sort();
        cells.dedup();
        let key = |c: &Cell| {
            let mut digits = Vec::new();
            let mut size = side;
            let (mut x, mut y) = (u64::from(c.x), u64::from(c.y));
            while size > 1 {
                size /= u64::from(k);
                digits.push((y / size) * u64::from(k) + x / size);
                x %= size;
                y %= size;
            }
            digits
        };
        cells.sort_by_key(key);
        cells
    }

    #[test]
    fn empty_matrix() {
        let t = K2Tree::build(&[], 8, 8, 2).unwrap();
        assert_eq!(t.t_bits(), &BitVector::from_str_bits("0000"));
        assert!(t.l_bits().is_empty());
        assert!(!t.contains(Cell::new(3, 3)).unwrap());
        assert!(t.report_region(&Rect::new(0, 0, 7, 7)).is_empty());
    }

    #[test]
    fn single_point() {
        let t = K2Tree::build(&[Cell::new(0, 0)], 4, 4, 2).unwrap();
        assert!(t.contains(Cell::new(0, 0)).unwrap());
        assert!(!t.contains(Cell::new(3, 3)).unwrap());
        // root block 1000, then L 1000
        assert_eq!(t.t_bits(), &BitVector::from_str_bits("1000"));
        assert_eq!(t.l_bits(), &BitVector::from_str_bits("1000"));
        assert_eq!(t.child(0).unwrap(), 4);
        // descending twice: root bit 0 -> L[4 - |T|] = L[0]
        let p = t.child(0).unwrap();
        assert!(p >= t.t_bits().len());
        assert!(t.l_bits().bit(p - t.t_bits().len()));
        assert!(t.child(1).is_err());
    }

    #[test]
    fn single_point_leaf() {
        let t = K2Tree::build(&[Cell::new(5, 3)], 8, 8, 2).unwrap();
        assert_eq!(t.cell_of_leaf(1).unwrap(), Cell::new(5, 3));
        assert_eq!(t.leaf_ordinal(Cell::new(5, 3)).unwrap(), Some(1));
        assert!(t.cell_of_leaf(2).is_err());
    }

    #[test]
    fn non_power_grid_and_bounds() {
        let t = K2Tree::build(&[Cell::new(36, 2)], 37, 3, 2).unwrap();
        assert_eq!(t.side(), 64);
        assert!(t.contains(Cell::new(36, 2)).unwrap());
        assert!(t.contains(Cell::new(37, 0)).is_err());
        assert!(K2Tree::build(&[Cell::new(3, 3)], 3, 3, 2).is_err());
        assert!(K2Tree::build(&[], 3, 3, 1).is_err());
    }

    #[test]
    fn parent_of_first_child_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = random_points(&mut rng, 30, 32, 32);
        let t = K2Tree::build(&pts, 32, 32, 2).unwrap();
        let first_one = t.t_bits().select1(1).unwrap();
        for p in 4..8 {
            let parent = t.parent(p).unwrap();
            assert_eq!(parent.position(), first_one);
            assert!(parent.ordinal < 4);
        }
        assert!(t.parent(3).is_none());
        for p in 4..t.t_bits().len() + t.l_bits().len() {
            let parent = t.parent(p).unwrap();
            assert!(parent.ordinal < 4);
            assert_eq!(t.child(parent.position()).unwrap(), p - p % 4);
        }
    }

    #[test]
    fn matches_boolean_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(n, side, k) in &[(50usize, 64u32, 2u32), (400, 256, 2), (200, 100, 3), (60, 64, 4)] {
            let pts = random_points(&mut rng, n, side, side);
            let t = K2Tree::build(&pts, side, side, k).unwrap();
            let mut matrix = vec![false; (side * side) as usize];
            for p in &pts {
                matrix[(p.y * side + p.x) as usize] = true;
            }
            for y in 0..side {
                for x in 0..side {
                    assert_eq!(t.contains(Cell::new(x, y)).unwrap(), matrix[(y * side + x) as usize]);
                }
            }
            let kk = (k * k) as usize;
            assert_eq!((t.t_bits().len() + t.l_bits().len()) % kk, 0);

            // leaf ordinals follow the levelwise order and invert cell_of_leaf
            let order = levelwise_order(&pts, k, t.side());
            assert_eq!(order.len(), t.count_ones());
            for (i, c) in order.iter().enumerate() {
                assert_eq!(t.leaf_ordinal(*c).unwrap(), Some(i + 1));
                assert_eq!(t.cell_of_leaf(i + 1).unwrap(), *c);
            }

            for _ in 0..100 {
                let r = Rect::new(
                    rng.gen_range(0..side),
                    rng.gen_range(0..side),
                    rng.gen_range(0..side),
                    rng.gen_range(0..side),
                );
                let mut got = t.report_region(&r);
                got.sort();
                let expected: Vec<(Cell, usize)> = order
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| r.contains(**c))
                    .map(|(i, c)| (*c, i + 1))
                    .collect();
                let mut expected = expected;
                expected.sort();
                assert_eq!(got, expected);
            }
        }
    }

    #[test]
    fn report_prunes_disjoint_subtrees() {
        let pts: Vec<Cell> = (0..64).flat_map(|x| [Cell::new(x, 0), Cell::new(x, 63)]).collect();
        let t = K2Tree::build(&pts, 64, 64, 2).unwrap();
        let mut out = Vec::new();
        let visited_small = t.report_region_counted(&Rect::new(0, 0, 1, 1), &mut out);
        assert_eq!(out.len(), 2);
        out.clear();
        let visited_all = t.report_region_counted(&Rect::new(0, 0, 63, 63), &mut out);
        assert_eq!(out.len(), 128);
        assert!(visited_small * 10 < visited_all);
    }

    #[test]
    fn serialization_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = random_points(&mut rng, 80, 100, 37);
        let t = K2Tree::build(&pts, 100, 37, 2).unwrap();
        let mut w = Writer::new();
        t.write(&mut w);
        let buf = w.into_inner();
        assert_eq!(K2Tree::read(&mut Reader::new(&buf)).unwrap(), t);
        assert!(K2Tree::read(&mut Reader::new(&buf[..buf.len() - 1])).is_err());
    }
}
