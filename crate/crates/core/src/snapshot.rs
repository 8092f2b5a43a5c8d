//! Absolute positions of every object at one instant.
//!
//! Occupied cells live in a k²-tree. `perm` lists object identifiers grouped
//! by cell, groups in the order their 1-bits appear in `L`, ascending ids
//! inside a group. `Q` is aligned with `perm`: 1 when more objects of the
//! same cell follow, 0 on the last one. Objects missing at this instant are
//! kept in an absent table with their last known position.

use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::geom::{Cell, Rect};
use crate::k2tree::K2Tree;
use crate::succinct::{bit_width, BitVector, BitVectorBuilder, IntVector};
use crate::ObjectId;

/// Shortcut spacing along permutation cycles.
pub const INVERSE_SAMPLE_RATE: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbsentEntry {
    /// Last position reported before this instant.
    LastSeen { cell: Cell, instant: u32 },
    /// The object has not reported any position yet.
    NeverSeen,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    instant: u32,
    num_objects: u32,
    tree: K2Tree,
    perm: IntVector,
    q: BitVector,
    // objects present at this instant; rank maps an id to its dense slot
    present: BitVector,
    // cycle shortcuts for the inverse of perm
    marks: BitVector,
    back: IntVector,
    absent: Vec<(ObjectId, AbsentEntry)>,
}

impl Snapshot {
    /// Builds a snapshot. Every object id below `num_objects` must appear in
    /// exactly one of `present` and `absent`.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        instant: u32,
        num_objects: u32,
        present: &[(ObjectId, Cell)],
        absent: &[(ObjectId, AbsentEntry)],
        width: u32,
        height: u32,
        k: u32,
    ) -> Result<Self> {
        let mut seen = vec![false; num_objects as usize];
        for &o in present.iter().map(|(o, _)| o).chain(absent.iter().map(|(o, _)| o)) {
            let slot = seen
                .get_mut(o as usize)
                .ok_or_else(|| Error::invalid(format!("object {o} not below object count {num_objects}")))?;
            if *slot {
                return Err(Error::invalid(format!("object {o} listed twice in snapshot")));
            }
            *slot = true;
        }
        if let Some(o) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("object {o} missing from snapshot")));
        }

        let cells: Vec<Cell> = present.iter().map(|(_, c)| *c).collect();
        let tree = K2Tree::build(&cells, width, height, k)?;

        let mut grouped: Vec<(usize, ObjectId)> = Vec::with_capacity(present.len());
        for &(o, c) in present {
            let ord = tree.leaf_ordinal(c)?.expect("every present cell is set in the tree");
            grouped.push((ord, o));
        }
        grouped.sort_unstable();

        let id_width = bit_width(u64::from(num_objects.saturating_sub(1)));
        let mut perm = IntVector::with_width(id_width);
        let mut q = BitVectorBuilder::with_capacity(grouped.len());
        for (i, &(ord, o)) in grouped.iter().enumerate() {
            perm.push(u64::from(o));
            let more = grouped.get(i + 1).is_some_and(|&(next, _)| next == ord);
            q.push(more);
        }
        let present_bits: BitVector = {
            let mut b = vec![false; num_objects as usize];
            for &(o, _) in present {
                b[o as usize] = true;
            }
            b.into_iter().collect()
        };
        let (marks, back) = sample_cycles(&perm, &present_bits);

        let mut absent = absent.to_vec();
        absent.sort_unstable_by_key(|(o, _)| *o);

        Ok(Self {
            instant,
            num_objects,
            tree,
            perm,
            q: q.build(),
            present: present_bits,
            marks,
            back,
            absent,
        })
    }

    pub fn instant(&self) -> u32 {
        self.instant
    }

    pub fn num_objects(&self) -> u32 {
        self.num_objects
    }

    pub fn tree(&self) -> &K2Tree {
        &self.tree
    }

    pub fn q_bits(&self) -> &BitVector {
        &self.q
    }

    pub fn perm(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.perm.iter().map(|o| o as ObjectId)
    }

    pub fn num_present(&self) -> usize {
        self.perm.len()
    }

    pub fn absent_entries(&self) -> &[(ObjectId, AbsentEntry)] {
        &self.absent
    }

    fn check_object(&self, o: ObjectId) -> Result<()> {
        if o >= self.num_objects {
            return Err(Error::NotFound(format!("object {o}")));
        }
        Ok(())
    }

    pub fn is_present(&self, o: ObjectId) -> Result<bool> {
        self.check_object(o)?;
        Ok(self.present.bit(o as usize))
    }

    #[inline]
    fn dense(&self, perm_pos: usize) -> usize {
        self.present.rank1_unchecked(self.perm.get(perm_pos) as usize)
    }

    /// Position in `perm` holding the object with dense slot `d`.
    fn perm_position(&self, d: usize) -> usize {
        let mut j = d;
        let mut jumped = false;
        loop {
            let next = self.dense(j);
            if next == d {
                return j;
            }
            if !jumped && self.marks.bit(j) {
                j = self.back.get(self.marks.rank1_unchecked(j)) as usize;
                jumped = true;
            } else {
                j = next;
            }
        }
    }

    /// First `perm` position of the objects in the `ordinal`-th occupied leaf.
    fn group_start(&self, ordinal: usize) -> usize {
        if ordinal == 1 {
            0
        } else {
            self.q.select0(ordinal - 1).expect("leaf ordinal within Q") + 1
        }
    }

    fn group(&self, ordinal: usize, out: &mut Vec<ObjectId>) {
        let mut p = self.group_start(ordinal);
        loop {
            out.push(self.perm.get(p) as ObjectId);
            if !self.q.bit(p) {
                break;
            }
            p += 1;
        }
    }

    pub fn objects_in_cell(&self, c: Cell) -> Result<Vec<ObjectId>> {
        let mut out = Vec::new();
        if let Some(ord) = self.tree.leaf_ordinal(c)? {
            self.group(ord, &mut out);
        }
        Ok(out)
    }

    /// Cell of a present object, `None` if it is absent at this instant.
    pub fn position_of(&self, o: ObjectId) -> Result<Option<Cell>> {
        if !self.is_present(o)? {
            return Ok(None);
        }
        let d = self.present.rank1_unchecked(o as usize);
        let k = self.perm_position(d);
        // zeros before k close the groups of earlier leaves
        let leaf = k - self.q.rank1_unchecked(k) + 1;
        self.tree.cell_of_leaf(leaf).map(Some)
    }

    pub fn objects_in_region(&self, rect: &Rect) -> Vec<(ObjectId, Cell)> {
        let mut out = Vec::new();
        let mut ids = Vec::new();
        for (cell, ord) in self.tree.report_region(rect) {
            ids.clear();
            self.group(ord, &mut ids);
            out.extend(ids.iter().map(|&o| (o, cell)));
        }
        out
    }

    /// Last known position of an object absent at this instant; `None` if present.
    pub fn absent_info(&self, o: ObjectId) -> Result<Option<AbsentEntry>> {
        if self.is_present(o)? {
            return Ok(None);
        }
        let i = self
            .absent
            .binary_search_by_key(&o, |(id, _)| *id)
            .map_err(|_| Error::corrupt(format!("object {o} neither present nor absent")))?;
        Ok(Some(self.absent[i].1))
    }

    pub fn size_bytes(&self) -> usize {
        4 + 4
            + self.tree.size_bytes()
            + self.perm.size_bytes()
            + self.q.size_bytes()
            + self.present.size_bytes()
            + self.marks.size_bytes()
            + self.back.size_bytes()
            + 8
            + self.absent.len() * 17
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.u32(self.instant);
        w.u32(self.num_objects);
        self.tree.write(w);
        self.perm.write(w);
        self.q.write(w);
        w.u64(self.absent.len() as u64);
        for (o, e) in &self.absent {
            w.u32(*o);
            match e {
                AbsentEntry::LastSeen { cell, instant } => {
                    w.u8(1);
                    w.u32(cell.x);
                    w.u32(cell.y);
                    w.u32(*instant);
                }
                AbsentEntry::NeverSeen => {
                    w.u8(0);
                    w.u32(0);
                    w.u32(0);
                    w.u32(0);
                }
            }
        }
    }

    /// Reads a snapshot; the presence bitmap and inverse shortcuts are rebuilt.
    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let instant = r.u32()?;
        let num_objects = r.u32()?;
        let tree = K2Tree::read(r)?;
        let perm = IntVector::read(r)?;
        let q = BitVector::read(r)?;
        let n_absent = r.len_prefix(17)?;
        let mut absent = Vec::with_capacity(n_absent);
        for _ in 0..n_absent {
            let o = r.u32()?;
            let tag = r.u8()?;
            let (x, y, t) = (r.u32()?, r.u32()?, r.u32()?);
            let e = match tag {
                0 => AbsentEntry::NeverSeen,
                1 => AbsentEntry::LastSeen {
                    cell: Cell::new(x, y),
                    instant: t,
                },
                _ => return Err(Error::format(format!("bad absent tag {tag}"))),
            };
            absent.push((o, e));
        }
        if perm.len() != q.len()
            || q.count_zeros() != tree.count_ones()
            || perm.len() + absent.len() != num_objects as usize
        {
            return Err(Error::format("snapshot sizes inconsistent"));
        }
        let mut b = vec![false; num_objects as usize];
        for o in perm.iter().chain(absent.iter().map(|(o, _)| u64::from(*o))) {
            match b.get_mut(o as usize) {
                Some(slot) if !*slot => *slot = true,
                _ => return Err(Error::format(format!("object {o} duplicated or out of range"))),
            }
        }
        let present: BitVector = {
            let mut p = vec![false; num_objects as usize];
            for o in perm.iter() {
                p[o as usize] = true;
            }
            p.into_iter().collect()
        };
        let (marks, back) = sample_cycles(&perm, &present);
        Ok(Self {
            instant,
            num_objects,
            tree,
            perm,
            q,
            present,
            marks,
            back,
            absent,
        })
    }
}

/// Marks every `INVERSE_SAMPLE_RATE`-th element of each long cycle of the
/// dense permutation `i -> rank(present, perm[i])` and stores, for each mark,
/// the element that many steps behind it.
fn sample_cycles(perm: &IntVector, present: &BitVector) -> (BitVector, IntVector) {
    let m = perm.len();
    let pi = |i: usize| present.rank1_unchecked(perm.get(i) as usize);
    let mut visited = vec![false; m];
    let mut back_of: Vec<Option<usize>> = vec![None; m];
    let mut cycle = Vec::new();
    let t = INVERSE_SAMPLE_RATE;
    for start in 0..m {
        if visited[start] {
            continue;
        }
        cycle.clear();
        let mut j = start;
        while !visited[j] {
            visited[j] = true;
            cycle.push(j);
            j = pi(j);
        }
        let len = cycle.len();
        if len <= t {
            continue;
        }
        for idx in (0..len).step_by(t) {
            back_of[cycle[idx]] = Some(cycle[(idx + len - t) % len]);
        }
    }
    let marks: BitVector = back_of.iter().map(Option::is_some).collect();
    let mut back = IntVector::with_width(bit_width(m.saturating_sub(1) as u64));
    for b in back_of.into_iter().flatten() {
        back.push(b as u64);
    }
    (marks, back)
}
