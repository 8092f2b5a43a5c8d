//! Per-object, per-period movement logs in either representation, read as
//! a sequence of steps in both directions.

use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::movement::{spiral_decode, ABS_REAPPEAR, MOVE_SHIFT, REL_REAPPEAR};
use crate::repair::Grammar;
use crate::scdc::ScdcModel;
use crate::succinct::IntVector;

/// One unit of a log as seen by the queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    /// A move terminal (shifted spiral code) or, in grammar mode, a nonterminal.
    Sym(u64),
    Rel {
        gap: u64,
        code: u64,
    },
    Abs {
        gap: u64,
        x: u32,
        y: u32,
    },
}

impl Step {
    /// Integers of the event form this step stands for at the top level.
    pub fn width(&self) -> u64 {
        match self {
            Step::Sym(_) => 1,
            Step::Rel { .. } => 3,
            Step::Abs { .. } => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ScdcLog {
    pub model: ScdcModel,
    pub bytes: Vec<u8>,
    pub offsets: IntVector,
    pub reappear: IntVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct GractLog {
    pub grammar: Grammar,
    pub c: IntVector,
    pub offsets: IntVector,
    pub reappear: IntVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum LogStore {
    Scdc(ScdcLog),
    Gract(GractLog),
}

/// Span and net displacement of a symbol.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SymMeta {
    pub span: u64,
    pub dx: i64,
    pub dy: i64,
}

fn terminal_meta(s: u64) -> Result<SymMeta> {
    let code = s
        .checked_sub(MOVE_SHIFT)
        .ok_or_else(|| Error::corrupt(format!("reserved codeword {s} used as a move")))?;
    let (dx, dy) = spiral_decode(code);
    Ok(SymMeta { span: 1, dx, dy })
}

impl LogStore {
    fn offsets(&self) -> &IntVector {
        match self {
            LogStore::Scdc(l) => &l.offsets,
            LogStore::Gract(l) => &l.offsets,
        }
    }

    fn reappear(&self) -> &IntVector {
        match self {
            LogStore::Scdc(l) => &l.reappear,
            LogStore::Gract(l) => &l.reappear,
        }
    }

    /// Total length in storage units (bytes or symbols).
    fn data_len(&self) -> usize {
        match self {
            LogStore::Scdc(l) => l.bytes.len(),
            LogStore::Gract(l) => l.c.len(),
        }
    }

    pub fn grammar(&self) -> Option<&Grammar> {
        match self {
            LogStore::Gract(l) => Some(&l.grammar),
            LogStore::Scdc(_) => None,
        }
    }

    pub fn segment(&self, slot: usize) -> (usize, usize) {
        let off = self.offsets();
        (off.get(slot) as usize, off.get(slot + 1) as usize)
    }

    pub fn forward(&self, slot: usize) -> Fwd<'_> {
        let (pos, end) = self.segment(slot);
        Fwd { log: self, pos, end }
    }

    pub fn backward(&self, slot: usize) -> Bwd<'_> {
        let (start, end) = self.segment(slot);
        let dir = partition_point(self.reappear(), end as u64);
        Bwd {
            log: self,
            start,
            end,
            dir,
            pending: None,
        }
    }

    #[inline]
    pub fn meta(&self, s: u64) -> Result<SymMeta> {
        match self {
            LogStore::Scdc(_) => terminal_meta(s),
            LogStore::Gract(l) => {
                let g = &l.grammar;
                if s < u64::from(g.terminal_bound()) {
                    terminal_meta(s)
                } else if s < g.symbol_bound() {
                    let s = s as u32;
                    let (dx, dy) = g.displacement(s);
                    Ok(SymMeta {
                        span: g.span(s),
                        dx,
                        dy,
                    })
                } else {
                    Err(Error::corrupt(format!("symbol {s} outside the grammar")))
                }
            }
        }
    }

    /// Right-hand side of a nonterminal; `None` for terminals.
    #[inline]
    pub fn children(&self, s: u64) -> Option<(u64, u64)> {
        match self {
            LogStore::Scdc(_) => None,
            LogStore::Gract(l) => {
                let s = u32::try_from(s).ok()?;
                l.grammar.children(s).map(|(a, b)| (u64::from(a), u64::from(b)))
            }
        }
    }

    /// Reads one integer at `*pos`, never past `end`.
    fn read_int(&self, pos: &mut usize, end: usize) -> Result<u64> {
        match self {
            LogStore::Scdc(l) => l.model.decode_next(&l.bytes[..end], pos),
            LogStore::Gract(l) => {
                if *pos >= end {
                    return Err(Error::corrupt("log segment ends inside an event"));
                }
                *pos += 1;
                Ok(l.c.get(*pos - 1))
            }
        }
    }

    /// Parses the step starting at `*pos`.
    fn read_step(&self, pos: &mut usize, end: usize) -> Result<Step> {
        let first = self.read_int(pos, end)?;
        match first {
            REL_REAPPEAR => {
                let gap = self.read_int(pos, end)?;
                let code = self
                    .read_int(pos, end)?
                    .checked_sub(MOVE_SHIFT)
                    .ok_or_else(|| Error::corrupt("reappearance code is a reserved codeword"))?;
                Ok(Step::Rel { gap, code })
            }
            ABS_REAPPEAR => {
                let gap = self.read_int(pos, end)?;
                let coord = |v: u64| u32::try_from(v).map_err(|_| Error::corrupt("absolute coordinate overflow"));
                let x = coord(self.read_int(pos, end)?)?;
                let y = coord(self.read_int(pos, end)?)?;
                Ok(Step::Abs { gap, x, y })
            }
            s => Ok(Step::Sym(s)),
        }
    }

    pub fn size_bytes(&self) -> usize {
        match self {
            LogStore::Scdc(l) => 4 + 8 + l.bytes.len() + l.offsets.size_bytes() + l.reappear.size_bytes(),
            LogStore::Gract(l) => l.c.size_bytes() + l.offsets.size_bytes() + l.reappear.size_bytes(),
        }
    }

    pub fn write(&self, w: &mut Writer) {
        match self {
            LogStore::Scdc(l) => {
                w.u32(l.model.stoppers());
                w.u64(l.bytes.len() as u64);
                w.bytes(&l.bytes);
                l.offsets.write(w);
                l.reappear.write(w);
            }
            LogStore::Gract(l) => {
                l.c.write(w);
                l.offsets.write(w);
                l.reappear.write(w);
            }
        }
    }

    pub fn read_scdc(r: &mut Reader<'_>) -> Result<Self> {
        let model = ScdcModel::new(r.u32()?).map_err(|e| Error::format(e.to_string()))?;
        let n = r.len_prefix(1)?;
        let bytes = r.bytes(n)?.to_vec();
        let offsets = IntVector::read(r)?;
        let reappear = IntVector::read(r)?;
        Ok(LogStore::Scdc(ScdcLog {
            model,
            bytes,
            offsets,
            reappear,
        }))
    }

    pub fn read_gract(r: &mut Reader<'_>, grammar: Grammar) -> Result<Self> {
        let c = IntVector::read(r)?;
        let offsets = IntVector::read(r)?;
        let reappear = IntVector::read(r)?;
        Ok(LogStore::Gract(GractLog {
            grammar,
            c,
            offsets,
            reappear,
        }))
    }

    /// Structural checks after loading.
    pub fn validate(&self, slots: usize) -> Result<()> {
        let off = self.offsets();
        if off.len() != slots + 1 || off.get(0) != 0 {
            return Err(Error::format("log offset table has the wrong size"));
        }
        let mut prev = 0;
        for v in off.iter() {
            if v < prev {
                return Err(Error::format("log offsets are not monotone"));
            }
            prev = v;
        }
        if prev != self.data_len() as u64 {
            return Err(Error::format("log offsets do not cover the data"));
        }
        let mut prev = None;
        for v in self.reappear().iter() {
            if prev.is_some_and(|p| v <= p) || v >= self.data_len() as u64 {
                return Err(Error::format("reappearance directory is malformed"));
            }
            prev = Some(v);
        }
        Ok(())
    }
}

/// First index of the sorted `v` holding a value `>= x`.
fn partition_point(v: &IntVector, x: u64) -> usize {
    let (mut lo, mut hi) = (0, v.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if v.get(mid) < x {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

pub(crate) struct Fwd<'a> {
    log: &'a LogStore,
    pos: usize,
    end: usize,
}

impl Fwd<'_> {
    pub fn next_step(&mut self) -> Result<Option<Step>> {
        if self.pos >= self.end {
            return Ok(None);
        }
        self.log.read_step(&mut self.pos, self.end).map(Some)
    }
}

/// Reads a segment from its end. Moves are found by stepping back one
/// codeword; reappearance events, whose payloads cannot be told apart
/// from moves when read backwards, are located through the directory of
/// their start offsets.
pub(crate) struct Bwd<'a> {
    log: &'a LogStore,
    start: usize,
    end: usize,
    // directory entries below `dir` start before `end`
    dir: usize,
    // nearest reappearance before `end`: (start, end, step)
    pending: Option<(usize, usize, Step)>,
}

impl Bwd<'_> {
    pub fn next_step(&mut self) -> Result<Option<Step>> {
        if self.end <= self.start {
            return Ok(None);
        }
        if self.pending.is_none() && self.dir > 0 {
            let r = self.log.reappear().get(self.dir - 1) as usize;
            if r >= self.start {
                let mut p = r;
                let step = self.log.read_step(&mut p, self.end)?;
                self.pending = Some((r, p, step));
            }
        }
        if let Some((r, r_end, step)) = self.pending {
            if r_end == self.end {
                self.end = r;
                self.dir -= 1;
                self.pending = None;
                return Ok(Some(step));
            }
        }
        let s = match self.log {
            LogStore::Scdc(l) => {
                let p = l.model.prev_start(&l.bytes, self.start, self.end);
                let mut q = p;
                let v = l.model.decode_next(&l.bytes[..self.end], &mut q)?;
                self.end = p;
                v
            }
            LogStore::Gract(l) => {
                self.end -= 1;
                l.c.get(self.end)
            }
        };
        if s < MOVE_SHIFT {
            return Err(Error::corrupt("reappearance marker missing from the directory"));
        }
        Ok(Some(Step::Sym(s)))
    }
}
