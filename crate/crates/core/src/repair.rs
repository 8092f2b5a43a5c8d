//! Re-Pair grammar compression with rules enriched for trajectory queries.
//!
//! Compression repeatedly replaces the most frequent adjacent pair (at least
//! two non-overlapping occurrences, ties to the smallest `(left, right)`)
//! with a fresh nonterminal. Pairs never cross stream boundaries nor touch a
//! locked position. Nonterminal `i` is numbered `terminal_bound + i`, so a
//! rule only references terminals and smaller nonterminals.
//!
//! Every rule is enriched with the instants it spans, its net displacement
//! and the bounding rectangle of the cells it visits relative to its start.
//! Terminals `>= MOVE_SHIFT` are spiral moves; 0 and 1 are reserved event
//! markers and never occur inside rules.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap};

use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::geom::RelRect;
use crate::movement::{spiral_decode, MOVE_SHIFT};
use crate::succinct::{bit_width, unzigzag, zigzag, DacSequence, IntVector, DEFAULT_CHUNK_WIDTH};

pub type Symbol = u32;

const NONE: u32 = u32::MAX;
const DEAD: u32 = u32::MAX;

/// Output of [`repair_compress`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RePairOutput {
    pub terminal_bound: Symbol,
    pub rules: Vec<(Symbol, Symbol)>,
    pub sequences: Vec<Vec<Symbol>>,
}

#[derive(Default)]
struct PairRec {
    // current adjacent occurrences, overlapping ones included
    adj: u32,
    // upper bound on the non-overlapping count; exact when left != right
    key: u32,
    // candidate left positions, possibly stale
    occ: Vec<u32>,
}

struct State {
    seq: Vec<u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
    pairs: HashMap<(u32, u32), PairRec>,
    queue: BTreeSet<(Reverse<u32>, u32, u32)>,
}

impl State {
    fn requeue(&mut self, pair: (u32, u32), old: u32, new: u32) {
        if old == new {
            return;
        }
        if old >= 2 {
            self.queue.remove(&(Reverse(old), pair.0, pair.1));
        }
        if new >= 2 {
            self.queue.insert((Reverse(new), pair.0, pair.1));
        }
    }

    fn inc(&mut self, pair: (u32, u32), pos: u32) {
        let rec = self.pairs.entry(pair).or_default();
        let old = rec.key;
        rec.adj += 1;
        rec.key += 1;
        rec.occ.push(pos);
        let new = rec.key;
        self.requeue(pair, old, new);
    }

    fn dec(&mut self, pair: (u32, u32)) {
        if let Some(rec) = self.pairs.get_mut(&pair) {
            let old = rec.key;
            rec.adj -= 1;
            rec.key = rec.key.min(rec.adj);
            let new = rec.key;
            self.requeue(pair, old, new);
        }
    }

    fn is_occurrence(&self, i: u32, pair: (u32, u32)) -> bool {
        let i = i as usize;
        self.seq[i] == pair.0 && self.next[i] != NONE && self.seq[self.next[i] as usize] == pair.1
    }

    /// Valid occurrences of `pair`, sorted, and the greedy non-overlapping subset.
    fn occurrences(&mut self, pair: (u32, u32)) -> (Vec<u32>, Vec<u32>) {
        let mut occ = std::mem::take(&mut self.pairs.get_mut(&pair).unwrap().occ);
        occ.retain(|&i| self.is_occurrence(i, pair));
        occ.sort_unstable();
        occ.dedup();
        let mut chosen = Vec::with_capacity(occ.len());
        let mut last_right = NONE;
        for &i in &occ {
            if i == last_right {
                continue;
            }
            chosen.push(i);
            last_right = self.next[i as usize];
        }
        (occ, chosen)
    }
}

/// Compresses `streams`; `locked[s][i]` excludes position `i` of stream `s`
/// from pairing. `locked` may be empty (nothing locked).
pub fn repair_compress(streams: &[Vec<Symbol>], locked: &[Vec<bool>]) -> Result<RePairOutput> {
    if !locked.is_empty() && locked.len() != streams.len() {
        return Err(Error::invalid("lock mask count differs from stream count"));
    }
    let total: usize = streams.iter().map(Vec::len).sum();
    if total >= NONE as usize {
        return Err(Error::invalid("too many symbols for 32-bit positions"));
    }
    let max_terminal = streams.iter().flatten().copied().max().unwrap_or(0);
    if max_terminal >= NONE / 2 {
        return Err(Error::invalid("terminal value too large"));
    }
    let terminal_bound = max_terminal + 1;

    let mut seq = Vec::with_capacity(total);
    let mut next = vec![NONE; total];
    let mut prev = vec![NONE; total];
    let mut ranges = Vec::with_capacity(streams.len());
    for (s, stream) in streams.iter().enumerate() {
        let mask = locked.get(s);
        if let Some(m) = mask {
            if m.len() != stream.len() {
                return Err(Error::invalid(format!("lock mask of stream {s} has wrong length")));
            }
        }
        let start = seq.len();
        seq.extend_from_slice(stream);
        let is_locked = |i: usize| mask.is_some_and(|m| m[i]);
        for i in 1..stream.len() {
            if !is_locked(i - 1) && !is_locked(i) {
                next[start + i - 1] = (start + i) as u32;
                prev[start + i] = (start + i - 1) as u32;
            }
        }
        ranges.push(start..seq.len());
    }

    let mut st = State {
        seq,
        next,
        prev,
        pairs: HashMap::new(),
        queue: BTreeSet::new(),
    };
    for i in 0..total {
        let n = st.next[i];
        if n != NONE {
            let pair = (st.seq[i], st.seq[n as usize]);
            let rec = st.pairs.entry(pair).or_default();
            rec.adj += 1;
            rec.key += 1;
            rec.occ.push(i as u32);
        }
    }
    let initial: Vec<_> = st
        .pairs
        .iter()
        .filter(|(_, r)| r.key >= 2)
        .map(|(&(a, b), r)| (Reverse(r.key), a, b))
        .collect();
    st.queue.extend(initial);

    let mut rules: Vec<(Symbol, Symbol)> = Vec::new();
    while let Some(&(Reverse(key), a, b)) = st.queue.first() {
        let pair = (a, b);
        let (occ, chosen) = st.occurrences(pair);
        let exact = chosen.len() as u32;
        if exact < key {
            // runs of equal symbols: the overlapping count overestimated
            debug_assert_eq!(a, b);
            let rec = st.pairs.get_mut(&pair).unwrap();
            rec.occ = occ;
            rec.key = exact;
            st.requeue(pair, key, exact);
            continue;
        }
        debug_assert_eq!(exact, key);
        st.queue.remove(&(Reverse(key), a, b));
        st.pairs.remove(&pair);
        let x = terminal_bound
            .checked_add(rules.len() as u32)
            .filter(|&x| x < NONE)
            .ok_or_else(|| Error::invalid("nonterminal space exhausted"))?;
        rules.push(pair);
        for i in chosen {
            let j = st.next[i as usize];
            let p = st.prev[i as usize];
            let n = st.next[j as usize];
            if p != NONE {
                st.dec((st.seq[p as usize], a));
            }
            if n != NONE {
                st.dec((b, st.seq[n as usize]));
            }
            st.seq[i as usize] = x;
            st.seq[j as usize] = DEAD;
            st.next[i as usize] = n;
            if n != NONE {
                st.prev[n as usize] = i;
            }
            if p != NONE {
                st.inc((st.seq[p as usize], x), p);
            }
            if n != NONE {
                st.inc((x, st.seq[n as usize]), i);
            }
        }
    }

    let sequences = ranges
        .into_iter()
        .map(|r| st.seq[r].iter().copied().filter(|&s| s != DEAD).collect())
        .collect();
    Ok(RePairOutput {
        terminal_bound,
        rules,
        sequences,
    })
}

/// Metadata of a movement symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuleMeta {
    pub span: u64,
    pub dx: i64,
    pub dy: i64,
    pub mbr: RelRect,
}

impl RuleMeta {
    /// Metadata of a single move terminal.
    pub fn of_terminal(t: Symbol) -> Option<RuleMeta> {
        let code = u64::from(t).checked_sub(MOVE_SHIFT)?;
        let (dx, dy) = spiral_decode(code);
        Some(RuleMeta {
            span: 1,
            dx,
            dy,
            mbr: RelRect::around(dx, dy),
        })
    }

    /// Metadata of the concatenation `self` then `next`.
    pub fn then(&self, next: &RuleMeta) -> RuleMeta {
        RuleMeta {
            span: self.span + next.span,
            dx: self.dx + next.dx,
            dy: self.dy + next.dy,
            mbr: self.mbr.union(&next.mbr.translate(self.dx, self.dy)),
        }
    }
}

/// Re-Pair rules with DAC-encoded metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    terminal_bound: Symbol,
    rules: Vec<(Symbol, Symbol)>,
    spans: DacSequence,
    // dx, dy, x1, y1, x2, y2 per rule, zigzagged
    coords: DacSequence,
}

impl Grammar {
    /// Computes metadata bottom-up and stores it in two DAC sequences.
    pub fn enrich(terminal_bound: Symbol, rules: Vec<(Symbol, Symbol)>) -> Result<Self> {
        Self::enrich_with(terminal_bound, rules, DEFAULT_CHUNK_WIDTH, DEFAULT_CHUNK_WIDTH)
    }

    pub fn enrich_with(
        terminal_bound: Symbol,
        rules: Vec<(Symbol, Symbol)>,
        span_width: u32,
        coord_width: u32,
    ) -> Result<Self> {
        let mut metas: Vec<RuleMeta> = Vec::with_capacity(rules.len());
        for (i, &(l, r)) in rules.iter().enumerate() {
            let id = terminal_bound as usize + i;
            let meta_of = |s: Symbol| -> Result<RuleMeta> {
                if (s as usize) >= id {
                    return Err(Error::invalid(format!(
                        "rule {id} references symbol {s} not defined before it"
                    )));
                }
                if s < terminal_bound {
                    RuleMeta::of_terminal(s)
                        .ok_or_else(|| Error::invalid(format!("rule {id} contains reserved event terminal {s}")))
                } else {
                    Ok(metas[(s - terminal_bound) as usize])
                }
            };
            let m = meta_of(l)?.then(&meta_of(r)?);
            metas.push(m);
        }
        let spans: Vec<u64> = metas.iter().map(|m| m.span).collect();
        let coords: Vec<u64> = metas
            .iter()
            .flat_map(|m| [m.dx, m.dy, m.mbr.x1, m.mbr.y1, m.mbr.x2, m.mbr.y2])
            .map(zigzag)
            .collect();
        Ok(Self {
            terminal_bound,
            rules,
            spans: DacSequence::encode(&spans, span_width)?,
            coords: DacSequence::encode(&coords, coord_width)?,
        })
    }

    pub fn terminal_bound(&self) -> Symbol {
        self.terminal_bound
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn rules(&self) -> &[(Symbol, Symbol)] {
        &self.rules
    }

    pub fn is_terminal(&self, s: Symbol) -> bool {
        s < self.terminal_bound
    }

    pub fn symbol_bound(&self) -> u64 {
        u64::from(self.terminal_bound) + self.rules.len() as u64
    }

    /// Right-hand side of a nonterminal.
    #[inline]
    pub fn children(&self, s: Symbol) -> Option<(Symbol, Symbol)> {
        s.checked_sub(self.terminal_bound)
            .and_then(|i| self.rules.get(i as usize).copied())
    }

    /// Instants covered by a nonterminal (read from the DAC).
    #[inline]
    pub fn span(&self, s: Symbol) -> u64 {
        self.spans
            .access((s - self.terminal_bound) as usize)
            .expect("nonterminal in range")
    }

    #[inline]
    pub fn displacement(&self, s: Symbol) -> (i64, i64) {
        let i = (s - self.terminal_bound) as usize * 6;
        (
            unzigzag(self.coords.access(i).expect("nonterminal in range")),
            unzigzag(self.coords.access(i + 1).expect("nonterminal in range")),
        )
    }

    #[inline]
    pub fn mbr(&self, s: Symbol) -> RelRect {
        let i = (s - self.terminal_bound) as usize * 6;
        let at = |j| unzigzag(self.coords.access(i + j).expect("nonterminal in range"));
        RelRect {
            x1: at(2),
            y1: at(3),
            x2: at(4),
            y2: at(5),
        }
    }

    /// Metadata without expanding. `Ok(None)` for the reserved event
    /// terminals, an error for symbols outside the grammar.
    pub fn rule_meta(&self, s: Symbol) -> Result<Option<RuleMeta>> {
        if u64::from(s) >= self.symbol_bound() {
            return Err(Error::NotFound(format!("symbol {s}")));
        }
        if self.is_terminal(s) {
            return Ok(RuleMeta::of_terminal(s));
        }
        let (dx, dy) = self.displacement(s);
        Ok(Some(RuleMeta {
            span: self.span(s),
            dx,
            dy,
            mbr: self.mbr(s),
        }))
    }

    /// Full terminal expansion of a symbol.
    pub fn expand(&self, s: Symbol) -> Result<Vec<Symbol>> {
        if u64::from(s) >= self.symbol_bound() {
            return Err(Error::NotFound(format!("symbol {s}")));
        }
        let mut out = Vec::new();
        self.expand_into(s, &mut out);
        Ok(out)
    }

    pub fn expand_into(&self, s: Symbol, out: &mut Vec<Symbol>) {
        let mut stack = vec![s];
        while let Some(s) = stack.pop() {
            match self.children(s) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(s),
            }
        }
    }

    pub fn size_bytes(&self) -> usize {
        let width = bit_width(self.symbol_bound().saturating_sub(1)) as usize;
        4 + 9 + (2 * self.rules.len() * width).div_ceil(64) * 8 + self.spans.size_bytes() + self.coords.size_bytes()
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.u32(self.terminal_bound);
        let width = bit_width(self.symbol_bound().saturating_sub(1));
        let mut packed = IntVector::with_width(width);
        for &(l, r) in &self.rules {
            packed.push(u64::from(l));
            packed.push(u64::from(r));
        }
        packed.write(w);
        self.spans.write(w);
        self.coords.write(w);
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let terminal_bound = r.u32()?;
        let packed = IntVector::read(r)?;
        if packed.len() % 2 != 0 {
            return Err(Error::format("odd rule symbol count"));
        }
        let mut rules = Vec::with_capacity(packed.len() / 2);
        for i in 0..packed.len() / 2 {
            let (a, b) = (packed.get(2 * i), packed.get(2 * i + 1));
            let id = u64::from(terminal_bound) + i as u64;
            if a >= id || b >= id {
                return Err(Error::format(format!("rule {id} is not acyclic")));
            }
            rules.push((a as Symbol, b as Symbol));
        }
        let spans = DacSequence::read(r)?;
        let coords = DacSequence::read(r)?;
        if spans.len() != rules.len() || coords.len() != 6 * rules.len() {
            return Err(Error::format("grammar metadata size mismatch"));
        }
        Ok(Self {
            terminal_bound,
            rules,
            spans,
            coords,
        })
    }
}
