//! The four queries over compressed logs.

use std::ops::AddAssign;

use super::log::{LogStore, Step};
use super::TrajectoryIndex;
use crate::error::{check_instant, check_interval, check_object, check_rect, Error, Result};
use crate::geom::{Cell, Rect, RelRect};
use crate::movement::spiral_decode;
use crate::snapshot::AbsentEntry;
use crate::ObjectId;

/// Switches for the optional parts of query evaluation. Answers never
/// depend on them; only the work done does.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryOptions {
    /// Skip rules whose bounding rectangle misses the query region.
    pub mbr_pruning: bool,
    /// Drop candidates that cannot reach the region at full speed.
    pub reach_pruning: bool,
    /// Walk logs backward from the next snapshot when it is nearer.
    pub allow_backward: bool,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self {
            mbr_pruning: true,
            reach_pruning: true,
            allow_backward: true,
        }
    }
}

impl QueryOptions {
    pub fn unpruned() -> Self {
        Self {
            mbr_pruning: false,
            reach_pruning: false,
            ..Self::default()
        }
    }

    pub fn forward_only() -> Self {
        Self {
            allow_backward: false,
            ..Self::default()
        }
    }
}

/// Work counters of a single query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct QueryStats {
    /// Log symbols read, top-level and inside expanded rules.
    pub symbols_processed: u64,
    /// Nonterminals opened.
    pub rules_expanded: u64,
    /// Objects tracked through their logs.
    pub candidates: u64,
    /// Candidates dropped by a pruning test.
    pub discarded: u64,
}

impl AddAssign for QueryStats {
    fn add_assign(&mut self, o: Self) {
        self.symbols_processed += o.symbols_processed;
        self.rules_expanded += o.rules_expanded;
        self.candidates += o.candidates;
        self.discarded += o.discarded;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prune {
    Reach,
    Mbr,
}

/// What happened to a time-slice candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Inside(Cell),
    Outside(Cell),
    Absent,
    /// Dropped while the log cursor stood at `instant`.
    Pruned {
        instant: u64,
        by: Prune,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CandidateTrace {
    pub object: ObjectId,
    pub outcome: Outcome,
}

/// Rows of a trajectory answer: every instant of the range with the cell, if any.
pub type Track = Vec<(u32, Option<Cell>)>;

/// Candidate-level account of a time-slice evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceTrace {
    /// Instant of the snapshot the evaluation started from.
    pub anchor: u32,
    pub backward: bool,
    pub candidates: Vec<CandidateTrace>,
}

fn shift(c: Cell, dx: i64, dy: i64) -> Result<Cell> {
    c.offset(dx, dy)
        .ok_or_else(|| Error::corrupt(format!("log moves an object from {c:?} off the grid")))
}

fn known(pos: Option<Cell>) -> Result<Cell> {
    pos.ok_or_else(|| Error::corrupt("move logged for an object with no known position"))
}

fn classify(rect: &Rect, c: Cell) -> Outcome {
    if rect.contains(c) {
        Outcome::Inside(c)
    } else {
        Outcome::Outside(c)
    }
}

impl TrajectoryIndex {
    fn period_of(&self, t: u32) -> (usize, u64) {
        let i = (t / self.header.period) as usize;
        (i, i as u64 * u64::from(self.header.period))
    }

    /// Whether `t` is evaluated from the following snapshot.
    fn goes_backward(&self, t: u32, opts: &QueryOptions) -> bool {
        let (i, is) = self.period_of(t);
        let next = is + u64::from(self.header.period);
        opts.allow_backward && i + 1 < self.snapshots.len() && next - u64::from(t) < u64::from(t) - is
    }

    fn rule_mbr(&self, s: u64) -> Option<RelRect> {
        match &self.log {
            LogStore::Gract(l) => {
                let g = &l.grammar;
                (s >= u64::from(g.terminal_bound()) && s < g.symbol_bound()).then(|| g.mbr(s as u32))
            }
            LogStore::Scdc(_) => None,
        }
    }

    /// Position at `t` inside symbol `sym`, which starts at `cur` in `pos`
    /// and satisfies `cur < t <= cur + span`.
    fn descend_to(&self, mut sym: u64, mut cur: u64, mut pos: Cell, t: u64, stats: &mut QueryStats) -> Result<Cell> {
        loop {
            match self.log.children(sym) {
                None => {
                    let m = self.log.meta(sym)?;
                    return shift(pos, m.dx, m.dy);
                }
                Some((l, r)) => {
                    stats.rules_expanded += 1;
                    stats.symbols_processed += 1;
                    let ml = self.log.meta(l)?;
                    let mid = cur + ml.span;
                    if mid == t {
                        return shift(pos, ml.dx, ml.dy);
                    }
                    if mid > t {
                        sym = l;
                    } else {
                        stats.symbols_processed += 1;
                        pos = shift(pos, ml.dx, ml.dy)?;
                        cur = mid;
                        sym = r;
                    }
                }
            }
        }
    }

    /// Calls `f(instant, cell)` at every logged position of period `i`.
    pub(crate) fn replay_period(&self, o: ObjectId, i: usize, mut f: impl FnMut(u64, Cell)) -> Result<()> {
        let snap = &self.snapshots[i];
        let mut pos = snap.position_of(o)?;
        let mut cur = u64::from(snap.instant());
        let mut fwd = self.log.forward(self.slot(o, i));
        let mut stack = Vec::new();
        while let Some(step) = fwd.next_step()? {
            match step {
                Step::Sym(s) => {
                    let mut p = known(pos)?;
                    stack.push(s);
                    while let Some(x) = stack.pop() {
                        match self.log.children(x) {
                            Some((l, r)) => {
                                stack.push(r);
                                stack.push(l);
                            }
                            None => {
                                let m = self.log.meta(x)?;
                                p = shift(p, m.dx, m.dy)?;
                                cur += 1;
                                f(cur, p);
                            }
                        }
                    }
                    pos = Some(p);
                }
                Step::Rel { gap, code } => {
                    let (dx, dy) = spiral_decode(code);
                    let p = shift(known(pos)?, dx, dy)?;
                    cur += gap + 1;
                    f(cur, p);
                    pos = Some(p);
                }
                Step::Abs { gap, x, y } => {
                    cur += gap + 1;
                    f(cur, Cell::new(x, y));
                    pos = Some(Cell::new(x, y));
                }
            }
        }
        Ok(())
    }

    pub fn position(&self, o: ObjectId, t: u32) -> Result<Option<Cell>> {
        self.position_with(o, t, &QueryOptions::default()).map(|r| r.0)
    }

    pub fn position_with(&self, o: ObjectId, t: u32, opts: &QueryOptions) -> Result<(Option<Cell>, QueryStats)> {
        check_object(o, self.header.num_objects)?;
        check_instant(t, self.header.num_instants)?;
        let mut stats = QueryStats::default();
        let (i, is) = self.period_of(t);
        let t = u64::from(t);
        let res = if t == is {
            self.snapshots[i].position_of(o)?
        } else if self.goes_backward(t as u32, opts) {
            self.position_backward(o, i, t, &mut stats)?
        } else {
            self.position_forward(o, i, t, &mut stats)?
        };
        Ok((res, stats))
    }

    fn position_forward(&self, o: ObjectId, i: usize, t: u64, stats: &mut QueryStats) -> Result<Option<Cell>> {
        let snap = &self.snapshots[i];
        let mut pos = snap.position_of(o)?;
        let mut cur = u64::from(snap.instant());
        let mut fwd = self.log.forward(self.slot(o, i));
        while let Some(step) = fwd.next_step()? {
            stats.symbols_processed += step.width();
            match step {
                Step::Sym(s) => {
                    let p = known(pos)?;
                    let m = self.log.meta(s)?;
                    let end = cur + m.span;
                    if end < t {
                        pos = Some(shift(p, m.dx, m.dy)?);
                        cur = end;
                    } else if end == t {
                        return shift(p, m.dx, m.dy).map(Some);
                    } else {
                        return self.descend_to(s, cur, p, t, stats).map(Some);
                    }
                }
                Step::Rel { gap, code } => {
                    cur += gap + 1;
                    if cur > t {
                        return Ok(None);
                    }
                    let (dx, dy) = spiral_decode(code);
                    pos = Some(shift(known(pos)?, dx, dy)?);
                }
                Step::Abs { gap, x, y } => {
                    cur += gap + 1;
                    if cur > t {
                        return Ok(None);
                    }
                    pos = Some(Cell::new(x, y));
                }
            }
            if cur == t {
                return Ok(pos);
            }
        }
        Ok(None)
    }

    /// State at the end of period `i`'s log, read from snapshot `i + 1`:
    /// the instant of the last logged position and that position.
    fn backward_anchor(&self, o: ObjectId, i: usize) -> Result<Option<(u64, Cell)>> {
        let next = &self.snapshots[i + 1];
        if let Some(c) = next.position_of(o)? {
            return Ok(Some((u64::from(next.instant()), c)));
        }
        let is = u64::from(self.snapshots[i].instant());
        Ok(match next.absent_info(o)? {
            Some(AbsentEntry::LastSeen { cell, instant }) if u64::from(instant) > is => {
                Some((u64::from(instant), cell))
            }
            _ => None,
        })
    }

    fn position_backward(&self, o: ObjectId, i: usize, t: u64, stats: &mut QueryStats) -> Result<Option<Cell>> {
        let Some((mut cur, mut pos)) = self.backward_anchor(o, i)? else {
            return Ok(None);
        };
        if t >= cur {
            return Ok((t == cur).then_some(pos));
        }
        let mut bwd = self.log.backward(self.slot(o, i));
        while let Some(step) = bwd.next_step()? {
            stats.symbols_processed += step.width();
            match step {
                Step::Sym(s) => {
                    let m = self.log.meta(s)?;
                    let start = cur
                        .checked_sub(m.span)
                        .ok_or_else(|| Error::corrupt("log runs past its snapshot"))?;
                    let spos = shift(pos, -m.dx, -m.dy)?;
                    if start < t {
                        return self.descend_to(s, start, spos, t, stats).map(Some);
                    }
                    cur = start;
                    pos = spos;
                }
                Step::Rel { gap, code } => {
                    let start = cur
                        .checked_sub(gap + 1)
                        .ok_or_else(|| Error::corrupt("log runs past its snapshot"))?;
                    if start < t {
                        return Ok(None);
                    }
                    let (dx, dy) = spiral_decode(code);
                    cur = start;
                    pos = shift(pos, -dx, -dy)?;
                }
                Step::Abs { .. } => return Ok(None),
            }
            if cur == t {
                return Ok(Some(pos));
            }
        }
        Ok(None)
    }

    pub fn trajectory(&self, o: ObjectId, ts: u32, te: u32) -> Result<Track> {
        self.trajectory_with(o, ts, te).map(|r| r.0)
    }

    /// Positions at every instant of `[ts, te]`, walking forward.
    pub fn trajectory_with(&self, o: ObjectId, ts: u32, te: u32) -> Result<(Track, QueryStats)> {
        check_object(o, self.header.num_objects)?;
        check_interval(ts, te, self.header.num_instants)?;
        let mut stats = QueryStats::default();
        let mut out: Vec<(u32, Option<Cell>)> = (ts..=te).map(|t| (t, None)).collect();
        let (ts64, te64) = (u64::from(ts), u64::from(te));
        let period = u64::from(self.header.period);
        let mut stack = Vec::new();
        for i in self.period_of(ts).0..=self.period_of(te).0 {
            let snap = &self.snapshots[i];
            let is = u64::from(snap.instant());
            let b = te64.min(is + period - 1);
            let mut pos = snap.position_of(o)?;
            let mut cur = is;
            let mut record = |t: u64, c: Cell| {
                if (ts64..=b).contains(&t) {
                    out[(t - ts64) as usize].1 = Some(c);
                }
            };
            if let Some(c) = pos {
                record(is, c);
            }
            let mut fwd = self.log.forward(self.slot(o, i));
            while cur < b {
                let Some(step) = fwd.next_step()? else { break };
                stats.symbols_processed += step.width();
                match step {
                    Step::Sym(s) => {
                        let mut p = known(pos)?;
                        stack.clear();
                        stack.push(s);
                        while let Some(x) = stack.pop() {
                            if cur >= b {
                                break;
                            }
                            let m = self.log.meta(x)?;
                            let end = cur + m.span;
                            if end <= ts64 || m.span == 1 {
                                p = shift(p, m.dx, m.dy)?;
                                cur = end;
                                record(cur, p);
                            } else if let Some((l, r)) = self.log.children(x) {
                                stats.rules_expanded += 1;
                                stats.symbols_processed += 2;
                                stack.push(r);
                                stack.push(l);
                            } else {
                                return Err(Error::corrupt("terminal with a span above one"));
                            }
                        }
                        pos = Some(p);
                    }
                    Step::Rel { gap, code } => {
                        let (dx, dy) = spiral_decode(code);
                        let p = shift(known(pos)?, dx, dy)?;
                        cur += gap + 1;
                        record(cur, p);
                        pos = Some(p);
                    }
                    Step::Abs { gap, x, y } => {
                        cur += gap + 1;
                        record(cur, Cell::new(x, y));
                        pos = Some(Cell::new(x, y));
                    }
                }
            }
        }
        Ok((out, stats))
    }

    pub fn time_slice(&self, rect: &Rect, t: u32) -> Result<Vec<(ObjectId, Cell)>> {
        self.time_slice_with(rect, t, &QueryOptions::default()).map(|r| r.0)
    }

    /// Objects inside `rect` at `t` with their cells, ascending by object.
    pub fn time_slice_with(
        &self,
        rect: &Rect,
        t: u32,
        opts: &QueryOptions,
    ) -> Result<(Vec<(ObjectId, Cell)>, QueryStats)> {
        let mut stats = QueryStats::default();
        let trace = self.slice_trace(rect, t, opts, &mut stats)?;
        let mut out: Vec<(ObjectId, Cell)> = trace
            .candidates
            .iter()
            .filter_map(|c| match c.outcome {
                Outcome::Inside(cell) => Some((c.object, cell)),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        Ok((out, stats))
    }

    /// Time-slice evaluation reported per candidate.
    pub fn explain_time_slice(&self, rect: &Rect, t: u32, opts: &QueryOptions) -> Result<SliceTrace> {
        let mut stats = QueryStats::default();
        let mut trace = self.slice_trace(rect, t, opts, &mut stats)?;
        trace.candidates.sort_unstable_by_key(|c| c.object);
        Ok(trace)
    }

    fn slice_trace(&self, rect: &Rect, t: u32, opts: &QueryOptions, stats: &mut QueryStats) -> Result<SliceTrace> {
        check_instant(t, self.header.num_instants)?;
        check_rect(rect, self.header.width, self.header.height)?;
        let (i, is) = self.period_of(t);
        let snap = &self.snapshots[i];
        let t64 = u64::from(t);
        let mut candidates = Vec::new();
        let backward = t64 != is && self.goes_backward(t, opts);
        if t64 == is {
            for (o, c) in snap.objects_in_region(rect) {
                candidates.push(CandidateTrace {
                    object: o,
                    outcome: Outcome::Inside(c),
                });
            }
        } else if backward {
            let next = &self.snapshots[i + 1];
            let e = u64::from(next.instant());
            let region = self.expand_region(rect, e - t64);
            let mut starts: Vec<(ObjectId, u64, Cell)> = next
                .objects_in_region(&region)
                .into_iter()
                .map(|(o, c)| (o, e, c))
                .collect();
            for &(o, entry) in next.absent_entries() {
                if let AbsentEntry::LastSeen { cell, instant } = entry {
                    let instant = u64::from(instant);
                    if instant > is && instant >= t64 {
                        starts.push((o, instant, cell));
                    }
                }
            }
            for (o, cur, pos) in starts {
                let outcome = self.slice_backward(o, i, rect, t64, cur, pos, opts, stats)?;
                candidates.push(CandidateTrace { object: o, outcome });
            }
        } else {
            let region = self.expand_region(rect, t64 - is);
            let mut starts: Vec<(ObjectId, Option<Cell>)> = snap
                .objects_in_region(&region)
                .into_iter()
                .map(|(o, c)| (o, Some(c)))
                .collect();
            // an absolute reappearance can land anywhere
            starts.extend(snap.absent_entries().iter().map(|&(o, _)| (o, None)));
            for (o, pos) in starts {
                let outcome = self.slice_forward(o, i, rect, t64, pos, opts, stats)?;
                candidates.push(CandidateTrace { object: o, outcome });
            }
        }
        stats.candidates += candidates.len() as u64;
        stats.discarded += candidates
            .iter()
            .filter(|c| matches!(c.outcome, Outcome::Pruned { .. }))
            .count() as u64;
        Ok(SliceTrace {
            anchor: if backward {
                snap.instant() + self.header.period
            } else {
                snap.instant()
            },
            backward,
            candidates,
        })
    }

    fn unreachable(&self, rect: &Rect, p: Cell, dt: u64) -> bool {
        rect.chebyshev_to(p) > self.header.v_max.saturating_mul(dt)
    }

    #[allow(clippy::too_many_arguments)]
    fn slice_forward(
        &self,
        o: ObjectId,
        i: usize,
        rect: &Rect,
        t: u64,
        mut pos: Option<Cell>,
        opts: &QueryOptions,
        stats: &mut QueryStats,
    ) -> Result<Outcome> {
        let mut cur = u64::from(self.snapshots[i].instant());
        let mut fwd = self.log.forward(self.slot(o, i));
        loop {
            if cur == t {
                return Ok(classify(rect, known(pos)?));
            }
            if let Some(p) = pos {
                if opts.reach_pruning && self.unreachable(rect, p, t - cur) {
                    return Ok(Outcome::Pruned {
                        instant: cur,
                        by: Prune::Reach,
                    });
                }
            }
            let Some(step) = fwd.next_step()? else {
                return Ok(Outcome::Absent);
            };
            stats.symbols_processed += step.width();
            match step {
                Step::Sym(s) => {
                    let p = known(pos)?;
                    let m = self.log.meta(s)?;
                    if cur + m.span <= t {
                        pos = Some(shift(p, m.dx, m.dy)?);
                        cur += m.span;
                        continue;
                    }
                    if opts.mbr_pruning {
                        if let Some(mbr) = self.rule_mbr(s) {
                            if !mbr.intersects_at(p, rect) {
                                return Ok(Outcome::Pruned {
                                    instant: cur,
                                    by: Prune::Mbr,
                                });
                            }
                        }
                    }
                    return Ok(classify(rect, self.descend_to(s, cur, p, t, stats)?));
                }
                Step::Rel { gap, code } => {
                    cur += gap + 1;
                    if cur > t {
                        return Ok(Outcome::Absent);
                    }
                    let (dx, dy) = spiral_decode(code);
                    pos = Some(shift(known(pos)?, dx, dy)?);
                }
                Step::Abs { gap, x, y } => {
                    cur += gap + 1;
                    if cur > t {
                        return Ok(Outcome::Absent);
                    }
                    pos = Some(Cell::new(x, y));
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn slice_backward(
        &self,
        o: ObjectId,
        i: usize,
        rect: &Rect,
        t: u64,
        mut cur: u64,
        mut pos: Cell,
        opts: &QueryOptions,
        stats: &mut QueryStats,
    ) -> Result<Outcome> {
        let mut bwd = self.log.backward(self.slot(o, i));
        loop {
            if cur == t {
                return Ok(classify(rect, pos));
            }
            if opts.reach_pruning && self.unreachable(rect, pos, cur - t) {
                return Ok(Outcome::Pruned {
                    instant: cur,
                    by: Prune::Reach,
                });
            }
            let Some(step) = bwd.next_step()? else {
                return Ok(Outcome::Absent);
            };
            stats.symbols_processed += step.width();
            match step {
                Step::Sym(s) => {
                    let m = self.log.meta(s)?;
                    let start = cur
                        .checked_sub(m.span)
                        .ok_or_else(|| Error::corrupt("log runs past its snapshot"))?;
                    let spos = shift(pos, -m.dx, -m.dy)?;
                    if start >= t {
                        cur = start;
                        pos = spos;
                        continue;
                    }
                    if opts.mbr_pruning {
                        if let Some(mbr) = self.rule_mbr(s) {
                            if !mbr.intersects_at(spos, rect) {
                                return Ok(Outcome::Pruned {
                                    instant: cur,
                                    by: Prune::Mbr,
                                });
                            }
                        }
                    }
                    return Ok(classify(rect, self.descend_to(s, start, spos, t, stats)?));
                }
                Step::Rel { gap, code } => {
                    let start = cur
                        .checked_sub(gap + 1)
                        .ok_or_else(|| Error::corrupt("log runs past its snapshot"))?;
                    if start < t {
                        return Ok(Outcome::Absent);
                    }
                    let (dx, dy) = spiral_decode(code);
                    cur = start;
                    pos = shift(pos, -dx, -dy)?;
                }
                Step::Abs { .. } => return Ok(Outcome::Absent),
            }
        }
    }

    pub fn time_interval(&self, rect: &Rect, ts: u32, te: u32) -> Result<Vec<ObjectId>> {
        self.time_interval_with(rect, ts, te, &QueryOptions::default())
            .map(|r| r.0)
    }

    /// Objects inside `rect` at some instant of `[ts, te]`, ascending. Each
    /// period overlapping the interval is evaluated forward from its snapshot.
    pub fn time_interval_with(
        &self,
        rect: &Rect,
        ts: u32,
        te: u32,
        opts: &QueryOptions,
    ) -> Result<(Vec<ObjectId>, QueryStats)> {
        check_interval(ts, te, self.header.num_instants)?;
        check_rect(rect, self.header.width, self.header.height)?;
        let mut stats = QueryStats::default();
        let mut selected = vec![false; self.header.num_objects as usize];
        let period = u64::from(self.header.period);
        for i in self.period_of(ts).0..=self.period_of(te).0 {
            let snap = &self.snapshots[i];
            let is = u64::from(snap.instant());
            let a = u64::from(ts).max(is);
            let b = u64::from(te).min(is + period - 1);
            let region = self.expand_region(rect, b - is);
            let mut starts: Vec<(ObjectId, Option<Cell>)> = snap
                .objects_in_region(&region)
                .into_iter()
                .map(|(o, c)| (o, Some(c)))
                .collect();
            starts.extend(snap.absent_entries().iter().map(|&(o, _)| (o, None)));
            for (o, pos) in starts {
                if selected[o as usize] {
                    continue;
                }
                stats.candidates += 1;
                match self.interval_track(o, i, rect, a, b, pos, opts, &mut stats)? {
                    Some(true) => selected[o as usize] = true,
                    Some(false) => {}
                    None => stats.discarded += 1,
                }
            }
        }
        let out = (0..self.header.num_objects).filter(|&o| selected[o as usize]).collect();
        Ok((out, stats))
    }

    /// `Some(selected)`, or `None` when pruned.
    #[allow(clippy::too_many_arguments)]
    fn interval_track(
        &self,
        o: ObjectId,
        i: usize,
        rect: &Rect,
        a: u64,
        b: u64,
        mut pos: Option<Cell>,
        opts: &QueryOptions,
        stats: &mut QueryStats,
    ) -> Result<Option<bool>> {
        let mut cur = u64::from(self.snapshots[i].instant());
        let mut fwd = self.log.forward(self.slot(o, i));
        loop {
            if (a..=b).contains(&cur) && pos.is_some_and(|p| rect.contains(p)) {
                return Ok(Some(true));
            }
            if cur >= b {
                return Ok(Some(false));
            }
            if let Some(p) = pos {
                if opts.reach_pruning && self.unreachable(rect, p, b - cur) {
                    return Ok(None);
                }
            }
            let Some(step) = fwd.next_step()? else {
                return Ok(Some(false));
            };
            match step {
                Step::Sym(s) => {
                    let mut p = known(pos)?;
                    if self.interval_scan(s, &mut cur, &mut p, rect, a, b, opts, stats)? {
                        return Ok(Some(true));
                    }
                    pos = Some(p);
                }
                Step::Rel { gap, code } => {
                    stats.symbols_processed += step.width();
                    let (dx, dy) = spiral_decode(code);
                    pos = Some(shift(known(pos)?, dx, dy)?);
                    cur += gap + 1;
                }
                Step::Abs { gap, x, y } => {
                    stats.symbols_processed += step.width();
                    pos = Some(Cell::new(x, y));
                    cur += gap + 1;
                }
            }
        }
    }

    /// Advances `(cur, pos)` over `sym`, returning true as soon as a
    /// position at an instant of `[a, b]` falls inside `rect`.
    #[allow(clippy::too_many_arguments)]
    fn interval_scan(
        &self,
        sym: u64,
        cur: &mut u64,
        pos: &mut Cell,
        rect: &Rect,
        a: u64,
        b: u64,
        opts: &QueryOptions,
        stats: &mut QueryStats,
    ) -> Result<bool> {
        stats.symbols_processed += 1;
        let m = self.log.meta(sym)?;
        let end = *cur + m.span;
        let end_pos = shift(*pos, m.dx, m.dy)?;
        let skip = |cur: &mut u64, pos: &mut Cell| -> Result<bool> {
            *cur = end;
            *pos = end_pos;
            Ok(false)
        };
        if end < a || *cur >= b {
            return skip(cur, pos);
        }
        let Some((l, r)) = self.log.children(sym) else {
            *cur = end;
            *pos = end_pos;
            return Ok(end <= b && rect.contains(end_pos));
        };
        if *cur + 1 >= a && end <= b {
            if rect.contains(end_pos) {
                return Ok(true);
            }
            if opts.mbr_pruning && self.rule_mbr(sym).is_some_and(|mbr| !mbr.intersects_at(*pos, rect)) {
                return skip(cur, pos);
            }
        }
        stats.rules_expanded += 1;
        Ok(self.interval_scan(l, cur, pos, rect, a, b, opts, stats)?
            || self.interval_scan(r, cur, pos, rect, a, b, opts, stats)?)
    }
}
