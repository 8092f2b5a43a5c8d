//! Relative movement model: spiral codes, log events and their integer form.
//!
//! The spiral numbers the cells around the origin ring by ring. Ring `r`
//! (Chebyshev radius `r`) holds `8r` cells and starts at `(r, r - 1)`, then
//! winds clockwise: down the east side, west along the south side, up the
//! west side and east along the north side, ending at `(r, r)`. `x` grows to
//! the East and `y` to the North, so ring 1 is
//! `(1,0) (1,-1) (0,-1) (-1,-1) (-1,0) (-1,1) (0,1) (1,1)` with codes 1 to 8.

use crate::error::{Error, Result};
use crate::geom::Cell;

/// Integer stream codeword announcing a relative reappearance.
pub const REL_REAPPEAR: u64 = 0;
/// Integer stream codeword announcing an absolute reappearance.
pub const ABS_REAPPEAR: u64 = 1;
/// Spiral codes are stored shifted past the two reserved codewords.
pub const MOVE_SHIFT: u64 = 2;

fn ring_start(r: u64) -> u64 {
    1 + 4 * r * (r - 1)
}

pub fn spiral_encode(dx: i64, dy: i64) -> u64 {
    let r = dx.unsigned_abs().max(dy.unsigned_abs());
    if r == 0 {
        return 0;
    }
    let ri = r as i64;
    let off = if dx == ri && dy < ri {
        (ri - 1 - dy) as u64
    } else if dy == -ri && dx < ri {
        2 * r + (ri - 1 - dx) as u64
    } else if dx == -ri && dy > -ri {
        4 * r + (dy + ri - 1) as u64
    } else {
        6 * r + (dx + ri - 1) as u64
    };
    ring_start(r) + off
}

pub fn spiral_decode(code: u64) -> (i64, i64) {
    if code == 0 {
        return (0, 0);
    }
    // largest r with ring_start(r) <= code
    let mut r = (((code - 1) as f64 / 4.0).sqrt() as u64).max(1);
    while ring_start(r + 1) <= code {
        r += 1;
    }
    while ring_start(r) > code {
        r -= 1;
    }
    let off = code - ring_start(r);
    let ri = r as i64;
    let side = off / (2 * r);
    let step = (off % (2 * r)) as i64;
    match side {
        0 => (ri, ri - 1 - step),
        1 => (ri - 1 - step, -ri),
        2 => (-ri, -ri + 1 + step),
        _ => (-ri + 1 + step, ri),
    }
}

/// One entry of an object's movement log between two snapshots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogEvent {
    /// One instant later, displaced by the decoded spiral code.
    Move(u64),
    /// After `gap` missing instants, displaced by the spiral code from the
    /// last known position.
    RelReappear { gap: u64, code: u64 },
    /// After `gap` missing instants, at an absolute cell.
    AbsReappear { gap: u64, x: u32, y: u32 },
}

impl LogEvent {
    /// Instants the event advances time by.
    pub fn span(&self) -> u64 {
        match *self {
            LogEvent::Move(_) => 1,
            LogEvent::RelReappear { gap, .. } | LogEvent::AbsReappear { gap, .. } => gap + 1,
        }
    }

    /// Number of integers in the serialized form.
    pub fn encoded_len(&self) -> usize {
        match self {
            LogEvent::Move(_) => 1,
            LogEvent::RelReappear { .. } => 3,
            LogEvent::AbsReappear { .. } => 4,
        }
    }

    pub fn write_ints(&self, out: &mut Vec<u64>) {
        match *self {
            LogEvent::Move(c) => out.push(c + MOVE_SHIFT),
            LogEvent::RelReappear { gap, code } => out.extend_from_slice(&[REL_REAPPEAR, gap, code + MOVE_SHIFT]),
            LogEvent::AbsReappear { gap, x, y } => {
                out.extend_from_slice(&[ABS_REAPPEAR, gap, u64::from(x), u64::from(y)])
            }
        }
    }

    /// Parses one event from the front of `ints`, returning it with the
    /// number of integers consumed.
    pub fn read_ints(ints: &[u64]) -> Result<(LogEvent, usize)> {
        let first = *ints.first().ok_or_else(|| Error::format("empty event stream"))?;
        let payload = |n: usize| -> Result<&[u64]> {
            ints.get(1..=n)
                .ok_or_else(|| Error::format("reappearance payload truncated"))
        };
        match first {
            REL_REAPPEAR => {
                let p = payload(2)?;
                if p[1] < MOVE_SHIFT {
                    return Err(Error::format("reappearance code is a reserved codeword"));
                }
                Ok((
                    LogEvent::RelReappear {
                        gap: p[0],
                        code: p[1] - MOVE_SHIFT,
                    },
                    3,
                ))
            }
            ABS_REAPPEAR => {
                let p = payload(3)?;
                let coord = |v: u64| u32::try_from(v).map_err(|_| Error::format("absolute coordinate overflow"));
                Ok((
                    LogEvent::AbsReappear {
                        gap: p[0],
                        x: coord(p[1])?,
                        y: coord(p[2])?,
                    },
                    4,
                ))
            }
            c => Ok((LogEvent::Move(c - MOVE_SHIFT), 1)),
        }
    }
}

pub fn events_to_ints(events: &[LogEvent]) -> Vec<u64> {
    let mut out = Vec::with_capacity(events.len());
    for e in events {
        e.write_ints(&mut out);
    }
    out
}

pub fn ints_to_events(mut ints: &[u64]) -> Result<Vec<LogEvent>> {
    let mut out = Vec::new();
    while !ints.is_empty() {
        let (e, n) = LogEvent::read_ints(ints)?;
        out.push(e);
        ints = &ints[n..];
    }
    Ok(out)
}

/// Applies an event to `(cell, instant)`, where `cell` is the last known
/// position of the object.
pub fn apply_event(cell: Cell, instant: u64, event: &LogEvent, width: u32, height: u32) -> Result<(Cell, u64)> {
    let next = match *event {
        LogEvent::Move(code) | LogEvent::RelReappear { code, .. } => {
            let (dx, dy) = spiral_decode(code);
            cell.offset(dx, dy)
        }
        LogEvent::AbsReappear { x, y, .. } => Some(Cell::new(x, y)),
    };
    match next {
        Some(c) if c.x < width && c.y < height => Ok((c, instant + event.span())),
        _ => Err(Error::corrupt(format!(
            "event {event:?} moves {cell:?} outside the {width}x{height} grid"
        ))),
    }
}

/// Chebyshev length of a spiral code's displacement.
pub fn code_radius(code: u64) -> u64 {
    let (dx, dy) = spiral_decode(code);
    dx.unsigned_abs().max(dy.unsigned_abs())
}
