use serde::Serialize;

/// A grid cell; `x` is the column, `y` the row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// Adds a displacement, returning `None` when the result leaves the
    /// non-negative quadrant or overflows.
    pub fn offset(self, dx: i64, dy: i64) -> Option<Cell> {
        let x = i64::from(self.x).checked_add(dx)?;
        let y = i64::from(self.y).checked_add(dy)?;
        Some(Cell::new(u32::try_from(x).ok()?, u32::try_from(y).ok()?))
    }

    pub fn chebyshev(self, other: Cell) -> u64 {
        u64::from(self.x.abs_diff(other.x)).max(u64::from(self.y.abs_diff(other.y)))
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.x, self.y)
    }
}

/// Closed cell rectangle `[x1, x2] x [y1, y2]`; borders are inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Rect {
    pub x1: u32,
    pub y1: u32,
    pub x2: u32,
    pub y2: u32,
}

impl Rect {
    /// Builds a rectangle from two opposite corners in any order.
    pub fn new(x1: u32, y1: u32, x2: u32, y2: u32) -> Self {
        Self {
            x1: x1.min(x2),
            y1: y1.min(y2),
            x2: x1.max(x2),
            y2: y1.max(y2),
        }
    }

    pub fn contains(&self, c: Cell) -> bool {
        (self.x1..=self.x2).contains(&c.x) && (self.y1..=self.y2).contains(&c.y)
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.x1 <= o.x2 && o.x1 <= self.x2 && self.y1 <= o.y2 && o.y1 <= self.y2
    }

    pub fn intersection(&self, o: &Rect) -> Option<Rect> {
        self.intersects(o).then(|| Rect {
            x1: self.x1.max(o.x1),
            y1: self.y1.max(o.y1),
            x2: self.x2.min(o.x2),
            y2: self.y2.min(o.y2),
        })
    }

    /// Chebyshev distance from a cell to the nearest cell of the rectangle.
    pub fn chebyshev_to(&self, c: Cell) -> u64 {
        let gap = |v: u32, lo: u32, hi: u32| -> u64 {
            if v < lo {
                u64::from(lo - v)
            } else if v > hi {
                u64::from(v - hi)
            } else {
                0
            }
        };
        gap(c.x, self.x1, self.x2).max(gap(c.y, self.y1, self.y2))
    }

    /// Grows every side by `by` cells and clips to `[0, width) x [0, height)`.
    pub fn grown(&self, by: u64, width: u32, height: u32) -> Rect {
        let by = by.min(u64::from(u32::MAX)) as u32;
        Rect {
            x1: self.x1.saturating_sub(by),
            y1: self.y1.saturating_sub(by),
            x2: self.x2.saturating_add(by).min(width.saturating_sub(1)),
            y2: self.y2.saturating_add(by).min(height.saturating_sub(1)),
        }
    }
}

/// Bounding rectangle relative to a start position, in signed cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RelRect {
    pub x1: i64,
    pub y1: i64,
    pub x2: i64,
    pub y2: i64,
}

impl RelRect {
    pub fn around(dx: i64, dy: i64) -> Self {
        Self {
            x1: dx.min(0),
            y1: dy.min(0),
            x2: dx.max(0),
            y2: dy.max(0),
        }
    }

    pub fn union(&self, o: &RelRect) -> RelRect {
        RelRect {
            x1: self.x1.min(o.x1),
            y1: self.y1.min(o.y1),
            x2: self.x2.max(o.x2),
            y2: self.y2.max(o.y2),
        }
    }

    pub fn translate(&self, dx: i64, dy: i64) -> RelRect {
        RelRect {
            x1: self.x1 + dx,
            y1: self.y1 + dy,
            x2: self.x2 + dx,
            y2: self.y2 + dy,
        }
    }

    pub fn contains(&self, dx: i64, dy: i64) -> bool {
        (self.x1..=self.x2).contains(&dx) && (self.y1..=self.y2).contains(&dy)
    }

    /// Whether this rectangle, anchored at `origin`, meets `r`.
    pub fn intersects_at(&self, origin: Cell, r: &Rect) -> bool {
        let (ox, oy) = (i64::from(origin.x), i64::from(origin.y));
        ox + self.x1 <= i64::from(r.x2)
            && i64::from(r.x1) <= ox + self.x2
            && oy + self.y1 <= i64::from(r.y2)
            && i64::from(r.y1) <= oy + self.y2
    }
}
