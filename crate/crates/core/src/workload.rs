//! Random query workloads and their evaluation against an index or the oracle.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataio::OracleStore;
use crate::index::{QueryOptions, QueryStats, Track, TrajectoryIndex};
use crate::{Cell, ObjectId, Rect, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryKind {
    Position,
    Trajectory,
    Slice,
    Interval,
}

impl QueryKind {
    pub const ALL: [QueryKind; 4] = [
        QueryKind::Position,
        QueryKind::Trajectory,
        QueryKind::Slice,
        QueryKind::Interval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QueryKind::Position => "position",
            QueryKind::Trajectory => "trajectory",
            QueryKind::Slice => "slice",
            QueryKind::Interval => "interval",
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Query {
    Position(ObjectId, u32),
    Trajectory(ObjectId, u32, u32),
    Slice(Rect, u32),
    Interval(Rect, u32, u32),
}

impl Query {
    pub fn kind(&self) -> QueryKind {
        match self {
            Query::Position(..) => QueryKind::Position,
            Query::Trajectory(..) => QueryKind::Trajectory,
            Query::Slice(..) => QueryKind::Slice,
            Query::Interval(..) => QueryKind::Interval,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Position(Option<Cell>),
    Trajectory(Track),
    Slice(Vec<(ObjectId, Cell)>),
    Interval(Vec<ObjectId>),
}

/// Shape of a generated workload.
#[derive(Clone, Copy, Debug)]
pub struct WorkloadShape {
    pub num_objects: u32,
    pub num_instants: u32,
    pub width: u32,
    pub height: u32,
    /// Longest trajectory or interval span, in instants.
    pub max_span: u32,
    /// Longest rectangle side, in cells.
    pub max_side: u32,
}

impl WorkloadShape {
    pub fn for_index(idx: &TrajectoryIndex) -> Self {
        let h = idx.header();
        WorkloadShape {
            num_objects: h.num_objects,
            num_instants: h.num_instants,
            width: h.width,
            height: h.height,
            max_span: 400,
            max_side: 2048,
        }
    }
}

pub fn random_rect(rng: &mut impl Rng, width: u32, height: u32, max_side: u32) -> Rect {
    let max_side = max_side.max(1);
    // mostly small windows, sometimes a large one
    let side = if rng.gen_bool(0.2) {
        rng.gen_range(1..=max_side)
    } else {
        rng.gen_range(1..=(max_side / 3).max(1))
    };
    let w = side.min(width);
    let h = side.min(height);
    let x = rng.gen_range(0..=width - w);
    let y = rng.gen_range(0..=height - h);
    Rect::new(x, y, x + w - 1, y + h - 1)
}

/// `per_type` queries of each kind, grouped by kind.
pub fn generate(shape: &WorkloadShape, per_type: usize, seed: u64) -> Vec<Query> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.num_instants;
    let no = shape.num_objects;
    if n == 0 || no == 0 || shape.width == 0 || shape.height == 0 {
        return Vec::new();
    }
    let span = |rng: &mut ChaCha8Rng, ts: u32| (ts + rng.gen_range(0..=shape.max_span)).min(n - 1);
    let mut out = Vec::with_capacity(per_type * 4);
    for _ in 0..per_type {
        out.push(Query::Position(rng.gen_range(0..no), rng.gen_range(0..n)));
    }
    for _ in 0..per_type {
        let ts = rng.gen_range(0..n);
        let te = span(&mut rng, ts);
        out.push(Query::Trajectory(rng.gen_range(0..no), ts, te));
    }
    for _ in 0..per_type {
        let r = random_rect(&mut rng, shape.width, shape.height, shape.max_side);
        out.push(Query::Slice(r, rng.gen_range(0..n)));
    }
    for _ in 0..per_type {
        let r = random_rect(&mut rng, shape.width, shape.height, shape.max_side);
        let ts = rng.gen_range(0..n);
        let te = span(&mut rng, ts);
        out.push(Query::Interval(r, ts, te));
    }
    out
}

pub fn run_index(idx: &TrajectoryIndex, q: &Query, opts: &QueryOptions) -> Result<(Answer, QueryStats)> {
    Ok(match *q {
        Query::Position(o, t) => {
            let (a, s) = idx.position_with(o, t, opts)?;
            (Answer::Position(a), s)
        }
        Query::Trajectory(o, ts, te) => {
            let (a, s) = idx.trajectory_with(o, ts, te)?;
            (Answer::Trajectory(a), s)
        }
        Query::Slice(r, t) => {
            let (a, s) = idx.time_slice_with(&r, t, opts)?;
            (Answer::Slice(a), s)
        }
        Query::Interval(r, ts, te) => {
            let (a, s) = idx.time_interval_with(&r, ts, te, opts)?;
            (Answer::Interval(a), s)
        }
    })
}

pub fn run_oracle(oracle: &OracleStore, q: &Query) -> Result<Answer> {
    Ok(match *q {
        Query::Position(o, t) => Answer::Position(oracle.position(o, t)?),
        Query::Trajectory(o, ts, te) => Answer::Trajectory(oracle.trajectory(o, ts, te)?),
        Query::Slice(r, t) => Answer::Slice(oracle.time_slice(&r, t)?),
        Query::Interval(r, ts, te) => Answer::Interval(oracle.time_interval(&r, ts, te)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queries_stay_in_domain() {
        let shape = WorkloadShape {
            num_objects: 3,
            num_instants: 10,
            width: 7,
            height: 5,
            max_span: 400,
            max_side: 2048,
        };
        let qs = generate(&shape, 50, 1);
        assert_eq!(qs.len(), 200);
        for q in &qs {
            match *q {
                Query::Position(o, t) => assert!(o < 3 && t < 10),
                Query::Trajectory(o, ts, te) | Query::Interval(Rect { x1: o, .. }, ts, te) => {
                    assert!(o < 7 && ts <= te && te < 10)
                }
                Query::Slice(r, t) => assert!(r.x2 < 7 && r.y2 < 5 && t < 10),
            }
        }
        assert_eq!(generate(&shape, 50, 1), qs);
        assert!(generate(
            &WorkloadShape {
                num_objects: 0,
                ..shape
            },
            5,
            1
        )
        .is_empty());
    }
}
