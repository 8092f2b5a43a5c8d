#![allow(dead_code)]

use gract::dataio::{gen_synthetic, SynthConfig};
use gract::movement::{spiral_encode, MOVE_SHIFT};
pub use gract::workload::{generate, random_rect, Answer, Query, WorkloadShape};
use gract::{Cell, OracleStore, QueryOptions, RegularDataset, TrajectoryIndex};

/// Mixed fleet with gaps: the oracle-equivalence dataset.
pub fn mixed_dataset() -> RegularDataset {
    gen_synthetic(&SynthConfig {
        num_objects: 200,
        num_instants: 2048,
        width: 4096,
        height: 4096,
        stationary: 0.2,
        straight: 0.5,
        random_walk: 0.3,
        max_speed: 3,
        gap_fraction: 0.3,
        gap_prob: 0.01,
        max_gap: 40,
        seed: 2024,
        ..SynthConfig::default()
    })
}

/// Mostly straight movers with rare turns.
pub fn straight_dataset() -> RegularDataset {
    gen_synthetic(&SynthConfig {
        num_objects: 200,
        num_instants: 2048,
        width: 4096,
        height: 4096,
        stationary: 0.05,
        straight: 0.9,
        random_walk: 0.05,
        turn_prob: 0.01,
        max_speed: 2,
        gap_fraction: 0.05,
        gap_prob: 0.002,
        max_gap: 20,
        seed: 99,
    })
}

/// `per_type` queries of each kind.
pub fn workload(data: &RegularDataset, per_type: usize, seed: u64) -> Vec<Query> {
    let shape = WorkloadShape {
        num_objects: data.num_objects() as u32,
        num_instants: data.num_instants,
        width: data.width(),
        height: data.height(),
        max_span: 400,
        max_side: 2048,
    };
    generate(&shape, per_type, seed)
}

pub fn run_index(idx: &TrajectoryIndex, q: &Query, opts: &QueryOptions) -> Answer {
    gract::workload::run_index(idx, q, opts).unwrap().0
}

pub fn run_oracle(oracle: &OracleStore, q: &Query) -> Answer {
    gract::workload::run_oracle(oracle, q).unwrap()
}

/// Number of queries whose answer differs from the oracle.
pub fn mismatches(idx: &TrajectoryIndex, oracle: &OracleStore, queries: &[Query], opts: &QueryOptions) -> usize {
    queries
        .iter()
        .filter(|q| {
            let ok = run_index(idx, q, opts) == run_oracle(oracle, q);
            if !ok {
                eprintln!("mismatch on {q:?}");
            }
            !ok
        })
        .count()
}

/// Log integers written independently of the library: for each instant
/// after the snapshot, a move when the previous instant was known, else a
/// relative reappearance when a position is known in the period, else an
/// absolute one.
pub fn expected_log_ints(track: &[Option<Cell>], start: usize, end: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut last: Option<(usize, Cell)> = track[start].map(|c| (start, c));
    let mut cursor = start;
    for (t, c) in track.iter().enumerate().take(end + 1).skip(start + 1) {
        let Some(c) = *c else { continue };
        let gap = (t - cursor - 1) as u64;
        match last {
            Some((_, p)) => {
                let code = spiral_encode(i64::from(c.x) - i64::from(p.x), i64::from(c.y) - i64::from(p.y));
                if gap == 0 {
                    out.push(code + MOVE_SHIFT);
                } else {
                    out.extend([0, gap, code + MOVE_SHIFT]);
                }
            }
            None => out.extend([1, gap, u64::from(c.x), u64::from(c.y)]),
        }
        last = Some((t, c));
        cursor = t;
    }
    out
}
