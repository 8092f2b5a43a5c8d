//! The trajectory index: a snapshot every `period` instants plus compressed
//! per-object movement logs between consecutive snapshots.
//!
//! The log of period `i` describes instants `(i·period, (i+1)·period]`, so it
//! ends exactly at the next snapshot (or at the last instant). That lets a
//! query walk it forward from snapshot `i` or backward from snapshot `i + 1`.

mod io;
mod log;
mod query;

pub use io::SizeReport;
pub use query::{CandidateTrace, Outcome, Prune, QueryOptions, QueryStats, SliceTrace, Track};

use std::collections::HashMap;

use crate::dataio::RegularDataset;
use crate::error::{Error, Result};
use crate::geom::{Cell, Rect};
use crate::k2tree::DEFAULT_ARITY;
use crate::movement::{code_radius, events_to_ints, spiral_encode, LogEvent};
use crate::repair::{repair_compress, Grammar};
use crate::scdc::{choose_s, ScdcModel};
use crate::snapshot::{AbsentEntry, Snapshot};
use crate::succinct::{IntVector, DEFAULT_CHUNK_WIDTH};
use crate::ObjectId;

use log::{GractLog, LogStore, ScdcLog};

/// Log representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Mode {
    /// Byte-oriented (s,c)-dense codes.
    Scdc,
    /// Re-Pair grammar with enriched rules.
    Gract,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Scdc => "scdc",
            Mode::Gract => "gract",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scdc" | "scdcct" => Ok(Mode::Scdc),
            "gract" => Ok(Mode::Gract),
            _ => Err(Error::invalid(format!("unknown mode {s:?} (expected scdc or gract)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildConfig {
    /// Instants between snapshots.
    pub period: u32,
    pub mode: Mode,
    /// k²-tree arity.
    pub k: u32,
    /// Fixed SCDC stopper count; chosen from the data when `None`.
    pub scdc_s: Option<u32>,
    /// DAC chunk width for rule metadata.
    pub dac_width: u32,
}

impl BuildConfig {
    pub fn new(period: u32, mode: Mode) -> Self {
        Self {
            period,
            mode,
            k: DEFAULT_ARITY,
            scdc_s: None,
            dac_width: DEFAULT_CHUNK_WIDTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.period < 2 {
            return Err(Error::invalid(format!("period must be >= 2, got {}", self.period)));
        }
        if self.k < 2 {
            return Err(Error::invalid(format!("k must be >= 2, got {}", self.k)));
        }
        if !(1..=64).contains(&self.dac_width) {
            return Err(Error::invalid("DAC chunk width must be in 1..=64"));
        }
        if let Some(s) = self.scdc_s {
            ScdcModel::new(s)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct IndexHeader {
    pub width: u32,
    pub height: u32,
    pub num_objects: u32,
    pub num_instants: u32,
    pub period: u32,
    /// Upper bound on the per-instant Chebyshev displacement of any object.
    pub v_max: u64,
    pub mode: Mode,
    pub k: u32,
    /// SCDC stopper count (0 in grammar mode).
    pub scdc_s: u32,
    /// DAC chunk width of rule metadata (0 in SCDC mode).
    pub dac_width: u32,
    /// Number of (object, instant) pairs with a known position.
    pub num_positions: u64,
}

impl IndexHeader {
    pub fn num_snapshots(&self) -> usize {
        if self.num_instants == 0 {
            0
        } else {
            ((self.num_instants - 1) / self.period) as usize + 1
        }
    }
}

/// Compressed spatio-temporal index. Immutable once built; queries take
/// `&self` and may run concurrently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryIndex {
    header: IndexHeader,
    ids: Vec<String>,
    id_lookup: HashMap<String, ObjectId>,
    snapshots: Vec<Snapshot>,
    log: LogStore,
}

/// Events of one object for the instants `(start, end]`, where `start`
/// is a snapshot instant.
fn period_events(track: &[Option<Cell>], start: usize, end: usize) -> Vec<LogEvent> {
    let mut events = Vec::new();
    let mut cursor = start;
    let mut last = track[start];
    for (t, c) in track.iter().enumerate().take(end + 1).skip(start + 1) {
        let Some(c) = *c else { continue };
        let gap = (t - cursor - 1) as u64;
        let e = match last {
            Some(p) => {
                let code = spiral_encode(i64::from(c.x) - i64::from(p.x), i64::from(c.y) - i64::from(p.y));
                if gap == 0 {
                    LogEvent::Move(code)
                } else {
                    LogEvent::RelReappear { gap, code }
                }
            }
            None => LogEvent::AbsReappear { gap, x: c.x, y: c.y },
        };
        events.push(e);
        cursor = t;
        last = Some(c);
    }
    events
}

/// Smallest per-instant speed that covers an event.
fn event_speed(e: &LogEvent) -> u64 {
    match *e {
        LogEvent::Move(code) => code_radius(code),
        LogEvent::RelReappear { gap, code } => code_radius(code).div_ceil(gap + 1),
        LogEvent::AbsReappear { .. } => 0,
    }
}

impl TrajectoryIndex {
    pub fn build(data: &RegularDataset, cfg: &BuildConfig) -> Result<Self> {
        data.validate()?;
        cfg.validate()?;
        let (width, height) = (data.width(), data.height());
        let n = data.num_instants as usize;
        let period = cfg.period as usize;
        let num_objects = data.num_objects() as u32;
        let mut header = IndexHeader {
            width,
            height,
            num_objects,
            num_instants: data.num_instants,
            period: cfg.period,
            v_max: 0,
            mode: cfg.mode,
            k: cfg.k,
            scdc_s: 0,
            dac_width: 0,
            num_positions: data.tracks.iter().flatten().filter(|c| c.is_some()).count() as u64,
        };
        let num_snapshots = header.num_snapshots();

        let mut snapshots = Vec::with_capacity(num_snapshots);
        let mut last_seen: Vec<Option<(Cell, u32)>> = vec![None; data.num_objects()];
        for t in 0..n {
            if t % period == 0 {
                let mut present = Vec::new();
                let mut absent = Vec::new();
                for (o, track) in data.tracks.iter().enumerate() {
                    match track[t] {
                        Some(c) => present.push((o as ObjectId, c)),
                        None => absent.push((
                            o as ObjectId,
                            last_seen[o].map_or(AbsentEntry::NeverSeen, |(cell, instant)| AbsentEntry::LastSeen {
                                cell,
                                instant,
                            }),
                        )),
                    }
                }
                snapshots.push(Snapshot::build(
                    t as u32,
                    num_objects,
                    &present,
                    &absent,
                    width,
                    height,
                    cfg.k,
                )?);
            }
            for (o, track) in data.tracks.iter().enumerate() {
                if let Some(c) = track[t] {
                    last_seen[o] = Some((c, t as u32));
                }
            }
        }

        // object-major: slot = o * num_snapshots + i
        let mut streams: Vec<Vec<u64>> = Vec::with_capacity(data.num_objects() * num_snapshots);
        let mut v_max = 0;
        for track in &data.tracks {
            for i in 0..num_snapshots {
                let start = i * period;
                let end = ((i + 1) * period).min(n - 1);
                let events = period_events(track, start, end);
                for e in &events {
                    v_max = v_max.max(event_speed(e));
                }
                streams.push(events_to_ints(&events));
            }
        }
        header.v_max = v_max;

        let log = match cfg.mode {
            Mode::Scdc => {
                let mut hist: HashMap<u64, u64> = HashMap::new();
                for &v in streams.iter().flatten() {
                    *hist.entry(v).or_insert(0) += 1;
                }
                let mut hist: Vec<(u64, u64)> = hist.into_iter().collect();
                hist.sort_unstable();
                let model = match cfg.scdc_s {
                    Some(s) => ScdcModel::new(s)?,
                    None => choose_s(&hist),
                };
                header.scdc_s = model.stoppers();
                let mut bytes = Vec::new();
                let mut offsets = vec![0u64];
                let mut reappear = Vec::new();
                for stream in &streams {
                    let mut rest = &stream[..];
                    while !rest.is_empty() {
                        let (e, len) = LogEvent::read_ints(rest)?;
                        if !matches!(e, LogEvent::Move(_)) {
                            reappear.push(bytes.len() as u64);
                        }
                        for &v in &rest[..len] {
                            model.encode_into(v, &mut bytes);
                        }
                        rest = &rest[len..];
                    }
                    offsets.push(bytes.len() as u64);
                }
                LogStore::Scdc(ScdcLog {
                    model,
                    bytes,
                    offsets: IntVector::from_slice(&offsets),
                    reappear: IntVector::from_slice(&reappear),
                })
            }
            Mode::Gract => {
                let mut symbols = Vec::with_capacity(streams.len());
                let mut locked = Vec::with_capacity(streams.len());
                for stream in &streams {
                    let mut syms = Vec::with_capacity(stream.len());
                    let mut lock = Vec::with_capacity(stream.len());
                    let mut rest = &stream[..];
                    while !rest.is_empty() {
                        let (e, len) = LogEvent::read_ints(rest)?;
                        for &v in &rest[..len] {
                            syms.push(u32::try_from(v).map_err(|_| {
                                Error::invalid("log integer exceeds 32 bits; grid too large for grammar mode")
                            })?);
                            lock.push(!matches!(e, LogEvent::Move(_)));
                        }
                        rest = &rest[len..];
                    }
                    symbols.push(syms);
                    locked.push(lock);
                }
                let out = repair_compress(&symbols, &locked)?;
                let grammar = Grammar::enrich_with(out.terminal_bound, out.rules, cfg.dac_width, cfg.dac_width)?;
                header.dac_width = cfg.dac_width;
                let width = crate::succinct::bit_width(grammar.symbol_bound().saturating_sub(1));
                let mut c = IntVector::with_width(width);
                let mut offsets = vec![0u64];
                let mut reappear = Vec::new();
                let mut expanded = Vec::new();
                for (seq, stream) in out.sequences.iter().zip(&streams) {
                    // j walks the compressed sequence, k the integer stream
                    let (mut j, mut k) = (0, 0);
                    while j < seq.len() {
                        let s = seq[j];
                        if u64::from(s) < crate::movement::MOVE_SHIFT {
                            reappear.push((c.len() + j) as u64);
                            let len = LogEvent::read_ints(&stream[k..])?.1;
                            j += len;
                            k += len;
                        } else {
                            k += if grammar.is_terminal(s) {
                                1
                            } else {
                                grammar.span(s) as usize
                            };
                            j += 1;
                        }
                    }
                    expanded.clear();
                    for &s in seq {
                        grammar.expand_into(s, &mut expanded);
                    }
                    if !expanded.iter().map(|&s| u64::from(s)).eq(stream.iter().copied()) {
                        return Err(Error::corrupt("grammar expansion differs from the log"));
                    }
                    for &s in seq {
                        c.push(u64::from(s));
                    }
                    offsets.push(c.len() as u64);
                }
                LogStore::Gract(GractLog {
                    grammar,
                    c,
                    offsets: IntVector::from_slice(&offsets),
                    reappear: IntVector::from_slice(&reappear),
                })
            }
        };

        let id_lookup = data
            .ids
            .iter()
            .enumerate()
            .map(|(o, id)| (id.clone(), o as ObjectId))
            .collect();
        let idx = Self {
            header,
            ids: data.ids.clone(),
            id_lookup,
            snapshots,
            log,
        };
        idx.check_replay(data)?;
        ::log::info!(
            "built {} index: {} objects, {} instants, {} snapshots, vmax {}",
            cfg.mode,
            num_objects,
            n,
            num_snapshots,
            v_max
        );
        Ok(idx)
    }

    /// Replays every log from its snapshot and compares with the dataset,
    /// including the position (or absence) at the next snapshot.
    fn check_replay(&self, data: &RegularDataset) -> Result<()> {
        let ns = self.snapshots.len();
        let p = self.header.period as usize;
        let n = self.header.num_instants as usize;
        for (o, track) in data.tracks.iter().enumerate() {
            for i in 0..ns {
                let start = i * p;
                let end = ((i + 1) * p).min(n - 1);
                let mut replay = vec![None; end - start + 1];
                replay[0] = track[start];
                self.replay_period(o as ObjectId, i, |t, c| replay[t as usize - start] = Some(c))?;
                if replay[..] != track[start..=end] {
                    return Err(Error::corrupt(format!(
                        "log replay of object {o}, period {i} disagrees with the data"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn header(&self) -> &IndexHeader {
        &self.header
    }

    pub fn mode(&self) -> Mode {
        self.header.mode
    }

    pub fn num_objects(&self) -> u32 {
        self.header.num_objects
    }

    pub fn num_instants(&self) -> u32 {
        self.header.num_instants
    }

    pub fn v_max(&self) -> u64 {
        self.header.v_max
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn grammar(&self) -> Option<&Grammar> {
        self.log.grammar()
    }

    /// Dense id of an external object id.
    pub fn object_id(&self, name: &str) -> Option<ObjectId> {
        self.id_lookup.get(name).copied()
    }

    pub fn object_name(&self, o: ObjectId) -> Option<&str> {
        self.ids.get(o as usize).map(String::as_str)
    }

    /// `rect` grown by `v_max · dt` cells on every side, clipped to the grid.
    pub fn expand_region(&self, rect: &Rect, dt: u64) -> Rect {
        expand_region(rect, dt, self.header.v_max, self.header.width, self.header.height)
    }

    fn slot(&self, o: ObjectId, period: usize) -> usize {
        o as usize * self.snapshots.len() + period
    }

    /// Raw integer stream of one object's log for one period.
    pub fn log_ints(&self, o: ObjectId, period: usize) -> Result<Vec<u64>> {
        crate::error::check_object(o, self.header.num_objects)?;
        if period >= self.snapshots.len() {
            return Err(Error::OutOfRange {
                what: "period",
                value: period as u64,
                limit: self.snapshots.len() as u64,
            });
        }
        let slot = self.slot(o, period);
        match &self.log {
            LogStore::Scdc(l) => {
                let (a, b) = self.log.segment(slot);
                l.model.decode_all(&l.bytes[a..b])
            }
            LogStore::Gract(l) => {
                let (a, b) = self.log.segment(slot);
                let mut out = Vec::new();
                for j in a..b {
                    l.grammar.expand_into(l.c.get(j) as u32, &mut out);
                }
                Ok(out.into_iter().map(u64::from).collect())
            }
        }
    }

    /// Compressed top-level symbols of one object's log (grammar mode).
    pub fn log_symbols(&self, o: ObjectId, period: usize) -> Option<Vec<u32>> {
        match &self.log {
            LogStore::Gract(l) if (o as usize) < self.ids.len() && period < self.snapshots.len() => {
                let (a, b) = self.log.segment(self.slot(o, period));
                Some((a..b).map(|j| l.c.get(j) as u32).collect())
            }
            _ => None,
        }
    }
}

/// `rect` grown by `v_max · dt` cells on every side, clipped to the grid.
pub fn expand_region(rect: &Rect, dt: u64, v_max: u64, width: u32, height: u32) -> Rect {
    rect.grown(v_max.saturating_mul(dt), width, height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{gen_synthetic, GridConfig, OracleStore, SynthConfig};
    use crate::movement::MOVE_SHIFT;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(seed: u64, n: u32, side: u32) -> RegularDataset {
        gen_synthetic(&SynthConfig {
            num_objects: 40,
            num_instants: n,
            width: side,
            height: side,
            gap_fraction: 0.5,
            gap_prob: 0.05,
            max_gap: 12,
            seed,
            ..SynthConfig::default()
        })
    }

    fn opt_sets() -> [QueryOptions; 4] {
        [
            QueryOptions::default(),
            QueryOptions::unpruned(),
            QueryOptions::forward_only(),
            QueryOptions {
                allow_backward: false,
                ..QueryOptions::unpruned()
            },
        ]
    }

    fn random_rect(rng: &mut ChaCha8Rng, side: u32) -> Rect {
        let w = rng.gen_range(1..=side / 2);
        let x = rng.gen_range(0..=side - w);
        let y = rng.gen_range(0..=side - w);
        Rect::new(x, y, x + w - 1, y + w - 1)
    }

    fn check_against_oracle(data: &RegularDataset, idx: &TrajectoryIndex, seed: u64) {
        let oracle = OracleStore::new(data.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, no, side) = (data.num_instants, data.num_objects() as u32, data.width());
        for o in 0..no {
            for t in 0..n {
                for opts in &opt_sets() {
                    assert_eq!(
                        idx.position_with(o, t, opts).unwrap().0,
                        oracle.position(o, t).unwrap(),
                        "position o={o} t={t} {opts:?}"
                    );
                }
            }
        }
        for _ in 0..60 {
            let o = rng.gen_range(0..no);
            let ts = rng.gen_range(0..n);
            let te = rng.gen_range(ts..n);
            assert_eq!(
                idx.trajectory(o, ts, te).unwrap(),
                oracle.trajectory(o, ts, te).unwrap()
            );
            let rect = random_rect(&mut rng, side);
            let t = rng.gen_range(0..n);
            for opts in &opt_sets() {
                assert_eq!(
                    idx.time_slice_with(&rect, t, opts).unwrap().0,
                    oracle.time_slice(&rect, t).unwrap(),
                    "slice {rect:?} t={t} {opts:?}"
                );
                assert_eq!(
                    idx.time_interval_with(&rect, ts, te, opts).unwrap().0,
                    oracle.time_interval(&rect, ts, te).unwrap(),
                    "interval {rect:?} [{ts},{te}] {opts:?}"
                );
            }
        }
    }

    #[test]
    fn small_datasets_match_oracle() {
        for (seed, n, side, period) in [
            (1, 97, 64, 10),
            (2, 60, 32, 2),
            (3, 50, 200, 49),
            (4, 61, 50, 20),
            (5, 1, 8, 5),
        ] {
            let data = dataset(seed, n, side);
            for mode in [Mode::Scdc, Mode::Gract] {
                let idx = TrajectoryIndex::build(&data, &BuildConfig::new(period, mode)).unwrap();
                check_against_oracle(&data, &idx, seed);
                let again = TrajectoryIndex::from_bytes(&idx.to_bytes()).unwrap();
                assert_eq!(again, idx);
            }
        }
    }

    #[test]
    fn arities_and_forced_codec_parameters() {
        let data = dataset(8, 80, 100);
        for k in [2, 3, 4] {
            let cfg = BuildConfig {
                k,
                scdc_s: Some(3),
                ..BuildConfig::new(16, Mode::Scdc)
            };
            let idx = TrajectoryIndex::build(&data, &cfg).unwrap();
            assert_eq!(idx.header().scdc_s, 3);
            check_against_oracle(&data, &idx, k.into());
            let cfg = BuildConfig {
                k,
                dac_width: 2,
                ..BuildConfig::new(16, Mode::Gract)
            };
            check_against_oracle(&data, &TrajectoryIndex::build(&data, &cfg).unwrap(), k.into());
        }
    }

    /// Single object on the path of the worked example.
    pub(crate) fn ship_fixture(mode: Mode) -> (RegularDataset, TrajectoryIndex) {
        let mut track = vec![Some(Cell::new(0, 2))];
        for code in [8, 9, 8, 9, 8, 7, 9, 8, 7, 9] {
            let (dx, dy) = crate::movement::spiral_decode(code);
            let p = track.last().unwrap().unwrap();
            track.push(p.offset(dx, dy));
        }
        let data = RegularDataset {
            grid: GridConfig {
                width: 16,
                height: 16,
                ..GridConfig::default()
            },
            num_instants: 11,
            ids: vec!["ship".into()],
            tracks: vec![track],
        };
        let idx = TrajectoryIndex::build(&data, &BuildConfig::new(20, mode)).unwrap();
        (data, idx)
    }

    #[test]
    fn worked_example_position() {
        for mode in [Mode::Scdc, Mode::Gract] {
            let (_, idx) = ship_fixture(mode);
            assert_eq!(idx.position(0, 5).unwrap(), Some(Cell::new(7, 7)));
            assert_eq!(idx.position(0, 0).unwrap(), Some(Cell::new(0, 2)));
            let ints = idx.log_ints(0, 0).unwrap();
            let codes: Vec<u64> = ints.iter().map(|v| v - MOVE_SHIFT).collect();
            assert_eq!(codes, vec![8, 9, 8, 9, 8, 7, 9, 8, 7, 9]);
        }
        let (_, idx) = ship_fixture(Mode::Gract);
        let g = idx.grammar().unwrap();
        let syms = idx.log_symbols(0, 0).unwrap();
        assert!(syms.len() < 10);
        assert!(g.num_rules() > 0);
        // only the symbol that covers instant 5 is opened
        let (_, stats) = idx.position_with(0, 5, &QueryOptions::forward_only()).unwrap();
        assert!(stats.rules_expanded <= 2, "{stats:?}");
    }

    #[test]
    fn v_max_covers_moves_and_relative_reappearances() {
        let data = RegularDataset {
            grid: GridConfig {
                width: 100,
                height: 100,
                ..GridConfig::default()
            },
            num_instants: 8,
            ids: vec!["a".into(), "b".into()],
            tracks: vec![
                vec![
                    Some(Cell::new(0, 0)),
                    Some(Cell::new(2, 1)),
                    Some(Cell::new(3, 1)),
                    None,
                    None,
                    None,
                    None,
                    None,
                ],
                // 19 cells over a gap of three instants: four instants of travel
                vec![
                    Some(Cell::new(50, 50)),
                    None,
                    None,
                    None,
                    Some(Cell::new(69, 50)),
                    None,
                    None,
                    Some(Cell::new(65, 52)),
                ],
            ],
        };
        let idx = TrajectoryIndex::build(&data, &BuildConfig::new(100, Mode::Scdc)).unwrap();
        assert_eq!(idx.v_max(), 5);
        assert_eq!(
            idx.log_ints(1, 0).unwrap(),
            vec![
                0,
                3,
                2 + crate::movement::spiral_encode(19, 0),
                0,
                2,
                2 + crate::movement::spiral_encode(-4, 2)
            ]
        );
    }

    #[test]
    fn stationary_object_log_is_spiral_zero() {
        let data = RegularDataset {
            grid: GridConfig {
                width: 10,
                height: 10,
                ..GridConfig::default()
            },
            num_instants: 300,
            ids: vec!["s".into()],
            tracks: vec![vec![Some(Cell::new(4, 4)); 300]],
        };
        let idx = TrajectoryIndex::build(&data, &BuildConfig::new(299, Mode::Gract)).unwrap();
        assert!(idx.log_ints(0, 0).unwrap().iter().all(|&v| v == MOVE_SHIFT));
        assert!(idx.log_symbols(0, 0).unwrap().len() <= 10);
        assert_eq!(idx.v_max(), 0);
    }

    #[test]
    fn absolute_reappearance_and_never_seen() {
        let mut tracks = vec![vec![None; 30]; 3];
        tracks[0][12] = Some(Cell::new(5, 5));
        tracks[0][13] = Some(Cell::new(6, 5));
        tracks[1][0] = Some(Cell::new(1, 1));
        tracks[1][25] = Some(Cell::new(9, 9));
        let data = RegularDataset {
            grid: GridConfig {
                width: 10,
                height: 10,
                ..GridConfig::default()
            },
            num_instants: 30,
            ids: vec!["x".into(), "y".into(), "z".into()],
            tracks,
        };
        for mode in [Mode::Scdc, Mode::Gract] {
            let idx = TrajectoryIndex::build(&data, &BuildConfig::new(10, mode)).unwrap();
            assert_eq!(idx.log_ints(0, 1).unwrap(), vec![1, 1, 5, 5, 3]);
            assert_eq!(idx.log_ints(1, 2).unwrap(), vec![1, 4, 9, 9]);
            assert!(idx.log_ints(2, 0).unwrap().is_empty());
            check_against_oracle(&data, &idx, 0);
        }
    }

    #[test]
    fn rejects_bad_config_and_data() {
        let data = dataset(1, 20, 16);
        assert!(TrajectoryIndex::build(&data, &BuildConfig::new(1, Mode::Scdc)).is_err());
        let cfg = BuildConfig {
            k: 1,
            ..BuildConfig::new(4, Mode::Scdc)
        };
        assert!(TrajectoryIndex::build(&data, &cfg).is_err());
        let mut bad = data.clone();
        bad.tracks[0].pop();
        assert!(matches!(
            TrajectoryIndex::build(&bad, &BuildConfig::new(4, Mode::Scdc)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn query_domain_errors() {
        let data = dataset(1, 20, 16);
        let idx = TrajectoryIndex::build(&data, &BuildConfig::new(4, Mode::Gract)).unwrap();
        assert!(matches!(idx.position(40, 0), Err(Error::NotFound(_))));
        assert!(idx.position(0, 20).unwrap_err().is_query_domain());
        assert!(idx.trajectory(0, 5, 4).unwrap_err().is_query_domain());
        assert!(idx
            .time_slice(&Rect::new(0, 0, 16, 3), 1)
            .unwrap_err()
            .is_query_domain());
        assert!(idx
            .time_interval(&Rect::new(0, 0, 3, 3), 0, 20)
            .unwrap_err()
            .is_query_domain());
    }

    #[test]
    fn corrupt_files_are_format_errors() {
        let data = dataset(1, 20, 16);
        let idx = TrajectoryIndex::build(&data, &BuildConfig::new(4, Mode::Gract)).unwrap();
        let bytes = idx.to_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(TrajectoryIndex::from_bytes(&bad), Err(Error::Format(_))));
        for cut in [3, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(
                matches!(TrajectoryIndex::from_bytes(&bytes[..cut]), Err(Error::Format(_))),
                "{cut}"
            );
        }
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(TrajectoryIndex::from_bytes(&bad), Err(Error::Format(_))));
    }

    #[test]
    fn region_expansion() {
        let r = Rect::new(10, 10, 20, 20);
        assert_eq!(expand_region(&r, 0, 2, 100, 100), r);
        assert_eq!(expand_region(&r, 3, 2, 100, 100), Rect::new(4, 4, 26, 26));
        assert_eq!(expand_region(&r, 1000, 2, 30, 25), Rect::new(0, 0, 29, 24));
    }

    #[test]
    fn object_dictionary() {
        let data = dataset(1, 10, 16);
        let idx = TrajectoryIndex::build(&data, &BuildConfig::new(4, Mode::Scdc)).unwrap();
        assert_eq!(idx.object_id(&data.ids[7]), Some(7));
        assert_eq!(idx.object_name(7), Some(data.ids[7].as_str()));
        assert_eq!(idx.object_id("missing"), None);
    }
}
