//! Dataset ingestion: raw pings to a regular grid, synthetic fleets, and the
//! exhaustive-scan oracle used to check the index.

mod csvio;
mod oracle;
mod synth;

pub use csvio::{parse_timestamp, read_pings, read_pings_path, write_pings, write_pings_path};
pub use oracle::OracleStore;
pub use synth::{gen_synthetic, Behavior, SynthConfig};

use std::collections::BTreeMap;

use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::geom::Cell;

/// One raw position report.
#[derive(Clone, Debug, PartialEq)]
pub struct RawPing {
    pub object_id: String,
    /// Seconds.
    pub timestamp: f64,
    pub x: f64,
    pub y: f64,
}

/// Maps continuous coordinates and timestamps to cells and instants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    /// Units per cell side.
    pub cell_size: f64,
    /// Seconds per instant.
    pub time_step: f64,
    pub origin: (f64, f64),
    pub width: u32,
    pub height: u32,
    /// Timestamp of instant 0.
    pub t0: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            cell_size: 50.0,
            time_step: 60.0,
            origin: (0.0, 0.0),
            width: 4096,
            height: 4096,
            t0: 0.0,
        }
    }
}

impl GridConfig {
    /// Smallest grid covering every ping, with the origin and `t0` at the
    /// minimum coordinates and timestamp.
    pub fn fit(pings: &[RawPing], cell_size: f64, time_step: f64) -> Result<Self> {
        let mut cfg = GridConfig {
            cell_size,
            time_step,
            ..GridConfig::default()
        };
        cfg.validate()?;
        if pings.is_empty() {
            cfg.width = 1;
            cfg.height = 1;
            return Ok(cfg);
        }
        let fold = |f: fn(&RawPing) -> f64| {
            pings
                .iter()
                .map(f)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (x0, x1) = fold(|p| p.x);
        let (y0, y1) = fold(|p| p.y);
        let (t0, _) = fold(|p| p.timestamp);
        let cells = |lo: f64, hi: f64| -> Result<u32> {
            let n = ((hi - lo) / cell_size).floor() + 1.0;
            if !n.is_finite() || n > f64::from(u32::MAX) {
                return Err(Error::invalid("grid would exceed 2^32 cells per side"));
            }
            Ok(n as u32)
        };
        cfg.origin = (x0, y0);
        cfg.width = cells(x0, x1)?;
        cfg.height = cells(y0, y1)?;
        cfg.t0 = t0;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::invalid("cell size must be positive"));
        }
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(Error::invalid("time step must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("grid must have at least one cell"));
        }
        Ok(())
    }

    /// Cell of a point, or `None` outside the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<Cell> {
        let cx = ((x - self.origin.0) / self.cell_size).floor();
        let cy = ((y - self.origin.1) / self.cell_size).floor();
        if cx >= 0.0 && cy >= 0.0 && cx < f64::from(self.width) && cy < f64::from(self.height) {
            Some(Cell::new(cx as u32, cy as u32))
        } else {
            None
        }
    }

    /// Nearest instant of a timestamp, possibly negative.
    pub fn instant_of(&self, timestamp: f64) -> f64 {
        ((timestamp - self.t0) / self.time_step).round()
    }

    pub fn instant_center(&self, instant: u32) -> f64 {
        self.t0 + f64::from(instant) * self.time_step
    }

    /// Center point of a cell.
    pub fn cell_center(&self, c: Cell) -> (f64, f64) {
        (
            self.origin.0 + (f64::from(c.x) + 0.5) * self.cell_size,
            self.origin.1 + (f64::from(c.y) + 0.5) * self.cell_size,
        )
    }
}

/// At most one cell per object and instant.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularDataset {
    pub grid: GridConfig,
    pub num_instants: u32,
    /// External object ids; the position in this list is the dense id.
    pub ids: Vec<String>,
    /// `tracks[o][t]`.
    pub tracks: Vec<Vec<Option<Cell>>>,
}

impl RegularDataset {
    pub fn width(&self) -> u32 {
        self.grid.width
    }

    pub fn height(&self) -> u32 {
        self.grid.height
    }

    pub fn num_objects(&self) -> usize {
        self.tracks.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.ids.len() != self.tracks.len() {
            return Err(Error::invalid(format!(
                "{} ids for {} tracks",
                self.ids.len(),
                self.tracks.len()
            )));
        }
        if u32::try_from(self.tracks.len()).is_err() {
            return Err(Error::invalid("too many objects"));
        }
        let mut seen = std::collections::HashSet::new();
        for id in &self.ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::invalid(format!("duplicate object id {id:?}")));
            }
        }
        for (o, track) in self.tracks.iter().enumerate() {
            if track.len() != self.num_instants as usize {
                return Err(Error::invalid(format!(
                    "track {o} has {} instants, expected {}",
                    track.len(),
                    self.num_instants
                )));
            }
            if let Some((t, c)) = track.iter().enumerate().find_map(|(t, c)| {
                c.filter(|c| c.x >= self.width() || c.y >= self.height())
                    .map(|c| (t, c))
            }) {
                return Err(Error::invalid(format!(
                    "object {o} at instant {t} lies outside the grid: {c:?}"
                )));
            }
        }
        Ok(())
    }

    /// One ping per present object-instant, at the cell and instant centers.
    pub fn to_pings(&self) -> Vec<RawPing> {
        let mut out = Vec::new();
        for t in 0..self.num_instants {
            for (o, track) in self.tracks.iter().enumerate() {
                if let Some(c) = track[t as usize] {
                    let (x, y) = self.grid.cell_center(c);
                    out.push(RawPing {
                        object_id: self.ids[o].clone(),
                        timestamp: self.grid.instant_center(t),
                        x,
                        y,
                    });
                }
            }
        }
        out
    }

    /// Binary table dump.
    pub fn dump(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(DUMP_MAGIC);
        w.u16(DUMP_VERSION);
        let g = &self.grid;
        for v in [g.cell_size, g.time_step, g.origin.0, g.origin.1, g.t0] {
            w.u64(v.to_bits());
        }
        w.u32(g.width);
        w.u32(g.height);
        w.u32(self.num_instants);
        w.u64(self.ids.len() as u64);
        for (id, track) in self.ids.iter().zip(&self.tracks) {
            w.str(id);
            for c in track {
                let (x, y) = c.map_or((u32::MAX, u32::MAX), |c| (c.x, c.y));
                w.u32(x);
                w.u32(y);
            }
        }
        w.into_inner()
    }

    pub fn load(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.bytes(4)? != DUMP_MAGIC {
            return Err(Error::format("not a dataset dump"));
        }
        let version = r.u16()?;
        if version != DUMP_VERSION {
            return Err(Error::format(format!("unsupported dataset version {version}")));
        }
        let mut f = || r.u64().map(f64::from_bits);
        let (cell_size, time_step, ox, oy, t0) = (f()?, f()?, f()?, f()?, f()?);
        let grid = GridConfig {
            cell_size,
            time_step,
            origin: (ox, oy),
            width: r.u32()?,
            height: r.u32()?,
            t0,
        };
        let num_instants = r.u32()?;
        let n = r.len_prefix(4 + 8 * num_instants as usize)?;
        let mut ids = Vec::with_capacity(n);
        let mut tracks = Vec::with_capacity(n);
        for _ in 0..n {
            ids.push(r.str()?);
            let mut track = Vec::with_capacity(num_instants as usize);
            for _ in 0..num_instants {
                let (x, y) = (r.u32()?, r.u32()?);
                track.push((x != u32::MAX).then_some(Cell::new(x, y)));
            }
            tracks.push(track);
        }
        r.finish()?;
        let ds = RegularDataset {
            grid,
            num_instants,
            ids,
            tracks,
        };
        ds.validate()?;
        Ok(ds)
    }
}

const DUMP_MAGIC: &[u8; 4] = b"GRDS";
const DUMP_VERSION: u16 = 1;

/// Counts of pings left out by [`regularize`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RegularizeReport {
    pub accepted: usize,
    pub out_of_grid: usize,
    pub before_start: usize,
    /// Pings that lost their bucket to one nearer the instant center.
    pub superseded: usize,
}

/// Discretizes pings in space and time. Objects are numbered in ascending
/// order of their external id.
pub fn regularize(pings: &[RawPing], cfg: &GridConfig) -> Result<(RegularDataset, RegularizeReport)> {
    cfg.validate()?;
    let mut report = RegularizeReport::default();
    // distance to the bucket center, timestamp, input order, cell
    type Pick = (f64, f64, usize, Cell);
    let mut buckets: BTreeMap<&str, BTreeMap<u32, Pick>> = BTreeMap::new();
    let mut max_instant = None;
    for (i, p) in pings.iter().enumerate() {
        if !(p.timestamp.is_finite() && p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::invalid(format!("non-finite ping for object {:?}", p.object_id)));
        }
        buckets.entry(&p.object_id).or_default();
        let Some(cell) = cfg.cell_of(p.x, p.y) else {
            report.out_of_grid += 1;
            continue;
        };
        let instant = cfg.instant_of(p.timestamp);
        if instant < 0.0 {
            report.before_start += 1;
            continue;
        }
        if instant >= f64::from(u32::MAX) {
            return Err(Error::invalid("timestamp too far past the first instant"));
        }
        let instant = instant as u32;
        let dist = (p.timestamp - cfg.instant_center(instant)).abs();
        let cand = (dist, p.timestamp, i, cell);
        let slot = buckets.get_mut(p.object_id.as_str()).unwrap();
        match slot.get_mut(&instant) {
            Some(cur) => {
                report.superseded += 1;
                if (cand.0, cand.1, cand.2) < (cur.0, cur.1, cur.2) {
                    *cur = cand;
                }
            }
            None => {
                slot.insert(instant, cand);
            }
        }
        max_instant = max_instant.max(Some(instant));
    }
    let num_instants = max_instant.map_or(0, |m| m + 1);
    let mut ids = Vec::with_capacity(buckets.len());
    let mut tracks = Vec::with_capacity(buckets.len());
    for (id, slots) in buckets {
        let mut track = vec![None; num_instants as usize];
        for (t, (_, _, _, c)) in slots {
            track[t as usize] = Some(c);
            report.accepted += 1;
        }
        ids.push(id.to_string());
        tracks.push(track);
    }
    if report.out_of_grid > 0 {
        log::warn!("dropped {} pings outside the grid", report.out_of_grid);
    }
    Ok((
        RegularDataset {
            grid: *cfg,
            num_instants,
            ids,
            tracks,
        },
        report,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ping(id: &str, t: f64, x: f64, y: f64) -> RawPing {
        RawPing {
            object_id: id.into(),
            timestamp: t,
            x,
            y,
        }
    }

    fn grid() -> GridConfig {
        GridConfig {
            width: 10,
            height: 10,
            ..GridConfig::default()
        }
    }

    #[test]
    fn ping_at_origin() {
        let (ds, rep) = regularize(&[ping("a", 0.0, 0.0, 0.0)], &grid()).unwrap();
        assert_eq!(ds.num_instants, 1);
        assert_eq!(ds.tracks, vec![vec![Some(Cell::new(0, 0))]]);
        assert_eq!(rep.accepted, 1);
    }

    #[test]
    fn nearest_to_center_wins() {
        let pings = [
            ping("a", 75.0, 10.0, 10.0),
            ping("a", 62.0, 110.0, 10.0),
            // exact tie with the first: the earlier timestamp wins
            ping("b", 45.0, 10.0, 10.0),
            ping("b", 75.0, 60.0, 10.0),
        ];
        let (ds, rep) = regularize(&pings, &grid()).unwrap();
        assert_eq!(ds.ids, vec!["a", "b"]);
        assert_eq!(ds.tracks[0][1], Some(Cell::new(2, 0)));
        assert_eq!(ds.tracks[1][1], Some(Cell::new(0, 0)));
        assert_eq!(rep.superseded, 2);
    }

    #[test]
    fn drops_out_of_grid_and_early() {
        let pings = [
            ping("a", 0.0, -1.0, 0.0),
            ping("a", 0.0, 500.0, 0.0),
            ping("a", -60.0, 0.0, 0.0),
            ping("a", 600.0, 499.0, 499.0),
        ];
        let (ds, rep) = regularize(&pings, &grid()).unwrap();
        assert_eq!(rep.out_of_grid, 2);
        assert_eq!(rep.before_start, 1);
        assert_eq!(ds.num_instants, 11);
        assert_eq!(ds.tracks[0][10], Some(Cell::new(9, 9)));
        assert_eq!(ds.tracks[0].iter().flatten().count(), 1);
    }

    #[test]
    fn gap_leaves_absent_instants() {
        let pings = [ping("a", 0.0, 0.0, 0.0), ping("a", 600.0, 0.0, 0.0)];
        let (ds, _) = regularize(&pings, &grid()).unwrap();
        assert_eq!(ds.tracks[0].iter().filter(|c| c.is_none()).count(), 9);
    }

    #[test]
    fn idempotent_on_regular_input() {
        let ds = gen_synthetic(&SynthConfig {
            num_objects: 20,
            num_instants: 50,
            width: 64,
            height: 64,
            gap_fraction: 0.5,
            ..SynthConfig::default()
        });
        let (again, rep) = regularize(&ds.to_pings(), &ds.grid).unwrap();
        assert_eq!(rep.superseded + rep.out_of_grid + rep.before_start, 0);
        // trailing all-absent instants are not recoverable from pings
        let n = again.num_instants as usize;
        let mut expect = ds.clone();
        expect.num_instants = again.num_instants;
        for t in &mut expect.tracks {
            assert!(t[n..].iter().all(Option::is_none));
            t.truncate(n);
        }
        // objects without any ping vanish as well
        let mut order: Vec<usize> = (0..ds.ids.len())
            .filter(|&i| ds.tracks[i].iter().any(Option::is_some))
            .collect();
        order.sort_by(|&a, &b| ds.ids[a].cmp(&ds.ids[b]));
        expect.ids = order.iter().map(|&i| ds.ids[i].clone()).collect();
        expect.tracks = order.iter().map(|&i| expect.tracks[i].clone()).collect();
        assert_eq!(again, expect);
    }

    #[test]
    fn fit_covers_all_pings() {
        let pings = [ping("a", 30.0, -100.0, 20.0), ping("b", 90.0, 149.0, 20.0)];
        let cfg = GridConfig::fit(&pings, 50.0, 60.0).unwrap();
        assert_eq!((cfg.width, cfg.height, cfg.t0), (5, 1, 30.0));
        let (ds, rep) = regularize(&pings, &cfg).unwrap();
        assert_eq!(rep.accepted, 2);
        assert_eq!(ds.tracks[1][1], Some(Cell::new(4, 0)));
    }

    #[test]
    fn dump_roundtrip_and_rejects_garbage() {
        let ds = gen_synthetic(&SynthConfig {
            num_objects: 5,
            num_instants: 30,
            width: 32,
            height: 32,
            gap_fraction: 1.0,
            ..SynthConfig::default()
        });
        assert_eq!(RegularDataset::load(&ds.dump()).unwrap(), ds);
        assert!(matches!(RegularDataset::load(b"nope"), Err(Error::Format(_))));
        let bytes = ds.dump();
        assert!(RegularDataset::load(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn empty_input() {
        let (ds, _) = regularize(&[], &grid()).unwrap();
        assert_eq!(ds.num_instants, 0);
        assert!(ds.tracks.is_empty());
    }
}
