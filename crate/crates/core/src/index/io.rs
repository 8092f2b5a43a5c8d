//! Index file format and size accounting.

use std::path::Path;

use super::log::LogStore;
use super::{IndexHeader, Mode, TrajectoryIndex};
use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::repair::Grammar;
use crate::snapshot::Snapshot;
use crate::ObjectId;

const MAGIC: &[u8; 4] = b"GRCT";
const VERSION: u16 = 1;

/// Byte sizes of the index parts.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SizeReport {
    pub snapshots: u64,
    pub logs: u64,
    pub grammar: u64,
    pub dictionary: u64,
    pub total: u64,
    /// Two 4-byte coordinates per present object-instant.
    pub plain: u64,
    /// `total / plain`.
    pub ratio: f64,
}

impl std::fmt::Display for SizeReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let pct = |v: u64| {
            if self.total == 0 {
                0.0
            } else {
                100.0 * v as f64 / self.total as f64
            }
        };
        writeln!(
            f,
            "snapshots  {:>12} bytes ({:.2}%)",
            self.snapshots,
            pct(self.snapshots)
        )?;
        writeln!(f, "logs       {:>12} bytes ({:.2}%)", self.logs, pct(self.logs))?;
        writeln!(f, "grammar    {:>12} bytes ({:.2}%)", self.grammar, pct(self.grammar))?;
        writeln!(
            f,
            "dictionary {:>12} bytes ({:.2}%)",
            self.dictionary,
            pct(self.dictionary)
        )?;
        writeln!(f, "total      {:>12} bytes", self.total)?;
        writeln!(f, "plain      {:>12} bytes", self.plain)?;
        write!(f, "ratio      {:>12.2}%", 100.0 * self.ratio)
    }
}

fn write_header(w: &mut Writer, h: &IndexHeader) {
    w.u32(h.width);
    w.u32(h.height);
    w.u32(h.num_objects);
    w.u32(h.num_instants);
    w.u32(h.period);
    w.u64(h.v_max);
    w.u8(match h.mode {
        Mode::Scdc => 0,
        Mode::Gract => 1,
    });
    w.u32(h.k);
    w.u32(h.scdc_s);
    w.u32(h.dac_width);
    w.u64(h.num_positions);
}

fn read_header(r: &mut Reader<'_>) -> Result<IndexHeader> {
    let h = IndexHeader {
        width: r.u32()?,
        height: r.u32()?,
        num_objects: r.u32()?,
        num_instants: r.u32()?,
        period: r.u32()?,
        v_max: r.u64()?,
        mode: match r.u8()? {
            0 => Mode::Scdc,
            1 => Mode::Gract,
            m => return Err(Error::format(format!("unknown log mode {m}"))),
        },
        k: r.u32()?,
        scdc_s: r.u32()?,
        dac_width: r.u32()?,
        num_positions: r.u64()?,
    };
    if h.period < 2 || h.k < 2 || h.width == 0 || h.height == 0 {
        return Err(Error::format("header fields out of range"));
    }
    Ok(h)
}

impl TrajectoryIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.section(|w| write_header(w, &self.header));
        w.section(|w| {
            w.u64(self.ids.len() as u64);
            for id in &self.ids {
                w.str(id);
            }
        });
        w.section(|w| {
            w.u64(self.snapshots.len() as u64);
            for s in &self.snapshots {
                s.write(w);
            }
        });
        w.section(|w| self.log.write(w));
        if let Some(g) = self.log.grammar() {
            w.section(|w| g.write(w));
        }
        w.into_inner()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.bytes(4).map_err(|_| Error::format("file too short"))? != MAGIC {
            return Err(Error::format("bad magic: not an index file"));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::format(format!("unsupported index version {version}")));
        }
        let mut sec = r.section()?;
        let header = read_header(&mut sec)?;
        sec.finish()?;

        let mut sec = r.section()?;
        let n = sec.len_prefix(4)?;
        if n != header.num_objects as usize {
            return Err(Error::format("dictionary size differs from the object count"));
        }
        let mut ids = Vec::with_capacity(n);
        for _ in 0..n {
            ids.push(sec.str()?);
        }
        sec.finish()?;
        let id_lookup: std::collections::HashMap<String, ObjectId> = ids
            .iter()
            .enumerate()
            .map(|(o, id)| (id.clone(), o as ObjectId))
            .collect();
        if id_lookup.len() != ids.len() {
            return Err(Error::format("duplicate object id in dictionary"));
        }

        let mut sec = r.section()?;
        let ns = sec.len_prefix(1)?;
        if ns != header.num_snapshots() {
            return Err(Error::format("snapshot count does not match the header"));
        }
        let mut snapshots = Vec::with_capacity(ns);
        for i in 0..ns {
            let s = Snapshot::read(&mut sec)?;
            if u64::from(s.instant()) != i as u64 * u64::from(header.period)
                || s.num_objects() != header.num_objects
                || s.tree().width() != header.width
                || s.tree().height() != header.height
            {
                return Err(Error::format(format!("snapshot {i} does not match the header")));
            }
            snapshots.push(s);
        }
        sec.finish()?;

        let mut log_sec = r.section()?;
        let log = match header.mode {
            Mode::Scdc => LogStore::read_scdc(&mut log_sec)?,
            Mode::Gract => {
                let mut gsec = r.section()?;
                let g = Grammar::read(&mut gsec)?;
                gsec.finish()?;
                LogStore::read_gract(&mut log_sec, g)?
            }
        };
        log_sec.finish()?;
        r.finish()?;
        log.validate(header.num_objects as usize * ns)?;
        Ok(Self {
            header,
            ids,
            id_lookup,
            snapshots,
            log,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub fn stats(&self) -> SizeReport {
        let snapshots: u64 = self.snapshots.iter().map(|s| s.size_bytes() as u64).sum();
        let logs = self.log.size_bytes() as u64;
        let grammar = self.log.grammar().map_or(0, |g| g.size_bytes() as u64);
        let dictionary = self.ids.iter().map(|s| 4 + s.len() as u64).sum::<u64>() + 8;
        let present = self.header.num_positions;
        let total = snapshots + logs + grammar + dictionary;
        let plain = 8 * present;
        SizeReport {
            snapshots,
            logs,
            grammar,
            dictionary,
            total,
            plain,
            ratio: if plain == 0 { 0.0 } else { total as f64 / plain as f64 },
        }
    }
}
