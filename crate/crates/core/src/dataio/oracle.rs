use super::RegularDataset;
use crate::error::{check_instant, check_interval, check_object, check_rect, Result};
use crate::geom::{Cell, Rect};
use crate::index::Track;
use crate::ObjectId;

/// Answers every query by scanning the uncompressed table.
#[derive(Clone, Debug)]
pub struct OracleStore {
    data: RegularDataset,
}

impl OracleStore {
    pub fn new(data: RegularDataset) -> Self {
        Self { data }
    }

    pub fn dataset(&self) -> &RegularDataset {
        &self.data
    }

    fn n(&self) -> u32 {
        self.data.num_instants
    }

    pub fn position(&self, o: ObjectId, t: u32) -> Result<Option<Cell>> {
        check_object(o, self.data.tracks.len() as u32)?;
        check_instant(t, self.n())?;
        Ok(self.data.tracks[o as usize][t as usize])
    }

    pub fn trajectory(&self, o: ObjectId, ts: u32, te: u32) -> Result<Track> {
        check_object(o, self.data.tracks.len() as u32)?;
        check_interval(ts, te, self.n())?;
        let track = &self.data.tracks[o as usize];
        Ok((ts..=te).map(|t| (t, track[t as usize])).collect())
    }

    pub fn time_slice(&self, rect: &Rect, t: u32) -> Result<Vec<(ObjectId, Cell)>> {
        check_instant(t, self.n())?;
        check_rect(rect, self.data.width(), self.data.height())?;
        Ok(self
            .data
            .tracks
            .iter()
            .enumerate()
            .filter_map(|(o, tr)| tr[t as usize].filter(|c| rect.contains(*c)).map(|c| (o as ObjectId, c)))
            .collect())
    }

    pub fn time_interval(&self, rect: &Rect, ts: u32, te: u32) -> Result<Vec<ObjectId>> {
        check_interval(ts, te, self.n())?;
        check_rect(rect, self.data.width(), self.data.height())?;
        Ok(self
            .data
            .tracks
            .iter()
            .enumerate()
            .filter(|(_, tr)| {
                tr[ts as usize..=te as usize]
                    .iter()
                    .any(|c| c.is_some_and(|c| rect.contains(c)))
            })
            .map(|(o, _)| o as ObjectId)
            .collect())
    }
}
