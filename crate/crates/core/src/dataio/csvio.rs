use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::RawPing;
use crate::error::{Error, Result};

#[derive(Deserialize, Serialize)]
struct Row {
    #[serde(rename = "objectId")]
    object_id: String,
    timestamp: String,
    x: f64,
    y: f64,
}

/// Epoch seconds, RFC 3339, or a naive `YYYY-MM-DD[T ]HH:MM:SS[.f]` read as UTC.
pub fn parse_timestamp(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        if v.is_finite() {
            return Ok(v);
        }
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp_micros() as f64 / 1e6);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt.and_utc().timestamp_micros() as f64 / 1e6);
        }
    }
    Err(Error::invalid(format!("unrecognized timestamp {s:?}")))
}

/// Reads `objectId,timestamp,x,y` rows; the header row is required.
pub fn read_pings<R: Read>(reader: R) -> Result<Vec<RawPing>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        out.push(RawPing {
            timestamp: parse_timestamp(&row.timestamp)?,
            object_id: row.object_id,
            x: row.x,
            y: row.y,
        });
    }
    Ok(out)
}

pub fn read_pings_path(path: impl AsRef<Path>) -> Result<Vec<RawPing>> {
    read_pings(std::fs::File::open(path)?)
}

pub fn write_pings<W: Write>(writer: W, pings: &[RawPing]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in pings {
        w.serialize(Row {
            object_id: p.object_id.clone(),
            timestamp: p.timestamp.to_string(),
            x: p.x,
            y: p.y,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pings_path(path: impl AsRef<Path>, pings: &[RawPing]) -> Result<()> {
    write_pings(std::io::BufWriter::new(std::fs::File::create(path)?), pings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps() {
        assert_eq!(parse_timestamp("120").unwrap(), 120.0);
        assert_eq!(parse_timestamp("1970-01-01T00:02:00Z").unwrap(), 120.0);
        assert_eq!(parse_timestamp("1970-01-01T01:02:00+01:00").unwrap(), 120.0);
        assert_eq!(parse_timestamp("1970-01-01 00:02:00").unwrap(), 120.0);
        assert_eq!(parse_timestamp("1970-01-01T00:02:00.5").unwrap(), 120.5);
        assert!(parse_timestamp("yesterday").is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let pings = vec![
            RawPing {
                object_id: "ship 1".into(),
                timestamp: 60.0,
                x: 1.5,
                y: -2.0,
            },
            RawPing {
                object_id: "b,2".into(),
                timestamp: 0.25,
                x: 0.0,
                y: 1e6,
            },
        ];
        let mut buf = Vec::new();
        write_pings(&mut buf, &pings).unwrap();
        assert!(buf.starts_with(b"objectId,timestamp,x,y\n"));
        assert_eq!(read_pings(&buf[..]).unwrap(), pings);
    }

    #[test]
    fn iso_rows_and_bad_rows() {
        let text = "objectId,timestamp,x,y\na, 2024-05-01T00:00:00Z ,1,2\n";
        let p = read_pings(text.as_bytes()).unwrap();
        assert_eq!(p[0].timestamp, 1714521600.0);
        assert!(read_pings("objectId,timestamp,x,y\na,0,notanumber,2\n".as_bytes()).is_err());
    }
}
