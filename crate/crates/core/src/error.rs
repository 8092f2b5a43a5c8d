use thiserror::Error;

/// Errors produced while building, loading or querying an index.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of range: {value} (limit {limit})")]
    OutOfRange { what: &'static str, value: u64, limit: u64 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("corrupt index: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::Corrupt(msg.into())
    }

    /// True for errors about the query itself (unknown object, instant out of range)
    /// rather than about the stored data.
    pub fn is_query_domain(&self) -> bool {
        matches!(self, Error::OutOfRange { .. } | Error::NotFound(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_object(o: u32, num_objects: u32) -> Result<()> {
    if o < num_objects {
        Ok(())
    } else {
        Err(Error::NotFound(format!("object {o}")))
    }
}

pub(crate) fn check_instant(t: u32, num_instants: u32) -> Result<()> {
    if t < num_instants {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "instant",
            value: t.into(),
            limit: num_instants.into(),
        })
    }
}

pub(crate) fn check_interval(ts: u32, te: u32, num_instants: u32) -> Result<()> {
    check_instant(te, num_instants)?;
    if ts <= te {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "interval start",
            value: ts.into(),
            limit: te.into(),
        })
    }
}

pub(crate) fn check_rect(r: &crate::geom::Rect, width: u32, height: u32) -> Result<()> {
    if r.x2 >= width {
        return Err(Error::OutOfRange {
            what: "rectangle x",
            value: r.x2.into(),
            limit: width.into(),
        });
    }
    if r.y2 >= height {
        return Err(Error::OutOfRange {
            what: "rectangle y",
            value: r.y2.into(),
            limit: height.into(),
        });
    }
    Ok(())
}
