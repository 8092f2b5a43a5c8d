//! Compressed in-memory index for fixed-rate object trajectories.
//!
//! Positions are kept on a discrete grid. Every `period` instants a
//! [`Snapshot`] stores all objects in a k²-tree; in between, each object
//! keeps a log of relative movements, compressed either with (s,c)-dense
//! codes or with a Re-Pair grammar whose rules carry their time span,
//! displacement and bounding rectangle. Queries run on the compressed form.
//!
//! ```
//! use gract::dataio::{gen_synthetic, SynthConfig};
//! use gract::{BuildConfig, Mode, Rect, TrajectoryIndex};
//!
//! let data = gen_synthetic(&SynthConfig { num_objects: 20, num_instants: 100, ..Default::default() });
//! let idx = TrajectoryIndex::build(&data, &BuildConfig::new(30, Mode::Gract)).unwrap();
//! assert_eq!(idx.position(3, 42).unwrap(), data.tracks[3][42]);
//! let inside = idx.time_slice(&Rect::new(0, 0, 2047, 2047), 42).unwrap();
//! assert!(inside.iter().all(|&(o, c)| data.tracks[o as usize][42] == Some(c)));
//! ```

pub(crate) mod binio;
pub mod dataio;
pub mod error;
pub mod geom;
pub mod index;
pub mod k2tree;
pub mod movement;
pub mod repair;
pub mod scdc;
pub mod snapshot;
pub mod succinct;
pub mod workload;

/// Dense object identifier, `0..num_objects`.
pub type ObjectId = u32;

pub use dataio::{GridConfig, OracleStore, RawPing, RegularDataset};
pub use error::{Error, Result};
pub use geom::{Cell, Rect, RelRect};
pub use index::{expand_region, BuildConfig, IndexHeader, Mode, QueryOptions, QueryStats, SizeReport, TrajectoryIndex};
pub use k2tree::K2Tree;
pub use repair::{Grammar, RuleMeta};
pub use snapshot::{AbsentEntry, Snapshot};
