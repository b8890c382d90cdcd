//! Framework services attached to links: unit conversion, grid mapping,
//! time interpolation and text output.

mod gridmap;
mod output;
mod time_interp;
mod units;

use std::path::PathBuf;

pub use gridmap::{apply_map, build_map, GridMapPlan, MapMethod};
pub use output::{
    read_grid_snapshot, read_timeseries, write_grid_snapshot, write_timeseries, GridSnapshot,
    Timeseries, TimeseriesWriter,
};
pub use time_interp::{interp_time, TimeSeriesWindow};
pub use units::{convert, convert_in_place, BaseUnit, Dimension, UnitConversion, UnitExpr};

#[derive(Debug, thiserror::Error)]
pub enum MediatorError {
    #[error("unknown unit symbol {0:?}")]
    UnknownUnit(String),
    #[error("malformed unit term {0:?}")]
    BadUnitSyntax(String),
    #[error("incompatible units: {from:?} and {to:?} have different dimensions")]
    IncompatibleUnits { from: String, to: String },
    #[error("unsupported units {0:?}: offset temperature units must stand alone")]
    UnsupportedUnits(String),
    #[error("grid mapping: {0}")]
    Mapping(String),
    #[error("time window holds no data")]
    NoData,
    #[error("time {requested} precedes the earliest snapshot at {earliest}")]
    BeforeWindow { requested: f64, earliest: f64 },
    #[error("snapshot time {time} does not follow {previous}")]
    NonIncreasingTime { time: f64, previous: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
}
