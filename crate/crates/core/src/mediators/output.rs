//! Text output writers and the matching readers.
//!
//! Time series are comma-separated:
//!
//! ```text
//! time,ecosystem_prey__population_density
//! 0,2
//! 0.01,2.01
//! ```
//!
//! Grid snapshots carry a `# key=value` header followed by one line per
//! grid row (a single line for rank 0 and rank 1 grids):
//!
//! ```text
//! # name=plate_surface__temperature
//! # t=0.5
//! # shape=2 3
//! # spacing=1 1
//! # origin=0 0
//! 0 0 0
//! 0 1.5 0
//! ```
//!
//! Numbers use the shortest representation that parses back to the same
//! value, so write -> read is exact.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::bmi::{GridDescriptor, GridKind};
use crate::scalar::Scalar;

use super::MediatorError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MediatorError + '_ {
    move |source| MediatorError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn join<T: Display>(items: &[T], sep: &str) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// Incremental CSV time-series writer; each row is flushed as written so a
/// failed run keeps what it produced.
pub struct TimeseriesWriter {
    path: PathBuf,
    out: BufWriter<File>,
    columns: usize,
    last_time: Option<f64>,
}

impl TimeseriesWriter {
    pub fn create<N: AsRef<str>>(path: &Path, names: &[N]) -> Result<Self, MediatorError> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut out = BufWriter::new(file);
        let header: Vec<&str> = std::iter::once("time")
            .chain(names.iter().map(|n| n.as_ref()))
            .collect();
        writeln!(out, "{}", header.join(",")).map_err(io_err(path))?;
        out.flush().map_err(io_err(path))?;
        Ok(TimeseriesWriter {
            path: path.to_path_buf(),
            out,
            columns: names.len(),
            last_time: None,
        })
    }

    pub fn append<S: Scalar>(&mut self, time: S, values: &[S]) -> Result<(), MediatorError> {
        let t = time.as_f64();
        if let Some(previous) = self.last_time {
            if t <= previous || t.is_nan() {
                return Err(MediatorError::NonIncreasingTime { time: t, previous });
            }
        }
        if values.len() != self.columns {
            return Err(MediatorError::Format {
                path: self.path.clone(),
                line: 0,
                message: format!(
                    "row has {} values, header has {}",
                    values.len(),
                    self.columns
                ),
            });
        }
        let mut row = time.to_string();
        for v in values {
            row.push(',');
            row.push_str(&v.to_string());
        }
        writeln!(self.out, "{row}").map_err(io_err(&self.path))?;
        self.out.flush().map_err(io_err(&self.path))?;
        self.last_time = Some(t);
        Ok(())
    }
}

/// Writes a whole series at once; each record is `(time, one value per name)`.
pub fn write_timeseries<S: Scalar, N: AsRef<str>>(
    path: &Path,
    names: &[N],
    records: &[(S, Vec<S>)],
) -> Result<(), MediatorError> {
    let mut writer = TimeseriesWriter::create(path, names)?;
    for (t, values) in records {
        writer.append(*t, values)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeseries<S> {
    pub names: Vec<String>,
    pub rows: Vec<(S, Vec<S>)>,
}

impl<S: Scalar> Timeseries<S> {
    pub fn column(&self, name: &str) -> Option<Vec<S>> {
        let k = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|(_, v)| v[k]).collect())
    }

    pub fn times(&self) -> Vec<S> {
        self.rows.iter().map(|(t, _)| *t).collect()
    }
}

fn parse_number<S: Scalar>(text: &str, path: &Path, line: usize) -> Result<S, MediatorError> {
    text.trim().parse::<S>().map_err(|_| MediatorError::Format {
        path: path.to_path_buf(),
        line,
        message: format!("not a number: {text:?}"),
    })
}

pub fn read_timeseries<S: Scalar>(path: &Path) -> Result<Timeseries<S>, MediatorError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(io_err(path))?
        .ok_or_else(|| MediatorError::Format {
            path: path.to_path_buf(),
            line: 1,
            message: "missing header".to_string(),
        })?;
    let mut columns = header.split(',');
    if columns.next() != Some("time") {
        return Err(MediatorError::Format {
            path: path.to_path_buf(),
            line: 1,
            message: "header must start with `time`".to_string(),
        });
    }
    let names: Vec<String> = columns.map(str::to_string).collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        let lineno = k + 2;
        let mut fields = line.split(',');
        let t = parse_number(fields.next().unwrap_or(""), path, lineno)?;
        let values = fields
            .map(|f| parse_number(f, path, lineno))
            .collect::<Result<Vec<S>, _>>()?;
        if values.len() != names.len() {
            return Err(MediatorError::Format {
                path: path.to_path_buf(),
                line: lineno,
                message: format!("expected {} values, found {}", names.len(), values.len()),
            });
        }
        rows.push((t, values));
    }
    Ok(Timeseries { names, rows })
}

pub fn write_grid_snapshot<S: Scalar>(
    path: &Path,
    name: &str,
    descriptor: &GridDescriptor<S>,
    values: &[S],
    time: S,
) -> Result<(), MediatorError> {
    if values.len() != descriptor.size() {
        return Err(MediatorError::Format {
            path: path.to_path_buf(),
            line: 0,
            message: format!(
                "buffer has {} values, grid has {}",
                values.len(),
                descriptor.size()
            ),
        });
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    let row_len = match descriptor.kind {
        GridKind::Scalar => 1,
        GridKind::UniformRectilinear => *descriptor.shape.last().unwrap_or(&1),
    };
    let mut text = String::new();
    text.push_str(&format!("# name={name}\n"));
    text.push_str(&format!("# t={time}\n"));
    text.push_str(&format!("# shape={}\n", join(&descriptor.shape, " ")));
    text.push_str(&format!("# spacing={}\n", join(&descriptor.spacing, " ")));
    text.push_str(&format!("# origin={}\n", join(&descriptor.origin, " ")));
    for row in values.chunks(row_len) {
        text.push_str(&join(row, " "));
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSnapshot<S> {
    pub name: String,
    pub time: S,
    pub shape: Vec<usize>,
    pub spacing: Vec<S>,
    pub origin: Vec<S>,
    pub values: Vec<S>,
}

pub fn read_grid_snapshot<S: Scalar>(path: &Path) -> Result<GridSnapshot<S>, MediatorError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines().enumerate();
    let mut header = |key: &str| -> Result<String, MediatorError> {
        let (k, line) = lines.next().ok_or_else(|| MediatorError::Format {
            path: path.to_path_buf(),
            line: 0,
            message: format!("missing `{key}` header"),
        })?;
        line.strip_prefix(&format!("# {key}="))
            .map(str::to_string)
            .ok_or_else(|| MediatorError::Format {
                path: path.to_path_buf(),
                line: k + 1,
                message: format!("expected `# {key}=`"),
            })
    };
    let name = header("name")?;
    let time = parse_number(&header("t")?, path, 2)?;
    let shape = header("shape")?
        .split_whitespace()
        .map(|s| {
            s.parse::<usize>().map_err(|_| MediatorError::Format {
                path: path.to_path_buf(),
                line: 3,
                message: format!("bad extent {s:?}"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let spacing = header("spacing")?
        .split_whitespace()
        .map(|s| parse_number(s, path, 4))
        .collect::<Result<Vec<S>, _>>()?;
    let origin = header("origin")?
        .split_whitespace()
        .map(|s| parse_number(s, path, 5))
        .collect::<Result<Vec<S>, _>>()?;
    let mut values = Vec::new();
    for (k, line) in lines {
        for field in line.split_whitespace() {
            values.push(parse_number(field, path, k + 1)?);
        }
    }
    let expected: usize = shape.iter().product();
    if values.len() != expected {
        return Err(MediatorError::Format {
            path: path.to_path_buf(),
            line: 0,
            message: format!("expected {expected} values, found {}", values.len()),
        });
    }
    Ok(GridSnapshot {
        name,
        time,
        shape,
        spacing,
        origin,
        values,
    })
}
