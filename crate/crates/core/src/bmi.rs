//! The component interface every model implements.
//!
//! Two layers:
//!
//! * [`Component`] is the object-safe contract the coupler drives:
//!   lifecycle, variable introspection, getters/setters, clock and grid
//!   metadata. Variable names cross this boundary as plain strings so that a
//!   misbehaving component can still be inspected (the smoke tester checks
//!   them against the naming grammar).
//! * [`Model`] is what a concrete model writes: construction from a config,
//!   one time step, raw variable access. [`Bmi`] wraps a `Model` and supplies
//!   the contract rules (lifecycle state, time bounds, copies, shape checks)
//!   in one place.

use std::fmt;
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::scalar::Scalar;

/// Absolute tolerance for time comparisons, in the component's own units.
pub const TIME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum BmiError {
    #[error("cannot {operation}: component is {state}")]
    State {
        operation: &'static str,
        state: Lifecycle,
    },
    #[error("time {requested} outside [{current}, {end}]")]
    TimeBounds {
        requested: f64,
        current: f64,
        end: f64,
    },
    #[error("unknown variable {name:?}; valid names: {}", valid.join(", "))]
    UnknownVariable { name: String, valid: Vec<String> },
    #[error("variable {name}: expected {expected} values, got {actual}")]
    Shape {
        name: String,
        expected: usize,
        actual: usize,
    },
    #[error("variable {name}: expected units {expected:?}, got {actual:?}")]
    Units {
        name: String,
        expected: String,
        actual: String,
    },
    #[error("unknown grid id {0}")]
    UnknownGrid(u32),
    #[error("config key {key:?}: {message}")]
    Config { key: String, message: String },
    #[error("reading config {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },
    #[error("model failure: {0}")]
    Model(String),
}

impl BmiError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        BmiError::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lifecycle {
    Created,
    Initialized,
    Finalized,
}

impl fmt::Display for Lifecycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lifecycle::Created => "not initialized",
            Lifecycle::Initialized => "initialized",
            Lifecycle::Finalized => "finalized",
        })
    }
}

/// Flat key/value component configuration, stored as a JSON object.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Config(Map<String, Value>);

impl Config {
    pub fn new() -> Self {
        Config::default()
    }

    pub fn from_map(map: Map<String, Value>) -> Self {
        Config(map)
    }

    pub fn from_json_str(text: &str) -> Result<Self, BmiError> {
        match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(map)) => Ok(Config(map)),
            Ok(_) => Err(BmiError::config("", "config document must be an object")),
            Err(e) => Err(BmiError::config("", e.to_string())),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, BmiError> {
        let text = std::fs::read_to_string(path).map_err(|e| BmiError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Config::from_json_str(&text).map_err(|e| BmiError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.0.insert(key.to_string(), value.into());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn as_map(&self) -> &Map<String, Value> {
        &self.0
    }

    /// Later entries win.
    pub fn merged(&self, overrides: &Config) -> Config {
        let mut map = self.0.clone();
        for (k, v) in &overrides.0 {
            map.insert(k.clone(), v.clone());
        }
        Config(map)
    }

    pub fn real(&self, key: &str, default: f64) -> Result<f64, BmiError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| BmiError::config(key, format!("expected a finite number, got {v}"))),
        }
    }

    pub fn positive_real(&self, key: &str, default: f64) -> Result<f64, BmiError> {
        let value = self.real(key, default)?;
        if value > 0.0 {
            Ok(value)
        } else {
            Err(BmiError::config(key, format!("must be > 0, got {value}")))
        }
    }

    pub fn non_negative_real(&self, key: &str, default: f64) -> Result<f64, BmiError> {
        let value = self.real(key, default)?;
        if value >= 0.0 {
            Ok(value)
        } else {
            Err(BmiError::config(key, format!("must be >= 0, got {value}")))
        }
    }

    pub fn string(&self, key: &str, default: &str) -> Result<String, BmiError> {
        match self.0.get(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(v) => Err(BmiError::config(key, format!("expected a string, got {v}"))),
        }
    }

    pub fn choice(&self, key: &str, choices: &[&str], default: &str) -> Result<String, BmiError> {
        let value = self.string(key, default)?;
        if choices.contains(&value.as_str()) {
            Ok(value)
        } else {
            Err(BmiError::config(
                key,
                format!("{value:?} is not one of {}", choices.join("|")),
            ))
        }
    }

    pub fn reals(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, BmiError> {
        match self.0.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_f64()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| BmiError::config(key, format!("non-numeric entry {v}")))
                })
                .collect(),
            Some(v) => Err(BmiError::config(key, format!("expected an array, got {v}"))),
        }
    }

    pub fn shape(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, BmiError> {
        match self.0.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_u64()
                        .filter(|&n| n >= 1)
                        .map(|n| n as usize)
                        .ok_or_else(|| {
                            BmiError::config(key, format!("extents must be integers >= 1, got {v}"))
                        })
                })
                .collect(),
            Some(v) => Err(BmiError::config(key, format!("expected an array, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Scalar,
    UniformRectilinear,
}

/// Geometry of an exchanged field. Axes are ordered slowest-varying first
/// (row-major), for `shape`, `spacing` and `origin` alike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor<S> {
    pub grid_id: u32,
    pub kind: GridKind,
    pub shape: Vec<usize>,
    pub spacing: Vec<S>,
    pub origin: Vec<S>,
    /// Length units of `spacing` and `origin`.
    pub units: String,
}

impl<S: Scalar> GridDescriptor<S> {
    pub fn scalar(grid_id: u32) -> Self {
        GridDescriptor {
            grid_id,
            kind: GridKind::Scalar,
            shape: Vec::new(),
            spacing: Vec::new(),
            origin: Vec::new(),
            units: String::new(),
        }
    }

    pub fn uniform(
        grid_id: u32,
        shape: Vec<usize>,
        spacing: Vec<S>,
        origin: Vec<S>,
        units: impl Into<String>,
    ) -> Result<Self, BmiError> {
        if shape.is_empty() || shape.len() > 2 {
            return Err(BmiError::config("shape", "rank must be 1 or 2"));
        }
        if shape.contains(&0) {
            return Err(BmiError::config("shape", "extents must be >= 1"));
        }
        if spacing.len() != shape.len() {
            return Err(BmiError::config(
                "spacing",
                "length must equal the grid rank",
            ));
        }
        if spacing.iter().any(|&d| d <= S::zero() || !d.is_finite()) {
            return Err(BmiError::config("spacing", "components must be > 0"));
        }
        if origin.len() != shape.len() {
            return Err(BmiError::config(
                "origin",
                "length must equal the grid rank",
            ));
        }
        Ok(GridDescriptor {
            grid_id,
            kind: GridKind::UniformRectilinear,
            shape,
            spacing,
            origin,
            units: units.into(),
        })
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn size(&self) -> usize {
        self.shape.iter().product()
    }

    /// Same geometry, ignoring the id.
    pub fn same_geometry(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.shape == other.shape
            && self.spacing == other.spacing
            && self.origin == other.origin
            && self.units == other.units
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Node,
    Cell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarInfo {
    pub name: String,
    pub units: String,
    pub grid_id: u32,
    pub location: Location,
    pub item_count: usize,
}

impl VarInfo {
    pub fn node(name: &str, units: &str, grid_id: u32, item_count: usize) -> Self {
        VarInfo {
            name: name.to_string(),
            units: units.to_string(),
            grid_id,
            location: Location::Node,
            item_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeInfo<S> {
    pub start: S,
    pub end: S,
    pub step: S,
    pub units: String,
}

impl<S: Scalar> TimeInfo<S> {
    /// Reads `start_time`, `end_time` and `dt` from a config.
    pub fn from_config(
        config: &Config,
        default_step: f64,
        default_end: f64,
        units: &str,
    ) -> Result<Self, BmiError> {
        let start = config.real("start_time", 0.0)?;
        let end = config.real("end_time", default_end)?;
        let step = config.positive_real("dt", default_step)?;
        if end < start {
            return Err(BmiError::config(
                "end_time",
                format!("end_time {end} precedes start_time {start}"),
            ));
        }
        Ok(TimeInfo {
            start: S::of(start),
            end: S::of(end),
            step: S::of(step),
            units: units.to_string(),
        })
    }
}

/// A flat row-major copy of a variable's values, tagged with its units.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueBuffer<S> {
    pub values: Vec<S>,
    pub units: String,
}

impl<S: Scalar> ValueBuffer<S> {
    pub fn new(values: Vec<S>, units: impl Into<String>) -> Self {
        ValueBuffer {
            values,
            units: units.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// The contract the coupling engine drives. One instance is used from one
/// thread at a time; instances may move between threads between calls.
pub trait Component<S: Scalar>: Send {
    fn component_name(&self) -> &str;

    fn initialize(&mut self, config: &Config) -> Result<(), BmiError>;

    fn initialize_from_path(&mut self, path: &Path) -> Result<(), BmiError> {
        let config = Config::from_path(path)?;
        self.initialize(&config)
    }

    fn update(&mut self) -> Result<(), BmiError>;

    /// Takes whole steps while the next step lands at or before `t`
    /// (within [`TIME_TOLERANCE`]).
    fn update_until(&mut self, t: S) -> Result<(), BmiError>;

    fn finalize(&mut self) -> Result<(), BmiError>;

    fn input_var_names(&self) -> Result<Vec<String>, BmiError>;
    fn output_var_names(&self) -> Result<Vec<String>, BmiError>;
    fn var_info(&self, name: &str) -> Result<VarInfo, BmiError>;

    fn var_grid(&self, name: &str) -> Result<u32, BmiError> {
        Ok(self.var_info(name)?.grid_id)
    }

    fn var_units(&self, name: &str) -> Result<String, BmiError> {
        Ok(self.var_info(name)?.units)
    }

    fn var_location(&self, name: &str) -> Result<Location, BmiError> {
        Ok(self.var_info(name)?.location)
    }

    fn get_value(&self, name: &str) -> Result<ValueBuffer<S>, BmiError>;
    fn set_value(&mut self, name: &str, values: &ValueBuffer<S>) -> Result<(), BmiError>;

    fn current_time(&self) -> Result<S, BmiError>;
    fn start_time(&self) -> Result<S, BmiError>;
    fn end_time(&self) -> Result<S, BmiError>;
    fn time_step(&self) -> Result<S, BmiError>;
    fn time_units(&self) -> Result<String, BmiError>;

    fn grid_descriptor(&self, grid_id: u32) -> Result<GridDescriptor<S>, BmiError>;
}

/// What a concrete model implements; wrap it in [`Bmi`] to get a
/// [`Component`].
pub trait Model<S: Scalar>: Send + Sized {
    const CLASS: &'static str;

    /// Builds an initialized model, applying defaults for absent keys.
    fn from_config(config: &Config) -> Result<Self, BmiError>;

    fn time_info(&self) -> &TimeInfo<S>;
    fn input_vars(&self) -> Vec<VarInfo>;
    fn output_vars(&self) -> Vec<VarInfo>;
    fn grid(&self, grid_id: u32) -> Option<GridDescriptor<S>>;

    /// Current values of an output variable, `None` if not an output.
    fn read(&self, name: &str) -> Option<Vec<S>>;

    /// Stores values for an input variable. Called only with names from
    /// `input_vars` and buffers of the right length.
    fn write(&mut self, name: &str, values: &[S]);

    /// Advances one step; `new_time` is the time after the step.
    fn advance(&mut self, new_time: S) -> Result<(), String>;
}

/// Lifecycle-checked [`Component`] over a [`Model`].
pub struct Bmi<S: Scalar, M: Model<S>> {
    state: Lifecycle,
    model: Option<M>,
    steps: u64,
    _scalar: PhantomData<S>,
}

impl<S: Scalar, M: Model<S>> Default for Bmi<S, M> {
    fn default() -> Self {
        Bmi {
            state: Lifecycle::Created,
            model: None,
            steps: 0,
            _scalar: PhantomData,
        }
    }
}

impl<S: Scalar, M: Model<S>> Bmi<S, M> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn model(&self) -> Option<&M> {
        self.model.as_ref()
    }

    fn live(&self, operation: &'static str) -> Result<&M, BmiError> {
        match (&self.state, &self.model) {
            (Lifecycle::Initialized, Some(m)) => Ok(m),
            _ => Err(BmiError::State {
                operation,
                state: self.state,
            }),
        }
    }

    fn live_mut(&mut self, operation: &'static str) -> Result<&mut M, BmiError> {
        match (&self.state, &mut self.model) {
            (Lifecycle::Initialized, Some(m)) => Ok(m),
            _ => Err(BmiError::State {
                operation,
                state: self.state,
            }),
        }
    }

    fn time_at(time: &TimeInfo<S>, steps: u64) -> S {
        time.start + time.step * S::of(steps as f64)
    }

    fn all_names(model: &M) -> Vec<String> {
        let mut names: Vec<String> = model
            .output_vars()
            .into_iter()
            .chain(model.input_vars())
            .map(|v| v.name)
            .collect();
        names.sort();
        names.dedup();
        names
    }
}

impl<S: Scalar, M: Model<S>> Component<S> for Bmi<S, M> {
    fn component_name(&self) -> &str {
        M::CLASS
    }

    fn initialize(&mut self, config: &Config) -> Result<(), BmiError> {
        if self.state != Lifecycle::Created {
            return Err(BmiError::State {
                operation: "initialize",
                state: self.state,
            });
        }
        self.model = Some(M::from_config(config)?);
        self.steps = 0;
        self.state = Lifecycle::Initialized;
        Ok(())
    }

    fn update(&mut self) -> Result<(), BmiError> {
        let steps = self.steps;
        let model = self.live_mut("update")?;
        let time = model.time_info().clone();
        let next = Self::time_at(&time, steps + 1);
        if next > time.end + S::of(TIME_TOLERANCE) {
            return Err(BmiError::TimeBounds {
                requested: next.as_f64(),
                current: Self::time_at(&time, steps).as_f64(),
                end: time.end.as_f64(),
            });
        }
        model.advance(next).map_err(BmiError::Model)?;
        self.steps += 1;
        Ok(())
    }

    fn update_until(&mut self, t: S) -> Result<(), BmiError> {
        let time = self.live("update_until")?.time_info().clone();
        let tol = S::of(TIME_TOLERANCE);
        let current = Self::time_at(&time, self.steps);
        if t < current - tol || t > time.end + tol {
            return Err(BmiError::TimeBounds {
                requested: t.as_f64(),
                current: current.as_f64(),
                end: time.end.as_f64(),
            });
        }
        while Self::time_at(&time, self.steps + 1) <= t + tol {
            self.update()?;
        }
        Ok(())
    }

    fn finalize(&mut self) -> Result<(), BmiError> {
        self.live("finalize")?;
        self.state = Lifecycle::Finalized;
        Ok(())
    }

    fn input_var_names(&self) -> Result<Vec<String>, BmiError> {
        let model = self.live("list inputs")?;
        Ok(model.input_vars().into_iter().map(|v| v.name).collect())
    }

    fn output_var_names(&self) -> Result<Vec<String>, BmiError> {
        let model = self.live("list outputs")?;
        Ok(model.output_vars().into_iter().map(|v| v.name).collect())
    }

    fn var_info(&self, name: &str) -> Result<VarInfo, BmiError> {
        let model = self.live("describe variable")?;
        model
            .output_vars()
            .into_iter()
            .chain(model.input_vars())
            .find(|v| v.name == name)
            .ok_or_else(|| BmiError::UnknownVariable {
                name: name.to_string(),
                valid: Self::all_names(model),
            })
    }

    fn get_value(&self, name: &str) -> Result<ValueBuffer<S>, BmiError> {
        let model = self.live("get_value")?;
        let info = model.output_vars().into_iter().find(|v| v.name == name);
        match (info, model.read(name)) {
            (Some(info), Some(values)) => Ok(ValueBuffer::new(values, info.units)),
            _ => Err(BmiError::UnknownVariable {
                name: name.to_string(),
                valid: model.output_vars().into_iter().map(|v| v.name).collect(),
            }),
        }
    }

    fn set_value(&mut self, name: &str, values: &ValueBuffer<S>) -> Result<(), BmiError> {
        let model = self.live_mut("set_value")?;
        let Some(info) = model.input_vars().into_iter().find(|v| v.name == name) else {
            return Err(BmiError::UnknownVariable {
                name: name.to_string(),
                valid: model.input_vars().into_iter().map(|v| v.name).collect(),
            });
        };
        if values.len() != info.item_count {
            return Err(BmiError::Shape {
                name: name.to_string(),
                expected: info.item_count,
                actual: values.len(),
            });
        }
        if !values.units.is_empty() && values.units != info.units {
            return Err(BmiError::Units {
                name: name.to_string(),
                expected: info.units,
                actual: values.units.clone(),
            });
        }
        model.write(name, &values.values);
        Ok(())
    }

    fn current_time(&self) -> Result<S, BmiError> {
        let model = self.live("current_time")?;
        Ok(Self::time_at(model.time_info(), self.steps))
    }

    fn start_time(&self) -> Result<S, BmiError> {
        Ok(self.live("start_time")?.time_info().start)
    }

    fn end_time(&self) -> Result<S, BmiError> {
        Ok(self.live("end_time")?.time_info().end)
    }

    fn time_step(&self) -> Result<S, BmiError> {
        Ok(self.live("time_step")?.time_info().step)
    }

    fn time_units(&self) -> Result<String, BmiError> {
        Ok(self.live("time_units")?.time_info().units.clone())
    }

    fn grid_descriptor(&self, grid_id: u32) -> Result<GridDescriptor<S>, BmiError> {
        self.live("grid_descriptor")?
            .grid(grid_id)
            .ok_or(BmiError::UnknownGrid(grid_id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_typed_getters() {
        let c =
            Config::from_json_str(r#"{"a": 2.5, "s": "x", "shape": [3, 4], "bad": "q"}"#).unwrap();
        assert_eq!(c.real("a", 0.0).unwrap(), 2.5);
        assert_eq!(c.real("missing", 7.0).unwrap(), 7.0);
        assert_eq!(c.shape("shape", &[1]).unwrap(), vec![3, 4]);
        assert_eq!(c.string("s", "").unwrap(), "x");
        let err = c.real("bad", 0.0).unwrap_err();
        assert!(matches!(err, BmiError::Config { ref key, .. } if key == "bad"));
        assert!(c.choice("s", &["y", "z"], "y").is_err());
        assert!(Config::from_json_str("[1]").is_err());
    }

    #[test]
    fn grid_descriptor_invariants() {
        let g = GridDescriptor::<f64>::uniform(0, vec![3, 2], vec![1.0, 2.0], vec![0.0, 0.0], "m")
            .unwrap();
        assert_eq!(g.rank(), 2);
        assert_eq!(g.size(), 6);
        let s = GridDescriptor::<f64>::scalar(1);
        assert_eq!((s.rank(), s.size()), (0, 1));
        let err = GridDescriptor::<f64>::uniform(0, vec![3], vec![-1.0], vec![0.0], "m");
        assert!(matches!(err, Err(BmiError::Config { ref key, .. }) if key == "spacing"));
        assert!(GridDescriptor::<f64>::uniform(0, vec![3], vec![0.0], vec![0.0], "m").is_err());
    }

    #[test]
    fn time_info_rejects_reversed_clock() {
        let mut c = Config::new();
        c.set("start_time", 2.0);
        c.set("end_time", 1.0);
        assert!(TimeInfo::<f64>::from_config(&c, 0.1, 10.0, "s").is_err());
        c.set("end_time", 3.0);
        c.set("dt", 0.0);
        assert!(TimeInfo::<f64>::from_config(&c, 0.1, 10.0, "s").is_err());
    }
}
