//! The composition document: instances, parameter overrides, links, clock
//! and outputs.
//!
//! ```json
//! {
//!   "title": "Lotka-Volterra",
//!   "clock": {"start": 0, "stop": 1, "step": 0.01, "units": "d"},
//!   "components": [{"id": "prey", "class": "lv_prey", "params": {"a": 1.0}}],
//!   "links": [{"from": "predator.ecosystem_predator__population_density",
//!              "to": "prey.ecosystem_predator__population_density",
//!              "mapper": "none", "units": "auto", "alias": false}],
//!   "outputs": [{"id": "prey", "var": "ecosystem_prey__population_density", "file": "prey.csv"}]
//! }
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bmi::Config;
use crate::mediators::{Dimension, MapMethod, UnitExpr};
use crate::standard_names::StandardName;

use super::Catalog;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompositionError {
    #[error("malformed composition document: {0}")]
    Malformed(String),
    #[error("duplicate instance id {0:?}")]
    DuplicateInstance(String),
    #[error("instance {instance:?}: unknown component class {class:?}")]
    UnknownClass { instance: String, class: String },
    #[error("invalid instance id {0:?}: use letters, digits, '_' or '-'")]
    BadInstanceId(String),
    #[error("malformed clock: {0}")]
    BadClock(String),
    #[error("{context}: unknown instance {instance:?}")]
    UnknownInstance { context: String, instance: String },
    #[error("malformed link endpoint {0:?}: expected \"instance.standard_name\"")]
    BadEndpoint(String),
    #[error("{context}: {name:?} is not a valid standard name: {reason}")]
    BadName {
        context: String,
        name: String,
        reason: String,
    },
    #[error("output file {0:?} must be a plain file name")]
    BadOutputFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mapper {
    #[default]
    None,
    Nearest,
    Bilinear,
}

impl Mapper {
    pub fn method(self) -> Option<MapMethod> {
        match self {
            Mapper::None => None,
            Mapper::Nearest => Some(MapMethod::Nearest),
            Mapper::Bilinear => Some(MapMethod::Bilinear),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UnitMode {
    #[default]
    Auto,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub instance: String,
    pub name: StandardName,
}

impl Endpoint {
    fn parse(text: &str, context: &str) -> Result<Endpoint, CompositionError> {
        let (instance, name) = text
            .split_once('.')
            .ok_or_else(|| CompositionError::BadEndpoint(text.to_string()))?;
        if instance.is_empty() {
            return Err(CompositionError::BadEndpoint(text.to_string()));
        }
        let name = StandardName::parse(name).map_err(|e| CompositionError::BadName {
            context: context.to_string(),
            name: name.to_string(),
            reason: e.to_string(),
        })?;
        Ok(Endpoint {
            instance: instance.to_string(),
            name,
        })
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.instance, self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub from: Endpoint,
    pub to: Endpoint,
    /// Explicitly pairs two differently named variables.
    pub alias: bool,
    pub mapper: Mapper,
    pub unit_mode: UnitMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub instance_id: String,
    pub component_class: String,
    pub params: Config,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clock {
    pub start: f64,
    pub stop: f64,
    /// Sync interval; the smallest component step when absent.
    pub sync_step: Option<f64>,
    pub units: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub instance_id: String,
    pub variable: StandardName,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    /// Store identity; empty for compositions loaded from files.
    pub id: String,
    pub title: String,
    pub owner: String,
    pub shared: bool,
    pub instances: Vec<Instance>,
    pub links: Vec<Link>,
    pub clock: Clock,
    pub outputs: Vec<OutputSpec>,
}

impl Composition {
    pub fn instance(&self, id: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.instance_id == id)
    }

    /// Serializes back to the document encoding.
    pub fn to_document(&self) -> Value {
        let doc = CompositionDoc {
            title: self.title.clone(),
            clock: ClockDoc {
                start: self.clock.start,
                stop: self.clock.stop,
                step: self.clock.sync_step,
                units: self.clock.units.clone(),
            },
            components: self
                .instances
                .iter()
                .map(|i| InstanceDoc {
                    id: i.instance_id.clone(),
                    class: i.component_class.clone(),
                    params: i.params.as_map().clone(),
                })
                .collect(),
            links: self
                .links
                .iter()
                .map(|l| LinkDoc {
                    from: l.from.to_string(),
                    to: l.to.to_string(),
                    mapper: Some(l.mapper),
                    units: Some(l.unit_mode),
                    alias: l.alias,
                })
                .collect(),
            outputs: self
                .outputs
                .iter()
                .map(|o| OutputDoc {
                    id: o.instance_id.clone(),
                    var: o.variable.to_string(),
                    file: o.file.clone(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("composition serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompositionDoc {
    title: String,
    clock: ClockDoc,
    components: Vec<InstanceDoc>,
    #[serde(default)]
    links: Vec<LinkDoc>,
    #[serde(default)]
    outputs: Vec<OutputDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClockDoc {
    start: f64,
    stop: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
    units: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    id: String,
    class: String,
    #[serde(default)]
    params: Map<String, Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    from: String,
    to: String,
    #[serde(default)]
    mapper: Option<Mapper>,
    #[serde(default)]
    units: Option<UnitMode>,
    #[serde(default)]
    alias: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputDoc {
    id: String,
    var: String,
    file: String,
}

fn valid_instance_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn valid_file_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && !name.starts_with('.')
        && !name.contains(['/', '\\'])
}

fn check_clock(clock: &ClockDoc) -> Result<(), CompositionError> {
    if !clock.start.is_finite() || !clock.stop.is_finite() {
        return Err(CompositionError::BadClock(
            "start and stop must be finite".into(),
        ));
    }
    if clock.stop <= clock.start {
        return Err(CompositionError::BadClock(format!(
            "stop {} must exceed start {}",
            clock.stop, clock.start
        )));
    }
    if let Some(step) = clock.step {
        if !(step > 0.0 && step.is_finite()) {
            return Err(CompositionError::BadClock(format!(
                "step {step} must be > 0"
            )));
        }
    }
    let units = UnitExpr::parse(&clock.units)
        .map_err(|e| CompositionError::BadClock(format!("units: {e}")))?;
    if units.dimension() != Dimension([0, 1, 0, 0]) {
        return Err(CompositionError::BadClock(format!(
            "units {:?} are not a time unit",
            clock.units
        )));
    }
    Ok(())
}

/// Parses and structurally checks a composition document. Semantic checks
/// (name matching, units, grid ranks) are [`super::validate_composition`]'s.
pub fn load_composition(
    document: &str,
    catalog: &Catalog,
) -> Result<Composition, CompositionError> {
    let doc: CompositionDoc =
        serde_json::from_str(document).map_err(|e| CompositionError::Malformed(e.to_string()))?;

    let mut seen = BTreeSet::new();
    for inst in &doc.components {
        if !valid_instance_id(&inst.id) {
            return Err(CompositionError::BadInstanceId(inst.id.clone()));
        }
        if !seen.insert(inst.id.clone()) {
            return Err(CompositionError::DuplicateInstance(inst.id.clone()));
        }
        if !catalog.is_composable(&inst.class) {
            return Err(CompositionError::UnknownClass {
                instance: inst.id.clone(),
                class: inst.class.clone(),
            });
        }
    }
    check_clock(&doc.clock)?;

    let declared = |id: &str, context: String| {
        if seen.contains(id) {
            Ok(())
        } else {
            Err(CompositionError::UnknownInstance {
                context,
                instance: id.to_string(),
            })
        }
    };

    let mut links = Vec::with_capacity(doc.links.len());
    for l in &doc.links {
        let context = format!("link {} -> {}", l.from, l.to);
        let from = Endpoint::parse(&l.from, &context)?;
        let to = Endpoint::parse(&l.to, &context)?;
        declared(&from.instance, context.clone())?;
        declared(&to.instance, context)?;
        links.push(Link {
            from,
            to,
            alias: l.alias,
            mapper: l.mapper.unwrap_or_default(),
            unit_mode: l.units.unwrap_or_default(),
        });
    }

    let mut outputs = Vec::with_capacity(doc.outputs.len());
    for o in &doc.outputs {
        let context = format!("output {}", o.file);
        declared(&o.id, context.clone())?;
        if !valid_file_name(&o.file) {
            return Err(CompositionError::BadOutputFile(o.file.clone()));
        }
        let variable = StandardName::parse(&o.var).map_err(|e| CompositionError::BadName {
            context,
            name: o.var.clone(),
            reason: e.to_string(),
        })?;
        outputs.push(OutputSpec {
            instance_id: o.id.clone(),
            variable,
            file: o.file.clone(),
        });
    }

    Ok(Composition {
        id: String::new(),
        title: doc.title,
        owner: String::new(),
        shared: false,
        instances: doc
            .components
            .into_iter()
            .map(|i| Instance {
                instance_id: i.id,
                component_class: i.class,
                params: Config::from_map(i.params),
            })
            .collect(),
        links,
        clock: Clock {
            start: doc.clock.start,
            stop: doc.clock.stop,
            sync_step: doc.clock.step,
            units: doc.clock.units,
        },
        outputs,
    })
}
