//! Component metadata and software citations.
//!
//! Each component is described by one JSON document (`registry/<class>.doc`);
//! the bundled set is compiled into the crate, and [`Registry::load_dir`]
//! reads an alternative directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::standard_names::StandardName;

const BUNDLED: &[(&str, &str)] = &[
    ("forcing.doc", include_str!("../registry/forcing.doc")),
    ("heat2d.doc", include_str!("../registry/heat2d.doc")),
    (
        "lv_predator.doc",
        include_str!("../registry/lv_predator.doc"),
    ),
    ("lv_prey.doc", include_str!("../registry/lv_prey.doc")),
];

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown component class {0:?}")]
    NotFound(String),
    #[error("invalid metadata for {class}: {message}")]
    Metadata { class: String, message: String },
    #[error("{path}: {message}")]
    Load { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Author {
    pub family: String,
    /// Initials, with or without periods: `A`, `A.B`, `J R`.
    pub given: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Int,
    Real,
    String,
    Choice,
    IntList,
    RealList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterMeta {
    pub key: String,
    pub kind: ParamKind,
    pub default: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exclusive_min: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub choices: Vec<String>,
    #[serde(default)]
    pub units: String,
    #[serde(default)]
    pub description: String,
}

impl ParameterMeta {
    fn in_range(&self, x: f64) -> bool {
        let above = match self.min {
            None => true,
            Some(lo) if self.exclusive_min => x > lo,
            Some(lo) => x >= lo,
        };
        above && self.max.is_none_or(|hi| x <= hi)
    }

    /// Checks a value against this parameter's kind, range and choices.
    pub fn check(&self, value: &Value) -> Result<(), String> {
        let number = |v: &Value| v.as_f64().ok_or_else(|| format!("{v} is not a number"));
        let ranged = |x: f64| {
            if self.in_range(x) {
                Ok(())
            } else {
                Err(format!("{x} is outside the allowed range"))
            }
        };
        match self.kind {
            ParamKind::Int => {
                value
                    .as_i64()
                    .ok_or_else(|| format!("{value} is not an integer"))?;
                ranged(number(value)?)
            }
            ParamKind::Real => ranged(number(value)?),
            ParamKind::String => value
                .as_str()
                .map(|_| ())
                .ok_or_else(|| format!("{value} is not a string")),
            ParamKind::Choice => match value.as_str() {
                Some(s) if self.choices.iter().any(|c| c == s) => Ok(()),
                _ => Err(format!("{value} is not one of {}", self.choices.join("|"))),
            },
            ParamKind::IntList | ParamKind::RealList => {
                let items = value
                    .as_array()
                    .ok_or_else(|| format!("{value} is not a list"))?;
                for item in items {
                    if self.kind == ParamKind::IntList && item.as_i64().is_none() {
                        return Err(format!("{item} is not an integer"));
                    }
                    ranged(number(item)?)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortMeta {
    pub name: StandardName,
    pub units: String,
    /// 0 for scalars, otherwise the grid rank.
    pub rank: u8,
    #[serde(default = "default_required")]
    pub required: bool,
}

fn default_required() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentMeta {
    pub class: String,
    /// Display name used in citations; the class name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub version: String,
    #[serde(default)]
    pub summary: String,
    pub authors: Vec<Author>,
    pub year: i32,
    #[serde(default)]
    pub license: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identifier: Option<String>,
    #[serde(default)]
    pub parameters: Vec<ParameterMeta>,
    #[serde(default)]
    pub inputs: Vec<PortMeta>,
    #[serde(default)]
    pub outputs: Vec<PortMeta>,
}

impl ComponentMeta {
    pub fn from_json_str(text: &str) -> Result<Self, RegistryError> {
        let meta: ComponentMeta =
            serde_json::from_str(text).map_err(|e| RegistryError::Metadata {
                class: "?".to_string(),
                message: e.to_string(),
            })?;
        meta.validate()?;
        Ok(meta)
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.class)
    }

    pub fn parameter(&self, key: &str) -> Option<&ParameterMeta> {
        self.parameters.iter().find(|p| p.key == key)
    }

    pub fn input(&self, name: &str) -> Option<&PortMeta> {
        self.inputs.iter().find(|p| p.name.as_str() == name)
    }

    pub fn output(&self, name: &str) -> Option<&PortMeta> {
        self.outputs.iter().find(|p| p.name.as_str() == name)
    }

    /// Parameter defaults must satisfy their own constraints.
    pub fn validate(&self) -> Result<(), RegistryError> {
        for p in &self.parameters {
            p.check(&p.default)
                .map_err(|message| RegistryError::Metadata {
                    class: self.class.clone(),
                    message: format!("default of {}: {message}", p.key),
                })?;
        }
        Ok(())
    }
}

fn initials(given: &str) -> String {
    given
        .split(|c: char| c == '.' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| format!("{s}."))
        .collect::<Vec<_>>()
        .join(" ")
}

/// `Family1, I1., Family2, I2. (Year). Name, Version. Identifier.`
pub fn format_citation(meta: &ComponentMeta) -> Result<String, RegistryError> {
    if meta.authors.is_empty() {
        return Err(RegistryError::Metadata {
            class: meta.class.clone(),
            message: "citation needs at least one author".to_string(),
        });
    }
    let authors = meta
        .authors
        .iter()
        .map(|a| format!("{}, {}", a.family, initials(&a.given)))
        .collect::<Vec<_>>()
        .join(", ");
    let mut citation = format!(
        "{authors} ({}). {}, {}.",
        meta.year,
        meta.display_name(),
        meta.version
    );
    if let Some(id) = meta.identifier.as_deref().filter(|s| !s.is_empty()) {
        citation.push(' ');
        citation.push_str(id);
        if !id.ends_with('.') {
            citation.push('.');
        }
    }
    Ok(citation)
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    components: BTreeMap<String, ComponentMeta>,
}

impl Registry {
    pub fn bundled() -> Self {
        let mut registry = Registry::default();
        for (file, text) in BUNDLED {
            let meta = ComponentMeta::from_json_str(text)
                .unwrap_or_else(|e| panic!("bundled metadata {file} is invalid: {e}"));
            registry.insert(meta);
        }
        registry
    }

    pub fn load_dir(dir: &Path) -> Result<Self, RegistryError> {
        let load_err = |path: &Path, message: String| RegistryError::Load {
            path: path.to_path_buf(),
            message,
        };
        let mut registry = Registry::default();
        let entries = std::fs::read_dir(dir).map_err(|e| load_err(dir, e.to_string()))?;
        for entry in entries {
            let path = entry.map_err(|e| load_err(dir, e.to_string()))?.path();
            if path.extension().is_some_and(|ext| ext == "doc") {
                let text =
                    std::fs::read_to_string(&path).map_err(|e| load_err(&path, e.to_string()))?;
                let meta = ComponentMeta::from_json_str(&text)
                    .map_err(|e| load_err(&path, e.to_string()))?;
                registry.insert(meta);
            }
        }
        Ok(registry)
    }

    pub fn insert(&mut self, meta: ComponentMeta) {
        self.components.insert(meta.class.clone(), meta);
    }

    /// Sorted by class name.
    pub fn list_components(&self) -> Vec<&ComponentMeta> {
        self.components.values().collect()
    }

    pub fn describe(&self, class: &str) -> Result<&ComponentMeta, RegistryError> {
        self.components
            .get(class)
            .ok_or_else(|| RegistryError::NotFound(class.to_string()))
    }

    pub fn contains(&self, class: &str) -> bool {
        self.components.contains_key(class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(
        authors: &[(&str, &str)],
        name: &str,
        version: &str,
        id: Option<&str>,
    ) -> ComponentMeta {
        ComponentMeta {
            class: "x".into(),
            name: Some(name.into()),
            version: version.into(),
            summary: String::new(),
            authors: authors
                .iter()
                .map(|(f, g)| Author {
                    family: f.to_string(),
                    given: g.to_string(),
                })
                .collect(),
            year: 2014,
            license: String::new(),
            identifier: id.map(str::to_string),
            parameters: vec![],
            inputs: vec![],
            outputs: vec![],
        }
    }

    #[test]
    fn template_case() {
        let m = meta(
            &[("Developer", "A"), ("Developer", "B")],
            "Name of the model",
            "Model Version",
            Some("Identifier"),
        );
        assert_eq!(
            format_citation(&m).unwrap(),
            "Developer, A., Developer, B. (2014). Name of the model, Model Version. Identifier."
        );
    }

    #[test]
    fn omits_missing_identifier() {
        let mut m = meta(&[("Family", "X")], "Mymodel", "1.0", None);
        m.year = 2020;
        assert_eq!(
            format_citation(&m).unwrap(),
            "Family, X. (2020). Mymodel, 1.0."
        );
    }

    #[test]
    fn three_authors_and_compound_initials() {
        let m = meta(
            &[("One", "A"), ("Two", "B.C."), ("Three", "D E")],
            "M",
            "2",
            Some("10.1234/abc"),
        );
        assert_eq!(
            format_citation(&m).unwrap(),
            "One, A., Two, B. C., Three, D. E. (2014). M, 2. 10.1234/abc."
        );
    }

    #[test]
    fn empty_authors_is_an_error() {
        let m = meta(&[], "M", "1", None);
        assert!(matches!(
            format_citation(&m),
            Err(RegistryError::Metadata { .. })
        ));
    }

    #[test]
    fn bundled_listing_is_sorted() {
        let r = Registry::bundled();
        let classes: Vec<_> = r
            .list_components()
            .iter()
            .map(|m| m.class.as_str())
            .collect();
        assert_eq!(classes, vec!["forcing", "heat2d", "lv_predator", "lv_prey"]);
        let heat = r.describe("heat2d").unwrap();
        assert_eq!(
            heat.parameter("alpha").unwrap().default,
            serde_json::json!(1.0)
        );
        assert!(matches!(
            r.describe("nope"),
            Err(RegistryError::NotFound(_))
        ));
    }

    #[test]
    fn range_checks() {
        let r = Registry::bundled();
        let alpha = r.describe("heat2d").unwrap().parameter("alpha").unwrap();
        assert!(alpha.check(&serde_json::json!(-1.0)).is_err());
        assert!(alpha.check(&serde_json::json!(0.0)).is_err());
        assert!(alpha.check(&serde_json::json!(0.5)).is_ok());
        let boundary = r.describe("heat2d").unwrap().parameter("boundary").unwrap();
        assert!(boundary.check(&serde_json::json!("insulated")).is_ok());
        assert!(boundary.check(&serde_json::json!("periodic")).is_err());
    }

    #[test]
    fn rejects_default_outside_range() {
        let text = r#"{"class": "c", "version": "1", "authors": [], "year": 2000,
            "parameters": [{"key": "k", "kind": "real", "default": -1, "min": 0}]}"#;
        assert!(ComponentMeta::from_json_str(text).is_err());
        let bad_name = r#"{"class": "c", "version": "1", "authors": [], "year": 2000,
            "outputs": [{"name": "BadName", "units": "1", "rank": 0}]}"#;
        assert!(ComponentMeta::from_json_str(bad_name).is_err());
    }
}
