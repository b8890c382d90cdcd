use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::mediators::UnitConversion;
use crate::standard_names::compatible;

use super::{Catalog, Composition, UnitMode};

/// One reason a composition is not runnable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    UnsatisfiedInput {
        instance: String,
        name: String,
    },
    IncompatibleLink {
        from: String,
        to: String,
    },
    UnknownOutput {
        instance: String,
        name: String,
    },
    UnknownInput {
        instance: String,
        name: String,
    },
    DuplicateInputLink {
        instance: String,
        name: String,
    },
    UnitMismatch {
        from: String,
        to: String,
        from_units: String,
        to_units: String,
    },
    GridRankMismatch {
        from: String,
        to: String,
        from_rank: u8,
        to_rank: u8,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::UnsatisfiedInput { instance, name } => {
                write!(f, "unsatisfied input {name} (instance {instance})")
            }
            Finding::IncompatibleLink { from, to } => {
                write!(f, "incompatible link {from} -> {to}: names differ and no alias is set")
            }
            Finding::UnknownOutput { instance, name } => {
                write!(f, "instance {instance} has no output {name}")
            }
            Finding::UnknownInput { instance, name } => {
                write!(f, "instance {instance} has no input {name}")
            }
            Finding::DuplicateInputLink { instance, name } => {
                write!(f, "input {name} of instance {instance} is fed by more than one link")
            }
            Finding::UnitMismatch {
                from,
                to,
                from_units,
                to_units,
            } => write!(
                f,
                "unit mismatch on link {from} -> {to}: {from_units:?} cannot convert to {to_units:?}"
            ),
            Finding::GridRankMismatch {
                from,
                to,
                from_rank,
                to_rank,
            } => write!(
                f,
                "grid rank mismatch on link {from} -> {to}: rank {from_rank} cannot feed rank {to_rank}"
            ),
        }
    }
}

/// Checks a loaded composition against component metadata. An empty report
/// means the composition is runnable.
pub fn validate_composition(composition: &Composition, catalog: &Catalog) -> Vec<Finding> {
    let mut findings = Vec::new();
    let class_of = |id: &str| {
        composition
            .instance(id)
            .and_then(|i| catalog.meta(&i.component_class))
    };

    let mut fed: BTreeMap<(String, String), usize> = BTreeMap::new();
    for link in &composition.links {
        let from = link.from.to_string();
        let to = link.to.to_string();
        if !link.alias && !compatible(&link.from.name, &link.to.name) {
            findings.push(Finding::IncompatibleLink {
                from: from.clone(),
                to: to.clone(),
            });
        }
        *fed.entry((link.to.instance.clone(), link.to.name.to_string()))
            .or_default() += 1;

        let producer =
            class_of(&link.from.instance).and_then(|m| m.output(link.from.name.as_str()));
        let consumer = class_of(&link.to.instance).and_then(|m| m.input(link.to.name.as_str()));
        if producer.is_none() {
            findings.push(Finding::UnknownOutput {
                instance: link.from.instance.clone(),
                name: link.from.name.to_string(),
            });
        }
        if consumer.is_none() {
            findings.push(Finding::UnknownInput {
                instance: link.to.instance.clone(),
                name: link.to.name.to_string(),
            });
        }
        let (Some(producer), Some(consumer)) = (producer, consumer) else {
            continue;
        };
        if link.unit_mode == UnitMode::Auto
            && UnitConversion::parse_between(&producer.units, &consumer.units).is_err()
        {
            findings.push(Finding::UnitMismatch {
                from: from.clone(),
                to: to.clone(),
                from_units: producer.units.clone(),
                to_units: consumer.units.clone(),
            });
        }
        // scalars broadcast onto any grid
        if producer.rank != consumer.rank && producer.rank != 0 {
            findings.push(Finding::GridRankMismatch {
                from,
                to,
                from_rank: producer.rank,
                to_rank: consumer.rank,
            });
        }
    }

    for ((instance, name), count) in &fed {
        if *count > 1 {
            findings.push(Finding::DuplicateInputLink {
                instance: instance.clone(),
                name: name.clone(),
            });
        }
    }

    for inst in &composition.instances {
        let Some(meta) = catalog.meta(&inst.component_class) else {
            continue;
        };
        for input in meta.inputs.iter().filter(|p| p.required) {
            let key = (inst.instance_id.clone(), input.name.to_string());
            if !fed.contains_key(&key) {
                findings.push(Finding::UnsatisfiedInput {
                    instance: inst.instance_id.clone(),
                    name: input.name.to_string(),
                });
            }
        }
    }

    for out in &composition.outputs {
        let known =
            class_of(&out.instance_id).is_some_and(|m| m.output(out.variable.as_str()).is_some());
        if !known {
            findings.push(Finding::UnknownOutput {
                instance: out.instance_id.clone(),
                name: out.variable.to_string(),
            });
        }
    }
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupler::load_composition;

    fn lv(links: &str) -> Composition {
        let doc = format!(
            r#"{{"title": "lv", "clock": {{"start": 0, "stop": 1, "step": 0.01, "units": "d"}},
            "components": [{{"id": "prey", "class": "lv_prey"}}, {{"id": "predator", "class": "lv_predator"}}],
            "links": [{links}]}}"#
        );
        load_composition(&doc, &Catalog::builtin()).unwrap()
    }

    const PREY_TO_PREDATOR: &str = r#"{"from": "prey.ecosystem_prey__population_density",
        "to": "predator.ecosystem_prey__population_density"}"#;
    const PREDATOR_TO_PREY: &str = r#"{"from": "predator.ecosystem_predator__population_density",
        "to": "prey.ecosystem_predator__population_density"}"#;

    #[test]
    fn fully_linked_pair_is_clean() {
        let c = lv(&format!("{PREY_TO_PREDATOR}, {PREDATOR_TO_PREY}"));
        assert!(validate_composition(&c, &Catalog::builtin()).is_empty());
    }

    #[test]
    fn missing_link_is_reported() {
        let c = lv(PREY_TO_PREDATOR);
        let findings = validate_composition(&c, &Catalog::builtin());
        assert_eq!(findings.len(), 1);
        assert!(findings[0]
            .to_string()
            .contains("unsatisfied input ecosystem_predator__population_density"));
    }

    #[test]
    fn name_mismatch_needs_alias() {
        let link = r#"{"from": "prey.ecosystem_prey__population_density",
            "to": "prey.ecosystem_predator__population_density"}"#;
        let c = lv(&format!("{PREY_TO_PREDATOR}, {link}"));
        let findings = validate_composition(&c, &Catalog::builtin());
        assert!(findings
            .iter()
            .any(|f| matches!(f, Finding::IncompatibleLink { .. })));
        let aliased = link.replace('}', r#", "alias": true}"#);
        let c = lv(&format!("{PREY_TO_PREDATOR}, {aliased}"));
        assert!(validate_composition(&c, &Catalog::builtin()).is_empty());
    }

    #[test]
    fn units_and_ranks() {
        let doc = r#"{"title": "t", "clock": {"start": 0, "stop": 1, "units": "s"},
            "components": [{"id": "h", "class": "heat2d"}, {"id": "p", "class": "lv_prey"},
                           {"id": "q", "class": "lv_predator"}],
            "links": [{"from": "h.plate_surface__temperature",
                       "to": "p.ecosystem_predator__population_density", "alias": true},
                      {"from": "p.ecosystem_prey__population_density",
                       "to": "q.ecosystem_prey__population_density"}]}"#;
        let c = load_composition(doc, &Catalog::builtin()).unwrap();
        let findings = validate_composition(&c, &Catalog::builtin());
        assert!(findings
            .iter()
            .any(|f| matches!(f, Finding::UnitMismatch { .. })));
        assert!(findings
            .iter()
            .any(|f| matches!(f, Finding::GridRankMismatch { .. })));
        let json = serde_json::to_value(&findings[0]).unwrap();
        assert!(json.get("kind").is_some());
    }

    #[test]
    fn unknown_ports_and_double_feeds() {
        let bogus = r#"{"from": "prey.sea_water__temperature",
            "to": "predator.ecosystem_prey__population_density", "alias": true}"#;
        let c = lv(&format!("{PREY_TO_PREDATOR}, {PREDATOR_TO_PREY}, {bogus}"));
        let findings = validate_composition(&c, &Catalog::builtin());
        assert!(findings
            .iter()
            .any(|f| matches!(f, Finding::UnknownOutput { .. })));
        assert!(findings
            .iter()
            .any(|f| matches!(f, Finding::DuplicateInputLink { .. })));
    }
}
