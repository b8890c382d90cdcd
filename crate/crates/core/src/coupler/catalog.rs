use std::collections::BTreeMap;

use crate::components::{BadNameSource, Forcing, Heat2D, LvPredator, LvPrey, NanSource};
use crate::registry::{ComponentMeta, Registry};
use crate::DynComponent;

pub type Constructor = fn() -> DynComponent;

/// Component classes the coupler can instantiate, with their metadata.
#[derive(Clone)]
pub struct Catalog {
    registry: Registry,
    constructors: BTreeMap<String, Constructor>,
}

impl Catalog {
    pub fn new(registry: Registry) -> Self {
        Catalog {
            registry,
            constructors: BTreeMap::new(),
        }
    }

    /// The bundled reference components.
    pub fn builtin() -> Self {
        let mut catalog = Catalog::new(Registry::bundled());
        catalog.register("heat2d", || Box::new(Heat2D::<f64>::new()));
        catalog.register("lv_prey", || Box::new(LvPrey::<f64>::new()));
        catalog.register("lv_predator", || Box::new(LvPredator::<f64>::new()));
        catalog.register("forcing", || Box::new(Forcing::<f64>::new()));
        catalog
    }

    /// Adds the fault-injection doubles. They have no metadata, so they can
    /// be smoke-tested but not used in compositions.
    pub fn with_test_doubles(mut self) -> Self {
        self.register("nan_source", || Box::new(NanSource::<f64>::new()));
        self.register("bad_name_source", || Box::new(BadNameSource::<f64>::new()));
        self
    }

    pub fn register(&mut self, class: &str, constructor: Constructor) {
        self.constructors.insert(class.to_string(), constructor);
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn create(&self, class: &str) -> Option<DynComponent> {
        self.constructors.get(class).map(|make| make())
    }

    pub fn meta(&self, class: &str) -> Option<&ComponentMeta> {
        self.registry.describe(class).ok()
    }

    /// Classes usable in a composition: constructible and described.
    pub fn is_composable(&self, class: &str) -> bool {
        self.constructors.contains_key(class) && self.registry.contains(class)
    }

    pub fn constructible_classes(&self) -> Vec<&str> {
        self.constructors.keys().map(String::as_str).collect()
    }
}

impl std::fmt::Debug for Catalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Catalog")
            .field("classes", &self.constructible_classes())
            .finish()
    }
}
